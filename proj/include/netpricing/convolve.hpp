// Infimal convolution of cost integrals:
//   B(t) = min { sum_j B_j(x_j) : sum_j x_j = t, x_j >= 0 }.
// Two routes: an exact segment-merge when every marginal is nondecreasing
// (the convex case), and a grid dynamic program otherwise. Allocation
// recovery returns the lexicographically smallest optimal split.
#ifndef NETPRICING_CONVOLVE_HPP
#define NETPRICING_CONVOLVE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netpricing/marginal.hpp"

namespace netpricing {

// Resolution of the DP fallback: step = t_max / steps.
struct GridSpec {
  int steps = 2000;
};

namespace detail {

inline double total_capacity(const std::vector<const MarginalFn*>& fs) {
  double cap = 0.0;
  for (const MarginalFn* f : fs) cap += f->domain_hi();
  return cap;
}

// Event sweep over marginal levels. Each rising segment absorbs flow at rate
// length/rise while the level passes through [y_lo, y_hi); each flat segment
// absorbs its full length at its level. The inverse of cumulative absorption
// is the merged marginal.
inline MarginalFn merge_marginals(const std::vector<const MarginalFn*>& fs,
                                  double t_max) {
  struct Ramp {
    double y_lo, y_hi, rate;
  };
  std::vector<Ramp> ramps;
  std::vector<std::pair<double, double>> flats;  // (level, mass)
  std::vector<double> ys;
  for (const MarginalFn* f : fs) {
    for (const Segment& s : f->segments()) {
      if (s.x_lo >= t_max) break;
      double hi = std::min(s.x_hi, t_max);
      double y_hi = s.at(hi);
      if (y_hi == s.y_lo) {
        flats.push_back({s.y_lo, hi - s.x_lo});
        ys.push_back(s.y_lo);
      } else {
        ramps.push_back({s.y_lo, y_hi, (hi - s.x_lo) / (y_hi - s.y_lo)});
        ys.push_back(s.y_lo);
        ys.push_back(y_hi);
      }
    }
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  auto idx = [&](double y) {
    return static_cast<std::size_t>(
        std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
  };
  // per-span sums, not a running delta accumulator: ramp rates can span many
  // orders of magnitude and a running sum drifts
  std::vector<double> span_rate(ys.size(), 0.0), flat_mass(ys.size(), 0.0);
  for (const Ramp& r : ramps) {
    std::size_t a = idx(r.y_lo), b = idx(r.y_hi);
    for (std::size_t i = a; i < b; ++i) span_rate[i] += r.rate;
  }
  for (const auto& [y, m] : flats) flat_mass[idx(y)] += m;

  std::vector<Segment> out;
  double t = 0.0;
  const double t_eps = 1e-9 * (1.0 + t_max);
  auto emit = [&](double t2, double y_lo, double y_hi) {
    if (t2 > t) out.push_back(Segment{t, t2, y_lo, y_hi});
    t = t2;
  };
  for (std::size_t i = 0; i < ys.size() && t < t_max; ++i) {
    double mu = ys[i];
    if (flat_mass[i] > 0.0) {
      double take = std::min(flat_mass[i], t_max - t);
      emit(t + take, mu, mu);
      if (t >= t_max) break;
    }
    if (i + 1 == ys.size()) break;
    double rate = span_rate[i];
    if (rate > 0.0) {
      double span = ys[i + 1] - mu;
      double dx = rate * span;
      if (t + dx >= t_max)
        emit(t_max, mu, mu + (t_max - t) / rate);
      else
        emit(t + dx, mu, ys[i + 1]);
    }
    // rate == 0: the merged marginal jumps to the next level.
  }
  if (t < t_max - t_eps)
    throw std::invalid_argument("inf_convolve: inputs cannot absorb t_max");
  if (out.empty()) throw std::invalid_argument("inf_convolve: empty result");
  out.back().x_hi = t_max;  // absorb fp slack in the final endpoint
  return MarginalFn(std::move(out));
}

}  // namespace detail

// Exact route; every input marginal must be nondecreasing.
inline CostIntegral inf_convolve_merge(const std::vector<CostIntegral>& fs,
                                       double t_max) {
  std::vector<const MarginalFn*> ms;
  ms.reserve(fs.size());
  for (const CostIntegral& f : fs) ms.push_back(&f.marginal());
  return CostIntegral(detail::merge_marginals(ms, t_max));
}

// Grid dynamic program; handles arbitrary (piecewise-linear) inputs. Values
// beyond an input's domain are treated as infeasible.
inline CostIntegral inf_convolve_dp(const std::vector<CostIntegral>& fs,
                                    double t_max, GridSpec grid = {}) {
  const int G = std::max(grid.steps, 1);
  const double h = t_max / G;
  const double inf = std::numeric_limits<double>::infinity();
  auto tabulate = [&](const CostIntegral& f) {
    std::vector<double> v(G + 1, inf);
    for (int k = 0; k <= G; ++k) {
      double x = t_max * static_cast<double>(k) / G;
      if (x <= f.domain_hi() + MarginalFn::kDomainSlack) v[k] = f.value(std::min(x, f.domain_hi()));
    }
    return v;
  };
  std::vector<double> acc = tabulate(fs.front());
  for (std::size_t j = 1; j < fs.size(); ++j) {
    std::vector<double> b = tabulate(fs[j]), next(G + 1, inf);
    for (int t = 0; t <= G; ++t) {
      double best = inf;
      for (int x = 0; x <= t; ++x) {
        double c = acc[x] + b[t - x];
        if (c < best) best = c;
      }
      next[t] = best;
    }
    acc = std::move(next);
  }
  if (!std::isfinite(acc[G]))
    throw std::invalid_argument("inf_convolve: inputs cannot absorb t_max");
  std::vector<Segment> segs;
  segs.reserve(G);
  for (int k = 0; k < G; ++k) {
    double y = (acc[k + 1] - acc[k]) / h;
    segs.push_back(Segment{h * k, h * (k + 1), y, y});
  }
  segs.back().x_hi = t_max;
  return CostIntegral(MarginalFn(std::move(segs)));
}

inline bool all_nondecreasing(const std::vector<CostIntegral>& fs) {
  for (const CostIntegral& f : fs)
    if (!f.marginal().nondecreasing(0.0)) return false;
  return true;
}

inline CostIntegral inf_convolve(const std::vector<CostIntegral>& fs,
                                 double t_max, GridSpec grid = {}) {
  if (fs.empty()) throw std::invalid_argument("inf_convolve: no inputs");
  if (t_max <= 0.0) throw std::invalid_argument("inf_convolve: t_max <= 0");
  if (fs.size() == 1) {
    if (fs[0].domain_hi() < t_max - MarginalFn::kDomainSlack)
      throw std::invalid_argument("inf_convolve: inputs cannot absorb t_max");
    return CostIntegral(
        fs[0].marginal().restricted(std::min(t_max, fs[0].domain_hi())));
  }
  if (all_nondecreasing(fs)) return inf_convolve_merge(fs, t_max);
  return inf_convolve_dp(fs, t_max, grid);
}

namespace detail {

// Nudges a split so it sums to t exactly (flow conservation is checked to
// 1e-9 downstream; grid rounding and fp drift would otherwise leak).
inline void fix_sum(std::vector<double>& out, const std::vector<CostIntegral>& fs,
                    double t) {
  double sum = 0.0;
  for (double x : out) sum += x;
  double residual = t - sum;
  if (residual == 0.0) return;
  for (std::size_t j = fs.size(); j-- > 0;) {
    double adjusted = std::clamp(out[j] + residual, 0.0, fs[j].domain_hi());
    residual -= adjusted - out[j];
    out[j] = adjusted;
    if (std::abs(residual) < 1e-15 * (1.0 + t)) break;
  }
}

// Optimal split in the convex case: everything priced strictly below the
// merged marginal level at t is used in full; slack at exactly that level is
// handed to the latest inputs first, which makes the split lexicographically
// smallest.
inline std::vector<double> split_merge(const std::vector<CostIntegral>& fs,
                                       double t, double t_max) {
  std::vector<double> out(fs.size(), 0.0);
  if (t <= 0.0) return out;
  std::vector<const MarginalFn*> ms;
  for (const CostIntegral& f : fs) ms.push_back(&f.marginal());
  double reach = std::min(t_max, total_capacity(ms));
  if (reach < t - MarginalFn::kDomainSlack)
    throw std::invalid_argument("optimal split: t not absorbable");
  MarginalFn merged = merge_marginals(ms, reach);
  double mu = merged.left_limit(std::min(t, reach));
  std::vector<double> low(fs.size(), 0.0), cap(fs.size(), 0.0);
  for (std::size_t j = 0; j < fs.size(); ++j) {
    for (const Segment& s : ms[j]->segments()) {
      double len = s.length();
      if (s.y_lo == s.y_hi) {
        if (s.y_lo < mu) {
          low[j] += len;
          cap[j] += len;
        } else if (s.y_lo == mu) {
          cap[j] += len;
        }
      } else if (s.y_lo < s.y_hi) {
        double frac = std::clamp((mu - s.y_lo) / (s.y_hi - s.y_lo), 0.0, 1.0);
        low[j] += len * frac;
        cap[j] += len * frac;
      } else {
        throw std::logic_error("split_merge: decreasing input");
      }
    }
  }
  double assigned = 0.0;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    out[j] = low[j];
    assigned += low[j];
  }
  double residual = t - assigned;
  for (std::size_t j = fs.size(); j-- > 0 && residual > 0.0;) {
    double give = std::min(residual, cap[j] - out[j]);
    if (give > 0.0) {
      out[j] += give;
      residual -= give;
    }
  }
  if (residual > 1e-6 * (1.0 + t))
    throw std::logic_error("split_merge: residual not absorbed");
  fix_sum(out, fs, t);
  return out;
}

inline std::vector<double> split_dp(const std::vector<CostIntegral>& fs,
                                    double t, double t_max, GridSpec grid) {
  const int G = std::max(grid.steps, 1);
  const double h = t_max / G;
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t K = fs.size();
  auto tab = [&](const CostIntegral& f) {
    std::vector<double> v(G + 1, inf);
    for (int k = 0; k <= G; ++k) {
      double x = t_max * static_cast<double>(k) / G;
      if (x <= f.domain_hi() + MarginalFn::kDomainSlack) v[k] = f.value(std::min(x, f.domain_hi()));
    }
    return v;
  };
  std::vector<std::vector<double>> vals(K);
  for (std::size_t j = 0; j < K; ++j) vals[j] = tab(fs[j]);
  // suffix[j][t] = min cost of splitting t among inputs j..K-1
  std::vector<std::vector<double>> suffix(K + 1);
  suffix[K].assign(G + 1, inf);
  suffix[K][0] = 0.0;
  for (std::size_t j = K; j-- > 0;) {
    suffix[j].assign(G + 1, inf);
    for (int tt = 0; tt <= G; ++tt) {
      double best = inf;
      for (int x = 0; x <= tt; ++x) {
        double c = vals[j][x] + suffix[j + 1][tt - x];
        if (c < best) best = c;
      }
      suffix[j][tt] = best;
    }
  }
  int tg = static_cast<int>(std::llround(t / h));
  tg = std::clamp(tg, 0, G);
  if (!std::isfinite(suffix[0][tg]))
    throw std::invalid_argument("optimal split: t not absorbable");
  std::vector<double> out(K, 0.0);
  int rem = tg;
  for (std::size_t j = 0; j < K; ++j) {
    double target = suffix[j][rem];
    double tie = 1e-12 * (1.0 + std::abs(target));
    for (int x = 0; x <= rem; ++x) {
      if (vals[j][x] + suffix[j + 1][rem - x] <= target + tie) {
        out[j] = h * x;
        rem -= x;
        break;
      }
    }
  }
  fix_sum(out, fs, t);
  return out;
}

}  // namespace detail

// Lexicographically smallest split of t minimizing the summed cost.
inline std::vector<double> min_cost_split(const std::vector<CostIntegral>& fs,
                                          double t, double t_max,
                                          GridSpec grid = {}) {
  if (fs.empty()) throw std::invalid_argument("min_cost_split: no inputs");
  if (t < 0.0 || t > t_max + MarginalFn::kDomainSlack)
    throw std::invalid_argument("min_cost_split: t outside [0, t_max]");
  if (t <= 0.0) return std::vector<double>(fs.size(), 0.0);
  if (all_nondecreasing(fs)) return detail::split_merge(fs, std::min(t, t_max), t_max);
  return detail::split_dp(fs, std::min(t, t_max), t_max, grid);
}

}  // namespace netpricing

#endif  // NETPRICING_CONVOLVE_HPP
