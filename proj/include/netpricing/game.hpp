// The pricing game: announced B-view pricing curves, local information,
// best responses, equilibrium construction (marginal-cost and monopolistic)
// and grid-based equilibrium verification.
#ifndef NETPRICING_GAME_HPP
#define NETPRICING_GAME_HPP

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netpricing/flow.hpp"

namespace netpricing {

// One announced curve per edge (h,i) with i a relay: the marginal of
// B_i^h = D_hi + P_i^h, defined on [0, announced domain]. Edges into the
// destination carry no entry; the destination implicitly offers the bare
// link cost.
struct PricingProfile {
  std::vector<std::optional<MarginalFn>> entries;  // by edge id

  static PricingProfile empty(const Network& net) {
    PricingProfile p;
    p.entries.resize(net.edge_count());
    return p;
  }
  bool has(int e) const { return entries[e].has_value(); }
  const MarginalFn& at(int e) const {
    if (!entries[e]) throw std::invalid_argument("PricingProfile: missing entry");
    return *entries[e];
  }
};

// The B-view offer a node sees along one of its outgoing edges.
inline CostIntegral offer_on_edge(const Network& net, const LinkCosts& costs,
                                  const PricingProfile& profile, int e) {
  if (net.head(e) == net.destination()) return costs[e];
  return CostIntegral(profile.at(e));
}

// Tie-break overrides: pinned link flows used when a node is indifferent.
struct PinnedFlows {
  std::map<int, double> by_edge;

  bool pinned(int e, double* v) const {
    auto it = by_edge.find(e);
    if (it == by_edge.end()) return false;
    *v = it->second;
    return true;
  }
};

// ---------------------------------------------------------------------------
// signed sums of cost integrals; piecewise quadratic, scanned exactly

namespace detail {

struct SignedSum {
  std::vector<const CostIntegral*> fs;
  std::vector<double> sign;

  void add(const CostIntegral* f, double s) {
    fs.push_back(f);
    sign.push_back(s);
  }

  double value(double t) const {
    double v = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k)
      v += sign[k] * fs[k]->value(std::min(t, fs[k]->domain_hi()));
    return v;
  }

  // derivative just inside the interval that starts at t
  double deriv_right(double t) const {
    double v = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const MarginalFn& m = fs[k]->marginal();
      double d = t >= m.domain_hi() ? m.value(m.domain_hi())
                                    : m.right_limit(std::max(t, 0.0));
      v += sign[k] * d;
    }
    return v;
  }

  std::vector<double> breakpoints(double lo, double hi) const {
    std::vector<double> ts{lo, hi};
    for (std::size_t k = 0; k < fs.size(); ++k) {
      for (double x : fs[k]->marginal().breakpoints())
        if (x > lo && x < hi) ts.push_back(x);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
  }

  // exact minimum over [lo, hi]; smallest argmin on ties
  std::pair<double, double> minimize(double lo, double hi) const {
    std::vector<double> ts = breakpoints(lo, hi);
    double best = value(lo), arg = lo;
    auto consider = [&](double t) {
      double v = value(t);
      if (v < best - 1e-15 * (1.0 + std::abs(best))) {
        best = v;
        arg = t;
      }
    };
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      double t0 = ts[k], t1 = ts[k + 1];
      consider(t1);
      double g0 = deriv_right(t0);
      double g1 = deriv_right(t0 + (t1 - t0) * (1.0 - 1e-12));
      if (g0 < 0.0 && g1 > 0.0) {
        double t = t0 + (t1 - t0) * (g0 / (g0 - g1));
        consider(std::clamp(t, t0, t1));
      }
    }
    return {best, arg};
  }

  std::pair<double, double> maximize(double lo, double hi) const {
    SignedSum neg = *this;
    for (double& s : neg.sign) s = -s;
    auto [v, arg] = neg.minimize(lo, hi);
    return {-v, arg};
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// local information

// Relay i's view of one market: the predecessor's rate, the aggregated
// competitor, the link cost of (h,i) and i's own announced curve.
struct Market {
  NodeId pred = -1;
  int in_edge = -1;
  double r_h = 0.0;
  double induced = 0.0;     // f_hi at the induced routing
  CostIntegral competitor;  // B-hat over [0, r_h]; empty when r_h == 0
  CostIntegral link;        // D_hi
  CostIntegral own;         // announced B_i^h
  bool has_competitor = false;
};

struct LocalInfo {
  NodeId relay = -1;
  std::vector<Market> markets;  // in in_edges order
  CostIntegral outgoing;        // D_i over [0, outgoing_cap]
  double outgoing_cap = 0.0;
  double r_i = 0.0;
};

// Aggregated competitor of relay i in market h: the infimal convolution of
// all sibling offers over [0, r_h]. Throws when i has no competitor there.
inline CostIntegral virtual_competitor(const Network& net, const LinkCosts& costs,
                                       const PricingProfile& profile, NodeId i,
                                       NodeId h, double r_h, GridSpec grid = {}) {
  std::vector<CostIntegral> offers;
  for (int e : net.out_edges(h))
    if (net.head(e) != i) offers.push_back(offer_on_edge(net, costs, profile, e));
  if (offers.empty())
    throw std::invalid_argument("virtual_competitor: no sibling offers market");
  return inf_convolve(offers, r_h, grid);
}

inline LocalInfo make_local_info(const Network& net, const LinkCosts& costs,
                                 const PricingProfile& profile, NodeId i,
                                 const Routing& routing, GridSpec grid = {}) {
  LocalInfo info;
  info.relay = i;
  info.r_i = routing.rate_into(net, i);

  double sum_r_h = 0.0;
  for (int e : net.in_edges(i)) {
    Market m;
    m.pred = net.tail(e);
    m.in_edge = e;
    m.r_h = routing.rate_into(net, m.pred);
    m.induced = routing.flows[e];
    m.link = costs[e];
    m.own = CostIntegral(profile.at(e));
    if (m.r_h > 0.0) {
      m.competitor = virtual_competitor(net, costs, profile, i, m.pred, m.r_h, grid);
      m.has_competitor = true;
    }
    sum_r_h += m.r_h;
    info.markets.push_back(std::move(m));
  }

  std::vector<CostIntegral> offers;
  double cap = 0.0;
  for (int e : net.out_edges(i)) {
    offers.push_back(offer_on_edge(net, costs, profile, e));
    cap += offers.back().domain_hi();
  }
  // span at least the session rate so honest-pricing comparisons have room
  double want = std::max({sum_r_h, routing.session_rate, 1e-12});
  info.outgoing_cap = std::min(cap, want);
  info.outgoing = inf_convolve(offers, info.outgoing_cap, grid);
  return info;
}

// ---------------------------------------------------------------------------
// best response machinery

struct IdealFlows {
  std::vector<double> flows;  // per market, in market order
  double profit = 0.0;
};

namespace detail {

// anticipated profit at a given per-market acquisition vector
inline double anticipated_profit(const LocalInfo& info,
                                 const std::vector<double>& f,
                                 const std::vector<CostIntegral>& reflected) {
  double total = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < info.markets.size(); ++k) {
    if (info.markets[k].r_h <= 0.0) continue;
    total += reflected[k].value(f[k]) - info.markets[k].link.value(f[k]);
    sum += f[k];
  }
  total -= info.outgoing.value(std::min(sum, info.outgoing.domain_hi()));
  return total;
}

}  // namespace detail

// Market shares maximising the anticipated profit over the box
// prod_h [0, r_h]. One active market is scanned exactly; several are handled
// by a refining grid search. Ties prefer smaller total flow, then the
// lexicographically smallest vector.
inline IdealFlows ideal_flows(const LocalInfo& info, GridSpec grid = {}) {
  IdealFlows out;
  out.flows.assign(info.markets.size(), 0.0);

  std::vector<std::size_t> active;
  std::vector<CostIntegral> reflected(info.markets.size());
  for (std::size_t k = 0; k < info.markets.size(); ++k) {
    const Market& m = info.markets[k];
    if (m.r_h <= 0.0) continue;
    reflected[k] = CostIntegral(m.competitor.marginal().reflect(m.r_h));
    active.push_back(k);
  }
  if (active.empty()) return out;

  if (active.size() == 1) {
    std::size_t k = active[0];
    const Market& m = info.markets[k];
    detail::SignedSum gamma;
    gamma.add(&reflected[k], +1.0);
    gamma.add(&m.link, -1.0);
    gamma.add(&info.outgoing, -1.0);
    double hi = std::min(m.r_h, info.outgoing.domain_hi());
    auto [profit, arg] = gamma.maximize(0.0, hi);
    // ties toward smaller flow: accept the earliest point within 1e-12
    std::vector<double> ts = gamma.breakpoints(0.0, hi);
    for (double t : ts) {
      if (gamma.value(t) >= profit - 1e-12 * (1.0 + std::abs(profit))) {
        arg = t;
        profit = std::max(profit, gamma.value(t));
        break;
      }
    }
    out.flows[k] = arg;
    out.profit = profit;
    return out;
  }

  // multi-market refining box scan
  const int P = static_cast<int>(active.size());
  if (P > 3)
    throw std::invalid_argument("ideal_flows: more than 3 active predecessors");
  const int axis = P == 2 ? 256 : 64;
  std::vector<double> lo(P, 0.0), hi(P), best(P, 0.0);
  for (int a = 0; a < P; ++a) hi[a] = info.markets[active[a]].r_h;
  double best_profit = -std::numeric_limits<double>::infinity();
  double best_total = 0.0;
  std::vector<double> f(info.markets.size(), 0.0);

  for (int round = 0; round < 3; ++round) {
    std::vector<double> step(P);
    for (int a = 0; a < P; ++a) step[a] = (hi[a] - lo[a]) / axis;
    std::vector<int> idx(P, 0);
    bool carry = false;
    while (!carry) {
      double total = 0.0;
      for (int a = 0; a < P; ++a) {
        f[active[a]] = lo[a] + step[a] * idx[a];
        total += f[active[a]];
      }
      if (total <= info.outgoing.domain_hi() + MarginalFn::kDomainSlack) {
        double v = detail::anticipated_profit(info, f, reflected);
        double eps = 1e-12 * (1.0 + std::abs(v));
        bool better = v > best_profit + eps;
        bool tie = !better && v > best_profit - eps;
        if (better || (tie && (total < best_total - 1e-15 ||
                               (std::abs(total - best_total) <= 1e-15 &&
                                std::lexicographical_compare(
                                    f.begin(), f.end(), best.begin(), best.end()))))) {
          best_profit = v;
          best_total = total;
          for (int a = 0; a < P; ++a) best[a] = f[active[a]];
        }
      }
      // advance the mixed-radix counter
      carry = true;
      for (int a = P - 1; a >= 0; --a) {
        if (++idx[a] <= axis) {
          carry = false;
          break;
        }
        idx[a] = 0;
      }
    }
    // shrink the box around the incumbent
    for (int a = 0; a < P; ++a) {
      double c = best[a];
      double w = 2.0 * step[a];
      lo[a] = std::max(0.0, c - w);
      hi[a] = std::min(info.markets[active[a]].r_h, c + w);
      if (hi[a] <= lo[a]) hi[a] = std::min(info.markets[active[a]].r_h, lo[a] + 1e-12);
    }
  }
  for (int a = 0; a < P; ++a) out.flows[active[a]] = best[a];
  out.profit = best_profit;
  return out;
}

// Replicating response: in every market with traffic, mirror the virtual
// competitor's curve, B_i^h(t) = B-hat(r_h) - B-hat(r_h - t). As a marginal
// that is exactly the reflection of the competitor's marginal.
inline std::vector<std::optional<MarginalFn>> replicating_response(
    const LocalInfo& info) {
  std::vector<std::optional<MarginalFn>> out(info.markets.size());
  for (std::size_t k = 0; k < info.markets.size(); ++k) {
    const Market& m = info.markets[k];
    if (m.r_h <= 0.0 || !m.has_competitor) continue;
    out[k] = m.competitor.marginal().reflect(m.r_h);
  }
  return out;
}

// The full best-response package: profit-maximising market shares, the
// anticipated profit they yield, and the replicating-response curves that
// realise them.
struct BestResponseResult {
  IdealFlows ideal;
  std::vector<std::optional<MarginalFn>> response;  // per market
};

inline BestResponseResult best_response(const LocalInfo& info, GridSpec grid = {}) {
  return {ideal_flows(info, grid), replicating_response(info)};
}

// Honest pricing toward a zero-traffic predecessor:
// beta(t) = d_hi(t) + d_i(shift + t), with d_i extended linearly past its
// computed domain so the announced curve always spans the link domain.
inline MarginalFn honest_pricing(const MarginalFn& link_marginal,
                                 const MarginalFn& outgoing_marginal,
                                 double shift) {
  double span = link_marginal.domain_hi();
  MarginalFn d_i = outgoing_marginal.extended(shift + span).shifted(shift);
  return link_marginal + d_i;
}

// ---------------------------------------------------------------------------
// induced routing

// Top-down most-cost-efficient allocation (ties: lexicographically smallest,
// unless overridden by pinned flows).
inline Routing induced_routing(const Network& net, const LinkCosts& costs,
                               const PricingProfile& profile, double R_s,
                               GridSpec grid = {},
                               const PinnedFlows* pins = nullptr) {
  Routing routing;
  routing.session_rate = R_s;
  routing.flows.assign(net.edge_count(), 0.0);
  std::vector<double> rate(net.node_count(), 0.0);
  rate[net.source()] = R_s;

  for (NodeId i : net.topological_order()) {
    if (i == net.destination()) continue;
    double r = rate[i];
    const auto& oe = net.out_edges(i);
    if (oe.empty()) {
      if (r > 1e-12 * (1.0 + R_s))
        throw std::runtime_error("induced_routing: flow stuck at a dead end");
      continue;
    }
    // fix pinned edges, allocate the rest optimally
    double pinned_total = 0.0;
    std::vector<int> free_edges;
    for (int e : oe) {
      double v;
      if (pins && pins->pinned(e, &v)) {
        routing.flows[e] = v;
        pinned_total += v;
      } else {
        free_edges.push_back(e);
      }
    }
    double residual = r - pinned_total;
    if (residual < -1e-9 * (1.0 + R_s))
      throw std::invalid_argument("induced_routing: pinned flows exceed node rate");
    residual = std::max(residual, 0.0);
    if (free_edges.empty()) {
      if (residual > 1e-9 * (1.0 + R_s))
        throw std::invalid_argument("induced_routing: pinned flows below node rate");
    } else if (residual > 0.0) {
      std::vector<CostIntegral> offers;
      offers.reserve(free_edges.size());
      for (int e : free_edges) offers.push_back(offer_on_edge(net, costs, profile, e));
      std::vector<double> split = optimal_allocation(residual, offers, grid);
      for (std::size_t k = 0; k < free_edges.size(); ++k)
        routing.flows[free_edges[k]] = split[k];
    }
    for (int e : oe) rate[net.head(e)] += routing.flows[e];
  }
  return routing;
}

// ---------------------------------------------------------------------------
// verification

struct Violation {
  NodeId node = -1;
  NodeId market = -1;           // predecessor id, or -1 for node-level checks
  std::string condition;        // "lower-bound", "equality-at-induced",
                                // "profit-gap", "honest-pricing", "allocation",
                                // "monopoly-market", "domain"
  double magnitude = 0.0;
  double where = 0.0;           // flow value at which the worst case occurs
};

struct RelayVerdict {
  NodeId relay = -1;
  double worst = 0.0;
  double profit_gap = 0.0;
  std::vector<double> ideal;  // per in-edge market, the profit-maximising flows
};

struct VerifyReport {
  bool pass = false;
  double worst_violation = 0.0;
  std::vector<Violation> violations;  // entries with magnitude > tol
  std::vector<RelayVerdict> relays;
  Routing induced;
  double total_cost = 0.0;
  std::string error;  // non-empty when verification could not even run

  const Violation* worst_of(const std::string& condition) const {
    const Violation* found = nullptr;
    for (const auto& v : violations)
      if (v.condition == condition && (!found || v.magnitude > found->magnitude))
        found = &v;
    return found;
  }
};

// Checks the Nash conditions for every relay at the routing induced by the
// profile (with optional pinned tie-breaks): the announced curve never
// undercuts the reflected competitor, it meets it at the induced share, the
// induced shares anticipate the maximum profit, every node's allocation is
// most cost efficient, and zero-traffic markets use honest pricing.
inline VerifyReport verify_equilibrium(const Network& net, const LinkCosts& costs,
                                       const PricingProfile& profile, double R_s,
                                       GridSpec grid = {}, double tol = 1e-5,
                                       const PinnedFlows* pins = nullptr) {
  VerifyReport rep;
  for (int e = 0; e < net.edge_count(); ++e) {
    if (net.head(e) != net.destination() && !profile.has(e)) {
      rep.error = "profile has no entry for edge " + std::to_string(net.tail(e)) +
                  "->" + std::to_string(net.head(e));
      return rep;
    }
  }
  try {
    rep.induced = induced_routing(net, costs, profile, R_s, grid, pins);
  } catch (const std::exception& ex) {
    rep.error = ex.what();
    rep.pass = false;
    return rep;
  }
  rep.total_cost = total_cost(net, costs, rep.induced);

  auto note = [&](NodeId node, NodeId market, const std::string& cond, double mag,
                  double where) {
    rep.worst_violation = std::max(rep.worst_violation, mag);
    if (mag > tol) rep.violations.push_back({node, market, cond, mag, where});
  };

  // Def.-2 allocation optimality at every node that forwards traffic.
  for (NodeId i : net.topological_order()) {
    if (i == net.destination()) continue;
    double r = rep.induced.rate_into(net, i);
    if (r <= 0.0 || net.out_edges(i).empty()) continue;
    std::vector<CostIntegral> offers;
    double chosen = 0.0;
    bool in_domain = true;
    for (int e : net.out_edges(i)) {
      offers.push_back(offer_on_edge(net, costs, profile, e));
      double f_e = rep.induced.flows[e];
      if (f_e > offers.back().domain_hi() + MarginalFn::kDomainSlack) {
        note(i, net.head(e), "domain", f_e - offers.back().domain_hi(), f_e);
        in_domain = false;
      }
      chosen += offers.back().value(std::min(f_e, offers.back().domain_hi()));
    }
    if (!in_domain) continue;
    try {
      std::vector<double> best = min_cost_split(offers, r, std::max(r, 1e-12), grid);
      double best_cost = 0.0;
      for (std::size_t k = 0; k < offers.size(); ++k)
        best_cost += offers[k].value(best[k]);
      note(i, -1, "allocation", chosen - best_cost, r);
    } catch (const std::exception&) {
      note(i, -1, "domain", std::numeric_limits<double>::infinity(), r);
    }
  }

  for (NodeId i = 0; i < net.node_count(); ++i) {
    if (!net.is_relay(i)) continue;
    LocalInfo info;
    try {
      info = make_local_info(net, costs, profile, i, rep.induced, grid);
    } catch (const std::exception& ex) {
      note(i, -1, "monopoly-market", std::numeric_limits<double>::infinity(), 0.0);
      continue;
    }

    RelayVerdict verdict;
    verdict.relay = i;
    auto note_relay = [&](NodeId market, const std::string& cond, double mag,
                          double where) {
      verdict.worst = std::max(verdict.worst, mag);
      note(i, market, cond, mag, where);
    };
    for (std::size_t k = 0; k < info.markets.size(); ++k) {
      const Market& m = info.markets[k];
      if (m.r_h > 0.0) {
        if (m.own.domain_hi() < m.r_h - MarginalFn::kDomainSlack) {
          note_relay(m.pred, "domain", m.r_h - m.own.domain_hi(), m.r_h);
          continue;
        }
        CostIntegral reflected(m.competitor.marginal().reflect(m.r_h));
        // (a) B_i^h(t) >= B-hat(r_h) - B-hat(r_h - t) on [0, r_h]
        detail::SignedSum gap;
        gap.add(&m.own, +1.0);
        gap.add(&reflected, -1.0);
        auto [mn, arg] = gap.minimize(0.0, m.r_h);
        note_relay(m.pred, "lower-bound", -mn, arg);
        // (b) equality at the induced share
        double eq = gap.value(std::min(m.induced, m.r_h));
        note_relay(m.pred, "equality-at-induced", std::abs(eq), m.induced);
      } else {
        // zero-traffic market: honest pricing convention
        MarginalFn honest = honest_pricing(m.link.marginal(),
                                           info.outgoing.marginal(), info.r_i);
        const MarginalFn& own = m.own.marginal();
        double hi = std::min(own.domain_hi(), honest.domain_hi());
        double worst = 0.0, at = 0.0;
        std::vector<double> ts{0.0, hi};
        for (double t : own.breakpoints())
          if (t < hi) ts.push_back(t);
        for (double t : honest.breakpoints())
          if (t < hi) ts.push_back(t);
        std::sort(ts.begin(), ts.end());
        for (double t : ts) {
          double d = std::abs(own.value(t) - honest.value(t));
          if (d > worst) {
            worst = d;
            at = t;
          }
        }
        note_relay(m.pred, "honest-pricing", worst, at);
      }
    }

    // (c) induced shares anticipate the maximum profit
    try {
      IdealFlows ideal = ideal_flows(info, grid);
      std::vector<CostIntegral> reflected(info.markets.size());
      std::vector<double> induced_vec(info.markets.size(), 0.0);
      for (std::size_t k = 0; k < info.markets.size(); ++k) {
        if (info.markets[k].r_h <= 0.0) continue;
        reflected[k] = CostIntegral(
            info.markets[k].competitor.marginal().reflect(info.markets[k].r_h));
        induced_vec[k] = info.markets[k].induced;
      }
      double at_induced = detail::anticipated_profit(info, induced_vec, reflected);
      verdict.profit_gap = ideal.profit - at_induced;
      verdict.ideal = ideal.flows;
      note_relay(-1, "profit-gap", verdict.profit_gap, info.r_i);
    } catch (const std::exception& ex) {
      rep.error = ex.what();  // e.g. the predecessor enumeration cap
      rep.pass = false;
      return rep;
    }
    rep.relays.push_back(std::move(verdict));
  }

  rep.pass = rep.worst_violation <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// equilibrium constructions

struct Equilibrium {
  PricingProfile profile;
  Routing routing;
  PinnedFlows pins;
  std::vector<double> lambda;  // per node, min sub-path marginal at the optimum
  double social_cost = 0.0;
};

// Marginal cost pricing: solve the social optimum, price every traffic-
// carrying market at the constant lambda_h*, and price zero-traffic markets
// honestly (cascading bottom-up through the recursion).
inline Equilibrium construct_marginal_cost_equilibrium(const Network& net,
                                                       const LinkCosts& costs,
                                                       double R_s, GridSpec grid = {},
                                                       SolveOptions solve_opt = {}) {
  SolveResult sol = socially_optimal_routing(net, costs, R_s, solve_opt);
  if (!sol.converged) {
    std::ostringstream msg;
    msg << "marginal cost construction: solver gap " << sol.marginal_gap;
    throw std::runtime_error(msg.str());
  }
  Equilibrium eq;
  eq.routing = sol.routing;
  eq.social_cost = sol.total_cost;
  eq.lambda = path_min_marginals(net, costs, sol.routing);
  eq.profile = PricingProfile::empty(net);

  std::vector<double> rate(net.node_count(), 0.0);
  for (NodeId i = 0; i < net.node_count(); ++i)
    rate[i] = sol.routing.rate_into(net, i);

  std::vector<MarginalFn> outgoing(net.node_count());  // d_i per node
  for (NodeId h : net.reverse_topological_order()) {
    if (h == net.destination()) continue;
    std::vector<CostIntegral> offers;
    double cap = 0.0;
    for (int e : net.out_edges(h)) {
      NodeId k = net.head(e);
      if (k != net.destination()) {
        if (rate[h] > 0.0) {
          eq.profile.entries[e] = MarginalFn::constant(eq.lambda[h], R_s);
        } else {
          eq.profile.entries[e] =
              honest_pricing(costs[e].marginal(), outgoing[k], rate[k]);
        }
        offers.push_back(CostIntegral(*eq.profile.entries[e]));
      } else {
        offers.push_back(costs[e]);
      }
      cap += offers.back().domain_hi();
    }
    outgoing[h] =
        inf_convolve(offers, std::min(cap, 2.0 * std::max(R_s, 1e-12)), grid)
            .marginal();
  }
  for (int e = 0; e < net.edge_count(); ++e)
    if (eq.routing.flows[e] > 0.0) eq.pins.by_edge[e] = eq.routing.flows[e];
  for (int e = 0; e < net.edge_count(); ++e)
    if (!eq.pins.by_edge.count(e)) eq.pins.by_edge[e] = 0.0;
  return eq;
}

namespace detail {

// Lower convex hull of sampled points (t, y); returns hull vertex list.
inline std::vector<std::pair<double, double>> lower_hull(
    std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      auto& a = hull[hull.size() - 2];
      auto& b = hull[hull.size() - 1];
      double cross = (b.first - a.first) * (p.second - a.second) -
                     (p.first - a.first) * (b.second - a.second);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    if (!hull.empty() && hull.back().first == p.first) continue;
    hull.push_back(p);
  }
  return hull;
}

}  // namespace detail

// Dominant-relay construction for a single-layer oligopoly: a common strictly
// decreasing curve whose reflected partial integrals stay below every
// relay's cumulative cost, with equality over the full rate for the relay
// with the cheapest total. The curve is the derivative of the greatest
// convex minorant of min_j int lambda_j, tilted by an area-preserving slope
// so it is strictly monotone.
inline Equilibrium construct_monopolistic_equilibrium(const Network& net,
                                                      const LinkCosts& costs,
                                                      double R_s, GridSpec grid = {}) {
  NodeId s = net.source(), w = net.destination();
  if (net.edge_between(s, w) >= 0)
    throw std::invalid_argument(
        "monopolistic construction: direct source-destination link present");
  std::vector<NodeId> relays;
  for (NodeId i = 0; i < net.node_count(); ++i) {
    if (!net.is_relay(i)) continue;
    auto preds = net.predecessors(i);
    auto offs = net.offsprings(i);
    if (preds != std::vector<NodeId>{s} || offs != std::vector<NodeId>{w})
      throw std::invalid_argument("monopolistic construction: not an oligopoly");
    relays.push_back(i);
  }
  if (relays.size() < 2)
    throw std::invalid_argument("monopolistic construction: need >= 2 relays");

  std::vector<CostIntegral> lambdas;
  for (NodeId i : relays) {
    MarginalFn lam = costs[net.edge_between(s, i)].marginal().restricted(R_s) +
                     costs[net.edge_between(i, w)].marginal().restricted(R_s);
    lambdas.push_back(CostIntegral(std::move(lam)));
  }
  std::size_t m_idx = 0;
  for (std::size_t j = 1; j < lambdas.size(); ++j)
    if (lambdas[j].total() < lambdas[m_idx].total()) m_idx = j;
  NodeId m = relays[m_idx];

  // sample L(t) = min_j Lambda_j(t) on the grid plus every breakpoint
  std::vector<double> ts;
  const int G = std::max(grid.steps, 16);
  for (int k = 0; k <= G; ++k) ts.push_back(R_s * static_cast<double>(k) / G);
  for (const CostIntegral& lam : lambdas)
    for (double x : lam.marginal().breakpoints())
      if (x < R_s) ts.push_back(x);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<std::pair<double, double>> pts;
  for (double t : ts) {
    double v = std::numeric_limits<double>::infinity();
    for (const CostIntegral& lam : lambdas) v = std::min(v, lam.value(t));
    pts.push_back({t, v});
  }
  auto hull = detail::lower_hull(std::move(pts));
  if (hull.size() < 2)
    throw std::runtime_error("monopolistic construction: degenerate hull");

  std::vector<Segment> steps;
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    double slope = (hull[k + 1].second - hull[k].second) /
                   (hull[k + 1].first - hull[k].first);
    steps.push_back(Segment{hull[k].first, hull[k + 1].first, slope, slope});
  }
  MarginalFn increasing(std::move(steps));

  const MarginalFn& lam_m = lambdas[m_idx].marginal();
  double mean_slope =
      (lam_m.value(lam_m.domain_hi()) - lam_m.value(0.0)) / R_s;
  double base = increasing.value(0.0);
  double eps = std::min(1e-3 * std::max(mean_slope, 1e-9), 1.8 * base / R_s);
  if (eps <= 0.0) eps = 1e-12;
  MarginalFn tilted = increasing + MarginalFn::linear(-eps * R_s / 2.0, eps, R_s);

  // defensive re-check of the integral inequalities on the sampled grid
  CostIntegral tilted_int(tilted);
  for (const CostIntegral& lam : lambdas) {
    for (double t : ts) {
      if (tilted_int.value(t) > lam.value(t) + 1e-7 * (1.0 + lam.value(t)))
        throw std::runtime_error(
            "monopolistic construction: inequalities unsatisfiable at this "
            "resolution");
    }
  }
  double area_gap = std::abs(tilted_int.total() - lambdas[m_idx].total());
  if (area_gap > 1e-9 * (1.0 + lambdas[m_idx].total()))
    throw std::runtime_error("monopolistic construction: area mismatch");

  MarginalFn beta = tilted.reflect(R_s);
  Equilibrium eq;
  eq.profile = PricingProfile::empty(net);
  for (NodeId i : relays) eq.profile.entries[net.edge_between(s, i)] = beta;
  eq.routing.session_rate = R_s;
  eq.routing.flows.assign(net.edge_count(), 0.0);
  eq.routing.flows[net.edge_between(s, m)] = R_s;
  eq.routing.flows[net.edge_between(m, w)] = R_s;
  for (int e = 0; e < net.edge_count(); ++e) eq.pins.by_edge[e] = eq.routing.flows[e];
  eq.lambda.assign(net.node_count(), 0.0);
  return eq;
}

}  // namespace netpricing

#endif  // NETPRICING_GAME_HPP
