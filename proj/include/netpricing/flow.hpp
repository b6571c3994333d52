// Routings and the two optimisation problems: per-node cost-minimising
// allocation given downstream offers, and the socially optimal routing of
// the whole network (flow deviation / conditional gradient).
#ifndef NETPRICING_FLOW_HPP
#define NETPRICING_FLOW_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netpricing/convolve.hpp"
#include "netpricing/marginal.hpp"
#include "netpricing/network.hpp"

namespace netpricing {

// Per-edge cost integrals D_ij, indexed by edge id.
using LinkCosts = std::vector<CostIntegral>;

struct Routing {
  double session_rate = 0.0;
  std::vector<double> flows;  // by edge id

  double rate_into(const Network& net, NodeId i) const {
    if (i == net.source()) return session_rate;
    double r = 0.0;
    for (int e : net.in_edges(i)) r += flows[e];
    return r;
  }

  double rate_out_of(const Network& net, NodeId i) const {
    double r = 0.0;
    for (int e : net.out_edges(i)) r += flows[e];
    return r;
  }
};

inline double total_cost(const Network& net, const LinkCosts& costs,
                         const Routing& routing) {
  double sum = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) sum += costs[e].value(routing.flows[e]);
  return sum;
}

// Largest conservation violation over all nodes.
inline double conservation_gap(const Network& net, const Routing& routing) {
  double worst = 0.0;
  for (NodeId i = 0; i < net.node_count(); ++i) {
    if (i == net.destination()) continue;
    double out = routing.rate_out_of(net, i);
    double in = routing.rate_into(net, i);
    worst = std::max(worst, std::abs(out - in));
  }
  worst = std::max(worst,
                   std::abs(routing.rate_into(net, net.destination()) -
                            routing.session_rate));
  return worst;
}

// Splits r among the offers, minimising the summed cost. Offers are the
// B-view cost integrals of the node's offsprings, ordered like out_edges.
inline std::vector<double> optimal_allocation(double r,
                                              const std::vector<CostIntegral>& offers,
                                              GridSpec grid = {}) {
  if (offers.empty()) throw std::invalid_argument("optimal_allocation: no offers");
  double cap = 0.0;
  for (const CostIntegral& f : offers) cap += f.domain_hi();
  if (r > cap + MarginalFn::kDomainSlack)
    throw std::invalid_argument("optimal_allocation: rate exceeds offer capacity");
  if (offers.size() == 1) return {r};
  double t_max = std::min(cap, std::max(r, 1e-12));
  return min_cost_split(offers, r, t_max, grid);
}

// Minimum cost of forwarding rate t through the given offers, as a function
// of t on [0, r_max]: D_i and its derivative d_i.
struct NodeCostFn {
  NodeId node = -1;
  CostIntegral total;
  const MarginalFn& marginal() const { return total.marginal(); }
};

inline NodeCostFn node_cost_fn(NodeId i, const std::vector<CostIntegral>& offers,
                               double r_max, GridSpec grid = {}) {
  return NodeCostFn{i, inf_convolve(offers, r_max, grid)};
}

// lambda_i = minimum marginal cost of any sub-path from i to w at the given
// flows; destination gets 0. Computed in reverse topological order.
inline std::vector<double> path_min_marginals(const Network& net,
                                              const LinkCosts& costs,
                                              const Routing& routing) {
  std::vector<double> lambda(net.node_count(),
                             std::numeric_limits<double>::infinity());
  lambda[net.destination()] = 0.0;
  for (NodeId i : net.reverse_topological_order()) {
    if (i == net.destination()) continue;
    for (int e : net.out_edges(i)) {
      double v = costs[e].marginal().value(routing.flows[e]) + lambda[net.head(e)];
      lambda[i] = std::min(lambda[i], v);
    }
  }
  return lambda;
}

enum class InitialFlow { MinMarginalPath, EvenSplit };

struct SolveOptions {
  double tol = 1e-6;          // stop when the marginal-cost gap drops below
  int max_iters = 100000;
  InitialFlow init = InitialFlow::MinMarginalPath;
  double flow_eps = 1e-9;     // positive-flow threshold for the certificate
};

struct SolveResult {
  Routing routing;
  double total_cost = 0.0;
  double marginal_gap = std::numeric_limits<double>::infinity();
  double min_path_marginal = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// All-or-nothing flow on the minimum-marginal path at the given flows.
inline std::vector<double> min_path_target(const Network& net, const LinkCosts& costs,
                                           const std::vector<double>& flows,
                                           double R_s, double* path_marginal) {
  int n = net.node_count();
  std::vector<double> lambda(n, std::numeric_limits<double>::infinity());
  std::vector<int> via(n, -1);
  lambda[net.destination()] = 0.0;
  for (NodeId i : net.reverse_topological_order()) {
    if (i == net.destination()) continue;
    for (int e : net.out_edges(i)) {
      double v = costs[e].marginal().value(flows[e]) + lambda[net.head(e)];
      if (v < lambda[i]) {
        lambda[i] = v;
        via[i] = e;
      }
    }
  }
  std::vector<double> target(net.edge_count(), 0.0);
  NodeId at = net.source();
  while (at != net.destination()) {
    int e = via[at];
    if (e < 0) throw std::runtime_error("no path from source to destination");
    target[e] = R_s;
    at = net.head(e);
  }
  if (path_marginal) *path_marginal = lambda[net.source()];
  return target;
}

// Maximum marginal over paths whose every link carries positive flow;
// -inf when the node sends no flow. Fills `via` with the argmax edges when
// given.
inline double max_used_path_marginal(const Network& net, const LinkCosts& costs,
                                     const std::vector<double>& flows, double eps,
                                     std::vector<int>* via = nullptr) {
  int n = net.node_count();
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> mu(n, ninf);
  if (via) via->assign(n, -1);
  mu[net.destination()] = 0.0;
  for (NodeId i : net.reverse_topological_order()) {
    if (i == net.destination()) continue;
    for (int e : net.out_edges(i)) {
      if (flows[e] <= eps) continue;
      double tailv = mu[net.head(e)];
      if (tailv == ninf) continue;
      double v = costs[e].marginal().value(flows[e]) + tailv;
      if (v > mu[i]) {
        mu[i] = v;
        if (via) (*via)[i] = e;
      }
    }
  }
  return mu[net.source()];
}

inline double golden_section(const std::vector<CostIntegral>& costs,
                             const std::vector<double>& f,
                             const std::vector<double>& d, double cap) {
  auto phi = [&](double a) {
    double sum = 0.0;
    for (std::size_t e = 0; e < f.size(); ++e) {
      if (d[e] == 0.0) continue;
      double x = f[e] + a * d[e];
      x = std::clamp(x, 0.0, costs[e].domain_hi());
      sum += costs[e].value(x);
    }
    return sum;
  };
  const double gr = 0.6180339887498949;
  double lo = 0.0, hi = cap;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = phi(x1), f2 = phi(x2);
  while (hi - lo > 1e-12 * cap) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = phi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = phi(x2);
    }
  }
  double mid = 0.5 * (lo + hi);
  // endpoints can win on piecewise-quadratic restrictions
  if (phi(cap) <= phi(mid)) return cap;
  if (phi(0.0) < phi(mid)) return 0.0;
  return mid;
}

}  // namespace detail

// Flow deviation: each round finds the minimum-marginal s-w path and the
// costliest path currently carrying flow, then moves flow from the latter to
// the former with an exact-integral golden-section step (capped by the
// donor path's bottleneck, so suboptimal paths drain to exactly zero).
// Terminates when every used path's marginal is within tol of the minimum
// path marginal.
inline SolveResult socially_optimal_routing(const Network& net, const LinkCosts& costs,
                                            double R_s, SolveOptions opt = {}) {
  if (R_s < 0.0) throw std::invalid_argument("socially_optimal_routing: R_s < 0");
  SolveResult res;
  res.routing.session_rate = R_s;
  std::vector<double>& f = res.routing.flows;
  f.assign(net.edge_count(), 0.0);
  if (R_s == 0.0) {
    res.converged = true;
    res.marginal_gap = 0.0;
    return res;
  }

  if (opt.init == InitialFlow::MinMarginalPath) {
    f = detail::min_path_target(net, costs, f, R_s, nullptr);
  } else {
    // split evenly at every node, top down
    std::vector<double> rate(net.node_count(), 0.0);
    rate[net.source()] = R_s;
    for (NodeId i : net.topological_order()) {
      if (i == net.destination() || rate[i] == 0.0) continue;
      const auto& oe = net.out_edges(i);
      for (int e : oe) f[e] = rate[i] / oe.size();
      for (int e : oe) rate[net.head(e)] += f[e];
    }
  }

  double eps = opt.flow_eps * (1.0 + R_s);
  std::vector<int> via_max;
  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    double lam_min = 0.0;
    std::vector<double> target = detail::min_path_target(net, costs, f, R_s, &lam_min);
    double mu = detail::max_used_path_marginal(net, costs, f, eps, &via_max);
    res.min_path_marginal = lam_min;
    res.marginal_gap = mu - lam_min;
    if (res.marginal_gap <= opt.tol) {
      res.converged = true;
      break;
    }
    // deviation direction: unit flow from the worst used path to the best path
    std::vector<double> dir(f.size(), 0.0);
    for (int e = 0; e < net.edge_count(); ++e)
      if (target[e] > 0.0) dir[e] += 1.0;
    bool traced = true;
    for (NodeId at = net.source(); at != net.destination();) {
      int e = via_max[at];
      if (e < 0) {
        traced = false;
        break;
      }
      dir[e] -= 1.0;
      at = net.head(e);
    }
    double cap = R_s;
    if (traced) {
      for (int e = 0; e < net.edge_count(); ++e)
        if (dir[e] < 0.0) cap = std::min(cap, f[e]);
    } else {
      // conditional-gradient step toward the all-on-best-path flow
      for (int e = 0; e < net.edge_count(); ++e) dir[e] = target[e] - f[e];
      cap = 1.0;
    }
    double alpha = cap > 0.0 ? detail::golden_section(costs, f, dir, cap) : 0.0;
    if (alpha <= 0.0 && traced) {
      // path swap stalled; try the plain conditional-gradient deviation
      for (int e = 0; e < net.edge_count(); ++e) dir[e] = target[e] - f[e];
      alpha = detail::golden_section(costs, f, dir, 1.0);
    }
    if (alpha <= 0.0) break;  // no further progress along the deviation
    for (std::size_t e = 0; e < f.size(); ++e)
      f[e] = std::max(0.0, f[e] + alpha * dir[e]);
  }
  res.total_cost = total_cost(net, costs, res.routing);
  return res;
}

}  // namespace netpricing

#endif  // NETPRICING_FLOW_HPP
