// Efficiency classification, price of anarchy, theorem-level bound checks,
// the elastic-source transform and generators for the named example
// families.
#ifndef NETPRICING_ANALYSIS_HPP
#define NETPRICING_ANALYSIS_HPP

#include <map>
#include <string>
#include <vector>

#include "netpricing/game.hpp"
#include "netpricing/scenario.hpp"

namespace netpricing {

enum class StructureClass { Monopolistic, EverywhereCompetitive, Competitive, Other };

inline const char* to_string(StructureClass c) {
  switch (c) {
    case StructureClass::Monopolistic: return "monopolistic";
    case StructureClass::EverywhereCompetitive: return "everywhere-competitive";
    case StructureClass::Competitive: return "competitive";
    default: return "other";
  }
}

struct ClassifyResult {
  bool monopolistic = false;
  bool competitive = false;
  bool everywhere_competitive = false;
  StructureClass primary = StructureClass::Other;
};

// Routing structure classes: one relay carrying the whole session from s is
// monopolistic; two or more relays with positive source flow is competitive;
// everywhere-competitive additionally requires every traffic-carrying node
// to split over at least two offsprings unless it forwards to the
// destination directly.
inline ClassifyResult classify(const Network& net, const Routing& routing,
                               double flow_eps = 1e-9) {
  ClassifyResult out;
  double eps = flow_eps * (1.0 + routing.session_rate);
  int positive_relays = 0;
  bool one_relay_all = false;
  for (int e : net.out_edges(net.source())) {
    if (net.head(e) == net.destination()) continue;
    if (routing.flows[e] > eps) {
      ++positive_relays;
      if (routing.flows[e] >= routing.session_rate - eps) one_relay_all = true;
    }
  }
  out.monopolistic = one_relay_all && positive_relays == 1;
  out.competitive = positive_relays >= 2;

  out.everywhere_competitive = true;
  for (NodeId h = 0; h < net.node_count(); ++h) {
    if (h == net.destination()) continue;
    double r_h = routing.rate_into(net, h);
    if (r_h <= eps) continue;
    int positive = 0;
    bool to_w = false;
    for (int e : net.out_edges(h)) {
      if (routing.flows[e] > eps) {
        ++positive;
        if (net.head(e) == net.destination()) to_w = true;
      }
    }
    if (!(positive >= 2 || to_w)) {
      out.everywhere_competitive = false;
      break;
    }
  }

  if (out.monopolistic)
    out.primary = StructureClass::Monopolistic;
  else if (out.competitive && out.everywhere_competitive)
    out.primary = StructureClass::EverywhereCompetitive;
  else if (out.competitive)
    out.primary = StructureClass::Competitive;
  else
    out.primary = StructureClass::Other;
  return out;
}

// Full verdict for one pricing profile: verification, structure class,
// efficiency (induced routing within eff_tol per link of the social
// optimum) and the cost ratio it contributes.
struct EquilibriumReport {
  VerifyReport verify;
  ClassifyResult structure;
  bool efficient = false;
  double max_flow_gap = 0.0;  // worst per-link distance to the optimum
  double total_cost = 0.0;
  double optimal_cost = 0.0;
  double poa_contribution = 0.0;
};

inline EquilibriumReport analyze_equilibrium(const Network& net, const LinkCosts& costs,
                                             const PricingProfile& profile, double R_s,
                                             GridSpec grid = {}, double tol = 1e-5,
                                             const PinnedFlows* pins = nullptr,
                                             double eff_tol = 1e-4) {
  EquilibriumReport rep;
  rep.verify = verify_equilibrium(net, costs, profile, R_s, grid, tol, pins);
  if (!rep.verify.error.empty()) return rep;
  rep.structure = classify(net, rep.verify.induced);
  SolveResult opt = socially_optimal_routing(net, costs, R_s);
  rep.total_cost = rep.verify.total_cost;
  rep.optimal_cost = opt.total_cost;
  rep.max_flow_gap = 0.0;
  for (int e = 0; e < net.edge_count(); ++e)
    rep.max_flow_gap = std::max(
        rep.max_flow_gap, std::abs(rep.verify.induced.flows[e] - opt.routing.flows[e]));
  rep.efficient = rep.max_flow_gap <= eff_tol;
  rep.poa_contribution = rep.total_cost / rep.optimal_cost;
  return rep;
}

// Lower bound on the price of anarchy from an explicit list of equilibrium
// routings: the worst listed equilibrium cost over the optimal cost. The
// true ratio quantifies over all equilibria and is not computable here.
inline double price_of_anarchy(const Network& net, const LinkCosts& costs, double R_s,
                               const std::vector<Routing>& equilibria) {
  if (equilibria.empty())
    throw std::invalid_argument("price_of_anarchy: empty equilibrium list");
  double worst = 0.0;
  for (const Routing& r : equilibria) worst = std::max(worst, total_cost(net, costs, r));
  SolveResult opt = socially_optimal_routing(net, costs, R_s);
  return worst / opt.total_cost;
}

// slope-monotonicity with slack; sampled curves are exactly piecewise linear
inline bool is_concave(const MarginalFn& f, double slack = 1e-9) {
  const auto& segs = f.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (k > 0) {
      if (segs[k].slope() > segs[k - 1].slope() + slack) return false;
      if (segs[k].y_lo > segs[k - 1].y_hi + slack) return false;
    }
  }
  return true;
}

inline bool is_convex(const MarginalFn& f, double slack = 1e-9) {
  const auto& segs = f.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (k > 0) {
      if (segs[k].slope() < segs[k - 1].slope() - slack) return false;
      if (segs[k].y_lo < segs[k - 1].y_hi - slack) return false;
    }
  }
  return true;
}

struct PoaBoundReport {
  int relays = 0;
  bool all_concave = false;
  bool all_convex = false;
  double ratio = 0.0;       // measured D^ME / D*
  double bound = 0.0;       // N when concave marginals
  bool bound_asserted = false;
  bool bound_holds = false;
  bool equilibrium_verified = false;
};

// For concave cost derivatives the monopolistic ratio is bounded by the
// relay count; for convex ones no bound is asserted, only the realised
// ratio is reported.
inline PoaBoundReport poa_bound_check(const Network& net, const LinkCosts& costs,
                                      double R_s, GridSpec grid = {},
                                      double tol = 1e-5) {
  PoaBoundReport rep;
  std::vector<MarginalFn> lambdas;
  for (NodeId i = 0; i < net.node_count(); ++i) {
    if (!net.is_relay(i)) continue;
    ++rep.relays;
    lambdas.push_back(
        costs[net.edge_between(net.source(), i)].marginal().restricted(R_s) +
        costs[net.edge_between(i, net.destination())].marginal().restricted(R_s));
  }
  rep.all_concave = true;
  rep.all_convex = true;
  for (const MarginalFn& lam : lambdas) {
    rep.all_concave = rep.all_concave && is_concave(lam);
    rep.all_convex = rep.all_convex && is_convex(lam);
  }
  Equilibrium eq = construct_monopolistic_equilibrium(net, costs, R_s, grid);
  VerifyReport vr =
      verify_equilibrium(net, costs, eq.profile, R_s, grid, tol, &eq.pins);
  rep.equilibrium_verified = vr.pass;
  SolveResult opt = socially_optimal_routing(net, costs, R_s);
  rep.ratio = vr.total_cost / opt.total_cost;
  if (rep.all_concave) {
    rep.bound = rep.relays;
    rep.bound_asserted = true;
    rep.bound_holds = rep.ratio <= rep.bound + tol;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// elastic source

struct ElasticGame {
  Network net;
  LinkCosts costs;
  int overflow_edge = -1;
};

// Converts an elastic-demand game into an inelastic one by adding a virtual
// overflow link (s,w) whose cost is the forgone utility:
// d_sw(f) = u_s(R_s - f).
inline ElasticGame elastic_transform(const Network& net, const LinkCosts& costs,
                                     const MarginalFn& u_s, double R_s) {
  if (!u_s.nonincreasing(1e-12))
    throw std::invalid_argument("elastic_transform: marginal utility must be nonincreasing");
  if (u_s.min_value() < 0.0)
    throw std::invalid_argument("elastic_transform: marginal utility must be nonnegative");
  if (u_s.domain_hi() < R_s - MarginalFn::kDomainSlack)
    throw std::invalid_argument("elastic_transform: utility domain below session rate");
  if (net.edge_between(net.source(), net.destination()) >= 0)
    throw std::invalid_argument("elastic_transform: overflow link already present");

  ElasticGame out;
  std::vector<std::pair<NodeId, NodeId>> edges = net.edges();
  edges.push_back({net.source(), net.destination()});
  out.net = Network(net.node_count(), net.source(), net.destination(), edges);
  out.costs = costs;
  out.costs.push_back(CostIntegral(u_s.reflect(R_s)));
  out.overflow_edge = static_cast<int>(edges.size()) - 1;
  return out;
}

// ---------------------------------------------------------------------------
// named example generators

using Params = std::map<std::string, double>;

namespace detail {

inline double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void check_known(const Params& p, std::initializer_list<const char*> known,
                        const std::string& family) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok)
      throw std::invalid_argument("generate_example(" + family + "): unknown param " + k);
  }
}

inline Scenario oligopoly_scenario(int N, double R_s,
                                   const std::vector<std::pair<double, double>>& ab) {
  Scenario sc;
  sc.session_rate = R_s;
  sc.source = "s";
  sc.destination = "w";
  sc.nodes.push_back("s");
  for (int i = 1; i <= N; ++i) sc.nodes.push_back("r" + std::to_string(i));
  sc.nodes.push_back("w");
  for (int i = 1; i <= N; ++i) {
    std::string r = "r" + std::to_string(i);
    auto [a, b] = ab[i - 1];
    sc.edges.push_back({"s", r, "linear", {a / 2, b / 2}});
    sc.edges.push_back({r, "w", "linear", {a / 2, b / 2}});
  }
  return sc;
}

}  // namespace detail

// Families: oligopoly-linear, duopoly-inefficient, myopic-general,
// convex-unbounded, elastic-oligopoly.
inline Scenario generate_example(const std::string& family, const Params& params) {
  using detail::param;
  if (family == "oligopoly-linear") {
    detail::check_known(params, {"N", "c", "R_s"}, family);
    int N = static_cast<int>(param(params, "N", 3));
    double c = param(params, "c", 1.0), R_s = param(params, "R_s", 1.0);
    if (N < 2 || !(c > 0.0) || !(R_s > 0.0))
      throw std::invalid_argument("oligopoly-linear: need N >= 2, c > 0, R_s > 0");
    return detail::oligopoly_scenario(
        N, R_s, std::vector<std::pair<double, double>>(N, {0.0, c}));
  }

  if (family == "duopoly-inefficient") {
    // lambda_1 = a1 + b r, lambda_2 = a2 + b r with a1 < a2 < a1 + b R_s:
    // the optimum is interior but both relays announce the same strictly
    // decreasing curve with area = int lambda_2, reflected above lambda_1.
    detail::check_known(params, {"a1", "a2", "b", "R_s"}, family);
    double a1 = param(params, "a1", 1.0), a2 = param(params, "a2", 1.5);
    double b = param(params, "b", 2.0), R_s = param(params, "R_s", 1.0);
    if (!(a1 > 0.0) || !(a2 > a1) || !(b > 0.0) || !(a2 - a1 < b * R_s))
      throw std::invalid_argument(
          "duopoly-inefficient: need 0 < a1 < a2 < a1 + b R_s");
    Scenario sc = detail::oligopoly_scenario(2, R_s, {{a1, b}, {a2, b}});
    // increasing mirror: lambda_1 + g, g(r) = G/R_s (0.2 + 1.6 r/R_s)
    double G = (a2 - a1) * R_s;
    double c0 = a1 + 0.2 * G / R_s;
    double c1 = b + 1.6 * G / (R_s * R_s);
    // beta(r) = mirror(R_s - r): strictly decreasing
    double beta0 = c0 + c1 * R_s;
    for (const char* relay : {"r1", "r2"})
      sc.profile.push_back({relay, "s", "linear", {beta0, -c1}});
    sc.pins.push_back({"s", "r1", R_s});
    sc.pins.push_back({"s", "r2", 0.0});
    sc.pins.push_back({"r1", "w", R_s});
    sc.pins.push_back({"r2", "w", 0.0});
    return sc;
  }

  if (family == "myopic-general") {
    detail::check_known(params, {"M", "eps", "delta", "R_s"}, family);
    double M = param(params, "M", 100.0), eps = param(params, "eps", 0.2);
    double delta = param(params, "delta", 1.0), R_s = param(params, "R_s", 1.0);
    if (!(eps > 0.0) || !(delta > 0.0) || !(R_s > 0.0))
      throw std::invalid_argument("myopic-general: eps, delta, R_s must be positive");
    if (M < 100.0 * std::max(eps * R_s, delta * R_s))
      throw std::invalid_argument(
          "myopic-general: requires M >= 100 max(eps R_s, delta R_s)");
    if (eps / (2 * delta) > R_s)
      throw std::invalid_argument("myopic-general: eps/(2 delta) exceeds R_s");
    Scenario sc;
    sc.session_rate = R_s;
    sc.source = "s";
    sc.destination = "w";
    sc.nodes = {"s", "h", "g", "i", "j", "w"};
    sc.edges.push_back({"s", "h", "linear", {0.0, 2 * delta}});
    sc.edges.push_back({"s", "g", "linear", {0.0, delta}});
    sc.edges.push_back({"h", "i", "linear", {0.0, delta}});
    sc.edges.push_back({"h", "j", "linear", {M, delta}});
    sc.edges.push_back({"i", "w", "linear", {0.0, delta}});
    sc.edges.push_back({"j", "w", "linear", {M, delta}});
    sc.edges.push_back({"g", "w", "affine", {2 * M + 2 * eps, delta, 2 * R_s}});
    sc.profile.push_back({"h", "s", "const", {2 * M + eps}});
    sc.profile.push_back({"g", "s", "const", {2 * M + eps}});
    sc.profile.push_back({"i", "h", "const", {2 * M}});
    sc.profile.push_back({"j", "h", "const", {2 * M}});
    double share = eps / (2 * delta);
    sc.pins.push_back({"s", "h", share});
    sc.pins.push_back({"s", "g", R_s - share});
    sc.pins.push_back({"h", "i", share});
    sc.pins.push_back({"h", "j", 0.0});
    sc.pins.push_back({"i", "w", share});
    sc.pins.push_back({"j", "w", 0.0});
    sc.pins.push_back({"g", "w", R_s - share});
    return sc;
  }

  if (family == "convex-unbounded") {
    // symmetric lambda(r) = (r/R_s)^k: the monopolistic ratio is N^k; k is
    // raised until the measured ratio of the sampled curves clears M.
    detail::check_known(params, {"N", "M", "R_s", "pieces"}, family);
    int N = static_cast<int>(param(params, "N", 2));
    double M = param(params, "M", 10.0), R_s = param(params, "R_s", 1.0);
    int pieces = static_cast<int>(param(params, "pieces", 64));
    if (N < 2 || !(M >= 1.0) || !(R_s > 0.0))
      throw std::invalid_argument("convex-unbounded: need N >= 2, M >= 1, R_s > 0");
    for (int k = 1; k <= 64; ++k) {
      auto lam = [&](double r) { return std::pow(r / R_s, k); };
      MarginalFn half = MarginalFn::sample([&](double r) { return lam(r) / 2; },
                                           R_s, pieces);
      CostIntegral Lam(half + half);
      double d_star = N * Lam.value(R_s / N);
      if (Lam.value(R_s) >= M * d_star) {
        Scenario sc;
        sc.session_rate = R_s;
        sc.source = "s";
        sc.destination = "w";
        sc.nodes.push_back("s");
        for (int i = 1; i <= N; ++i) sc.nodes.push_back("r" + std::to_string(i));
        sc.nodes.push_back("w");
        std::vector<double> pwl;
        for (const Segment& seg : half.segments()) {
          if (pwl.empty()) {
            pwl.push_back(seg.x_lo);
            pwl.push_back(seg.y_lo);
          }
          pwl.push_back(seg.x_hi);
          pwl.push_back(seg.y_hi);
        }
        for (int i = 1; i <= N; ++i) {
          std::string r = "r" + std::to_string(i);
          sc.edges.push_back({"s", r, "pwl", pwl});
          sc.edges.push_back({r, "w", "pwl", pwl});
        }
        return sc;
      }
    }
    throw std::invalid_argument("convex-unbounded: target ratio out of reach");
  }

  if (family == "elastic-oligopoly") {
    detail::check_known(params, {"N", "c", "R_s", "u0", "u1"}, family);
    int N = static_cast<int>(param(params, "N", 2));
    double c = param(params, "c", 1.0), R_s = param(params, "R_s", 1.0);
    double u0 = param(params, "u0", 1.0), u1 = param(params, "u1", 0.5);
    if (N < 2 || !(c > 0.0) || !(R_s > 0.0) || u0 < 0.0 || u1 < 0.0 ||
        u0 - u1 * R_s < 0.0)
      throw std::invalid_argument(
          "elastic-oligopoly: need N >= 2 and u nonnegative on [0, R_s]");
    Scenario sc = detail::oligopoly_scenario(
        N, R_s, std::vector<std::pair<double, double>>(N, {0.0, c}));
    sc.utility = UtilitySpec{"linear", {u0, -u1}};
    return sc;
  }

  throw std::invalid_argument("generate_example: unknown family '" + family + "'");
}

}  // namespace netpricing

#endif  // NETPRICING_ANALYSIS_HPP
