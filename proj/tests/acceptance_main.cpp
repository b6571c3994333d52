// Acceptance suite: every criterion runs at its stated tolerance and prints
// a single PASS/FAIL line. Exit status is nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "netpricing/analysis.hpp"

using namespace netpricing;

namespace {

std::uint64_t g_seed = 0xC0FFEE;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void require(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// random instance generators

struct Instance {
  Network net;
  LinkCosts costs;
  double R_s = 1.0;
};

Instance random_oligopoly(std::mt19937_64& rng, int N,
                          const std::function<MarginalFn(std::mt19937_64&)>& draw) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 1; i <= N; ++i) {
    edges.push_back({0, i});
    edges.push_back({i, N + 1});
  }
  Instance inst{Network(N + 2, 0, N + 1, edges), {}, 1.0};
  inst.costs.resize(inst.net.edge_count());
  for (int i = 1; i <= N; ++i) {
    inst.costs[inst.net.edge_between(0, i)] = CostIntegral(draw(rng));
    inst.costs[inst.net.edge_between(i, N + 1)] = CostIntegral(draw(rng));
  }
  return inst;
}

MarginalFn draw_linear(std::mt19937_64& rng) {
  double a = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
  double b = std::uniform_real_distribution<double>(0.4, 2.0)(rng);
  return MarginalFn::linear(a, b, 1.0);
}

MarginalFn draw_concave(std::mt19937_64& rng) {
  double a = std::uniform_real_distribution<double>(0.02, 0.5)(rng);
  double amp = std::uniform_real_distribution<double>(0.3, 2.0)(rng);
  double p = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
  return MarginalFn::sample(
      [a, amp, p](double r) { return a + amp * std::pow(r, p); }, 1.0, 48);
}

// Layered DAG: s -> L1 -> ... -> Lk -> w, fully connected between adjacent
// layers; <= 10 nodes, <= 3 predecessors per node by construction.
Instance random_layered(std::mt19937_64& rng) {
  int layers = 1 + static_cast<int>(rng() % 3);
  std::vector<int> sizes;
  int total = 0;
  for (int k = 0; k < layers; ++k) {
    int s = 2 + static_cast<int>(rng() % 2);
    if (total + s > 8) break;
    sizes.push_back(s);
    total += s;
  }
  if (sizes.empty()) sizes.push_back(2);

  std::vector<std::pair<NodeId, NodeId>> edges;
  int next_id = 1;
  std::vector<std::vector<NodeId>> layer_ids;
  for (int s : sizes) {
    std::vector<NodeId> ids;
    for (int k = 0; k < s; ++k) ids.push_back(next_id++);
    layer_ids.push_back(ids);
  }
  NodeId w = next_id;
  for (NodeId i : layer_ids.front()) edges.push_back({0, i});
  for (std::size_t k = 0; k + 1 < layer_ids.size(); ++k)
    for (NodeId a : layer_ids[k])
      for (NodeId b : layer_ids[k + 1]) edges.push_back({a, b});
  for (NodeId i : layer_ids.back()) edges.push_back({i, w});

  Instance inst{Network(w + 1, 0, w, edges), {}, 1.0};
  inst.costs.resize(inst.net.edge_count());
  for (int e = 0; e < inst.net.edge_count(); ++e)
    inst.costs[e] = CostIntegral(draw_linear(rng));
  return inst;
}

// Serialise a failing instance so the trial can be replayed.
void dump_instance(const Instance& inst, const std::string& path) {
  Scenario sc;
  sc.session_rate = inst.R_s;
  sc.source = "n0";
  sc.destination = "n" + std::to_string(inst.net.destination());
  for (NodeId i = 0; i < inst.net.node_count(); ++i)
    sc.nodes.push_back("n" + std::to_string(i));
  for (int e = 0; e < inst.net.edge_count(); ++e) {
    EdgeSpec es;
    es.tail = "n" + std::to_string(inst.net.tail(e));
    es.head = "n" + std::to_string(inst.net.head(e));
    es.kind = "pwl";
    for (const Segment& s : inst.costs[e].marginal().segments()) {
      if (es.params.empty()) {
        es.params.push_back(s.x_lo);
        es.params.push_back(s.y_lo);
      }
      es.params.push_back(s.x_hi);
      es.params.push_back(s.y_hi);
    }
    sc.edges.push_back(std::move(es));
  }
  scenario_save(sc, path);
  std::fprintf(stderr, "    counterexample dumped to %s\n", path.c_str());
}

// curved focal duopoly: a mirrored replicating pair through the optimum
struct FocalPair {
  PricingProfile profile;
  PinnedFlows pins;
  bool ok = false;
};

FocalPair curved_focal_duopoly(const Instance& inst, std::mt19937_64& rng) {
  FocalPair fp;
  SolveResult opt = socially_optimal_routing(inst.net, inst.costs, inst.R_s);
  if (!opt.converged) return fp;
  int e1 = inst.net.edge_between(0, 1), e2 = inst.net.edge_between(0, 2);
  double r1 = opt.routing.flows[e1];
  auto lambda = path_min_marginals(inst.net, inst.costs, opt.routing);
  double lam = lambda[0];
  double b1 =
      inst.costs[e1].marginal().segments().front().slope() +
      inst.costs[inst.net.edge_between(1, 3)].marginal().segments().front().slope();
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double eta = std::min(u * 0.9 * b1, 0.9 * lam / std::max(r1, 1e-9));
  fp.profile = PricingProfile::empty(inst.net);
  fp.profile.entries[e1] = MarginalFn::linear(lam - eta * r1, eta, inst.R_s);
  fp.profile.entries[e2] =
      MarginalFn::linear(lam - eta * r1, eta, inst.R_s).reflect(inst.R_s);
  fp.pins.by_edge[e1] = r1;
  fp.pins.by_edge[e2] = inst.R_s - r1;
  fp.pins.by_edge[inst.net.edge_between(1, 3)] = r1;
  fp.pins.by_edge[inst.net.edge_between(2, 3)] = inst.R_s - r1;
  fp.ok = true;
  return fp;
}

// ---------------------------------------------------------------------------
// criteria

Outcome criterion_1() {
  Outcome out;
  for (int N : {2, 3, 4, 8}) {
    BuiltScenario bs = build_scenario(generate_example(
        "oligopoly-linear", {{"N", double(N)}, {"c", 1}, {"R_s", 1}}));
    Equilibrium mc =
        construct_marginal_cost_equilibrium(bs.net, bs.costs, bs.session_rate);
    VerifyReport mcv = verify_equilibrium(bs.net, bs.costs, mc.profile,
                                          bs.session_rate, bs.grid, bs.tol, &mc.pins);
    out.require(mcv.pass, "N=" + std::to_string(N) + " marginal-cost not verified");
    Equilibrium mono = construct_monopolistic_equilibrium(bs.net, bs.costs,
                                                          bs.session_rate, bs.grid);
    VerifyReport mnv = verify_equilibrium(bs.net, bs.costs, mono.profile,
                                          bs.session_rate, bs.grid, bs.tol, &mono.pins);
    out.require(mnv.pass, "N=" + std::to_string(N) + " monopolistic not verified");
    double rho = price_of_anarchy(bs.net, bs.costs, bs.session_rate,
                                  {mcv.induced, mnv.induced});
    out.require(std::abs(rho - N) <= 1e-3,
                "N=" + std::to_string(N) + " ratio " + fmt(rho));
  }
  return out;
}

Outcome criterion_2() {
  Outcome out;
  std::mt19937_64 rng(g_seed + 2);
  for (int trial = 0; trial < 100; ++trial) {
    int N = 2 + static_cast<int>(rng() % 4);
    Instance inst = random_oligopoly(rng, N, draw_concave);
    PoaBoundReport rep = poa_bound_check(inst.net, inst.costs, inst.R_s);
    if (!rep.all_concave || !rep.equilibrium_verified || rep.ratio > N + 1e-3) {
      dump_instance(inst, "acceptance_c2_trial" + std::to_string(trial) + ".scn");
      out.fail("trial " + std::to_string(trial) + ": concave=" +
               std::to_string(rep.all_concave) + " verified=" +
               std::to_string(rep.equilibrium_verified) + " ratio=" +
               fmt(rep.ratio) + " N=" + std::to_string(N));
      break;
    }
  }
  return out;
}

Outcome criterion_3() {
  Outcome out;
  double M = 100, eps = 0.2, delta = 1, R_s = 1;
  BuiltScenario fig = build_scenario(generate_example(
      "myopic-general", {{"M", M}, {"eps", eps}, {"delta", delta}, {"R_s", R_s}}));
  VerifyReport rep = verify_equilibrium(fig.net, fig.costs, *fig.profile,
                                        fig.session_rate, fig.grid, fig.tol,
                                        &fig.pins);
  out.require(rep.pass, "myopic equilibrium not verified");
  double share = eps / (2 * delta);
  double de = eps * eps / (2 * delta) + 2 * (M + eps - delta * R_s) * (R_s - share) +
              delta * (R_s - share) * (R_s - share);
  out.require(std::abs(rep.total_cost - de) / de <= 1e-4,
              "equilibrium cost " + fmt(rep.total_cost) + " vs closed form " +
                  fmt(de));
  SolveResult opt = socially_optimal_routing(fig.net, fig.costs, fig.session_rate);
  out.require(std::abs(opt.total_cost - 2 * delta * R_s * R_s) <= 1e-6,
              "optimal cost " + fmt(opt.total_cost));

  // sweep over M in [10, 1000]; eps and delta scaled so the generator's
  // M >= 100 max(eps R_s, delta R_s) guard admits the whole range
  double prev = -1.0;
  for (int k = 0; k <= 25; ++k) {
    double m = 10.0 + (1000.0 - 10.0) * k / 25;
    BuiltScenario pt = build_scenario(generate_example(
        "myopic-general", {{"M", m}, {"eps", 0.02}, {"delta", 0.1}, {"R_s", 1.0}}));
    VerifyReport vr = verify_equilibrium(pt.net, pt.costs, *pt.profile,
                                         pt.session_rate, pt.grid, pt.tol, &pt.pins);
    if (!vr.pass) {
      out.fail("sweep point M=" + fmt(m) + " not verified");
      break;
    }
    SolveResult o = socially_optimal_routing(pt.net, pt.costs, pt.session_rate);
    double poa = vr.total_cost / o.total_cost;
    if (poa <= prev) {
      out.fail("poa not increasing at M=" + fmt(m));
      break;
    }
    prev = poa;
  }
  return out;
}

Outcome criterion_4() {
  Outcome out;
  std::mt19937_64 rng(g_seed + 4);
  const double solver_tol = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    Instance inst = random_layered(rng);
    if (!validate(inst.net).ok()) {
      out.fail("trial " + std::to_string(trial) + ": generator broke an assumption");
      break;
    }
    Equilibrium eq =
        construct_marginal_cost_equilibrium(inst.net, inst.costs, inst.R_s);
    VerifyReport rep = verify_equilibrium(inst.net, inst.costs, eq.profile, inst.R_s,
                                          {}, 1e-5, &eq.pins);
    if (!rep.pass) {
      dump_instance(inst, "acceptance_c4_trial" + std::to_string(trial) + ".scn");
      out.fail("trial " + std::to_string(trial) + " not verified (worst " +
               fmt(rep.worst_violation) + ")");
      break;
    }
    SolveOptions other;
    other.init = InitialFlow::EvenSplit;
    SolveResult fresh =
        socially_optimal_routing(inst.net, inst.costs, inst.R_s, other);
    double worst = 0.0;
    for (int e = 0; e < inst.net.edge_count(); ++e)
      worst = std::max(worst,
                       std::abs(rep.induced.flows[e] - fresh.routing.flows[e]));
    if (worst > 10 * solver_tol) {
      dump_instance(inst, "acceptance_c4_trial" + std::to_string(trial) + ".scn");
      out.fail("trial " + std::to_string(trial) + " induced routing off by " +
               fmt(worst));
      break;
    }
  }
  return out;
}

Outcome criterion_5() {
  Outcome out;
  const double eff_tol = 1e-3;

  // property: verified competitive oligopoly equilibria are efficient
  {
    std::mt19937_64 rng(g_seed + 52);
    for (int trial = 0; trial < 200 && out.pass; ++trial) {
      int N = 2 + static_cast<int>(rng() % 3);
      Instance inst = random_oligopoly(rng, N, draw_linear);
      EquilibriumReport rep;
      if (N == 2 && trial % 2 == 0) {
        FocalPair fp = curved_focal_duopoly(inst, rng);
        if (!fp.ok) continue;
        rep = analyze_equilibrium(inst.net, inst.costs, fp.profile, inst.R_s, {},
                                  1e-5, &fp.pins, eff_tol);
      } else {
        Equilibrium eq =
            construct_marginal_cost_equilibrium(inst.net, inst.costs, inst.R_s);
        rep = analyze_equilibrium(inst.net, inst.costs, eq.profile, inst.R_s, {},
                                  1e-5, &eq.pins, eff_tol);
      }
      if (!rep.verify.pass) {
        dump_instance(inst, "acceptance_competitive_eff_trial" + std::to_string(trial) + ".scn");
        out.fail("competitive-efficiency trial " + std::to_string(trial) + " equilibrium not verified");
      } else if (rep.structure.competitive && !rep.efficient) {
        dump_instance(inst, "acceptance_competitive_eff_trial" + std::to_string(trial) + ".scn");
        out.fail("competitive-efficiency counterexample at trial " + std::to_string(trial));
      }
    }
  }

  // property: verified focal oligopoly equilibria are efficient
  if (out.pass) {
    std::mt19937_64 rng(g_seed + 58);
    for (int trial = 0; trial < 200 && out.pass; ++trial) {
      Instance inst =
          random_oligopoly(rng, 2 + static_cast<int>(rng() % 3), draw_linear);
      EquilibriumReport rep;
      if (inst.net.node_count() == 4 && trial % 2 == 0) {
        FocalPair fp = curved_focal_duopoly(inst, rng);
        if (!fp.ok) continue;
        rep = analyze_equilibrium(inst.net, inst.costs, fp.profile, inst.R_s, {},
                                  1e-5, &fp.pins, eff_tol);
      } else {
        // constant replicating responses at lambda*
        Equilibrium eq =
            construct_marginal_cost_equilibrium(inst.net, inst.costs, inst.R_s);
        rep = analyze_equilibrium(inst.net, inst.costs, eq.profile, inst.R_s, {},
                                  1e-5, &eq.pins, eff_tol);
      }
      if (!rep.verify.pass) {
        dump_instance(inst, "acceptance_focal_eff_trial" + std::to_string(trial) + ".scn");
        out.fail("focal-efficiency trial " + std::to_string(trial) + " equilibrium not verified");
      } else if (!rep.efficient) {
        dump_instance(inst, "acceptance_focal_eff_trial" + std::to_string(trial) + ".scn");
        out.fail("focal-efficiency counterexample at trial " + std::to_string(trial));
      }
    }
  }

  // property: verified everywhere-competitive equilibria are efficient
  if (out.pass) {
    std::mt19937_64 rng(g_seed + 510);
    for (int trial = 0; trial < 200 && out.pass; ++trial) {
      Instance inst = random_layered(rng);
      Equilibrium eq =
          construct_marginal_cost_equilibrium(inst.net, inst.costs, inst.R_s);
      EquilibriumReport rep = analyze_equilibrium(
          inst.net, inst.costs, eq.profile, inst.R_s, {}, 1e-5, &eq.pins, eff_tol);
      if (!rep.verify.pass) {
        dump_instance(inst,
                      "acceptance_everywhere_eff_trial" + std::to_string(trial) + ".scn");
        out.fail("everywhere-efficiency trial " + std::to_string(trial) +
                 " equilibrium not verified");
      } else if (rep.structure.everywhere_competitive && !rep.efficient) {
        dump_instance(inst,
                      "acceptance_everywhere_eff_trial" + std::to_string(trial) + ".scn");
        out.fail("everywhere-efficiency counterexample at trial " + std::to_string(trial));
      }
    }
  }
  return out;
}

Outcome criterion_6() {
  Outcome out;
  // exact merge vs grid DP at step 1e-4, <= 3 inputs
  std::mt19937_64 rng(g_seed + 6);
  for (int trial = 0; trial < 4 && out.pass; ++trial) {
    int K = 2 + trial % 2;
    std::vector<CostIntegral> fs;
    for (int j = 0; j < K; ++j) {
      double a = std::uniform_real_distribution<double>(0.05, 0.8)(rng);
      double b = std::uniform_real_distribution<double>(0.3, 2.0)(rng);
      int segs = 1 + static_cast<int>(rng() % 4);
      // random convex piecewise-linear marginal: increasing slopes
      std::vector<Segment> pieces;
      double x = 0.0, y = a, width = 1.4 / segs, slope = b;
      for (int k = 0; k < segs; ++k) {
        double y2 = y + slope * width;
        pieces.push_back(Segment{x, x + width, y, y2});
        x += width;
        y = y2;
        slope *= 1.0 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      }
      pieces.back().x_hi = 1.4;
      fs.push_back(CostIntegral(MarginalFn(std::move(pieces))));
    }
    double t_max = 1.3;
    CostIntegral merged = inf_convolve_merge(fs, t_max);
    CostIntegral dp = inf_convolve_dp(fs, t_max, GridSpec{13000});  // step 1e-4
    for (int k = 0; k <= 50; ++k) {
      double t = t_max * k / 50;
      double diff = std::abs(merged.value(t) - dp.value(t));
      if (diff > 1e-6) {
        out.fail("merge vs DP differ by " + fmt(diff) + " at t=" + fmt(t));
        break;
      }
    }
  }

  // solver vs exhaustive grid search on <= 6 link networks
  std::mt19937_64 rng2(g_seed + 66);
  for (int trial = 0; trial < 4 && out.pass; ++trial) {
    int N = 2 + trial % 2;  // 4 or 6 links
    Instance inst = random_oligopoly(rng2, N, draw_linear);
    inst.R_s = 1.0 + trial % 2;
    for (auto& c : inst.costs) c = CostIntegral(c.marginal().extended(inst.R_s));
    SolveResult res = socially_optimal_routing(inst.net, inst.costs, inst.R_s);
    if (!res.converged) {
      out.fail("solver did not converge on trial " + std::to_string(trial));
      break;
    }
    int steps = static_cast<int>(inst.R_s / 1e-2);
    double max_marg = 0.0;
    for (const auto& c : inst.costs)
      max_marg = std::max(max_marg, c.marginal().max_value());
    double best = std::numeric_limits<double>::infinity();
    std::function<void(int, int, double)> rec = [&](int relay, int left, double acc) {
      if (relay == N) {
        if (left == 0) best = std::min(best, acc);
        return;
      }
      for (int u = 0; u <= left; ++u) {
        double f = inst.R_s * u / steps;
        double c = inst.costs[inst.net.edge_between(0, relay + 1)].value(f) +
                   inst.costs[inst.net.edge_between(relay + 1, N + 1)].value(f);
        rec(relay + 1, left - u, acc + c);
      }
    };
    rec(0, steps, 0.0);
    if (res.total_cost > best + 1e-9 ||
        best - res.total_cost > 2 * max_marg * (inst.R_s / steps)) {
      out.fail("grid search mismatch: solver " + fmt(res.total_cost) + " grid " +
               fmt(best));
    }
  }
  return out;
}

Outcome criterion_7() {
  Outcome out;
  for (double target : {10.0, 50.0}) {
    BuiltScenario bs = build_scenario(
        generate_example("convex-unbounded", {{"N", 2}, {"M", target}}));
    Equilibrium eq = construct_monopolistic_equilibrium(bs.net, bs.costs,
                                                        bs.session_rate, bs.grid);
    VerifyReport rep = verify_equilibrium(bs.net, bs.costs, eq.profile,
                                          bs.session_rate, bs.grid, bs.tol, &eq.pins);
    out.require(rep.pass, "M=" + fmt(target) + " not verified");
    SolveResult opt = socially_optimal_routing(bs.net, bs.costs, bs.session_rate);
    double ratio = rep.total_cost / opt.total_cost;
    out.require(ratio >= target, "M=" + fmt(target) + " measured ratio " + fmt(ratio));
  }
  return out;
}

Outcome criterion_8() {
  Outcome out;
  double R_s = 1.0, c = 1.0;
  int N = 2;
  BuiltScenario bs = build_scenario(generate_example(
      "elastic-oligopoly",
      {{"N", double(N)}, {"c", c}, {"R_s", R_s}, {"u0", 0.8}, {"u1", 0.5}}));
  if (!bs.utility) {
    out.fail("generator produced no utility");
    return out;
  }
  ElasticGame eg = elastic_transform(bs.net, bs.costs, *bs.utility, R_s);
  SolveResult res = socially_optimal_routing(eg.net, eg.costs, R_s);
  out.require(res.converged, "elastic solve did not converge");
  double admitted = R_s - res.routing.flows[eg.overflow_edge];
  // bisection oracle on u(x) = c x / N (the equalised oligopoly marginal)
  double lo = 0.0, hi = R_s;
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (0.8 - 0.5 * mid > c * mid / N)
      lo = mid;
    else
      hi = mid;
  }
  double oracle = 0.5 * (lo + hi);
  out.require(std::abs(admitted - oracle) <= 1e-4,
              "admitted " + fmt(admitted) + " vs oracle " + fmt(oracle));

  // degenerate utilities
  ElasticGame huge =
      elastic_transform(bs.net, bs.costs, MarginalFn::constant(100.0, R_s), R_s);
  SolveResult rh = socially_optimal_routing(huge.net, huge.costs, R_s);
  SolveResult inelastic = socially_optimal_routing(bs.net, bs.costs, R_s);
  out.require(rh.routing.flows[huge.overflow_edge] <= 1e-6,
              "huge utility still overflows");
  for (int e = 0; e < bs.net.edge_count(); ++e)
    out.require(std::abs(rh.routing.flows[e] - inelastic.routing.flows[e]) <= 1e-5,
                "huge-utility flows differ from the inelastic game");
  ElasticGame zero =
      elastic_transform(bs.net, bs.costs, MarginalFn::constant(0.0, R_s), R_s);
  SolveResult rz = socially_optimal_routing(zero.net, zero.costs, R_s);
  // relay residuals obey lambda(x) <= solver gap, so x <= tol / b per path
  out.require(std::abs(rz.routing.flows[zero.overflow_edge] - R_s) <= 1e-5,
              "zero utility should overflow everything");
  out.require(std::abs(rz.total_cost) <= 1e-9, "zero utility has nonzero cost");
  return out;
}

struct Criterion {
  int id;
  const char* label;
  double time_budget;  // seconds; 0 = none stated
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  for (int k = 1; k + 1 < argc; k += 2)
    if (!std::strcmp(argv[k], "--seed"))
      g_seed = std::strtoull(argv[k + 1], nullptr, 10);

  std::vector<Criterion> criteria = {
      {1, "oligopoly poa tightness (N in {2,3,4,8}, ratio = N within 1e-3)", 5.0,
       criterion_1},
      {2, "concave bound (100 random oligopolies, ratio <= N + 1e-3)", 60.0,
       criterion_2},
      {3, "myopic reproduction (closed-form cost, optimal cost, M-sweep)", 10.0,
       criterion_3},
      {4, "marginal-cost equilibrium on 50 random DAGs", 120.0, criterion_4},
      {5, "efficiency theorems, 200 trials each", 0.0, criterion_5},
      {6, "oracle equivalence (merge vs DP; solver vs grid search)", 0.0,
       criterion_6},
      {7, "convex family reaches target ratios 10 and 50", 30.0, criterion_7},
      {8, "elastic transform (admitted rate, degenerate utilities)", 0.0,
       criterion_8},
  };

  bool all_pass = true;
  for (const Criterion& c : criteria) {
    double t0 = now_seconds();
    Outcome out = c.run();
    double dt = now_seconds() - t0;
    if (c.time_budget > 0.0 && dt > c.time_budget)
      out.fail("runtime " + fmt(dt) + "s exceeds " + fmt(c.time_budget) + "s");
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", out.pass ? "PASS" : "FAIL",
                c.id, c.label, dt, out.detail.empty() ? "" : " -- ",
                out.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
