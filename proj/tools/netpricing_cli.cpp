// Command-line front end: socially optimal routings, equilibrium
// construction/verification, price-of-anarchy reports, example generators
// and parameter sweeps over the named families.
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "netpricing/analysis.hpp"

using namespace netpricing;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInputError = 2;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct GlobalOpts {
  int grid = -1;        // override scenario grid when >= 0
  double tol = -1.0;    // override scenario tol when >= 0
  std::uint64_t seed = 0;
  bool json = false;
};

struct LoadedGame {
  BuiltScenario bs;
  Network net;      // post elastic transform, when a utility is present
  LinkCosts costs;
  int overflow_edge = -1;

  std::string edge_name(int e) const {
    return bs.name_of(net.tail(e)) + "->" + bs.name_of(net.head(e)) +
           (e == overflow_edge ? " (overflow)" : "");
  }
};

LoadedGame load_game(const std::string& path, const GlobalOpts& g) {
  LoadedGame lg;
  lg.bs = build_scenario(scenario_load(path));
  if (g.grid >= 0) lg.bs.grid.steps = g.grid;
  if (g.tol >= 0) lg.bs.tol = g.tol;
  if (lg.bs.utility) {
    ElasticGame eg = elastic_transform(lg.bs.net, lg.bs.costs, *lg.bs.utility,
                                       lg.bs.session_rate);
    lg.net = eg.net;
    lg.costs = eg.costs;
    lg.overflow_edge = eg.overflow_edge;
    if (lg.bs.profile) lg.bs.profile->entries.resize(lg.net.edge_count());
  } else {
    lg.net = lg.bs.net;
    lg.costs = lg.bs.costs;
  }
  return lg;
}

// profile files reuse the scenario grammar, restricted to profile:/pin: lines
std::pair<std::vector<ProfileSpec>, std::vector<PinSpec>> load_profile_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  std::vector<ProfileSpec> profile;
  std::vector<PinSpec> pins;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ScenarioError(line_no, "line", "expected 'key: values'");
    std::string key = line.substr(0, colon);
    std::istringstream rest(line.substr(colon + 1));
    std::vector<std::string> args;
    std::string t;
    while (rest >> t) args.push_back(t);
    if (key == "profile") {
      if (args.size() < 4) throw ScenarioError(line_no, key, "relay pred kind ...");
      ProfileSpec p{args[0], args[1], args[2], {}};
      for (std::size_t k = 3; k < args.size(); ++k) p.params.push_back(std::stod(args[k]));
      profile.push_back(std::move(p));
    } else if (key == "pin") {
      if (args.size() != 3) throw ScenarioError(line_no, key, "tail head flow");
      pins.push_back({args[0], args[1], std::stod(args[2])});
    } else {
      throw ScenarioError(line_no, key, "only profile/pin lines allowed here");
    }
  }
  return {std::move(profile), std::move(pins)};
}

std::pair<PricingProfile, PinnedFlows> resolve_profile(
    const LoadedGame& lg, const std::vector<ProfileSpec>& specs,
    const std::vector<PinSpec>& pin_specs, int pieces) {
  PricingProfile p = PricingProfile::empty(lg.net);
  auto id_of = [&](const std::string& n, const std::string& field) {
    auto it = lg.bs.ids.find(n);
    if (it == lg.bs.ids.end())
      throw ScenarioError(0, field, "unknown node '" + n + "'");
    return it->second;
  };
  for (const ProfileSpec& ps : specs) {
    std::string field = "profile " + ps.relay + " " + ps.pred;
    int e = lg.net.edge_between(id_of(ps.pred, field), id_of(ps.relay, field));
    if (e < 0) throw ScenarioError(0, field, "no such edge");
    p.entries[e] = detail::curve_from(ps.kind, ps.params, lg.bs.session_rate,
                                      pieces, field);
  }
  PinnedFlows pins;
  for (const PinSpec& ps : pin_specs) {
    std::string field = "pin " + ps.tail + " " + ps.head;
    int e = lg.net.edge_between(id_of(ps.tail, field), id_of(ps.head, field));
    if (e < 0) throw ScenarioError(0, field, "no such edge");
    pins.by_edge[e] = ps.flow;
  }
  return {std::move(p), std::move(pins)};
}

void emit_profile_specs(const Network& net, const BuiltScenario& bs,
                        const PricingProfile& profile, const PinnedFlows& pins,
                        std::ostream& out) {
  for (int e = 0; e < net.edge_count(); ++e) {
    if (!profile.has(e)) continue;
    const MarginalFn& f = profile.at(e);
    out << "profile: " << bs.name_of(net.head(e)) << " " << bs.name_of(net.tail(e));
    const auto& segs = f.segments();
    bool constant = segs.size() == 1 && segs[0].y_lo == segs[0].y_hi;
    if (constant) {
      out << " const " << detail::fmt_double(segs[0].y_lo);
    } else {
      out << " pwl " << detail::fmt_double(segs[0].x_lo) << " "
          << detail::fmt_double(segs[0].y_lo);
      for (std::size_t k = 0; k < segs.size(); ++k) {
        if (k > 0 && segs[k].y_lo != segs[k - 1].y_hi)
          out << " " << detail::fmt_double(segs[k].x_lo) << " "
              << detail::fmt_double(segs[k].y_lo);
        out << " " << detail::fmt_double(segs[k].x_hi) << " "
            << detail::fmt_double(segs[k].y_hi);
      }
    }
    out << "\n";
  }
  for (const auto& [e, v] : pins.by_edge)
    out << "pin: " << bs.name_of(net.tail(e)) << " " << bs.name_of(net.head(e))
        << " " << detail::fmt_double(v) << "\n";
}

Params parse_params(const std::vector<std::string>& kvs) {
  Params p;
  for (const std::string& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("expected key=value, got '" + kv + "'");
    p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return p;
}

// ---------------------------------------------------------------------------

int cmd_optimal(const std::string& path, const GlobalOpts& g) {
  LoadedGame lg = load_game(path, g);
  SolveResult res = socially_optimal_routing(lg.net, lg.costs, lg.bs.session_rate);
  auto lambda = path_min_marginals(lg.net, lg.costs, res.routing);
  if (g.json) {
    ordered_json j;
    j["command"] = "optimal";
    j["scenario"] = path;
    j["seed"] = g.seed;
    j["converged"] = res.converged;
    j["iterations"] = res.iterations;
    j["marginal_gap"] = res.marginal_gap;
    j["total_cost"] = res.total_cost;
    ordered_json flows = ordered_json::object();
    for (int e = 0; e < lg.net.edge_count(); ++e)
      flows[lg.edge_name(e)] = res.routing.flows[e];
    j["flows"] = flows;
    ordered_json lam = ordered_json::object();
    for (NodeId i = 0; i < lg.net.node_count(); ++i)
      lam[lg.bs.name_of(i)] = lambda[i];
    j["lambda"] = lam;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "socially optimal routing of " << path << "\n";
    for (int e = 0; e < lg.net.edge_count(); ++e)
      std::cout << "  " << lg.edge_name(e) << ": " << num(res.routing.flows[e])
                << "\n";
    std::cout << "optimal cost D* = " << num(res.total_cost) << "\n";
    std::cout << "marginal gap    = " << num(res.marginal_gap) << " ("
              << res.iterations << " iterations)\n";
    std::cout << "node lambda*:\n";
    for (NodeId i = 0; i < lg.net.node_count(); ++i)
      std::cout << "  " << lg.bs.name_of(i) << ": " << num(lambda[i]) << "\n";
  }
  if (!res.converged) {
    std::cerr << "solver did not reach the requested gap\n";
    return kExitVerifyFail;
  }
  return kExitOk;
}

void print_report(const LoadedGame& lg, const EquilibriumReport& rep,
                  const std::string& label) {
  std::cout << label << "\n";
  std::cout << "  verified:   " << (rep.verify.pass ? "PASS" : "FAIL")
            << " (worst violation " << num(rep.verify.worst_violation) << ")\n";
  if (!rep.verify.error.empty()) std::cout << "  error:      " << rep.verify.error << "\n";
  for (const auto& v : rep.verify.violations)
    std::cout << "    violated " << v.condition << " at relay "
              << lg.bs.name_of(v.node) << " by " << num(v.magnitude) << "\n";
  std::cout << "  structure:  " << to_string(rep.structure.primary) << "\n";
  std::cout << "  efficiency: " << (rep.efficient ? "efficient" : "inefficient")
            << "\n";
  std::cout << "  cost:       " << num(rep.total_cost) << " (optimal "
            << num(rep.optimal_cost) << ", ratio " << num(rep.poa_contribution)
            << ")\n";
  std::cout << "  induced flows:\n";
  for (int e = 0; e < lg.net.edge_count(); ++e)
    std::cout << "    " << lg.edge_name(e) << ": "
              << num(rep.verify.induced.flows[e]) << "\n";
}

ordered_json report_json(const LoadedGame& lg, const EquilibriumReport& rep) {
  ordered_json j;
  j["verified"] = rep.verify.pass;
  j["worst_violation"] = rep.verify.worst_violation;
  if (!rep.verify.error.empty()) j["error"] = rep.verify.error;
  ordered_json viols = ordered_json::array();
  for (const auto& v : rep.verify.violations) {
    ordered_json jv;
    jv["relay"] = lg.bs.name_of(v.node);
    jv["condition"] = v.condition;
    jv["magnitude"] = v.magnitude;
    viols.push_back(jv);
  }
  j["violations"] = viols;
  ordered_json relays = ordered_json::array();
  for (const auto& rv : rep.verify.relays) {
    ordered_json jr;
    jr["relay"] = lg.bs.name_of(rv.relay);
    jr["worst_violation"] = rv.worst;
    jr["profit_gap"] = rv.profit_gap;
    relays.push_back(jr);
  }
  j["relays"] = relays;
  j["structure"] = to_string(rep.structure.primary);
  j["efficient"] = rep.efficient;
  j["total_cost"] = rep.total_cost;
  j["optimal_cost"] = rep.optimal_cost;
  j["poa_contribution"] = rep.poa_contribution;
  ordered_json flows = ordered_json::object();
  for (int e = 0; e < lg.net.edge_count(); ++e)
    flows[lg.edge_name(e)] = rep.verify.induced.flows[e];
  j["flows"] = flows;
  return j;
}

int cmd_equilibrium(const std::string& path, const std::string& scheme,
                    const std::string& save_profile, const GlobalOpts& g) {
  LoadedGame lg = load_game(path, g);
  Equilibrium eq;
  if (scheme == "marginal-cost") {
    eq = construct_marginal_cost_equilibrium(lg.net, lg.costs, lg.bs.session_rate,
                                             lg.bs.grid);
  } else if (scheme == "monopolistic") {
    eq = construct_monopolistic_equilibrium(lg.net, lg.costs, lg.bs.session_rate,
                                            lg.bs.grid);
  } else {
    std::cerr << "unknown scheme '" << scheme << "'\n";
    return kExitInputError;
  }
  EquilibriumReport rep =
      analyze_equilibrium(lg.net, lg.costs, eq.profile, lg.bs.session_rate,
                          lg.bs.grid, lg.bs.tol, &eq.pins);
  if (!save_profile.empty()) {
    std::ofstream out(save_profile, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << save_profile << "\n";
      return kExitInputError;
    }
    emit_profile_specs(lg.net, lg.bs, eq.profile, eq.pins, out);
  }
  if (g.json) {
    ordered_json j;
    j["command"] = "equilibrium";
    j["scenario"] = path;
    j["scheme"] = scheme;
    j.update(report_json(lg, rep));
    std::cout << j.dump(2) << "\n";
  } else {
    print_report(lg, rep, scheme + " equilibrium of " + path);
  }
  return rep.verify.pass ? kExitOk : kExitVerifyFail;
}

int cmd_verify(const std::string& path, const std::string& profile_path,
               const GlobalOpts& g) {
  LoadedGame lg = load_game(path, g);
  PricingProfile profile = PricingProfile::empty(lg.net);
  PinnedFlows pins;
  bool have_pins = false;
  if (!profile_path.empty()) {
    auto [specs, pin_specs] = load_profile_file(profile_path);
    std::tie(profile, pins) = resolve_profile(lg, specs, pin_specs, 64);
    have_pins = !pins.by_edge.empty();
  } else if (lg.bs.profile) {
    profile = *lg.bs.profile;
    pins = lg.bs.pins;
    have_pins = !pins.by_edge.empty();
  } else {
    std::cerr << "no profile: pass --profile or embed one in the scenario\n";
    return kExitInputError;
  }
  EquilibriumReport rep =
      analyze_equilibrium(lg.net, lg.costs, profile, lg.bs.session_rate, lg.bs.grid,
                          lg.bs.tol, have_pins ? &pins : nullptr);
  if (g.json) {
    ordered_json j;
    j["command"] = "verify";
    j["scenario"] = path;
    j.update(report_json(lg, rep));
    std::cout << j.dump(2) << "\n";
  } else {
    print_report(lg, rep, "verification of " + path);
  }
  return rep.verify.pass ? kExitOk : kExitVerifyFail;
}

int cmd_poa(const std::string& path, const std::vector<std::string>& eq_files,
            const GlobalOpts& g) {
  LoadedGame lg = load_game(path, g);
  std::vector<Routing> routings;
  std::vector<double> costs_at;
  for (const std::string& f : eq_files) {
    auto [specs, pin_specs] = load_profile_file(f);
    auto [profile, pins] = resolve_profile(lg, specs, pin_specs, 64);
    VerifyReport vr =
        verify_equilibrium(lg.net, lg.costs, profile, lg.bs.session_rate, lg.bs.grid,
                           lg.bs.tol, pins.by_edge.empty() ? nullptr : &pins);
    if (!vr.pass) {
      std::cerr << f << ": profile does not verify as an equilibrium";
      if (!vr.error.empty()) std::cerr << " (" << vr.error << ")";
      std::cerr << "\n";
      return kExitVerifyFail;
    }
    routings.push_back(vr.induced);
    costs_at.push_back(vr.total_cost);
  }
  double rho = price_of_anarchy(lg.net, lg.costs, lg.bs.session_rate, routings);
  SolveResult opt = socially_optimal_routing(lg.net, lg.costs, lg.bs.session_rate);
  if (g.json) {
    ordered_json j;
    j["command"] = "poa";
    j["scenario"] = path;
    j["optimal_cost"] = opt.total_cost;
    ordered_json eqs = ordered_json::array();
    for (std::size_t k = 0; k < eq_files.size(); ++k) {
      ordered_json je;
      je["file"] = eq_files[k];
      je["cost"] = costs_at[k];
      eqs.push_back(je);
    }
    j["equilibria"] = eqs;
    j["poa_lower_bound"] = rho;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "price of anarchy (lower bound from " << eq_files.size()
              << " verified equilibria)\n";
    for (std::size_t k = 0; k < eq_files.size(); ++k)
      std::cout << "  " << eq_files[k] << ": cost " << num(costs_at[k]) << "\n";
    std::cout << "optimal cost: " << num(opt.total_cost) << "\n";
    std::cout << "ratio: " << num(rho) << "\n";
  }
  return kExitOk;
}

int cmd_generate(const std::string& family, const std::vector<std::string>& kvs,
                 const std::string& out_path) {
  Scenario sc = generate_example(family, parse_params(kvs));
  if (out_path.empty()) {
    std::cout << scenario_saves(sc);
  } else {
    scenario_save(sc, out_path);
  }
  return kExitOk;
}

struct SweepPoint {
  double value = 0.0;
  double opt_cost = 0.0;
  double eq_cost = 0.0;
  double poa = 0.0;
};

// one sweep evaluation: generate, solve, take the scenario's pinned profile
// when present (else the monopolistic construction), verify, measure
SweepPoint sweep_point(const std::string& family, Params params,
                       const std::string& name, double value,
                       const GlobalOpts& g) {
  params[name] = value;
  BuiltScenario bs = build_scenario(generate_example(family, params));
  if (g.grid >= 0) bs.grid.steps = g.grid;
  if (g.tol >= 0) bs.tol = g.tol;
  Network net = bs.net;
  LinkCosts costs = bs.costs;
  if (bs.utility) {
    ElasticGame eg = elastic_transform(bs.net, bs.costs, *bs.utility, bs.session_rate);
    net = eg.net;
    costs = eg.costs;
  }
  SweepPoint pt;
  pt.value = value;
  SolveResult opt = socially_optimal_routing(net, costs, bs.session_rate);
  pt.opt_cost = opt.total_cost;
  PricingProfile profile = PricingProfile::empty(net);
  PinnedFlows pins;
  if (bs.profile) {
    profile = *bs.profile;
    pins = bs.pins;
  } else {
    // worst constructed equilibrium when the family pins none: monopolistic
    // where the topology admits it, marginal-cost otherwise
    try {
      Equilibrium eq =
          construct_monopolistic_equilibrium(net, costs, bs.session_rate, bs.grid);
      profile = eq.profile;
      pins = eq.pins;
    } catch (const std::invalid_argument&) {
      Equilibrium eq =
          construct_marginal_cost_equilibrium(net, costs, bs.session_rate, bs.grid);
      profile = eq.profile;
      pins = eq.pins;
    }
  }
  VerifyReport vr = verify_equilibrium(net, costs, profile, bs.session_rate, bs.grid,
                                       bs.tol, pins.by_edge.empty() ? nullptr : &pins);
  if (!vr.pass)
    throw std::runtime_error("sweep point " + name + "=" + num(value) +
                             ": equilibrium does not verify");
  pt.eq_cost = vr.total_cost;
  pt.poa = pt.eq_cost / pt.opt_cost;
  return pt;
}

int cmd_sweep(const std::string& family, const std::vector<std::string>& kvs,
              const std::string& name, double from, double to, int steps,
              const GlobalOpts& g) {
  if (steps < 1) {
    std::cerr << "--steps must be >= 1\n";
    return kExitInputError;
  }
  Params params = parse_params(kvs);
  std::vector<std::future<SweepPoint>> futures;
  for (int k = 0; k <= steps; ++k) {
    double v = steps == 0 ? from : from + (to - from) * k / steps;
    futures.push_back(std::async(std::launch::async, sweep_point, family, params,
                                 name, v, g));
  }
  std::printf("param,opt_cost,eq_cost,poa\n");
  for (auto& fut : futures) {
    SweepPoint pt = fut.get();
    std::printf("%.9g,%.9g,%.9g,%.9g\n", pt.value, pt.opt_cost, pt.eq_cost, pt.poa);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relay pricing game solver"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--grid", g.grid, "grid steps for the DP fallback and checks");
  app.add_option("--tol", g.tol, "absolute cost tolerance for verification");
  app.add_option("--seed", g.seed, "seed recorded for randomized suites");
  app.add_flag("--json", g.json, "machine-readable reports");

  std::string scenario_path, scheme = "marginal-cost", profile_path, out_path;
  std::vector<std::string> kvs, eq_files;
  std::string family, param_name;
  double from = 0.0, to = 1.0;
  int steps = 10;

  CLI::App* c_opt = app.add_subcommand("optimal", "socially optimal routing");
  c_opt->add_option("scenario", scenario_path)->required();

  CLI::App* c_eq = app.add_subcommand("equilibrium", "construct and verify");
  c_eq->add_option("scenario", scenario_path)->required();
  c_eq->add_option("--scheme", scheme, "marginal-cost | monopolistic");
  c_eq->add_option("--save-profile", out_path, "write the profile to a file");

  CLI::App* c_ver = app.add_subcommand("verify", "verify a pricing profile");
  c_ver->add_option("scenario", scenario_path)->required();
  c_ver->add_option("--profile", profile_path, "profile file (default: embedded)");

  CLI::App* c_poa = app.add_subcommand("poa", "price-of-anarchy lower bound");
  c_poa->add_option("scenario", scenario_path)->required();
  c_poa->add_option("--equilibria", eq_files, "profile files")->required();

  CLI::App* c_gen = app.add_subcommand("generate", "emit a named example");
  c_gen->add_option("family", family)->required();
  c_gen->add_option("--params", kvs, "key=value ...");
  c_gen->add_option("-o,--output", out_path, "write to file instead of stdout");

  CLI::App* c_sweep = app.add_subcommand("sweep", "CSV sweep over a parameter");
  c_sweep->add_option("family", family)->required();
  c_sweep->add_option("--param", param_name)->required();
  c_sweep->add_option("--from", from)->required();
  c_sweep->add_option("--to", to)->required();
  c_sweep->add_option("--steps", steps);
  c_sweep->add_option("--params", kvs, "fixed key=value ...");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_opt->parsed()) return cmd_optimal(scenario_path, g);
    if (c_eq->parsed()) return cmd_equilibrium(scenario_path, scheme, out_path, g);
    if (c_ver->parsed()) return cmd_verify(scenario_path, profile_path, g);
    if (c_poa->parsed()) return cmd_poa(scenario_path, eq_files, g);
    if (c_gen->parsed()) return cmd_generate(family, kvs, out_path);
    if (c_sweep->parsed())
      return cmd_sweep(family, kvs, param_name, from, to, steps, g);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
