// Scenario files: a line-based, diffable text format holding the network,
// per-edge cost marginals, optional utility / pinned pricing / tie-break
// overrides, and tolerance knobs. save(load(x)) emits canonical bytes.
#ifndef NETPRICING_SCENARIO_HPP
#define NETPRICING_SCENARIO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netpricing/game.hpp"

namespace netpricing {

struct ScenarioError : std::runtime_error {
  ScenarioError(int line, const std::string& field, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", " + field + ": " +
                           what) {}
};

struct EdgeSpec {
  std::string tail, head;
  std::string kind;            // linear | affine | pwl | mm1 | exp
  std::vector<double> params;
};

struct ProfileSpec {
  std::string relay, pred;
  std::string kind;            // const | linear | pwl
  std::vector<double> params;
};

struct PinSpec {
  std::string tail, head;
  double flow = 0.0;
};

struct UtilitySpec {
  std::string kind;            // const | linear | pwl
  std::vector<double> params;
};

struct Scenario {
  int schema = 1;
  double session_rate = 1.0;
  std::string source, destination;
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
  std::optional<UtilitySpec> utility;
  std::vector<ProfileSpec> profile;
  std::vector<PinSpec> pins;
  double tol = 1e-5;
  int grid = 2000;
  int pieces = 64;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

inline double parse_double(const std::string& s, int line, const std::string& field) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ScenarioError(line, field, "expected a number, got '" + s + "'");
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Scenario scenario_loads(const std::string& text) {
  Scenario sc;
  bool saw_rate = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    auto colon = line.find(':');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (colon == std::string::npos)
      throw ScenarioError(line_no, "line", "expected 'key: values'");
    std::string key = line.substr(0, colon);
    std::vector<std::string> args = detail::tokens(line.substr(colon + 1));
    auto need = [&](std::size_t n) {
      if (args.size() < n)
        throw ScenarioError(line_no, key, "expected at least " + std::to_string(n) +
                                              " values");
    };
    if (key == "schema") {
      need(1);
      sc.schema = static_cast<int>(detail::parse_double(args[0], line_no, key));
      if (sc.schema != 1) throw ScenarioError(line_no, key, "unsupported schema");
    } else if (key == "session_rate") {
      need(1);
      sc.session_rate = detail::parse_double(args[0], line_no, key);
      if (!(sc.session_rate > 0.0))
        throw ScenarioError(line_no, key, "session_rate must be positive");
      saw_rate = true;
    } else if (key == "source") {
      need(1);
      sc.source = args[0];
    } else if (key == "destination") {
      need(1);
      sc.destination = args[0];
    } else if (key == "node") {
      need(1);
      for (const std::string& n : sc.nodes)
        if (n == args[0]) throw ScenarioError(line_no, key, "duplicate node " + args[0]);
      sc.nodes.push_back(args[0]);
    } else if (key == "edge") {
      need(3);
      EdgeSpec e;
      e.tail = args[0];
      e.head = args[1];
      e.kind = args[2];
      for (std::size_t k = 3; k < args.size(); ++k)
        e.params.push_back(detail::parse_double(args[k], line_no, key));
      sc.edges.push_back(std::move(e));
    } else if (key == "utility") {
      need(1);
      UtilitySpec u;
      u.kind = args[0];
      for (std::size_t k = 1; k < args.size(); ++k)
        u.params.push_back(detail::parse_double(args[k], line_no, key));
      sc.utility = std::move(u);
    } else if (key == "profile") {
      need(3);
      ProfileSpec p;
      p.relay = args[0];
      p.pred = args[1];
      p.kind = args[2];
      for (std::size_t k = 3; k < args.size(); ++k)
        p.params.push_back(detail::parse_double(args[k], line_no, key));
      sc.profile.push_back(std::move(p));
    } else if (key == "pin") {
      need(3);
      sc.pins.push_back(
          {args[0], args[1], detail::parse_double(args[2], line_no, key)});
    } else if (key == "tol") {
      need(1);
      sc.tol = detail::parse_double(args[0], line_no, key);
    } else if (key == "grid") {
      need(1);
      sc.grid = static_cast<int>(detail::parse_double(args[0], line_no, key));
    } else if (key == "pieces") {
      need(1);
      sc.pieces = static_cast<int>(detail::parse_double(args[0], line_no, key));
    } else {
      throw ScenarioError(line_no, key, "unknown field");
    }
  }
  if (!saw_rate) throw ScenarioError(0, "session_rate", "missing");
  if (sc.source.empty()) throw ScenarioError(0, "source", "missing");
  if (sc.destination.empty()) throw ScenarioError(0, "destination", "missing");
  return sc;
}

inline std::string scenario_saves(const Scenario& sc) {
  std::ostringstream out;
  using detail::fmt_double;
  out << "schema: " << sc.schema << "\n";
  out << "session_rate: " << fmt_double(sc.session_rate) << "\n";
  out << "source: " << sc.source << "\n";
  out << "destination: " << sc.destination << "\n";
  for (const std::string& n : sc.nodes) out << "node: " << n << "\n";
  for (const EdgeSpec& e : sc.edges) {
    out << "edge: " << e.tail << " " << e.head << " " << e.kind;
    for (double p : e.params) out << " " << fmt_double(p);
    out << "\n";
  }
  if (sc.utility) {
    out << "utility: " << sc.utility->kind;
    for (double p : sc.utility->params) out << " " << fmt_double(p);
    out << "\n";
  }
  for (const ProfileSpec& p : sc.profile) {
    out << "profile: " << p.relay << " " << p.pred << " " << p.kind;
    for (double v : p.params) out << " " << fmt_double(v);
    out << "\n";
  }
  for (const PinSpec& p : sc.pins)
    out << "pin: " << p.tail << " " << p.head << " " << fmt_double(p.flow) << "\n";
  out << "tol: " << fmt_double(sc.tol) << "\n";
  out << "grid: " << sc.grid << "\n";
  out << "pieces: " << sc.pieces << "\n";
  return out.str();
}

inline Scenario scenario_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_loads(buf.str());
}

inline void scenario_save(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_saves(sc);
}

// ---------------------------------------------------------------------------
// building runtime objects

struct BuiltScenario {
  Network net;
  LinkCosts costs;
  std::optional<PricingProfile> profile;
  PinnedFlows pins;
  std::optional<MarginalFn> utility;  // marginal utility u_s, pre-transform
  double session_rate = 0.0;
  double tol = 1e-5;
  GridSpec grid;
  std::vector<std::string> names;
  std::map<std::string, int> ids;

  std::string name_of(NodeId i) const {
    return i >= 0 && i < static_cast<int>(names.size()) ? names[i]
                                                        : std::to_string(i);
  }
};

namespace detail {

inline MarginalFn curve_from(const std::string& kind,
                             const std::vector<double>& params, double span,
                             int pieces, const std::string& field) {
  auto fail = [&](const std::string& why) {
    throw ScenarioError(0, field, why);
  };
  if (kind == "const") {
    if (params.size() != 1) fail("const takes one value");
    return MarginalFn::constant(params[0], span);
  }
  if (kind == "linear") {
    if (params.size() != 2) fail("linear takes a b");
    return MarginalFn::linear(params[0], params[1], span);
  }
  if (kind == "affine") {
    if (params.size() != 3) fail("affine takes a b f0");
    return MarginalFn::linear(params[0] - params[1] * params[2], params[1], span);
  }
  if (kind == "pwl") {
    if (params.size() < 4 || params.size() % 2 != 0) fail("pwl takes x y pairs");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k + 1 < params.size(); k += 2)
      pts.push_back({params[k], params[k + 1]});
    return MarginalFn::from_points(pts);
  }
  if (kind == "mm1") {
    if (params.empty() || params.size() > 2) fail("mm1 takes c [cap]");
    double c = params[0], cap = params.size() > 1 ? params[1] : 0.95;
    if (!(c > 0.0) || !(cap > 0.0) || cap >= 1.0) fail("mm1 needs c > 0, cap in (0,1)");
    double hi = std::min(span, cap * c);
    return MarginalFn::sample(
        [c](double f) { return c / ((c - f) * (c - f)); }, hi, pieces);
  }
  if (kind == "exp") {
    if (params.size() != 2) fail("exp takes W K");
    double W = params[0], K = params[1];
    if (!(W > 0.0) || !(K > 0.0)) fail("exp needs W, K > 0");
    return MarginalFn::sample(
        [W, K](double f) { return std::log(2.0) / (W * K) * std::pow(2.0, f / W); },
        span, pieces);
  }
  fail("unknown curve kind '" + kind + "'");
  return MarginalFn();  // unreached
}

}  // namespace detail

// Resolves names, builds the network and all curves, and checks the
// scenario-level invariants (validated network, positive strictly
// increasing link marginals).
inline BuiltScenario build_scenario(const Scenario& sc) {
  BuiltScenario bs;
  bs.session_rate = sc.session_rate;
  bs.tol = sc.tol;
  bs.grid.steps = sc.grid;
  bs.names = sc.nodes;
  for (std::size_t k = 0; k < sc.nodes.size(); ++k)
    bs.ids[sc.nodes[k]] = static_cast<int>(k);

  auto id_of = [&](const std::string& name, const std::string& field) {
    auto it = bs.ids.find(name);
    if (it == bs.ids.end())
      throw ScenarioError(0, field, "unknown node '" + name + "'");
    return it->second;
  };

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const EdgeSpec& e : sc.edges)
    edges.push_back({id_of(e.tail, "edge"), id_of(e.head, "edge")});
  bs.net = Network(static_cast<int>(sc.nodes.size()), id_of(sc.source, "source"),
                   id_of(sc.destination, "destination"), edges);

  ValidationReport vr = validate(bs.net);
  if (!vr.ok()) {
    std::string what = "network fails structural assumptions:";
    for (const auto& v : vr.issues) what += " [" + v.code + " " + v.detail + "]";
    throw ScenarioError(0, "network", what);
  }

  bs.costs.resize(bs.net.edge_count());
  for (std::size_t k = 0; k < sc.edges.size(); ++k) {
    const EdgeSpec& e = sc.edges[k];
    std::string field = "edge " + e.tail + " " + e.head;
    MarginalFn d =
        detail::curve_from(e.kind, e.params, sc.session_rate, sc.pieces, field);
    if (d.min_value() < 0.0)
      throw ScenarioError(0, field, "link marginal is negative somewhere");
    if (!d.strictly_increasing())
      throw ScenarioError(0, field, "link marginal must be strictly increasing");
    bs.costs[k] = CostIntegral(std::move(d));
  }

  if (!sc.profile.empty()) {
    PricingProfile p = PricingProfile::empty(bs.net);
    for (const ProfileSpec& ps : sc.profile) {
      std::string field = "profile " + ps.relay + " " + ps.pred;
      int e = bs.net.edge_between(id_of(ps.pred, field), id_of(ps.relay, field));
      if (e < 0) throw ScenarioError(0, field, "no such edge");
      if (bs.net.head(e) == bs.net.destination())
        throw ScenarioError(0, field, "destination does not price");
      MarginalFn beta =
          detail::curve_from(ps.kind, ps.params, sc.session_rate, sc.pieces, field);
      if (beta.min_value() < 0.0)
        throw ScenarioError(0, field, "pricing marginal is negative somewhere");
      p.entries[e] = std::move(beta);
    }
    bs.profile = std::move(p);
  }

  for (const PinSpec& ps : sc.pins) {
    std::string field = "pin " + ps.tail + " " + ps.head;
    int e = bs.net.edge_between(id_of(ps.tail, field), id_of(ps.head, field));
    if (e < 0) throw ScenarioError(0, field, "no such edge");
    if (ps.flow < 0.0) throw ScenarioError(0, field, "pinned flow is negative");
    bs.pins.by_edge[e] = ps.flow;
  }

  if (sc.utility) {
    std::string field = "utility";
    MarginalFn u = detail::curve_from(sc.utility->kind, sc.utility->params,
                                      sc.session_rate, sc.pieces, field);
    if (u.min_value() < 0.0)
      throw ScenarioError(0, field, "marginal utility is negative somewhere");
    if (!u.nonincreasing(1e-12))
      throw ScenarioError(0, field, "marginal utility must be nonincreasing");
    bs.utility = std::move(u);
  }
  return bs;
}

}  // namespace netpricing

#endif  // NETPRICING_SCENARIO_HPP
