// Relay-network topology: a loop-free DAG with one source and one
// destination plus the neighbour sets (predecessors, offsprings, siblings)
// the pricing game is defined over.
#ifndef NETPRICING_NETWORK_HPP
#define NETPRICING_NETWORK_HPP

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace netpricing {

using NodeId = int;

class Network {
 public:
  Network() = default;

  Network(int node_count, NodeId source, NodeId destination,
          std::vector<std::pair<NodeId, NodeId>> edge_list)
      : node_count_(node_count),
        source_(source),
        destination_(destination),
        edges_(std::move(edge_list)) {
    if (node_count_ < 2) throw std::invalid_argument("Network: need >= 2 nodes");
    auto in_range = [&](NodeId v) { return v >= 0 && v < node_count_; };
    if (!in_range(source_) || !in_range(destination_) || source_ == destination_)
      throw std::invalid_argument("Network: bad source/destination");
    out_.assign(node_count_, {});
    in_.assign(node_count_, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      auto [tail, head] = edges_[e];
      if (!in_range(tail) || !in_range(head))
        throw std::invalid_argument("Network: edge endpoint out of range");
      if (tail == head) throw std::invalid_argument("Network: self loop");
      out_[tail].push_back(static_cast<int>(e));
      in_[head].push_back(static_cast<int>(e));
    }
    auto by_head = [&](int a, int b) { return edges_[a].second < edges_[b].second; };
    auto by_tail = [&](int a, int b) { return edges_[a].first < edges_[b].first; };
    for (auto& v : out_) std::sort(v.begin(), v.end(), by_head);
    for (auto& v : in_) std::sort(v.begin(), v.end(), by_tail);
  }

  int node_count() const { return node_count_; }
  NodeId source() const { return source_; }
  NodeId destination() const { return destination_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  NodeId tail(int e) const { return edges_[e].first; }
  NodeId head(int e) const { return edges_[e].second; }

  const std::vector<int>& out_edges(NodeId i) const { return checked(out_, i); }
  const std::vector<int>& in_edges(NodeId i) const { return checked(in_, i); }

  bool is_relay(NodeId i) const { return i != source_ && i != destination_; }

  std::vector<NodeId> offsprings(NodeId i) const {
    std::vector<NodeId> v;
    for (int e : out_edges(i)) v.push_back(head(e));
    return v;
  }

  std::vector<NodeId> predecessors(NodeId i) const {
    std::vector<NodeId> v;
    for (int e : in_edges(i)) v.push_back(tail(e));
    return v;
  }

  // Nodes competing with i for h's traffic; excludes i, may include the
  // destination.
  std::vector<NodeId> siblings(NodeId i, NodeId h) const {
    if (edge_between(h, i) < 0)
      throw std::invalid_argument("siblings: h is not a predecessor of i");
    std::vector<NodeId> v;
    for (int e : out_edges(h))
      if (head(e) != i) v.push_back(head(e));
    return v;
  }

  int edge_between(NodeId tail_id, NodeId head_id) const {
    for (int e : out_edges(tail_id))
      if (head(e) == head_id) return e;
    return -1;
  }

  // Destination first; every node appears after all of its offsprings.
  // Deterministic: smallest node id is released first.
  std::vector<NodeId> reverse_topological_order() const {
    std::vector<int> pending(node_count_, 0);
    for (NodeId i = 0; i < node_count_; ++i)
      pending[i] = static_cast<int>(out_[i].size());
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId i = 0; i < node_count_; ++i)
      if (pending[i] == 0) ready.push(i);
    std::vector<NodeId> order;
    order.reserve(node_count_);
    while (!ready.empty()) {
      NodeId i = ready.top();
      ready.pop();
      order.push_back(i);
      for (int e : in_[i])
        if (--pending[tail(e)] == 0) ready.push(tail(e));
    }
    if (static_cast<int>(order.size()) != node_count_)
      throw std::runtime_error("reverse_topological_order: cycle detected");
    return order;
  }

  std::vector<NodeId> topological_order() const {
    std::vector<NodeId> order = reverse_topological_order();
    std::reverse(order.begin(), order.end());
    return order;
  }

 private:
  const std::vector<int>& checked(const std::vector<std::vector<int>>& adj,
                                  NodeId i) const {
    if (i < 0 || i >= node_count_)
      throw std::invalid_argument("Network: unknown node id");
    return adj[i];
  }

  int node_count_ = 0;
  NodeId source_ = -1;
  NodeId destination_ = -1;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<std::vector<int>> out_, in_;
};

struct ValidationIssue {
  std::string code;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  bool has(const std::string& code) const {
    for (const auto& v : issues)
      if (v.code == code) return true;
    return false;
  }
};

// Structural assumptions: loop-free, everything on some source-destination
// path, source/destination degree pattern, offspring sets are {w} or hold at
// least two relays, and no node is both a sibling and a predecessor of
// another.
inline ValidationReport validate(const Network& net) {
  ValidationReport rep;
  auto issue = [&](std::string code, std::string detail) {
    rep.issues.push_back({std::move(code), std::move(detail)});
  };

  bool acyclic = true;
  try {
    net.reverse_topological_order();
  } catch (const std::exception&) {
    acyclic = false;
    issue("cycle", "graph contains a directed cycle");
  }

  if (!net.in_edges(net.source()).empty())
    issue("source-degree", "source has a predecessor");
  if (!net.out_edges(net.destination()).empty())
    issue("destination-degree", "destination has an offspring");

  std::set<std::pair<NodeId, NodeId>> seen;
  for (auto& e : net.edges())
    if (!seen.insert(e).second)
      issue("duplicate-edge", std::to_string(e.first) + "->" + std::to_string(e.second));

  // reachability: forward from s, backward from w
  auto reach = [&](NodeId start, bool forward) {
    std::vector<char> vis(net.node_count(), 0);
    std::vector<NodeId> stack{start};
    vis[start] = 1;
    while (!stack.empty()) {
      NodeId i = stack.back();
      stack.pop_back();
      for (int e : forward ? net.out_edges(i) : net.in_edges(i)) {
        NodeId j = forward ? net.head(e) : net.tail(e);
        if (!vis[j]) {
          vis[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return vis;
  };
  std::vector<char> from_s = reach(net.source(), true);
  std::vector<char> to_w = reach(net.destination(), false);
  if (acyclic) {
    for (NodeId i = 0; i < net.node_count(); ++i)
      if (!from_s[i] || !to_w[i])
        issue("stranded-node", "node " + std::to_string(i) + " off every s-w path");
    for (int e = 0; e < net.edge_count(); ++e)
      if (!from_s[net.tail(e)] || !to_w[net.head(e)])
        issue("stranded-edge", std::to_string(net.tail(e)) + "->" +
                                   std::to_string(net.head(e)));
  }

  // offspring-set assumption
  for (NodeId i = 0; i < net.node_count(); ++i) {
    if (i == net.destination()) continue;
    auto offs = net.offsprings(i);
    if (offs.empty()) continue;  // reported as stranded already
    bool only_w = offs.size() == 1 && offs[0] == net.destination();
    int relay_offs = 0;
    for (NodeId k : offs)
      if (k != net.destination()) ++relay_offs;
    if (!only_w && relay_offs < 2)
      issue("offspring-set",
            "node " + std::to_string(i) + " must reach {w} or >= 2 relays");
  }

  // sibling/predecessor disjointness
  for (NodeId i = 0; i < net.node_count(); ++i) {
    std::set<NodeId> preds;
    for (NodeId h : net.predecessors(i)) preds.insert(h);
    for (NodeId h : preds) {
      for (NodeId j : net.siblings(i, h)) {
        if (preds.count(j)) {
          issue("sibling-predecessor",
                "node " + std::to_string(j) + " is sibling and predecessor of " +
                    std::to_string(i));
        }
      }
    }
  }
  return rep;
}

}  // namespace netpricing

#endif  // NETPRICING_NETWORK_HPP
