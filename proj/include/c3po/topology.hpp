#pragma once

// Router graph with per-node CPU/memory capacity. Clients and the server are
// explicit endpoint nodes linked to their attachment routers; they never
// execute services and never carry transit traffic. Routing is hop-count
// shortest path toward the single server, ties broken by smallest NodeId.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "c3po/errors.hpp"

namespace c3po {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class NodeRole { Router, Client, Server };

struct Node {
  std::string name;
  NodeRole role = NodeRole::Router;
  double cpu_capacity = 1.0;
  double mem_capacity = 1.0;

  bool operator==(const Node&) const = default;
};

struct Link {
  NodeId to = kNoNode;
  double delay = 1e-3;  // seconds

  bool operator==(const Link&) const = default;
};

struct CapacityProfile {
  double cpu = 1.0;
  double mem = 1.0;
  double link_delay = 1e-3;  // seconds
};

struct GridCoord {
  int row = 0;
  int col = 0;
};

using Path = std::vector<NodeId>;

class Topology {
 public:
  class Builder;

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const {
    check_node(id);
    return nodes_[id];
  }
  std::span<const Node> nodes() const { return nodes_; }
  bool is_router(NodeId id) const { return node(id).role == NodeRole::Router; }

  std::optional<NodeId> find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  NodeId id_of(const std::string& name) const {
    auto id = find(name);
    if (!id) throw ContractViolation("unknown node '" + name + "'");
    return *id;
  }

  // Links sorted by neighbor id.
  std::span<const Link> links(NodeId id) const {
    check_node(id);
    return adjacency_[id];
  }

  std::vector<NodeId> neighbors(NodeId id) const {
    std::vector<NodeId> out;
    for (const auto& l : links(id)) out.push_back(l.to);
    return out;
  }

  std::vector<NodeId> router_neighbors(NodeId id) const {
    std::vector<NodeId> out;
    for (const auto& l : links(id)) {
      if (nodes_[l.to].role == NodeRole::Router) out.push_back(l.to);
    }
    return out;
  }

  std::optional<double> link_delay(NodeId a, NodeId b) const {
    const auto adj = links(a);
    auto it = std::lower_bound(
        adj.begin(), adj.end(), b,
        [](const Link& l, NodeId target) { return l.to < target; });
    if (it == adj.end() || it->to != b) return std::nullopt;
    return it->delay;
  }

  std::size_t edge_count() const { return edge_count_; }
  std::size_t router_count() const { return routers_.size(); }
  const std::vector<NodeId>& routers() const { return routers_; }
  // Edges whose endpoints are both routers.
  std::size_t router_edge_count() const {
    std::size_t n = 0;
    for (NodeId r : routers_) {
      for (const auto& l : adjacency_[r]) {
        if (l.to > r && nodes_[l.to].role == NodeRole::Router) ++n;
      }
    }
    return n;
  }

  NodeId server() const { return server_; }
  const std::vector<NodeId>& clients() const { return clients_; }

  // Router the client is attached to (smallest-id router neighbor).
  NodeId edge_router(NodeId client) const {
    if (node(client).role != NodeRole::Client) {
      throw ContractViolation("node '" + nodes_[client].name + "' is not a client");
    }
    return edge_router_[client];
  }

  // Router through which the server is reached on the last hop.
  bool is_last_hop(NodeId id) const { return next_hop_to_server(id) == server_; }

  NodeId next_hop_to_server(NodeId from) const {
    check_node(from);
    if (from == server_) {
      throw ContractViolation("next_hop_to_server called on the server itself");
    }
    return next_hop_[from];
  }

  int distance_to_server(NodeId id) const {
    check_node(id);
    return distance_[id];
  }

  Path path_to_server(NodeId from) const {
    Path p{from};
    while (p.back() != server_) p.push_back(next_hop_to_server(p.back()));
    return p;
  }

  void set_capacity(NodeId id, double cpu, double mem) {
    check_node(id);
    if (nodes_[id].role != NodeRole::Router) {
      throw ConfigError("capacity override on non-router '" + nodes_[id].name + "'");
    }
    if (!(cpu > 0.0) || !(mem > 0.0)) {
      throw ConfigError("capacities of '" + nodes_[id].name + "' must be > 0");
    }
    nodes_[id].cpu_capacity = cpu;
    nodes_[id].mem_capacity = mem;
  }

  bool operator==(const Topology& other) const {
    return nodes_ == other.nodes_ && adjacency_ == other.adjacency_ &&
           server_ == other.server_ && clients_ == other.clients_;
  }

 private:
  void check_node(NodeId id) const {
    if (id >= nodes_.size()) {
      throw ContractViolation("unknown node id " + std::to_string(id));
    }
  }

  std::vector<Node> nodes_;
  std::vector<std::vector<Link>> adjacency_;
  std::map<std::string, NodeId> by_name_;
  std::vector<NodeId> routers_;
  std::vector<NodeId> clients_;
  NodeId server_ = kNoNode;
  std::size_t edge_count_ = 0;
  std::vector<int> distance_;
  std::vector<NodeId> next_hop_;
  std::vector<NodeId> edge_router_;
};

// Accumulates nodes and links; build() validates and precomputes routes.
// Node ids are assigned in declaration order.
class Topology::Builder {
 public:
  NodeId add_node(std::string name, NodeRole role, double cpu = 1.0,
                  double mem = 1.0) {
    if (name.empty()) throw ConfigError("node name must not be empty");
    if (t_.by_name_.count(name) != 0) {
      throw ConfigError("duplicate node '" + name + "'");
    }
    if (role == NodeRole::Router && (!(cpu > 0.0) || !(mem > 0.0))) {
      throw ConfigError("router '" + name + "' capacities must be > 0");
    }
    if (role == NodeRole::Server && t_.server_ != kNoNode) {
      throw ConfigError("second server '" + name + "': only one server is supported");
    }
    const auto id = static_cast<NodeId>(t_.nodes_.size());
    t_.nodes_.push_back({name, role, cpu, mem});
    t_.adjacency_.emplace_back();
    t_.by_name_.emplace(std::move(name), id);
    if (role == NodeRole::Server) t_.server_ = id;
    if (role == NodeRole::Client) t_.clients_.push_back(id);
    return id;
  }

  NodeId add_router(std::string name, double cpu, double mem) {
    return add_node(std::move(name), NodeRole::Router, cpu, mem);
  }
  NodeId add_client(std::string name) {
    return add_node(std::move(name), NodeRole::Client, 0.0, 0.0);
  }
  NodeId add_server(std::string name) {
    return add_node(std::move(name), NodeRole::Server, 0.0, 0.0);
  }

  // Returns false (and changes nothing) if the edge already exists.
  bool add_edge(NodeId a, NodeId b, double delay) {
    if (a >= t_.nodes_.size() || b >= t_.nodes_.size()) {
      throw ConfigError("edge references unknown node id");
    }
    if (a == b) throw ConfigError("self-loop on '" + t_.nodes_[a].name + "'");
    if (!(delay > 0.0)) {
      throw ConfigError("edge " + t_.nodes_[a].name + "-" + t_.nodes_[b].name +
                        ": link delay must be > 0");
    }
    auto& adj = t_.adjacency_[a];
    if (std::any_of(adj.begin(), adj.end(),
                    [b](const Link& l) { return l.to == b; })) {
      return false;
    }
    adj.push_back({b, delay});
    t_.adjacency_[b].push_back({a, delay});
    ++t_.edge_count_;
    return true;
  }

  std::optional<NodeId> find(const std::string& name) const {
    auto it = t_.by_name_.find(name);
    if (it == t_.by_name_.end()) return std::nullopt;
    return it->second;
  }

  Topology build() && {
    Topology t = std::move(t_);
    if (t.server_ == kNoNode) throw ConfigError("topology declares no server");
    if (t.clients_.empty()) throw ConfigError("topology declares no client");
    for (auto& adj : t.adjacency_) {
      std::sort(adj.begin(), adj.end(),
                [](const Link& x, const Link& y) { return x.to < y.to; });
    }
    t.routers_.clear();
    for (NodeId id = 0; id < t.nodes_.size(); ++id) {
      if (t.nodes_[id].role == NodeRole::Router) t.routers_.push_back(id);
    }
    if (t.routers_.empty()) throw ConfigError("topology has no routers");

    // BFS from the server; only routers (and the server) relay.
    const std::size_t n = t.nodes_.size();
    t.distance_.assign(n, -1);
    t.next_hop_.assign(n, kNoNode);
    std::deque<NodeId> frontier{t.server_};
    t.distance_[t.server_] = 0;
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (const auto& l : t.adjacency_[u]) {
        if (t.distance_[l.to] != -1) continue;
        t.distance_[l.to] = t.distance_[u] + 1;
        if (t.nodes_[l.to].role == NodeRole::Router) frontier.push_back(l.to);
      }
    }
    for (NodeId id = 0; id < n; ++id) {
      if (t.distance_[id] == -1) {
        throw ConfigError("topology is disconnected: node '" + t.nodes_[id].name +
                          "' cannot reach the server");
      }
    }
    for (NodeId v = 0; v < n; ++v) {
      if (v == t.server_) continue;
      for (const auto& l : t.adjacency_[v]) {  // ascending id: first match wins
        const bool relay = l.to == t.server_ ||
                           t.nodes_[l.to].role == NodeRole::Router;
        if (relay && t.distance_[l.to] == t.distance_[v] - 1) {
          t.next_hop_[v] = l.to;
          break;
        }
      }
    }
    t.edge_router_.assign(n, kNoNode);
    for (NodeId c : t.clients_) {
      for (const auto& l : t.adjacency_[c]) {
        if (t.nodes_[l.to].role == NodeRole::Router) {
          t.edge_router_[c] = l.to;
          break;
        }
      }
      if (t.edge_router_[c] == kNoNode) {
        throw ConfigError("client '" + t.nodes_[c].name + "' is not attached to a router");
      }
    }
    return t;
  }

 private:
  Topology t_;
};

inline std::string grid_router_name(int row, int col) {
  return "r_" + std::to_string(row) + "_" + std::to_string(col);
}

// rows x cols 4-neighbour lattice. Router (r, c) gets id r * cols + c; the
// client and server endpoints follow with ids rows*cols and rows*cols + 1.
inline Topology make_grid(int rows, int cols, const CapacityProfile& profile,
                          GridCoord client_at, GridCoord server_at) {
  if (rows < 2 || cols < 2) throw ConfigError("grid needs rows, cols >= 2");
  auto in_range = [&](GridCoord g) {
    return g.row >= 0 && g.row < rows && g.col >= 0 && g.col < cols;
  };
  if (!in_range(client_at)) throw ConfigError("grid client coordinate out of range");
  if (!in_range(server_at)) throw ConfigError("grid server coordinate out of range");

  Topology::Builder b;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      b.add_router(grid_router_name(r, c), profile.cpu, profile.mem);
    }
  }
  const NodeId client = b.add_client("client");
  const NodeId server = b.add_server("server");
  auto id = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) b.add_edge(id(r, c), id(r, c + 1), profile.link_delay);
      if (r + 1 < rows) b.add_edge(id(r, c), id(r + 1, c), profile.link_delay);
    }
  }
  b.add_edge(client, id(client_at.row, client_at.col), profile.link_delay);
  b.add_edge(server, id(server_at.row, server_at.col), profile.link_delay);
  return std::move(b).build();
}

// client - n1 - ... - nN - server.
inline Topology make_line(int routers, const CapacityProfile& profile) {
  if (routers < 1) throw ConfigError("line needs at least one router");
  Topology::Builder b;
  for (int i = 1; i <= routers; ++i) {
    b.add_router("n" + std::to_string(i), profile.cpu, profile.mem);
  }
  const NodeId client = b.add_client("client");
  const NodeId server = b.add_server("server");
  b.add_edge(client, 0, profile.link_delay);
  for (int i = 0; i + 1 < routers; ++i) {
    b.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(i + 1),
               profile.link_delay);
  }
  b.add_edge(static_cast<NodeId>(routers - 1), server, profile.link_delay);
  return std::move(b).build();
}

}  // namespace c3po
