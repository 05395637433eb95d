#pragma once

// Line-oriented topology files:
//
//   # comment
//   node <id> [cpu=<float>] [mem=<float>]   router, capacities default to 1
//   client <id>                             client endpoint
//   server <id>                             server endpoint (exactly one)
//   edge <id> <id> [delay_ms=<float>]       undirected link, default 1 ms
//
// Ids are arbitrary whitespace-free tokens; NodeIds follow declaration order.
// Edges may reference nodes declared later. A repeated edge is ignored with a
// warning.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "c3po/errors.hpp"
#include "c3po/format.hpp"
#include "c3po/topology.hpp"

namespace c3po {

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

struct KeyValue {
  std::string key;
  double value = 0.0;
};

inline KeyValue parse_key_value(const std::string& token, const std::string& where) {
  const auto eq = token.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(where + ": expected key=value, got '" + token + "'");
  }
  KeyValue kv{token.substr(0, eq), 0.0};
  auto v = parse_double(std::string_view(token).substr(eq + 1));
  if (!v) throw ConfigError(where + ": bad number in '" + token + "'");
  kv.value = *v;
  return kv;
}

}  // namespace detail

inline Topology parse_topology(std::istream& in, const std::string& source,
                               std::vector<std::string>* warnings = nullptr) {
  struct PendingEdge {
    std::string a, b;
    double delay;
    std::string where;
  };
  Topology::Builder builder;
  std::vector<PendingEdge> edges;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    const std::string& kind = tok[0];
    try {
      if (kind == "node") {
        if (tok.size() < 2) throw ConfigError(where + ": node needs an id");
        double cpu = 1.0, mem = 1.0;
        for (std::size_t i = 2; i < tok.size(); ++i) {
          const auto kv = detail::parse_key_value(tok[i], where);
          if (kv.key == "cpu") {
            cpu = kv.value;
          } else if (kv.key == "mem") {
            mem = kv.value;
          } else {
            throw ConfigError(where + ": unknown key '" + kv.key + "'");
          }
        }
        builder.add_router(tok[1], cpu, mem);
      } else if (kind == "client" || kind == "server") {
        if (tok.size() != 2) throw ConfigError(where + ": " + kind + " takes one id");
        if (kind == "client") {
          builder.add_client(tok[1]);
        } else {
          builder.add_server(tok[1]);
        }
      } else if (kind == "edge") {
        if (tok.size() < 3) throw ConfigError(where + ": edge needs two ids");
        double delay_ms = 1.0;
        for (std::size_t i = 3; i < tok.size(); ++i) {
          const auto kv = detail::parse_key_value(tok[i], where);
          if (kv.key != "delay_ms") {
            throw ConfigError(where + ": unknown key '" + kv.key + "'");
          }
          delay_ms = kv.value;
        }
        edges.push_back({tok[1], tok[2], delay_ms / 1e3, where});
      } else {
        throw ConfigError(where + ": unknown declaration '" + kind + "'");
      }
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind(source, 0) == 0) throw;
      throw ConfigError(where + ": " + msg);
    }
  }

  for (const auto& e : edges) {
    auto a = builder.find(e.a);
    auto b = builder.find(e.b);
    if (!a) throw ConfigError(e.where + ": edge references undeclared node '" + e.a + "'");
    if (!b) throw ConfigError(e.where + ": edge references undeclared node '" + e.b + "'");
    try {
      if (!builder.add_edge(*a, *b, e.delay) && warnings) {
        warnings->push_back(e.where + ": duplicate edge " + e.a + " " + e.b + " ignored");
      }
    } catch (const ConfigError& err) {
      throw ConfigError(e.where + ": " + err.what());
    }
  }
  try {
    return std::move(builder).build();
  } catch (const ConfigError& err) {
    throw ConfigError(source + ": " + err.what());
  }
}

inline Topology load_topology(const std::filesystem::path& path,
                              std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open topology file '" + path.string() + "'");
  return parse_topology(in, path.string(), warnings);
}

// Millisecond text that parses back to the same bits for any delay of the form
// ms / 1000, which covers every delay read from a file.
// Not every double is ms / 1000 of its own scaled value, so a few neighbours
// of seconds * 1000 are tried as well.
inline std::string delay_ms_text(double seconds) {
  char buf[64];
  const double scaled = seconds * 1e3;
  for (int precision = 1; precision <= 17; ++precision) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), scaled,
                                   std::chars_format::general, precision);
    if (ec != std::errc{}) break;
    auto back = parse_double(std::string_view(buf, end - buf));
    if (back && *back / 1e3 == seconds) return std::string(buf, end);
  }
  double up = scaled, down = scaled;
  for (int step = 0; step < 8; ++step) {
    up = std::nextafter(up, HUGE_VAL);
    down = std::nextafter(down, -HUGE_VAL);
    for (double candidate : {up, down}) {
      if (candidate / 1e3 == seconds) return format_double(candidate);
    }
  }
  return format_double(scaled);
}

// Writes declarations in NodeId order, so parse_topology(write_topology(t)) == t.
inline void write_topology(std::ostream& out, const Topology& t) {
  for (const auto& n : t.nodes()) {
    switch (n.role) {
      case NodeRole::Router:
        out << "node " << n.name << " cpu=" << format_double(n.cpu_capacity)
            << " mem=" << format_double(n.mem_capacity) << '\n';
        break;
      case NodeRole::Client:
        out << "client " << n.name << '\n';
        break;
      case NodeRole::Server:
        out << "server " << n.name << '\n';
        break;
    }
  }
  for (NodeId a = 0; a < t.node_count(); ++a) {
    for (const auto& l : t.links(a)) {
      if (l.to < a) continue;
      out << "edge " << t.node(a).name << ' ' << t.node(l.to).name
          << " delay_ms=" << delay_ms_text(l.delay) << '\n';
    }
  }
}

inline std::string to_topology_text(const Topology& t) {
  std::ostringstream out;
  write_topology(out, t);
  return out.str();
}

}  // namespace c3po
