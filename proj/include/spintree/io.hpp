#pragma once

// JSON documents for networks, states, protocols and reports, and a
// writer that prints every float at 17 significant digits so output is
// byte-stable across runs.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "spintree/dynamics.hpp"
#include "spintree/errors.hpp"
#include "spintree/network.hpp"
#include "spintree/protocol.hpp"

namespace spintree {

using Json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Short numeric arrays ([re, im] pairs) stay on one line.
      const bool flat = j.size() <= 2 && std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_number(); });
      if (flat || indent == 0) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << (indent > 0 ? ", " : ",");
          write_json(os, j[i], indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

template <class F>
auto rethrow_as_invalid(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string(what) + ": " + e.what());
  }
}

inline Json complex_json(Complex c) { return Json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidArgument("complex number must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Pretty-printed (indent > 0) or compact JSON with fixed float formatting.
inline std::string dump(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  return os.str();
}

/// {"nodes":[{"id","omega"}...], "edges":[{"a","b","j"}...]}, nodes in index order.
inline Json network_to_json(const NetworkSpec& net) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < net.size(); ++i) nodes.push_back({{"id", net.node(i).str()}, {"omega", net.omega(i)}});
  Json edges = Json::array();
  for (const Edge& e : net.edges()) {
    edges.push_back({{"a", net.node(e.a).str()}, {"b", net.node(e.b).str()}, {"j", e.j}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline NetworkSpec network_from_json(const Json& j) {
  return detail::rethrow_as_invalid("network JSON", [&] {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges")) {
      throw InvalidArgument("network JSON needs \"nodes\" and \"edges\"");
    }
    NetworkSpec net;
    for (const auto& n : j.at("nodes")) net.add_node(NodeId(n.at("id").get<std::string>()), n.at("omega").get<double>());
    for (const auto& e : j.at("edges")) {
      net.add_edge(NodeId(e.at("a").get<std::string>()), NodeId(e.at("b").get<std::string>()), e.at("j").get<double>());
    }
    return net;
  });
}

/// {"vacuum":[re,im], "amps":{label:[re,im]...}}; zero amplitudes are omitted.
inline Json state_to_json(const NetworkSpec& net, const ExcitationState& s) {
  if (s.dimension() != net.size()) throw InvalidArgument("state dimension does not match network");
  Json amps = Json::object();
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (s.amp(i) != Complex{0.0, 0.0}) amps[net.node(i).str()] = detail::complex_json(s.amp(i));
  }
  return {{"vacuum", detail::complex_json(s.vacuum())}, {"amps", std::move(amps)}};
}

/// Omitted labels mean zero amplitude.
inline ExcitationState state_from_json(const NetworkSpec& net, const Json& j) {
  return detail::rethrow_as_invalid("state JSON", [&] {
    if (!j.is_object()) throw InvalidArgument("state JSON must be an object");
    ExcitationState s = ExcitationState::zero(net.size());
    if (j.contains("vacuum")) s.vacuum() = detail::complex_from_json(j.at("vacuum"));
    if (j.contains("amps")) {
      for (const auto& [label, value] : j.at("amps").items()) {
        s.amps()(static_cast<Eigen::Index>(net.at(NodeId(label)))) = detail::complex_from_json(value);
      }
    }
    return s;
  });
}

inline Json steps_to_json(std::span<const ProtocolStep> steps) {
  Json out = Json::array();
  for (const auto& step : steps) {
    if (const auto* ev = std::get_if<Evolve>(&step)) {
      out.push_back({{"evolve", ev->duration}});
    } else {
      Json labels = Json::array();
      for (const NodeId& id : std::get<PhaseFlip>(step).targets) labels.push_back(id.str());
      out.push_back({{"flip", std::move(labels)}});
    }
  }
  return out;
}

inline std::vector<ProtocolStep> steps_from_json(const Json& j) {
  return detail::rethrow_as_invalid("protocol steps", [&] {
    if (!j.is_array()) throw InvalidArgument("\"steps\" must be an array");
    std::vector<ProtocolStep> steps;
    for (const auto& s : j) {
      if (!s.is_object() || s.size() != 1) throw InvalidArgument("each step needs exactly one of evolve/flip");
      if (s.contains("evolve")) {
        steps.emplace_back(Evolve{s.at("evolve").get<double>()});
      } else if (s.contains("flip")) {
        PhaseFlip flip;
        for (const auto& label : s.at("flip")) flip.targets.emplace_back(label.get<std::string>());
        steps.emplace_back(std::move(flip));
      } else {
        throw InvalidArgument("unknown protocol step " + s.dump());
      }
    }
    return steps;
  });
}

/// {"steps":[...], "initial": state, "target": state}.
inline Json protocol_to_json(const ProtocolSetup& p) {
  return {{"steps", steps_to_json(p.steps)},
          {"initial", state_to_json(p.network, p.initial)},
          {"target", state_to_json(p.network, p.target)}};
}

inline ProtocolSetup protocol_from_json(const NetworkSpec& net, const Json& j) {
  return detail::rethrow_as_invalid("protocol JSON", [&] {
    if (!j.is_object() || !j.contains("steps") || !j.contains("initial") || !j.contains("target")) {
      throw InvalidArgument("protocol JSON needs \"steps\", \"initial\" and \"target\"");
    }
    return ProtocolSetup{net, state_from_json(net, j.at("initial")), steps_from_json(j.at("steps")),
                         state_from_json(net, j.at("target"))};
  });
}

inline Json report_to_json(const NetworkSpec& net, const TransferReport& r) {
  Json norms = Json::array();
  for (double x : r.per_step_norms) norms.push_back(x);
  return {{"fidelity", r.fidelity},
          {"amplitude", detail::complex_json(r.amplitude)},
          {"per_step_norms", std::move(norms)},
          {"elapsed_model_time", r.elapsed_model_time},
          {"final_state", state_to_json(net, r.final_state)}};
}

}  // namespace spintree
