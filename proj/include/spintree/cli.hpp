#pragma once

// Command-line front end: build | simulate | sweep | linktime | oracle-check.
// Exit codes: 0 ok, 2 usage/config error, 3 runtime/model error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spintree/bt2_analytic.hpp"
#include "spintree/dynamics.hpp"
#include "spintree/errors.hpp"
#include "spintree/io.hpp"
#include "spintree/network.hpp"
#include "spintree/protocol.hpp"
#include "spintree/sweep.hpp"

namespace spintree::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitModel = 3;

/// Fully resolved simulate input.
struct RunConfig {
  ProtocolSetup setup;
  std::optional<std::string> out_path;
  std::string format = "json";
};

namespace detail {

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

inline double number_or(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw InvalidArgument(std::string("\"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

inline std::int64_t integer_or(const Json& j, const char* key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw InvalidArgument(std::string("\"") + key + "\" must be an integer");
  return j.at(key).get<std::int64_t>();
}

inline std::uint64_t nonnegative(std::int64_t n, const char* what) {
  if (n < 0) throw InvalidArgument(std::string(what) + " must be >= 0");
  return static_cast<std::uint64_t>(n);
}

inline ConcatLayout layout_for(std::int64_t trees) {
  if (trees == 2) return two_tree_layout();
  if (trees == 5) return sixteen_output_layout();
  throw InvalidArgument("concatenation supports 2 (chain) or 5 (16-output switch) trees");
}

/// Builder directive -> network. "bt2+aux" with "n"/"leaf" also yields the
/// implied three-step protocol.
inline std::pair<NetworkSpec, std::optional<ProtocolSetup>> network_from_directive(const Json& d) {
  const std::string kind = d.at("builder").get<std::string>();
  const double j0 = number_or(d, "j0", 1.0);
  if (kind == "bt2+aux") {
    const auto n = nonnegative(integer_or(d, "n", 8), "n");
    const auto leaf = integer_or(d, "leaf", 1);
    ProtocolSetup setup = bt2_protocol(static_cast<int>(leaf), n, j0);
    if (d.contains("omega")) {
      const double omega = number_or(d, "omega", 0.0);
      setup.network = attach_sender_aux(build_binary_tree(2, j0, omega), j0, omega);
    }
    NetworkSpec net = setup.network;
    return {std::move(net), std::move(setup)};
  }
  const double omega = number_or(d, "omega", bt2_resonant_omega(j0));
  if (kind == "tree") {
    NetworkSpec net = build_binary_tree(static_cast<int>(integer_or(d, "order", 2)), j0, omega);
    if (d.value("aux", false)) net = attach_sender_aux(net, j0, omega);
    return {std::move(net), std::nullopt};
  }
  if (kind == "modified-bt2") return {build_modified_bt2(j0, omega), std::nullopt};
  if (kind == "concat") return {concatenate_trees(layout_for(integer_or(d, "trees", 2)), j0, omega), std::nullopt};
  throw InvalidArgument("unknown network builder \"" + kind + "\"");
}

inline std::vector<RouteHop> route_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("\"route\" must be a non-empty array of [tree, leaf]");
  std::vector<RouteHop> route;
  for (const auto& hop : j) {
    if (!hop.is_array() || hop.size() != 2) throw InvalidArgument("route entries are [tree, leaf]");
    route.push_back({hop[0].get<int>(), hop[1].get<int>()});
  }
  return route;
}

inline ProtocolSetup protocol_from_directive(const NetworkSpec& net, const Json& d) {
  const std::string kind = d.at("builder").get<std::string>();
  const auto n = nonnegative(integer_or(d, "n", 8), "n");
  if (kind == "bt2") {
    const auto leaf = static_cast<int>(integer_or(d, "leaf", 1));
    if (leaf < 1 || leaf > 4) throw InvalidArgument("leaf must be in 1..4");
    const auto j0 = net.coupling(site_id(0, 0), site_id(0, 1));
    if (!j0 || !net.contains(aux_of(site_id(0, 0)))) {
      throw InvalidArgument("bt2 protocol needs a network with (0,0), (0,1) and (0,0)/aux");
    }
    const double tau = resonance_params(n, std::sqrt(2.0) * *j0).tau;
    return {net, port_triplet(net, site_id(0, 0)),
            {Evolve{tau}, PhaseFlip{{site_id(2, leaf)}}, Evolve{2.0 * tau}},
            ExcitationState::excitation(net, site_id(2, leaf))};
  }
  if (kind == "concat") {
    const auto route = route_from_json(d.contains("route") ? d.at("route") : Json::array({{0, 1}, {1, 1}}));
    return concatenated_protocol(net, route, n);
  }
  throw InvalidArgument("unknown protocol builder \"" + kind + "\"");
}

}  // namespace detail

/// Parses a RunConfig document. Each section is either inline or a builder
/// directive, never both.
inline RunConfig parse_run_config(const Json& cfg) {
  return spintree::detail::rethrow_as_invalid("run config", [&] {
    if (!cfg.is_object() || !cfg.contains("network")) throw InvalidArgument("config needs a \"network\" section");
    const Json& net_section = cfg.at("network");
    const bool net_builder = net_section.contains("builder");
    if (net_builder && (net_section.contains("nodes") || net_section.contains("edges"))) {
      throw InvalidArgument("network section is both inline and a builder directive");
    }
    NetworkSpec net;
    std::optional<ProtocolSetup> implied;
    if (net_builder) {
      std::tie(net, implied) = detail::network_from_directive(net_section);
    } else {
      net = network_from_json(net_section);
    }

    RunConfig rc;
    if (cfg.contains("protocol")) {
      const Json& p = cfg.at("protocol");
      const bool p_builder = p.contains("builder");
      if (p_builder && (p.contains("steps") || p.contains("initial") || p.contains("target"))) {
        throw InvalidArgument("protocol section is both inline and a builder directive");
      }
      rc.setup = p_builder ? detail::protocol_from_directive(net, p) : protocol_from_json(net, p);
    } else if (implied) {
      rc.setup = std::move(*implied);
    } else {
      throw InvalidArgument("config needs a \"protocol\" section for this network");
    }

    if (cfg.contains("output")) {
      const Json& o = cfg.at("output");
      if (o.contains("path")) rc.out_path = o.at("path").get<std::string>();
      if (o.contains("format")) rc.format = o.at("format").get<std::string>();
    }
    if (rc.format != "json" && rc.format != "csv") throw InvalidArgument("output format must be json or csv");
    return rc;
  });
}

struct OracleSummary {
  double max_deviation = 0.0;
  double max_leaked_norm = 0.0;
};

/// Replays a protocol with full-space evolution and compares the final
/// state to the sector run.
inline OracleSummary oracle_replay(const ProtocolSetup& setup, const ExcitationState& sector_final) {
  const FullSpacePropagator full(setup.network);
  OracleSummary s;
  ExcitationState state = setup.initial;
  for (const auto& step : setup.steps) {
    if (const auto* ev = std::get_if<Evolve>(&step)) {
      auto r = full.evolve(state, ev->duration);
      s.max_leaked_norm = std::max(s.max_leaked_norm, r.leaked_norm);
      if (r.leaked_norm > kSectorLeakTolerance) {
        throw SectorLeak("full-space replay leaked norm " + format_double(r.leaked_norm));
      }
      state = std::move(r.state);
    } else {
      state = apply_phase_flip(setup.network, state, std::get<PhaseFlip>(step).targets);
    }
  }
  s.max_deviation = max_deviation(state, sector_final);
  return s;
}

namespace detail {

class Output {
 public:
  Output(std::ostream& fallback, const std::optional<std::string>& path) : os_(&fallback) {
    if (path && !path->empty()) {
      file_.open(*path);
      if (!file_) throw InvalidArgument("cannot write " + *path);
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

inline std::optional<std::string> opt_path(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

}  // namespace detail

/// Runs the CLI on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum state transfer on XY binary-tree spin networks", "spintree"};
  app.require_subcommand(1);

  // build
  auto* build = app.add_subcommand("build", "Emit a network JSON document");
  int tree_order = 0;
  bool with_aux = false, modified = false;
  int concat_trees = 0;
  double b_j0 = 1.0;
  std::optional<double> b_omega;
  std::string b_out;
  auto* tree_opt = build->add_option("--tree", tree_order, "Binary tree of this order");
  build->add_flag("--with-aux", with_aux, "Attach the sender auxiliary spin (with --tree)");
  auto* mod_opt = build->add_flag("--modified-bt2", modified, "Order-2 tree with an auxiliary at every port");
  auto* cat_opt = build->add_option("--concat", concat_trees, "Concatenated trees: 2 (chain) or 5 (16 outputs)");
  tree_opt->excludes(mod_opt)->excludes(cat_opt);
  mod_opt->excludes(cat_opt);
  build->add_option("--j0", b_j0, "Bare coupling");
  build->add_option("--omega", b_omega, "Uniform local field (default: resonant value)");
  build->add_option("--out", b_out, "Output path (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a protocol and report the transfer fidelity");
  std::string s_config, s_out, s_format;
  std::int64_t s_n = 8;
  int s_leaf = 1;
  double s_j0 = 1.0;
  bool s_oracle = false;
  sim->add_option("config", s_config, "RunConfig JSON file (default: order-2 tree protocol from flags)");
  sim->add_option("--n", s_n, "Resonance index");
  sim->add_option("--leaf", s_leaf, "Receiving leaf 1..4");
  sim->add_option("--j0", s_j0, "Bare coupling");
  sim->add_flag("--oracle", s_oracle, "Cross-check against full-space evolution (<= 12 spins)");
  sim->add_option("--format", s_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sim->add_option("--out", s_out, "Output path (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Fidelity and running-minimum infidelity over n = 0..max-n (CSV)");
  std::int64_t w_max = -1;
  std::int64_t w_cap = 200;
  double w_j0 = 1.0;
  unsigned w_threads = 0;
  std::string w_out;
  sweep->add_option("--max-n", w_max, "Largest n")->required();
  sweep->add_option("--numeric-cap", w_cap, "Simulate the protocol for n up to this value");
  sweep->add_option("--j0", w_j0, "Bare coupling");
  sweep->add_option("--threads", w_threads, "Worker threads (0: all cores)");
  sweep->add_option("--out", w_out, "Output path (default stdout)");

  // linktime
  auto* link = app.add_subcommand("linktime", "Optimal singlet-link transfer time");
  std::string l_network, l_link, l_out;
  double l_j0 = 1.0;
  link->add_option("network", l_network, "Network JSON (default: two concatenated trees)");
  link->add_option("--link", l_link, "Label of the link spin (default: first link found)");
  link->add_option("--j0", l_j0, "Bare coupling of the default network");
  link->add_option("--out", l_out, "Output path (default stdout)");

  // oracle-check
  auto* oracle = app.add_subcommand("oracle-check", "Compare sector and full-space evolution on random states");
  std::string o_network, o_out;
  int o_samples = 20;
  std::uint64_t o_seed = 1;
  double o_tmax = 20.0, o_j0 = 1.0;
  oracle->add_option("network", o_network, "Network JSON (default: order-2 tree with sender aux)");
  oracle->add_option("--samples", o_samples, "Random (state, t) pairs");
  oracle->add_option("--seed", o_seed, "RNG seed");
  oracle->add_option("--tmax", o_tmax, "Times drawn uniformly from [0, tmax]");
  oracle->add_option("--j0", o_j0, "Bare coupling of the default network");
  oracle->add_option("--out", o_out, "Output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (build->parsed()) {
      if (!*tree_opt && !modified && !*cat_opt) throw InvalidArgument("build needs --tree, --modified-bt2 or --concat");
      if (with_aux && !*tree_opt) throw InvalidArgument("--with-aux applies to --tree only");
      const double omega = b_omega.value_or(bt2_resonant_omega(b_j0));
      NetworkSpec net;
      if (*tree_opt) {
        net = build_binary_tree(tree_order, b_j0, omega);
        if (with_aux) net = attach_sender_aux(net, b_j0, omega);
      } else if (modified) {
        net = build_modified_bt2(b_j0, omega);
      } else {
        net = concatenate_trees(detail::layout_for(concat_trees), b_j0, omega);
      }
      detail::Output o(out, detail::opt_path(b_out));
      o.stream() << dump(network_to_json(net)) << '\n';
      return kExitOk;
    }

    if (sim->parsed()) {
      RunConfig rc;
      if (!s_config.empty()) {
        rc = parse_run_config(detail::read_json_file(s_config));
      } else {
        rc.setup = bt2_protocol(s_leaf, detail::nonnegative(s_n, "--n"), s_j0);
      }
      if (!s_out.empty()) rc.out_path = s_out;
      if (!s_format.empty()) rc.format = s_format;

      const TransferReport report = run_protocol(rc.setup);
      std::optional<OracleSummary> check;
      if (s_oracle) check = oracle_replay(rc.setup, report.final_state);

      detail::Output o(out, rc.out_path);
      if (rc.format == "csv") {
        o.stream() << "fidelity,amplitude_re,amplitude_im,elapsed_model_time,min_step_norm,max_step_norm";
        if (check) o.stream() << ",oracle_max_deviation,oracle_max_leaked_norm";
        o.stream() << '\n';
        const auto [lo, hi] = std::minmax_element(report.per_step_norms.begin(), report.per_step_norms.end());
        const bool any = !report.per_step_norms.empty();
        o.stream() << format_double(report.fidelity) << ',' << format_double(report.amplitude.real()) << ','
                   << format_double(report.amplitude.imag()) << ',' << format_double(report.elapsed_model_time)
                   << ',' << (any ? format_double(*lo) : "") << ',' << (any ? format_double(*hi) : "");
        if (check) o.stream() << ',' << format_double(check->max_deviation) << ',' << format_double(check->max_leaked_norm);
        o.stream() << '\n';
      } else {
        Json j = report_to_json(rc.setup.network, report);
        if (check) j["oracle"] = {{"max_deviation", check->max_deviation}, {"max_leaked_norm", check->max_leaked_norm}};
        o.stream() << dump(j) << '\n';
      }
      return kExitOk;
    }

    if (sweep->parsed()) {
      SweepOptions opt;
      opt.max_n = detail::nonnegative(w_max, "--max-n");
      opt.numeric_cap = detail::nonnegative(w_cap, "--numeric-cap");
      opt.j0 = w_j0;
      opt.threads = w_threads;
      const auto rows = resonance_sweep(opt);
      detail::Output o(out, detail::opt_path(w_out));
      write_sweep_csv(o.stream(), rows);
      const DecayFit fit = fit_decay_exponent(rows);
      err << "decay fit over " << fit.points << " record points: gamma = " << format_double(fit.gamma)
          << ", c = " << format_double(fit.c) << '\n';
      return kExitOk;
    }

    if (link->parsed()) {
      const NetworkSpec net = l_network.empty()
                                  ? concatenate_trees(two_tree_layout(), l_j0, bt2_resonant_omega(l_j0))
                                  : network_from_json(detail::read_json_file(l_network));
      std::optional<std::size_t> link_index;
      if (!l_link.empty()) {
        link_index = net.at(NodeId(l_link));
      } else {
        for (std::size_t i = 0; i < net.size() && !link_index; ++i) {
          const auto parts = parse_label(net.node(i).str());
          if (parts && parts->kind == LabelParts::Kind::Link) link_index = i;
        }
      }
      if (!link_index) throw InvalidArgument("network has no singlet link");
      // Positive-coupled neighbours are the two port sites; each must have
      // its aux coupled with the opposite sign.
      std::vector<NodeId> sites;
      for (const auto& [k, j] : net.neighbours(*link_index)) {
        if (j <= 0.0) continue;
        const NodeId aux = aux_of(net.node(k));
        const auto back = net.coupling(net.node(*link_index), aux);
        if (back && *back == -j) sites.push_back(net.node(k));
      }
      if (sites.size() != 2) throw InvalidArgument(net.node(*link_index).str() + " is not a singlet link");
      const SectorHamiltonian h(net);
      const LinkTransfer lt = find_link_transfer(h, port_singlet(net, sites[0]), port_singlet(net, sites[1]));
      Json j = {{"link", net.node(*link_index).str()},
                {"from", sites[0].str()},
                {"to", sites[1].str()},
                {"time", lt.time},
                {"amplitude_modulus", lt.modulus}};
      detail::Output o(out, detail::opt_path(l_out));
      o.stream() << dump(j) << '\n';
      return kExitOk;
    }

    if (oracle->parsed()) {
      if (o_samples < 1) throw InvalidArgument("--samples must be >= 1");
      const NetworkSpec net = o_network.empty() ? bt2_protocol(1, 0, o_j0).network
                                                : network_from_json(detail::read_json_file(o_network));
      const SectorHamiltonian h(net);
      const FullSpacePropagator full(net);
      std::mt19937_64 rng(o_seed);
      std::normal_distribution<double> gauss;
      std::uniform_real_distribution<double> when(0.0, o_tmax);
      double worst = 0.0, leak = 0.0;
      for (int s = 0; s < o_samples; ++s) {
        ExcitationState psi = ExcitationState::zero(net.size());
        psi.vacuum() = {gauss(rng), gauss(rng)};
        for (std::size_t i = 0; i < net.size(); ++i) psi.amps()(static_cast<Eigen::Index>(i)) = {gauss(rng), gauss(rng)};
        psi = psi.normalized();
        const double t = when(rng);
        const auto r = full.evolve(psi, t);
        leak = std::max(leak, r.leaked_norm);
        worst = std::max(worst, max_deviation(r.state, evolve(h, psi, t)));
      }
      const bool pass = worst < 1e-9 && leak <= kSectorLeakTolerance;
      Json j = {{"spins", net.size()},
                {"samples", o_samples},
                {"max_deviation", worst},
                {"max_leaked_norm", leak},
                {"pass", pass}};
      detail::Output o(out, detail::opt_path(o_out));
      o.stream() << dump(j) << '\n';
      if (leak > kSectorLeakTolerance) {
        err << "error: sector leak " << format_double(leak) << '\n';
        return kExitModel;
      }
      return pass ? kExitOk : kExitModel;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitModel;
  }
  return kExitUsage;
}

}  // namespace spintree::cli
