#pragma once

// Timed protocols on spin networks: free evolutions interleaved with
// instantaneous phase flips, the three-step order-2 tree transfer, port
// trigger/trap operations and singlet-link routing across concatenated trees.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "spintree/bt2_analytic.hpp"
#include "spintree/dynamics.hpp"
#include "spintree/errors.hpp"
#include "spintree/network.hpp"

namespace spintree {

struct Evolve {
  double duration = 0.0;
};

struct PhaseFlip {
  std::vector<NodeId> targets;
};

using ProtocolStep = std::variant<Evolve, PhaseFlip>;

struct TransferReport {
  ExcitationState final_state;
  /// <target|final>, kept for phase-sensitive analysis.
  Complex amplitude{0.0, 0.0};
  double fidelity = 0.0;
  std::vector<double> per_step_norms;
  double elapsed_model_time = 0.0;
};

/// Everything needed to run one protocol.
struct ProtocolSetup {
  NetworkSpec network;
  ExcitationState initial;
  std::vector<ProtocolStep> steps;
  ExcitationState target;
};

/// Negates the amplitude on each target node; the vacuum and every other
/// amplitude are untouched. Repeated targets count once.
inline ExcitationState apply_phase_flip(const NetworkSpec& net, const ExcitationState& state,
                                        std::span<const NodeId> targets) {
  if (state.dimension() != net.size()) throw InvalidArgument("state dimension does not match network");
  std::set<std::size_t> indices;
  for (const NodeId& id : targets) indices.insert(net.at(id));
  ExcitationState out = state;
  for (std::size_t i : indices) out.amps()(static_cast<Eigen::Index>(i)) *= -1.0;
  return out;
}

inline ExcitationState apply_phase_flip(const NetworkSpec& net, const ExcitationState& state,
                                        std::initializer_list<NodeId> targets) {
  return apply_phase_flip(net, state, std::span<const NodeId>(targets.begin(), targets.size()));
}

/// Phase flip on a port's auxiliary spin: swaps the port singlet and triplet.
/// Used both to release a stored qubit and to trap an arriving one.
inline ExcitationState trigger_release(const NetworkSpec& net, const ExcitationState& state, const NodeId& aux) {
  return apply_phase_flip(net, state, {aux});
}

/// (|1_site> - |1_site/aux>) / sqrt2: decoupled from the tree, stores a qubit.
inline ExcitationState port_singlet(const NetworkSpec& net, const NodeId& site) {
  const double r2 = 1.0 / std::sqrt(2.0);
  return r2 * (ExcitationState::excitation(net, site) - ExcitationState::excitation(net, aux_of(site)));
}

/// (|1_site> + |1_site/aux>) / sqrt2: couples to the tree with sqrt2 times the bare coupling.
inline ExcitationState port_triplet(const NetworkSpec& net, const NodeId& site) {
  const double r2 = 1.0 / std::sqrt(2.0);
  return r2 * (ExcitationState::excitation(net, site) + ExcitationState::excitation(net, aux_of(site)));
}

inline void validate_step(const NetworkSpec& net, const ProtocolStep& step) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Evolve>) {
          if (!std::isfinite(s.duration) || s.duration < 0.0) {
            throw InvalidArgument("evolve duration must be finite and >= 0");
          }
        } else {
          if (s.targets.empty()) throw InvalidArgument("phase flip needs at least one target");
          for (const NodeId& id : s.targets) {
            if (!net.contains(id)) throw InvalidArgument("phase flip target " + id.str() + " not in network");
          }
        }
      },
      step);
}

/// Folds the steps over the initial state, recording the norm after each.
inline TransferReport run_protocol(const SectorHamiltonian& h, const ExcitationState& initial,
                                   std::span<const ProtocolStep> steps, const ExcitationState& target) {
  const NetworkSpec& net = h.network();
  if (initial.dimension() != net.size() || target.dimension() != net.size()) {
    throw InvalidArgument("initial/target dimension does not match network size " + std::to_string(net.size()));
  }
  initial.check_normalized();
  target.check_normalized();
  for (const auto& step : steps) validate_step(net, step);

  TransferReport report;
  ExcitationState state = initial;
  for (const auto& step : steps) {
    if (const auto* ev = std::get_if<Evolve>(&step)) {
      state = evolve(h, state, ev->duration);
      report.elapsed_model_time += ev->duration;
    } else {
      state = apply_phase_flip(net, state, std::get<PhaseFlip>(step).targets);
    }
    report.per_step_norms.push_back(state.norm());
  }
  report.amplitude = overlap(target, state);
  report.fidelity = std::min(1.0, std::norm(report.amplitude));
  report.final_state = std::move(state);
  return report;
}

inline TransferReport run_protocol(const NetworkSpec& net, const ExcitationState& initial,
                                   std::span<const ProtocolStep> steps, const ExcitationState& target) {
  return run_protocol(SectorHamiltonian(net), initial, steps, target);
}

inline TransferReport run_protocol(const ProtocolSetup& setup) {
  return run_protocol(setup.network, setup.initial, setup.steps, setup.target);
}

/// Resonant field for an order-2 tree with bare coupling j0 (chain coupling sqrt2 j0).
inline double bt2_resonant_omega(double j0) { return resonance_params(0, std::sqrt(2.0) * j0).omega; }

/// BT2 + sender aux at resonance; starts from the released triplet v0_new,
/// evolves tau_n, flips leaf (2,b), evolves 2 tau_n; target |1_(2,b)>.
inline ProtocolSetup bt2_protocol(int leaf, std::uint64_t n, double j0) {
  if (leaf < 1 || leaf > 4) throw InvalidArgument("leaf must be in 1..4, got " + std::to_string(leaf));
  if (!(j0 > 0.0)) throw InvalidArgument("j0 must be positive");
  const auto [omega, tau] = resonance_params(n, std::sqrt(2.0) * j0);
  NetworkSpec net = attach_sender_aux(build_binary_tree(2, j0, omega), j0, omega);
  ExcitationState initial = port_triplet(net, site_id(0, 0));
  ExcitationState target = ExcitationState::excitation(net, site_id(2, leaf));
  std::vector<ProtocolStep> steps{Evolve{tau}, PhaseFlip{{site_id(2, leaf)}}, Evolve{2.0 * tau}};
  return {std::move(net), std::move(initial), std::move(steps), std::move(target)};
}

struct LinkTransfer {
  double time = 0.0;
  Complex amplitude{0.0, 0.0};
  double modulus = 0.0;
};

/// Required modulus of the singlet-to-singlet amplitude at the optimum.
inline constexpr double kPerfectTransferThreshold = 1.0 - 1e-9;

/// Smallest t > 0 maximizing |<s_in|U(t)|s_out>|: coarse scan over
/// (0, 4 pi / J] then golden-section refinement. J is read off the
/// Hamiltonian as |off-diagonal part of H s_out| / sqrt2, which for a
/// singlet link equals the link coupling.
inline LinkTransfer find_link_transfer(const SectorHamiltonian& h, const ExcitationState& s_out,
                                       const ExcitationState& s_in) {
  if (s_out.dimension() != h.dimension() || s_in.dimension() != h.dimension()) {
    throw InvalidArgument("singlet dimension does not match network");
  }
  const Eigen::VectorXcd hs = h.matrix().cast<Complex>() * s_out.amps();
  const Complex diag = s_out.amps().dot(hs);
  const double hop = (hs - diag * s_out.amps()).norm() / s_out.amps().norm();
  if (hop == 0.0) throw NoPerfectTransfer("sending singlet is decoupled from every other state");
  const double j = hop / std::sqrt(2.0);

  auto modulus = [&](double t) { return std::abs(overlap(s_in, evolve(h, s_out, t))); };

  constexpr int kGrid = 2000;
  const double horizon = 4.0 * std::numbers::pi / j;
  const double dt = horizon / kGrid;
  std::vector<double> f(kGrid + 2);
  for (int i = 0; i <= kGrid + 1; ++i) f[static_cast<std::size_t>(i)] = modulus(dt * i);
  const double peak = *std::max_element(f.begin() + 1, f.begin() + kGrid + 1);
  int best = 1;
  for (int i = 1; i <= kGrid; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (f[k] >= f[k - 1] && f[k] >= f[k + 1] && f[k] >= peak - 1e-3) {
      best = i;
      break;
    }
  }

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = dt * (best - 1);
  double hi = dt * (best + 1);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = modulus(x1);
  double f2 = modulus(x2);
  while (hi - lo > 1e-10 * hi) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = modulus(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = modulus(x1);
    }
  }
  LinkTransfer out;
  out.time = 0.5 * (lo + hi);
  out.amplitude = overlap(s_in, evolve(h, s_out, out.time));
  out.modulus = std::abs(out.amplitude);
  if (out.modulus < kPerfectTransferThreshold) {
    throw NoPerfectTransfer("best singlet transfer modulus " + std::to_string(out.modulus) + " at t = " +
                            std::to_string(out.time) + " is below 1 - 1e-9");
  }
  return out;
}

inline double link_transfer_time(const NetworkSpec& net, const ExcitationState& s_out, const ExcitationState& s_in) {
  return find_link_transfer(SectorHamiltonian(net), s_out, s_in).time;
}

/// One stop of a route: tree index and the output leaf taken from it.
struct RouteHop {
  int tree = 0;
  int leaf = 1;
};

namespace detail {

/// Link node joining output (2,leaf) of `from` to the input of `to`, or throws.
inline NodeId find_link(const NetworkSpec& net, int from, int leaf, int to) {
  const NodeId out_site = in_tree(from, site_id(2, leaf));
  const NodeId in_site = in_tree(to, site_id(0, 0));
  for (const NodeId* id : {&out_site, &in_site}) {
    if (!net.contains(*id) || !net.contains(aux_of(*id))) {
      throw InvalidArgument("route references missing port " + id->str());
    }
  }
  for (const auto& [k, j] : net.neighbours(net.at(out_site))) {
    const NodeId& cand = net.node(k);
    const auto a = net.coupling(cand, aux_of(out_site));
    const auto b = net.coupling(cand, in_site);
    const auto c = net.coupling(cand, aux_of(in_site));
    if (a && b && c && *a == -j && *b == j && *c == -j) return cand;
  }
  throw InvalidArgument("no singlet link from " + out_site.str() + " to " + in_site.str());
}

}  // namespace detail

/// Per-stage schedule on a concatenated network: release the sender
/// singlet, run the three-step transfer onto the chosen output triplet
/// (flipping site and aux together), trap it into the output singlet, then
/// move across the singlet link to the next tree. Starts from the root's
/// stored sender singlet; the target is the stored singlet at the last
/// tree's chosen output.
inline ProtocolSetup concatenated_protocol(const SectorHamiltonian& h, std::span<const RouteHop> route,
                                           std::span<const std::uint64_t> stage_n) {
  const NetworkSpec& net = h.network();
  if (route.empty()) throw InvalidArgument("route must contain at least one tree");
  if (stage_n.size() != route.size()) throw InvalidArgument("need one n per route stage");
  for (const auto& hop : route) {
    if (hop.leaf < 1 || hop.leaf > 4) throw InvalidArgument("route leaf must be in 1..4");
  }

  std::vector<ProtocolStep> steps;
  for (std::size_t k = 0; k < route.size(); ++k) {
    const int t = route[k].tree;
    const NodeId entry = in_tree(t, site_id(0, 0));
    const NodeId exit = in_tree(t, site_id(2, route[k].leaf));
    for (const NodeId& id : {entry, aux_of(entry), in_tree(t, site_id(0, 1)), exit, aux_of(exit)}) {
      if (!net.contains(id)) throw InvalidArgument("route references missing node " + id.str());
    }
    const auto entry_coupling = net.coupling(entry, in_tree(t, site_id(0, 1)));
    if (!entry_coupling) throw InvalidArgument("tree " + std::to_string(t) + " has no (0,0)-(0,1) edge");
    const double j0 = *entry_coupling;
    if (!(j0 > 0.0)) throw InvalidArgument("tree " + std::to_string(t) + " has non-positive entry coupling");
    const double tau = resonance_params(stage_n[k], std::sqrt(2.0) * j0).tau;

    steps.emplace_back(PhaseFlip{{aux_of(entry)}});
    steps.emplace_back(Evolve{tau});
    steps.emplace_back(PhaseFlip{{exit, aux_of(exit)}});
    steps.emplace_back(Evolve{2.0 * tau});
    steps.emplace_back(PhaseFlip{{aux_of(exit)}});
    if (k + 1 < route.size()) {
      const int next = route[k + 1].tree;
      detail::find_link(net, t, route[k].leaf, next);
      const LinkTransfer link =
          find_link_transfer(h, port_singlet(net, exit), port_singlet(net, in_tree(next, site_id(0, 0))));
      steps.emplace_back(Evolve{link.time});
    }
  }
  const NodeId first = in_tree(route.front().tree, site_id(0, 0));
  const NodeId last = in_tree(route.back().tree, site_id(2, route.back().leaf));
  return {net, port_singlet(net, first), std::move(steps), port_singlet(net, last)};
}

inline ProtocolSetup concatenated_protocol(const SectorHamiltonian& h, std::span<const RouteHop> route,
                                           std::uint64_t n) {
  const std::vector<std::uint64_t> stage_n(route.size(), n);
  return concatenated_protocol(h, route, stage_n);
}

inline ProtocolSetup concatenated_protocol(const NetworkSpec& net, std::span<const RouteHop> route,
                                           std::uint64_t n) {
  return concatenated_protocol(SectorHamiltonian(net), route, n);
}

}  // namespace spintree
