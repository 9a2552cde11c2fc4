#pragma once

// Closed-form analysis of the order-2 tree with a sender auxiliary spin:
// symmetry-adapted basis, the effective uniform 4-chain, resonance
// parameters and the exact three-step transfer fidelity.

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <set>
#include <string>
#include <utility>

#include "spintree/dynamics.hpp"
#include "spintree/errors.hpp"
#include "spintree/network.hpp"

namespace spintree {

/// Orthonormal basis of the 9-dim sector of BT2+aux that block-diagonalizes
/// the Hamiltonian: {v0_new, v1, v2, v3} (4-chain), {v4, v5} (2-chain),
/// {v6, v7} (decoupled leaf combinations) and the sender singlet s0.
class SymmetryBasis {
 public:
  static constexpr std::size_t kSize = 9;

  explicit SymmetryBasis(std::array<ExcitationState, kSize> vectors) : vectors_(std::move(vectors)) {}

  const ExcitationState& v0_new() const { return vectors_[0]; }
  /// v1..v7 for k = 1..7.
  const ExcitationState& v(std::size_t k) const {
    if (k < 1 || k > 7) throw InvalidArgument("basis index must be in 1..7");
    return vectors_[k];
  }
  const ExcitationState& singlet() const { return vectors_[8]; }

  /// Block order: v0_new, v1, v2, v3, v4, v5, v6, v7, s0.
  const std::array<ExcitationState, kSize>& ordered() const noexcept { return vectors_; }

  /// Columns are the basis vectors' sector amplitudes.
  Eigen::MatrixXcd as_matrix() const {
    const auto dim = static_cast<Eigen::Index>(vectors_[0].dimension());
    Eigen::MatrixXcd m(dim, static_cast<Eigen::Index>(kSize));
    for (std::size_t k = 0; k < kSize; ++k) m.col(static_cast<Eigen::Index>(k)) = vectors_[k].amps();
    return m;
  }

 private:
  std::array<ExcitationState, kSize> vectors_;
};

namespace detail {

inline void require_bt2_with_aux(const NetworkSpec& net) {
  const std::array<NodeId, 9> expected{site_id(0, 0), site_id(0, 1), site_id(1, 1),
                                       site_id(1, 2), site_id(2, 1), site_id(2, 2),
                                       site_id(2, 3), site_id(2, 4), aux_of(site_id(0, 0))};
  if (net.size() != expected.size()) {
    throw InvalidArgument("expected the 9-node order-2 tree with sender aux, got " + std::to_string(net.size()) +
                          " nodes");
  }
  for (const NodeId& id : expected) {
    if (!net.contains(id)) throw InvalidArgument("order-2 tree with aux is missing node " + id.str());
  }
  const std::array<std::pair<NodeId, NodeId>, 8> links{{{site_id(0, 0), site_id(0, 1)},
                                                        {site_id(0, 1), site_id(1, 1)},
                                                        {site_id(0, 1), site_id(1, 2)},
                                                        {site_id(1, 1), site_id(2, 1)},
                                                        {site_id(1, 1), site_id(2, 2)},
                                                        {site_id(1, 2), site_id(2, 3)},
                                                        {site_id(1, 2), site_id(2, 4)},
                                                        {aux_of(site_id(0, 0)), site_id(0, 1)}}};
  if (net.edges().size() != links.size()) throw InvalidArgument("order-2 tree with aux must have 8 edges");
  for (const auto& [a, b] : links) {
    if (!net.coupling(a, b)) throw InvalidArgument("order-2 tree with aux is missing edge " + a.str() + "-" + b.str());
  }
}

}  // namespace detail

inline SymmetryBasis symmetry_basis(const NetworkSpec& net) {
  detail::require_bt2_with_aux(net);
  const double r2 = 1.0 / std::sqrt(2.0);
  auto ket = [&](std::initializer_list<std::pair<NodeId, double>> terms) {
    ExcitationState s = ExcitationState::zero(net.size());
    for (const auto& [id, c] : terms) s.amps()(static_cast<Eigen::Index>(net.at(id))) = c;
    return s;
  };
  const NodeId s00 = site_id(0, 0), s01 = site_id(0, 1), s11 = site_id(1, 1), s12 = site_id(1, 2);
  const NodeId s21 = site_id(2, 1), s22 = site_id(2, 2), s23 = site_id(2, 3), s24 = site_id(2, 4);
  const NodeId aux = aux_of(s00);
  return SymmetryBasis({
      ket({{s00, r2}, {aux, r2}}),
      ket({{s01, 1.0}}),
      ket({{s11, r2}, {s12, r2}}),
      ket({{s21, 0.5}, {s22, 0.5}, {s23, 0.5}, {s24, 0.5}}),
      ket({{s11, r2}, {s12, -r2}}),
      ket({{s21, 0.5}, {s22, 0.5}, {s23, -0.5}, {s24, -0.5}}),
      ket({{s21, 0.5}, {s22, -0.5}, {s23, 0.5}, {s24, -0.5}}),
      ket({{s21, 0.5}, {s22, -0.5}, {s23, -0.5}, {s24, 0.5}}),
      ket({{s00, r2}, {aux, -r2}}),
  });
}

/// Uniform 4-site chain with on-site energy omega and hopping j.
inline Eigen::Matrix4d chain4_matrix(double omega, double j) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = omega;
  for (int i = 0; i < 3; ++i) h(i, i + 1) = h(i + 1, i) = j;
  return h;
}

struct H4System {
  double omega = 0.0;
  double j = 0.0;
  /// E1..E4 = omega -/+ (sqrt5 + 1) j / 2 (outer), omega -/+ (sqrt5 - 1) j / 2 (inner).
  std::array<double, 4> energies{};
  /// e1..e4 over (v0_new, v1, v2, v3).
  std::array<Eigen::Vector4d, 4> vectors{};

  Eigen::Matrix4d matrix() const { return chain4_matrix(omega, j); }
};

/// Closed-form eigen-system of the uniform 4-chain (no numerical diagonalization).
inline H4System h4_eigensystem(double omega, double j) {
  if (j == 0.0) throw InvalidArgument("chain coupling must be nonzero");
  const double s5 = std::sqrt(5.0);
  const double golden = (1.0 + s5) / 2.0;
  const double conj = (1.0 - s5) / 2.0;
  const double outer = 1.0 / std::sqrt(5.0 + s5);
  const double inner = 1.0 / std::sqrt(5.0 - s5);
  H4System sys;
  sys.omega = omega;
  sys.j = j;
  sys.energies = {omega - (s5 + 1.0) * j / 2.0, omega - (s5 - 1.0) * j / 2.0, omega + (s5 - 1.0) * j / 2.0,
                  omega + (s5 + 1.0) * j / 2.0};
  sys.vectors = {Eigen::Vector4d(-1.0, golden, -golden, 1.0) * outer,
                 Eigen::Vector4d(1.0, conj, conj, 1.0) * inner,
                 Eigen::Vector4d(-1.0, conj, -conj, 1.0) * inner,
                 Eigen::Vector4d(1.0, golden, golden, 1.0) * outer};
  return sys;
}

struct ResonanceParams {
  double omega;
  double tau;
};

/// omega = (7 + sqrt5) j / 2, tau_n = (2n + 1) pi / j.
inline ResonanceParams resonance_params(std::uint64_t n, double j) {
  if (!(j > 0.0)) throw InvalidArgument("chain coupling must be positive");
  return {(7.0 + std::sqrt(5.0)) * j / 2.0, static_cast<double>(2 * n + 1) * std::numbers::pi / j};
}

/// <v3| U(tau) |v0_new> through the closed-form spectrum.
inline Complex transfer_amplitude(const H4System& sys, double tau) {
  const double s5 = std::sqrt(5.0);
  auto phase = [&](std::size_t k) { return std::polar(1.0, -sys.energies[k] * tau); };
  return (s5 - 5.0) / 20.0 * (phase(0) - phase(3)) + (s5 + 5.0) / 20.0 * (phase(1) - phase(2));
}

namespace detail {

using WideFloat = boost::multiprecision::cpp_bin_float_50;

inline const WideFloat& sqrt5_wide() {
  static const WideFloat value = boost::multiprecision::sqrt(WideFloat(5));
  return value;
}

}  // namespace detail

/// phi_n = sqrt5 (2n+1) pi expressed in turns and reduced to [-1/2, 1/2).
/// The reduction runs in 50-digit arithmetic; double precision would lose
/// all significant bits of the residue for the large n where it matters.
inline double phase_residue_turns(std::uint64_t n) {
  using detail::WideFloat;
  const WideFloat half_turns = detail::sqrt5_wide() * WideFloat(2 * n + 1) / 2;
  WideFloat frac = half_turns - boost::multiprecision::floor(half_turns);
  if (frac >= WideFloat(0.5)) frac -= 1;
  return frac.convert_to<double>();
}

/// phi_n mod 2 pi in [-pi, pi).
inline double reduced_phase(std::uint64_t n) { return 2.0 * std::numbers::pi * phase_residue_turns(n); }

/// Reference closed form F = cos^2(phi/2) [3 - cos^2(phi/2)]^2 / 4. It does
/// not equal the fidelity of the simulated three-step protocol; see
/// protocol_fidelity_at_phase for that.
inline double fidelity_at_phase(double phi) {
  const double c = std::cos(phi / 2.0);
  const double c2 = c * c;
  return 0.25 * c2 * (3.0 - c2) * (3.0 - c2);
}

/// 1 - F written as s^4 (3 + s^2) / 4 with s = sin(phi/2), which keeps full
/// relative precision when F is within rounding of 1.
inline double infidelity_at_phase(double phi) {
  const double s = std::sin(phi / 2.0);
  const double s2 = s * s;
  return 0.25 * s2 * s2 * (3.0 + s2);
}

inline double analytic_fidelity(std::uint64_t n) { return fidelity_at_phase(reduced_phase(n)); }
inline double analytic_infidelity(std::uint64_t n) { return infidelity_at_phase(reduced_phase(n)); }

/// Exact <1_(2,1)| U(2 tau_n) PS_(2,1) U(tau_n) |v0_new> at resonance:
/// (1 + e)(3 + 2e + 3e^2) / 16 with e = exp(-i phi). Expanding PS as
/// I - 2|1_(2,1)><1_(2,1)| leaves only <v3|U(3 tau)|v0_new> = (1 + e^3)/2 and
/// the diagonal leaf returns (1 + e^2)/2 (v3) and -e (v5, v6, v7).
inline Complex protocol_amplitude_at_phase(double phi) {
  const Complex e = std::polar(1.0, -phi);
  return (1.0 + e) * (3.0 + 2.0 * e + 3.0 * e * e) / 16.0;
}

/// |protocol amplitude|^2 = cos^2(phi/2) (3 cos^2(phi/2) - 1)^2 / 4.
/// Differs from fidelity_at_phase at first order in sin^2(phi/2).
inline double protocol_fidelity_at_phase(double phi) {
  const double c = std::cos(phi / 2.0);
  const double c2 = c * c;
  return 0.25 * c2 * (3.0 * c2 - 1.0) * (3.0 * c2 - 1.0);
}

/// 1 - protocol fidelity as s (16 - 21 s + 9 s^2) / 4 with s = sin^2(phi/2).
inline double protocol_infidelity_at_phase(double phi) {
  const double s = std::sin(phi / 2.0);
  const double s2 = s * s;
  return 0.25 * s2 * (16.0 - 21.0 * s2 + 9.0 * s2 * s2);
}

inline Complex protocol_amplitude(std::uint64_t n) { return protocol_amplitude_at_phase(reduced_phase(n)); }
inline double protocol_fidelity(std::uint64_t n) { return protocol_fidelity_at_phase(reduced_phase(n)); }
inline double protocol_infidelity(std::uint64_t n) { return protocol_infidelity_at_phase(reduced_phase(n)); }

struct ResonancePoint {
  std::uint64_t n = 0;
  double tau = 0.0;
  /// Unreduced sqrt5 (2n+1) pi.
  double phi = 0.0;
  /// phi reduced to [-pi, pi) in extended precision.
  double phi_mod_2pi = 0.0;
  double fidelity = 0.0;
  double infidelity = 0.0;
};

inline ResonancePoint resonance_point(std::uint64_t n, double j = 1.0) {
  const double phi_mod = reduced_phase(n);
  return {n,
          resonance_params(n, j).tau,
          std::sqrt(5.0) * static_cast<double>(2 * n + 1) * std::numbers::pi,
          phi_mod,
          fidelity_at_phase(phi_mod),
          infidelity_at_phase(phi_mod)};
}

/// Exhaustive scan of n = 0..max_n; ties go to the smallest n.
inline ResonancePoint best_resonance(std::uint64_t max_n, double j = 1.0) {
  ResonancePoint best = resonance_point(0, j);
  for (std::uint64_t n = 1; n <= max_n; ++n) {
    const double inf = analytic_infidelity(n);
    if (inf < best.infidelity) best = resonance_point(n, j);
  }
  return best;
}

}  // namespace spintree
