#pragma once

// Single-excitation sector dynamics of an XY spin network, plus a dense
// full-Hilbert-space propagator used as an independent oracle.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "spintree/errors.hpp"
#include "spintree/network.hpp"

namespace spintree {

using Complex = std::complex<double>;

/// alpha |vacuum> + sum_i amps[i] |1_i>, with node order taken from the
/// owning NetworkSpec. Normalization is checked at API boundaries
/// (check_normalized) rather than in the constructor so that intermediate
/// linear combinations can be formed freely.
class ExcitationState {
 public:
  ExcitationState() = default;
  ExcitationState(Complex vacuum, Eigen::VectorXcd amps) : vacuum_(vacuum), amps_(std::move(amps)) {}

  static ExcitationState zero(std::size_t dim) {
    return {Complex{0.0, 0.0}, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim))};
  }
  static ExcitationState vacuum_state(std::size_t dim) {
    return {Complex{1.0, 0.0}, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim))};
  }
  /// |1_i> in a network of `dim` nodes.
  static ExcitationState excitation(std::size_t dim, std::size_t i) {
    if (i >= dim) throw InvalidArgument("node index " + std::to_string(i) + " out of range");
    ExcitationState s = zero(dim);
    s.amps_(static_cast<Eigen::Index>(i)) = 1.0;
    return s;
  }
  static ExcitationState excitation(const NetworkSpec& net, const NodeId& id) {
    return excitation(net.size(), net.at(id));
  }

  Complex vacuum() const noexcept { return vacuum_; }
  Complex& vacuum() noexcept { return vacuum_; }
  const Eigen::VectorXcd& amps() const noexcept { return amps_; }
  Eigen::VectorXcd& amps() noexcept { return amps_; }
  Complex amp(std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(amps_.size()); }

  double norm() const { return std::sqrt(std::norm(vacuum_) + amps_.squaredNorm()); }

  ExcitationState normalized() const {
    const double n = norm();
    if (n == 0.0) throw InvalidArgument("cannot normalize the zero state");
    return {vacuum_ / n, amps_ / n};
  }

  void check_normalized(double tol = 1e-12) const {
    if (std::abs(norm() - 1.0) > tol) {
      throw InvalidArgument("state is not normalized (norm " + std::to_string(norm()) + ")");
    }
  }

  friend ExcitationState operator+(const ExcitationState& a, const ExcitationState& b) {
    check_same(a, b);
    return {a.vacuum_ + b.vacuum_, a.amps_ + b.amps_};
  }
  friend ExcitationState operator-(const ExcitationState& a, const ExcitationState& b) {
    check_same(a, b);
    return {a.vacuum_ - b.vacuum_, a.amps_ - b.amps_};
  }
  friend ExcitationState operator*(Complex c, const ExcitationState& s) { return {c * s.vacuum_, c * s.amps_}; }
  friend ExcitationState operator*(double c, const ExcitationState& s) { return Complex{c, 0.0} * s; }

  static void check_same(const ExcitationState& a, const ExcitationState& b) {
    if (a.dimension() != b.dimension()) {
      throw InvalidArgument("state dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                            std::to_string(b.dimension()));
    }
  }

 private:
  Complex vacuum_{0.0, 0.0};
  Eigen::VectorXcd amps_;
};

/// <a|b>, vacuum component included.
inline Complex overlap(const ExcitationState& a, const ExcitationState& b) {
  ExcitationState::check_same(a, b);
  return std::conj(a.vacuum()) * b.vacuum() + a.amps().dot(b.amps());
}

/// Largest componentwise deviation, vacuum included.
inline double max_deviation(const ExcitationState& a, const ExcitationState& b) {
  ExcitationState::check_same(a, b);
  double d = std::abs(a.vacuum() - b.vacuum());
  if (a.dimension() > 0) d = std::max(d, (a.amps() - b.amps()).cwiseAbs().maxCoeff());
  return d;
}

/// Hamiltonian restricted to the single-flip sector: H[i][i] = omega_i,
/// H[i][j] = J_ij on edges. The spectrum is computed on construction and
/// the object is immutable afterwards.
class SectorHamiltonian {
 public:
  explicit SectorHamiltonian(NetworkSpec net) : net_(std::make_shared<const NetworkSpec>(std::move(net))) {
    const auto n = static_cast<Eigen::Index>(net_->size());
    matrix_ = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) matrix_(i, i) = net_->omega(static_cast<std::size_t>(i));
    for (const Edge& e : net_->edges()) {
      matrix_(static_cast<Eigen::Index>(e.a), static_cast<Eigen::Index>(e.b)) = e.j;
      matrix_(static_cast<Eigen::Index>(e.b), static_cast<Eigen::Index>(e.a)) = e.j;
    }
    if (n > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_);
      if (solver.info() != Eigen::Success) throw ModelError("eigendecomposition of sector Hamiltonian failed");
      energies_ = solver.eigenvalues();
      vectors_ = solver.eigenvectors();
    }
  }

  std::size_t dimension() const noexcept { return net_->size(); }
  const NetworkSpec& network() const noexcept { return *net_; }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  /// Ascending.
  const Eigen::VectorXd& energies() const noexcept { return energies_; }
  /// Columns are orthonormal eigenvectors matching energies().
  const Eigen::MatrixXd& eigenvectors() const noexcept { return vectors_; }

  /// exp(-i H t) applied to a sector amplitude vector.
  Eigen::VectorXcd propagate(const Eigen::VectorXcd& amps, double t) const {
    if (static_cast<std::size_t>(amps.size()) != dimension()) {
      throw InvalidArgument("state dimension " + std::to_string(amps.size()) + " does not match network size " +
                            std::to_string(dimension()));
    }
    if (!std::isfinite(t)) throw InvalidArgument("evolution time must be finite");
    if (amps.size() == 0) return amps;
    Eigen::VectorXcd modes = vectors_.transpose().cast<Complex>() * amps;
    for (Eigen::Index k = 0; k < modes.size(); ++k) modes(k) *= std::polar(1.0, -energies_(k) * t);
    return vectors_.cast<Complex>() * modes;
  }

  Eigen::MatrixXcd propagator(double t) const {
    const Eigen::VectorXcd phases =
        (-Complex{0.0, 1.0} * t * energies_.cast<Complex>()).array().exp().matrix();
    return vectors_.cast<Complex>() * phases.asDiagonal() * vectors_.transpose().cast<Complex>();
  }

  /// <a|H|b> in the sector (vacuum has zero energy).
  Complex expectation(const ExcitationState& a, const ExcitationState& b) const {
    ExcitationState::check_same(a, b);
    return a.amps().dot(matrix_.cast<Complex>() * b.amps());
  }

 private:
  std::shared_ptr<const NetworkSpec> net_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;
};

inline SectorHamiltonian sector_hamiltonian(const NetworkSpec& net) { return SectorHamiltonian(net); }

/// The vacuum amplitude is stationary; only the sector amplitudes evolve.
inline ExcitationState evolve(const SectorHamiltonian& h, const ExcitationState& state, double t) {
  return {state.vacuum(), h.propagate(state.amps(), t)};
}

/// Dense propagator over the full 2^N Hilbert space built term by term from
/// the Pauli form (J/2)(XX + YY) + (omega/2)(Z + 1). Basis index bit i set
/// means spin i is up. Shares nothing with SectorHamiltonian.
class FullSpacePropagator {
 public:
  static constexpr std::size_t kMaxSpins = 12;

  explicit FullSpacePropagator(const NetworkSpec& net) : spins_(net.size()) {
    if (spins_ > kMaxSpins) {
      throw UnsupportedSize("full-space oracle supports at most " + std::to_string(kMaxSpins) + " spins, got " +
                            std::to_string(spins_));
    }
    const std::uint64_t dim = std::uint64_t{1} << spins_;
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    const Complex i_unit{0.0, 1.0};
    for (std::uint64_t basis = 0; basis < dim; ++basis) {
      for (std::size_t q = 0; q < spins_; ++q) {
        // (omega/2)(Z + 1): Z|up> = +|up>, Z|down> = -|down>.
        const double z = ((basis >> q) & 1U) ? 1.0 : -1.0;
        h(static_cast<Eigen::Index>(basis), static_cast<Eigen::Index>(basis)) += 0.5 * net.omega(q) * (z + 1.0);
      }
      for (const Edge& e : net.edges()) {
        // X|b> = |1-b>, Y|down> = i|up>, Y|up> = -i|down>.
        const std::uint64_t flipped = basis ^ (std::uint64_t{1} << e.a) ^ (std::uint64_t{1} << e.b);
        const Complex ya = ((basis >> e.a) & 1U) ? -i_unit : i_unit;
        const Complex yb = ((basis >> e.b) & 1U) ? -i_unit : i_unit;
        const Complex xx{1.0, 0.0};
        const Complex yy = ya * yb;
        h(static_cast<Eigen::Index>(flipped), static_cast<Eigen::Index>(basis)) += 0.5 * e.j * (xx + yy);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) throw ModelError("eigendecomposition of full-space Hamiltonian failed");
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
  }

  std::size_t spins() const noexcept { return spins_; }

  struct Result {
    ExcitationState state;
    /// Norm of the evolved vector outside the vacuum + single-flip sector.
    double leaked_norm = 0.0;
  };

  Result evolve(const ExcitationState& state, double t) const {
    if (state.dimension() != spins_) {
      throw InvalidArgument("state dimension " + std::to_string(state.dimension()) + " does not match " +
                            std::to_string(spins_) + " spins");
    }
    if (!std::isfinite(t)) throw InvalidArgument("evolution time must be finite");
    const auto d = static_cast<Eigen::Index>(std::uint64_t{1} << spins_);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
    psi(0) = state.vacuum();
    for (std::size_t q = 0; q < spins_; ++q) psi(Eigen::Index{1} << q) = state.amp(q);

    Eigen::VectorXcd modes = vectors_.adjoint() * psi;
    for (Eigen::Index k = 0; k < modes.size(); ++k) modes(k) *= std::polar(1.0, -energies_(k) * t);
    psi = vectors_ * modes;

    Result r{ExcitationState::zero(spins_), 0.0};
    r.state.vacuum() = psi(0);
    double leaked = 0.0;
    for (Eigen::Index b = 0; b < d; ++b) {
      const auto bits = static_cast<std::uint64_t>(b);
      if (bits == 0) continue;
      if ((bits & (bits - 1)) == 0) {
        r.state.amps()(std::countr_zero(bits)) = psi(b);
      } else {
        leaked += std::norm(psi(b));
      }
    }
    r.leaked_norm = std::sqrt(leaked);
    return r;
  }

 private:
  std::size_t spins_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
};

/// Tolerated leakage before the oracle reports an implementation bug.
inline constexpr double kSectorLeakTolerance = 1e-9;

/// Throws SectorLeak when the evolved state leaves the single-flip sector.
inline FullSpacePropagator::Result full_space_evolve(const NetworkSpec& net, const ExcitationState& state, double t) {
  auto r = FullSpacePropagator(net).evolve(state, t);
  if (r.leaked_norm > kSectorLeakTolerance) {
    throw SectorLeak("full-space evolution leaked norm " + std::to_string(r.leaked_norm) + " out of the sector");
  }
  return r;
}

}  // namespace spintree
