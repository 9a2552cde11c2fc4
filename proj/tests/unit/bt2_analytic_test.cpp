#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spintree/bt2_analytic.hpp"
#include "spintree/protocol.hpp"
#include "support/oracles.hpp"

using namespace spintree;

namespace {

NetworkSpec bt2_aux(double j0, double omega) { return attach_sender_aux(build_binary_tree(2, j0, omega), j0, omega); }

Eigen::MatrixXcd rotated(const NetworkSpec& net) {
  const Eigen::MatrixXcd b = symmetry_basis(net).as_matrix();
  return b.adjoint() * oracle::sector_matrix(net).cast<Complex>() * b;
}

}  // namespace

TEST(SymmetryBasis, IsOrthonormalAndComplete) {
  const NetworkSpec net = bt2_aux(1.0, 0.0);
  const Eigen::MatrixXcd b = symmetry_basis(net).as_matrix();
  ASSERT_EQ(b.rows(), 9);
  ASSERT_EQ(b.cols(), 9);
  EXPECT_LT((b.adjoint() * b - Eigen::MatrixXcd::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((b * b.adjoint() - Eigen::MatrixXcd::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SymmetryBasis, BlockPattern) {
  const double j0 = 0.75, omega = 2.2;
  const Eigen::MatrixXcd r = rotated(bt2_aux(j0, omega));
  const double j = std::sqrt(2.0) * j0;
  const int block[9] = {0, 0, 0, 0, 1, 1, 2, 3, 4};
  for (int a = 0; a < 9; ++a) {
    for (int b = 0; b < 9; ++b) {
      if (block[a] != block[b]) EXPECT_LT(std::abs(r(a, b)), 1e-12) << a << "," << b;
    }
  }
  // 4-chain, uniform coupling sqrt2 j0.
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r(k, k + 1).real(), j, 1e-12);
  EXPECT_NEAR(std::abs(r(0, 2)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r(0, 3)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r(1, 3)), 0.0, 1e-12);
  // 2-chain v4-v5 also at sqrt2 j0; v6, v7, s0 sit at omega.
  EXPECT_NEAR(r(4, 5).real(), j, 1e-12);
  for (int k = 0; k < 9; ++k) EXPECT_NEAR(r(k, k).real(), omega, 1e-12);
}

TEST(SymmetryBasis, SenderSingletIsStationary) {
  const NetworkSpec net = bt2_aux(1.0, 3.0);
  const SectorHamiltonian h(net);
  const ExcitationState s0 = symmetry_basis(net).singlet();
  for (double t : {0.3, 7.0, 123.4}) {
    EXPECT_NEAR(std::abs(overlap(s0, evolve(h, s0, t))), 1.0, 1e-12);
  }
}

TEST(SymmetryBasis, RequiresBt2WithAux) {
  EXPECT_THROW(symmetry_basis(build_binary_tree(2, 1.0, 0.0)), InvalidArgument);
  EXPECT_THROW(symmetry_basis(build_modified_bt2(1.0, 0.0)), InvalidArgument);
  EXPECT_THROW(symmetry_basis(attach_sender_aux(build_binary_tree(3, 1.0, 0.0), 1.0, 0.0)), InvalidArgument);
  EXPECT_THROW(symmetry_basis(bt2_aux(1.0, 0.0)).v(8), InvalidArgument);
}

TEST(H4System, EnergiesMatchClosedForm) {
  const H4System sys = h4_eigensystem(0.0, 1.0);
  const double s5 = std::sqrt(5.0);
  EXPECT_NEAR(sys.energies[0], -(s5 + 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(sys.energies[1], -(s5 - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(sys.energies[2], (s5 - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(sys.energies[3], (s5 + 1.0) / 2.0, 1e-15);
}

TEST(H4System, MatchesNumericalDiagonalization) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> omega(-5.0, 5.0), j(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const H4System sys = h4_eigensystem(omega(rng), j(rng));
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(sys.matrix());
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(solver.eigenvalues()(k), sys.energies[static_cast<std::size_t>(k)], 1e-12);
      const Eigen::Vector4d num = solver.eigenvectors().col(k);
      const Eigen::Vector4d& ref = sys.vectors[static_cast<std::size_t>(k)];
      EXPECT_LT(std::min((num - ref).cwiseAbs().maxCoeff(), (num + ref).cwiseAbs().maxCoeff()), 1e-12);
      EXPECT_LT((sys.matrix() * ref - sys.energies[static_cast<std::size_t>(k)] * ref).cwiseAbs().maxCoeff(),
                1e-12);
    }
  }
  EXPECT_THROW(h4_eigensystem(0.0, 0.0), InvalidArgument);
}

TEST(Resonance, Params) {
  const auto p = resonance_params(3, 2.0);
  EXPECT_NEAR(p.omega, (7.0 + std::sqrt(5.0)), 1e-15);
  EXPECT_NEAR(p.tau, 7.0 * std::numbers::pi / 2.0, 1e-15);
  EXPECT_NEAR(bt2_resonant_omega(1.0), 6.5308862983900227, 1e-15);
  EXPECT_THROW(resonance_params(0, 0.0), InvalidArgument);
  EXPECT_THROW(resonance_params(0, -1.0), InvalidArgument);
}

TEST(TransferAmplitude, MatchesSectorDynamics) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> time(0.0, 40.0);
  const double j0 = 1.0;
  const double omega = bt2_resonant_omega(j0);
  const NetworkSpec net = bt2_aux(j0, omega);
  const SectorHamiltonian h(net);
  const SymmetryBasis basis = symmetry_basis(net);
  const H4System sys = h4_eigensystem(omega, std::sqrt(2.0) * j0);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = time(rng);
    const Complex numeric = overlap(basis.v(3), evolve(h, basis.v0_new(), t));
    EXPECT_NEAR(std::abs(numeric - transfer_amplitude(sys, t)), 0.0, 1e-11) << t;
  }
}

TEST(TransferAmplitude, AtResonanceIsHalfOnePlusPhase) {
  const double j = std::sqrt(2.0);
  const double omega = resonance_params(0, j).omega;
  const H4System sys = h4_eigensystem(omega, j);
  for (std::uint64_t n : {0U, 1U, 2U, 8U, 35U}) {
    const double tau = resonance_params(n, j).tau;
    const Complex e = std::polar(1.0, -reduced_phase(n));
    EXPECT_NEAR(std::abs(transfer_amplitude(sys, tau) - (1.0 + e) / 2.0), 0.0, 1e-11) << n;
  }
}

TEST(PhaseReduction, MatchesHighPrecisionValues) {
  EXPECT_NEAR(phase_residue_turns(8), oracle::kResidue8, 1e-17);
  EXPECT_NEAR(phase_residue_turns(152), oracle::kResidue152, 1e-18);
  EXPECT_NEAR(phase_residue_turns(2736), oracle::kResidue2736, 1e-19);
  EXPECT_NEAR(phase_residue_turns(1000000), oracle::kResidue1e6, 1e-16);
  EXPECT_NEAR(phase_residue_turns(123456789), oracle::kResidue123456789, 1e-16);
}

TEST(PhaseReduction, StaysInHalfOpenInterval) {
  for (std::uint64_t n = 0; n < 20000; ++n) {
    const double r = reduced_phase(n);
    ASSERT_GE(r, -std::numbers::pi);
    ASSERT_LT(r, std::numbers::pi);
  }
}

TEST(PrintedFormula, FrozenValues) {
  EXPECT_NEAR(analytic_infidelity(0) / oracle::kPrintedInfidelity0, 1.0, 1e-12);
  EXPECT_NEAR(analytic_infidelity(8) / oracle::kPrintedInfidelity8, 1.0, 1e-12);
  EXPECT_NEAR(analytic_infidelity(35) / oracle::kPrintedInfidelity35, 1.0, 1e-12);
  EXPECT_NEAR(analytic_infidelity(152) / oracle::kPrintedInfidelity152, 1.0, 1e-11);
  EXPECT_NEAR(analytic_infidelity(2736) / oracle::kPrintedInfidelity2736, 1.0, 1e-9);
  EXPECT_NEAR(analytic_fidelity(8), 1.0 - oracle::kPrintedInfidelity8, 1e-15);
}

TEST(PrintedFormula, LimitsAndRange) {
  EXPECT_DOUBLE_EQ(fidelity_at_phase(0.0), 1.0);
  EXPECT_DOUBLE_EQ(infidelity_at_phase(0.0), 0.0);
  EXPECT_NEAR(fidelity_at_phase(std::numbers::pi), 0.0, 1e-30);
  for (std::uint64_t n = 0; n <= 10000; ++n) {
    const double f = analytic_fidelity(n);
    ASSERT_GE(f, 0.0);
    ASSERT_LE(f, 1.0);
  }
}

TEST(PrintedFormula, StableFormAgreesWithLiteral) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> phi(-std::numbers::pi, std::numbers::pi);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = phi(rng);
    EXPECT_NEAR(infidelity_at_phase(p), 1.0 - fidelity_at_phase(p), 1e-15);
    EXPECT_NEAR(protocol_infidelity_at_phase(p), 1.0 - protocol_fidelity_at_phase(p), 1e-15);
    EXPECT_NEAR(std::norm(protocol_amplitude_at_phase(p)), protocol_fidelity_at_phase(p), 1e-15);
  }
}

TEST(ProtocolFormula, FrozenValues) {
  EXPECT_NEAR(protocol_infidelity(0) / oracle::kProtocolInfidelity0, 1.0, 1e-12);
  EXPECT_NEAR(protocol_infidelity(8) / oracle::kProtocolInfidelity8, 1.0, 1e-12);
  EXPECT_NEAR(protocol_infidelity(152) / oracle::kProtocolInfidelity152, 1.0, 1e-11);
  EXPECT_DOUBLE_EQ(protocol_fidelity_at_phase(0.0), 1.0);
}

TEST(BestResonance, RunningRecordsAndMonotonicity) {
  double prev = 2.0;
  for (std::uint64_t m : {0U, 3U, 4U, 7U, 8U, 79U, 80U, 151U, 152U, 1443U, 1444U, 2735U, 2736U, 10000U}) {
    const ResonancePoint best = best_resonance(m);
    EXPECT_LE(best.infidelity, prev);
    prev = best.infidelity;
    std::uint64_t expected = 0;
    for (std::uint64_t r : oracle::kRecordN) {
      if (r <= m) expected = r;
    }
    EXPECT_EQ(best.n, expected) << "max_n " << m;
  }
  EXPECT_EQ(best_resonance(8).n, 8U);
  EXPECT_NEAR(best_resonance(8).tau, 17.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(best_resonance(8, std::sqrt(2.0)).tau, 17.0 * std::numbers::pi / std::sqrt(2.0), 1e-12);
}

TEST(ResonancePoint, Fields) {
  const ResonancePoint p = resonance_point(8, 2.0);
  EXPECT_EQ(p.n, 8U);
  EXPECT_NEAR(p.tau, 17.0 * std::numbers::pi / 2.0, 1e-14);
  EXPECT_NEAR(p.phi, std::sqrt(5.0) * 17.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(p.phi_mod_2pi, 2.0 * std::numbers::pi * oracle::kResidue8, 1e-15);
  EXPECT_NEAR(p.fidelity + p.infidelity, 1.0, 1e-15);
}
