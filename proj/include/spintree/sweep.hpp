#pragma once

// Resonance sweep over n: closed-form and simulated fidelities, running
// minimum of the infidelity, CSV output and a log-log decay fit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "spintree/bt2_analytic.hpp"
#include "spintree/dynamics.hpp"
#include "spintree/io.hpp"
#include "spintree/protocol.hpp"

namespace spintree {

struct SweepRow {
  std::uint64_t n = 0;
  double tau = 0.0;
  double phi_mod_2pi = 0.0;
  double f_analytic = 0.0;
  std::optional<double> f_numeric;
  double infidelity = 0.0;
  double running_min_infidelity = 0.0;
};

struct SweepOptions {
  std::uint64_t max_n = 0;
  /// Rows with n above this get no simulated fidelity.
  std::uint64_t numeric_cap = 200;
  double j0 = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Rows come back in n order whatever the thread count.
inline std::vector<SweepRow> resonance_sweep(const SweepOptions& opt) {
  if (!(opt.j0 > 0.0)) throw InvalidArgument("j0 must be positive");
  const double j = std::sqrt(2.0) * opt.j0;
  std::vector<SweepRow> rows(static_cast<std::size_t>(opt.max_n) + 1);

  const ProtocolSetup base = bt2_protocol(1, 0, opt.j0);
  const SectorHamiltonian h(base.network);

  auto fill = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < rows.size(); i += stride) {
      const auto n = static_cast<std::uint64_t>(i);
      const ResonancePoint p = resonance_point(n, j);
      SweepRow& row = rows[i];
      row.n = n;
      row.tau = p.tau;
      row.phi_mod_2pi = p.phi_mod_2pi;
      row.f_analytic = p.fidelity;
      row.infidelity = p.infidelity;
      if (n <= opt.numeric_cap) {
        const std::vector<ProtocolStep> steps{Evolve{p.tau}, PhaseFlip{{site_id(2, 1)}}, Evolve{2.0 * p.tau}};
        row.f_numeric = run_protocol(h, base.initial, steps, base.target).fidelity;
      }
    }
  };

  unsigned threads = opt.threads ? opt.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows.size()));
  if (threads <= 1) {
    fill(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(fill, t, threads);
  }

  double best = std::numeric_limits<double>::infinity();
  for (SweepRow& row : rows) {
    best = std::min(best, row.infidelity);
    row.running_min_infidelity = best;
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "n,tau_n,phi_mod_2pi,F_analytic,F_numeric,infidelity,running_min_infidelity\n";
  for (const SweepRow& r : rows) {
    os << r.n << ',' << format_double(r.tau) << ',' << format_double(r.phi_mod_2pi) << ','
       << format_double(r.f_analytic) << ',' << (r.f_numeric ? format_double(*r.f_numeric) : "") << ','
       << format_double(r.infidelity) << ',' << format_double(r.running_min_infidelity) << '\n';
  }
}

struct DecayFit {
  /// (1-F)_min ~ c N^-gamma.
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double c = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
};

/// Least-squares line through log(running min) vs log(N) at the N where the
/// running minimum drops (the lower envelope of the curve), N >= 1.
inline DecayFit fit_decay_exponent(std::span<const SweepRow> rows) {
  std::vector<std::pair<double, double>> pts;
  double prev = std::numeric_limits<double>::infinity();
  for (const SweepRow& r : rows) {
    if (r.running_min_infidelity < prev && r.n >= 1 && r.running_min_infidelity > 0.0) {
      pts.emplace_back(std::log(static_cast<double>(r.n)), std::log(r.running_min_infidelity));
    }
    prev = r.running_min_infidelity;
  }
  DecayFit fit;
  fit.points = pts.size();
  if (pts.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(pts.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  fit.gamma = -slope;
  fit.c = std::exp((sy - slope * sx) / k);
  return fit;
}

}  // namespace spintree
