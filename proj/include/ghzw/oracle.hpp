#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghzw/common.hpp"
#include "ghzw/operators.hpp"
#include "ghzw/settings.hpp"

// Desk-scale ground truth for the bound: dense biseparable optimisation of
// Tr(M_S |phi><phi|) over all bipartitions via see-saw alternation, the
// closed-form block spectrum of the projected operator, and direct witness
// evaluation on noisy GHZ states. Values found here are achieved by explicit
// product states, so they are certified lower estimates of alpha_S.
namespace ghzw::oracle {

inline constexpr int kMaxOracleParties = 8;
inline constexpr int kMaxRestParties = 12;

// Tolerance for the internal dense-vs-closed-form agreement check in
// witness_value_dense.
inline constexpr double kWitnessAgreementTol = 1e-10;

struct SeesawConfig {
  int restarts = 32;
  int max_iters = 500;
  double convergence_tol = 1e-10;
  std::uint64_t rng_seed = 1;
};

inline void validate(const SeesawConfig& c) {
  require(c.restarts >= 1, "see-saw requires at least one restart");
  require(c.max_iters >= 1, "see-saw requires max_iters >= 1");
  require(c.convergence_tol > 0.0, "convergence tolerance must be positive");
}

struct OracleReport {
  struct PerPartition {
    int k = 0;
    double f_value = 0.0;
    bool converged = false;
    int restarts_used = 0;
  };
  double alpha_best = 0.0;
  std::vector<PerPartition> per_k;
  std::uint64_t iterations_total = 0;
};

// Operator left on the remaining N-k parties after projecting k parties of
// M_S onto |phi>: corner entries x = |<0...0|phi>|^2, y = |<1...1|phi>|^2 and
// anti-diagonal entries F_{z,t} = (1/C) sum_{j in S} (-1)^j z_j e^{i t theta_j}
// with t = 2*popcount(b) - (N-k) and z_j = <phi| M_{theta_j}^{x k} |phi>.
// By permutation invariance of M_S the same construction serves both halves
// of a bipartition.
inline ops::DenseOperator m_rest_dense(int k, const SettingSet& s,
                                       double c_weight,
                                       const ops::StateVector& phi) {
  validate(s);
  require_weight_in_range(s, c_weight);
  const int n = s.n_parties;
  guard(n <= kMaxRestParties,
        "m_rest_dense capped at " + std::to_string(kMaxRestParties) + " parties");
  require(k >= 1 && k <= n - 1, "k must lie in [1, N-1]");
  const std::int64_t proj_dim = std::int64_t{1} << k;
  require(phi.size() == proj_dim, "projected state must live on 2^k amplitudes");
  require(std::abs(phi.squaredNorm() - 1.0) <= 1e-9,
          "projected state must be normalised");

  const int rest = n - k;
  const std::int64_t dim = std::int64_t{1} << rest;
  const int m = s.size();

  // z_j is real since M_theta^{x k} is Hermitian; the imaginary dust is
  // dropped.
  std::vector<double> z(m);
  for (int e = 0; e < m; ++e) {
    const double theta = setting_angle(s.indices[e], n);
    cdouble acc = 0.0;
    for (std::int64_t a = 0; a < proj_dim; ++a) {
      const int t = 2 * std::popcount(static_cast<std::uint64_t>(a)) - k;
      acc += std::conj(phi(a)) * phi(proj_dim - 1 - a) *
             cdouble(std::cos(t * theta), std::sin(t * theta));
    }
    z[e] = acc.real();
  }

  const double x = std::norm(phi(0));
  const double y = std::norm(phi(proj_dim - 1));
  ops::DenseOperator out = ops::DenseOperator::Zero(dim, dim);
  out(0, 0) = x;
  out(dim - 1, dim - 1) = y;
  for (std::int64_t b = 0; b < dim; ++b) {
    const int t = 2 * std::popcount(static_cast<std::uint64_t>(b)) - rest;
    cdouble f = 0.0;
    for (int e = 0; e < m; ++e) {
      const double theta = setting_angle(s.indices[e], n);
      const double sign = (s.indices[e] % 2 == 0) ? 1.0 : -1.0;
      f += sign * z[e] * cdouble(std::cos(t * theta), std::sin(t * theta));
    }
    out(b, dim - 1 - b) += f / c_weight;
  }
  return out;
}

// Closed-form maximal eigenvalue of the projected operator: the matrix is a
// direct sum of 2x2 blocks over pairs (b, ~b), giving
// (x+y)/2 + sqrt(|F_{z,N-k}|^2 + (x-y)^2/4) for the corner pair and +-|F_{z,t}|
// for the interior ones. f_values is ordered by t = -(N-k), ..., N-k step 2;
// the last entry is the corner coefficient.
inline double max_eigenvalue_closed_form(double x, double y, const std::vector<cdouble>& f_values) {
  require(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0,
          "corner weights must lie in [0, 1]");
  require(!f_values.empty(), "f_values must be nonempty");
  const double corner = std::abs(f_values.back());
  double best = 0.5 * (x + y) + std::sqrt(corner * corner + 0.25 * (x - y) * (x - y));
  for (std::size_t i = 1; i + 1 < f_values.size(); ++i)
    best = std::max(best, std::abs(f_values[i]));
  return best;
}

namespace detail {

inline ops::StateVector basis_zero_state(std::int64_t dim) {
  ops::StateVector v = ops::StateVector::Zero(dim);
  v(0) = 1.0;
  return v;
}

// Rotation-invariant random state: i.i.d. complex normal amplitudes,
// normalised.
inline ops::StateVector random_state(std::mt19937_64& rng, std::int64_t dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ops::StateVector v(dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = cdouble(re, im);
  }
  v /= v.norm();
  return v;
}

struct SeesawOutcome {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Alternating maximisation for one partition: fix the k-party state, take
// the top eigenvector of the projected operator on the other side, and swap
// roles. Each half-step is an exact maximisation given the other side, so
// the objective is nondecreasing.
inline SeesawOutcome seesaw_partition(const SettingSet& s, double c_weight,
                                      int k, ops::StateVector phi_a,
                                      int max_iters, double tol) {
  const int n = s.n_parties;
  SeesawOutcome out;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::SelfAdjointEigenSolver<ops::DenseOperator> eg_b(
        m_rest_dense(k, s, c_weight, phi_a));
    const Eigen::Index top_b = eg_b.eigenvalues().size() - 1;
    ops::StateVector phi_b = eg_b.eigenvectors().col(top_b);

    Eigen::SelfAdjointEigenSolver<ops::DenseOperator> eg_a(
        m_rest_dense(n - k, s, c_weight, phi_b));
    const Eigen::Index top_a = eg_a.eigenvalues().size() - 1;
    phi_a = eg_a.eigenvectors().col(top_a);

    out.value = eg_a.eigenvalues()(top_a);
    out.iterations = it;
    if (std::abs(out.value - prev) < tol) {
      out.converged = true;
      break;
    }
    prev = out.value;
  }
  return out;
}

}  // namespace detail

// Best biseparable value found by multi-restart see-saw over every
// bipartition size k. Restart 0 starts from |0...0> (which already attains
// 1); further restarts are random. The RNG stream of each (k, restart) is
// derived from (seed, k, restart), so results do not depend on the worker
// count or on execution order.
inline OracleReport alpha_oracle(const SettingSet& s, double c_weight,
                                 const SeesawConfig& config, int workers = 1) {
  validate(s);
  require_weight_in_range(s, c_weight);
  validate(config);
  const int n = s.n_parties;
  guard(n <= kMaxOracleParties,
        "oracle capped at " + std::to_string(kMaxOracleParties) + " parties");

  struct Cell {
    double value = 0.0;
    bool converged = false;
    std::uint64_t iterations = 0;
  };
  const int nk = n - 1;
  std::vector<Cell> cells(static_cast<std::size_t>(nk) * config.restarts);
  parallel_for(cells.size(), workers, [&](std::size_t item) {
    const int ki = static_cast<int>(item) / config.restarts;
    const int restart = static_cast<int>(item) % config.restarts;
    const int k = ki + 1;
    const std::int64_t dim = std::int64_t{1} << k;
    ops::StateVector start;
    if (restart == 0) {
      start = detail::basis_zero_state(dim);
    } else {
      std::seed_seq seq{config.rng_seed, static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(restart)};
      std::mt19937_64 rng(seq);
      start = detail::random_state(rng, dim);
    }
    const auto got = detail::seesaw_partition(s, c_weight, k, start,
                                              config.max_iters,
                                              config.convergence_tol);
    cells[item] = Cell{got.value, got.converged,
                       static_cast<std::uint64_t>(got.iterations)};
  });

  OracleReport report;
  report.per_k.reserve(nk);
  for (int ki = 0; ki < nk; ++ki) {
    OracleReport::PerPartition part;
    part.k = ki + 1;
    part.restarts_used = config.restarts;
    part.f_value = -std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < config.restarts; ++restart) {
      const Cell& cell = cells[static_cast<std::size_t>(ki) * config.restarts + restart];
      part.f_value = std::max(part.f_value, cell.value);
      part.converged = part.converged || cell.converged;
      report.iterations_total += cell.iterations;
    }
    report.per_k.push_back(part);
    report.alpha_best = std::max(report.alpha_best, part.f_value);
  }
  return report;
}

// Tr((alpha I - M_S) rho_p), evaluated by dense contraction against the
// noisy GHZ state and cross-checked against the closed form
// alpha - (1-p)(1 + |S|/C) - p 2^{1-N}. Returns the dense value.
inline double witness_value_dense(const SettingSet& s, double c_weight,
                                  double alpha, double p) {
  validate(s);
  require_weight_in_range(s, c_weight);
  const int n = s.n_parties;
  guard(n <= kMaxRestParties,
        "dense witness evaluation capped at " + std::to_string(kMaxRestParties) +
            " parties");
  const ops::DenseOperator m = ops::family_operator(s, c_weight);
  const ops::DenseOperator rho = ops::noisy_ghz_dense(ops::NoisyState{n, p});
  const double dense = alpha - (m * rho).trace().real();
  const double closed =
      alpha - (1.0 - p) * (1.0 + s.size() / c_weight) - p * std::exp2(1.0 - n);
  if (std::abs(dense - closed) > kWitnessAgreementTol)
    throw std::logic_error("dense and closed-form witness values disagree");
  return dense;
}

}  // namespace ghzw::oracle
