#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ghzw/common.hpp"
#include "ghzw/settings.hpp"

// Dense constructions of the objects the witness family is made of: rotated
// local observables, the GHZ state, the family operator M_S, white-noise
// states and partial traces. These are oracle- and test-side objects; the
// production bound path never builds anything of dimension 2^N.
//
// Basis convention: tensor indices are big-endian, party 0 is the most
// significant bit, so |0...0> sits at matrix index 0 and |1...1> at 2^n - 1.
namespace ghzw::ops {

using DenseOperator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

// Dense objects are capped at this many parties.
inline constexpr int kMaxDenseParties = 16;

inline void guard_parties(int n) {
  guard(n <= kMaxDenseParties,
        "dense representation capped at " + std::to_string(kMaxDenseParties) +
            " parties, got " + std::to_string(n));
}

// One x-y-plane measurement direction, theta = pi*j/N.
struct LocalAngle {
  int j = 0;
  double theta = 0.0;
};

inline LocalAngle local_angle(int j, int n_parties) {
  require(n_parties >= 1, "local angle requires n_parties >= 1");
  require(j >= 0 && j < n_parties, "angle index out of [0, N-1]");
  return LocalAngle{j, setting_angle(j, n_parties)};
}

// GHZ state mixed with a white-noise fraction p.
struct NoisyState {
  int n_parties = 2;
  double p = 0.0;
};

inline void validate(const NoisyState& s) {
  require(s.n_parties >= 2, "noisy state requires at least 2 parties");
  require(s.p >= 0.0 && s.p <= 1.0, "noise fraction p must lie in [0, 1]");
}

inline DenseOperator pauli_x() {
  DenseOperator m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline DenseOperator pauli_y() {
  DenseOperator m(2, 2);
  m << 0.0, cdouble(0.0, -1.0), cdouble(0.0, 1.0), 0.0;
  return m;
}

inline DenseOperator pauli_z() {
  DenseOperator m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

// M_theta = cos(theta) sigma_x + sin(theta) sigma_y; Hermitian, traceless,
// eigenvalues +-1.
inline DenseOperator rotated_observable(const LocalAngle& angle) {
  DenseOperator m(2, 2);
  const cdouble lower(std::cos(angle.theta), std::sin(angle.theta));
  m << 0.0, std::conj(lower), lower, 0.0;
  return m;
}

inline DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline DenseOperator kron_power(const DenseOperator& m, int n) {
  require(n >= 1, "kron_power requires n >= 1");
  DenseOperator out = m;
  for (int i = 1; i < n; ++i) out = kron(out, m);
  return out;
}

// (|0>^n + |1>^n)/sqrt(2): amplitude 1/sqrt(2) at indices 0 and 2^n - 1.
inline StateVector ghz_state(int n) {
  require(n >= 2, "GHZ state requires n >= 2");
  guard_parties(n);
  const std::int64_t dim = std::int64_t{1} << n;
  StateVector v = StateVector::Zero(dim);
  const double amp = 1.0 / std::sqrt(2.0);
  v(0) = amp;
  v(dim - 1) = amp;
  return v;
}

// M_S = |0><0|^n + |1><1|^n + (1/C) sum_{j in S} (-1)^j M_{theta_j}^{x n}.
inline DenseOperator family_operator(const SettingSet& s, double c_weight) {
  validate(s);
  require_weight_in_range(s, c_weight);
  const int n = s.n_parties;
  guard_parties(n);
  const std::int64_t dim = std::int64_t{1} << n;
  DenseOperator m = DenseOperator::Zero(dim, dim);
  m(0, 0) = 1.0;
  m(dim - 1, dim - 1) = 1.0;
  for (int j : s.indices) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    m += (sign / c_weight) * kron_power(rotated_observable(local_angle(j, n)), n);
  }
  return m;
}

// (1-p)|GHZ><GHZ| + p I / 2^N.
inline DenseOperator noisy_ghz_dense(const NoisyState& state) {
  validate(state);
  guard_parties(state.n_parties);
  const StateVector g = ghz_state(state.n_parties);
  const std::int64_t dim = g.size();
  DenseOperator rho = (1.0 - state.p) * (g * g.adjoint());
  rho += (state.p / static_cast<double>(dim)) *
         DenseOperator::Identity(dim, dim);
  return rho;
}

// Partial trace over the first k tensor factors. The remaining operator acts
// on the last n - k parties; the total trace is preserved.
inline DenseOperator partial_trace_first_k(const DenseOperator& op, int k) {
  require(op.rows() == op.cols(), "partial trace requires a square matrix");
  const std::int64_t dim = op.rows();
  int n = 0;
  while ((std::int64_t{1} << n) < dim) ++n;
  require((std::int64_t{1} << n) == dim, "dimension must be a power of two");
  require(k >= 1 && k <= n - 1, "k must lie in [1, n-1]");
  const std::int64_t rest = std::int64_t{1} << (n - k);
  const std::int64_t top = std::int64_t{1} << k;
  DenseOperator out = DenseOperator::Zero(rest, rest);
  for (std::int64_t a = 0; a < top; ++a)
    out += op.block(a * rest, a * rest, rest, rest);
  return out;
}

}  // namespace ghzw::ops
