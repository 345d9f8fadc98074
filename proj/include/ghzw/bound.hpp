#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ghzw/common.hpp"
#include "ghzw/settings.hpp"

// Efficient upper bound alpha_S^u on the biseparable value of the family
// operator M_S. The search space is reduced to the corner amplitudes
// (|a_1|, |a_n|, relative phase) of the projected state plus the partition
// size k; the middle amplitudes only enter through the envelope
// z^u = 2|a_1||a_n||cos(phase - k theta_j)| + (1 - |a_1|^2 - |a_n|^2),
// and the sign ambiguity of the true z_j is absorbed by maximising over all
// sign vectors. Cost per grid point is O(|S|), independent of 2^N.
namespace ghzw::bound {

// Cap for the sign-vector kernels.
inline constexpr int kMaxSignLength = 24;

// Discretisation of the (alpha, beta, phi) box. The base grid covers
// alpha, beta in [0, pi/2] and phi in [0, pi], endpoints included, with the
// given step. Each refinement round re-scans a window of one previous step
// around the running argmax, with the step shrunk by refine_shrink.
struct GridSpec {
  double step = 0.01;
  int refine_rounds = 2;
  double refine_shrink = 0.1;
};

inline void validate(const GridSpec& g) {
  require(g.step > 0.0, "grid step must be positive");
  require(g.refine_rounds >= 0, "refine_rounds must be >= 0");
  require(g.refine_shrink > 0.0 && g.refine_shrink < 1.0,
          "refine_shrink must lie in (0, 1)");
}

// One point of the reduced search space: |a_1| = cos(alpha),
// |a_n| = sin(alpha) cos(beta), phase = arg(a_1^* a_n) folded into [0, pi),
// and the partition size k.
struct BoundaryPoint {
  double a1_abs = 1.0;
  double an_abs = 0.0;
  double phase = 0.0;
  int k = 1;

  double x() const { return a1_abs * a1_abs; }
  double y() const { return an_abs * an_abs; }
};

struct BoundResult {
  double alpha_upper = 0.0;
  BoundaryPoint arg_best;
  GridSpec grid_used;
  std::uint64_t evaluations = 0;
};

// Envelope for |z_j| = |<phi_A| M_theta^{x k} |phi_A>| at a boundary point.
// Equal to the max over the +- branch of
// |a_1 a_n^* e^{-ik theta} + a_1^* a_n e^{ik theta} +- (1 - |a_1|^2 - |a_n|^2)|
// via max(|A+B|, |A-B|) = |A| + |B|. Always in [0, 1].
inline double z_upper(const BoundaryPoint& pt, double theta_j) {
  const double cross = 2.0 * pt.a1_abs * pt.an_abs *
                       std::abs(std::cos(pt.phase - pt.k * theta_j));
  const double middle = std::max(0.0, 1.0 - pt.x() - pt.y());
  return cross + middle;
}

namespace detail {

// Inclusive grid covering [lo, hi]: lo, lo+step, ... plus hi itself when the
// last regular point falls short of it.
inline std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> pts;
  if (hi < lo) hi = lo;
  const auto steps = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-12));
  pts.reserve(static_cast<std::size_t>(steps) + 2);
  for (std::int64_t i = 0; i <= steps; ++i) pts.push_back(lo + static_cast<double>(i) * step);
  if (pts.back() < hi - 1e-12 * std::max(1.0, std::abs(hi))) pts.push_back(hi);
  return pts;
}

// Exact maximisation of |sum_j s_j v_j| over sign vectors s in {+-1}^m for
// 2-d vectors v_j, by sweeping the probe direction u over a half turn: for
// fixed u the best signs are s_j = sign(<v_j, u>), the sign pattern only
// changes where u crosses a perpendicular of some v_j, and on each arc the
// maximum of <R, u> is |R| for the resultant R of that arc's pattern. Any
// maximiser satisfies s_j = sign(<v_j, R>), so its pattern is one of the
// swept arcs and the arc maximum equals the global maximum.
inline double arc_walk_max(const std::vector<cdouble>& values) {
  const std::size_t m = values.size();
  double rx = 0.0, ry = 0.0;
  std::vector<double> sx(m), sy(m);
  std::vector<std::pair<double, std::size_t>> flips;
  flips.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double vx = values[j].real();
    const double vy = values[j].imag();
    if (vx == 0.0 && vy == 0.0) {
      sx[j] = sy[j] = 0.0;
      continue;
    }
    double pos = std::fmod(std::atan2(vy, vx) + 1.5 * kPi, kPi);
    if (pos < 0.0) pos += kPi;
    // Starting sign consistent with the flip position even when rounding
    // wraps a boundary flip: probe a quarter turn from the flip, where the
    // projection is +-|v| and its sign is exact, and negate if the probe
    // falls on the post-flip side.
    double q = pos + kPi / 2;
    if (q >= kPi) q -= kPi;
    const double probe = vx * std::cos(q) + vy * std::sin(q);
    const double s0 = (q < pos) == (probe > 0.0) ? 1.0 : -1.0;
    sx[j] = s0 * vx;
    sy[j] = s0 * vy;
    rx += sx[j];
    ry += sy[j];
    flips.emplace_back(pos, j);
  }
  std::sort(flips.begin(), flips.end());
  double best = rx * rx + ry * ry;
  for (const auto& [pos, j] : flips) {
    rx -= 2.0 * sx[j];
    ry -= 2.0 * sy[j];
    best = std::max(best, rx * rx + ry * ry);
  }
  return std::sqrt(best);
}

// Per-k precomputation for the sign walk used inside the grid scan. The
// phase factors e^{i(N-k) theta_j} have directions pi*key/N with
// key = (N-k)*j mod N, so the fold to [0, pi), the starting signs and the
// flip order are all integer-exact and independent of the moduli.
struct SignWalkPlan {
  std::vector<double> sx, sy;  // starting-sign-weighted unit directions
  std::vector<double> fx, fy;  // -2 * (sign-weighted direction), applied at the flip
  std::vector<int> flips;      // indices in crossing order (flip at 0 excluded)
};

inline SignWalkPlan make_sign_walk_plan(int n_parties, int k,
                                        const std::vector<int>& indices) {
  const int m = static_cast<int>(indices.size());
  SignWalkPlan plan;
  plan.sx.resize(m);
  plan.sy.resize(m);
  plan.fx.resize(m);
  plan.fy.resize(m);
  std::vector<std::pair<int, int>> order;  // (flip position, entry)
  order.reserve(m);
  for (int e = 0; e < m; ++e) {
    const int key = ((n_parties - k) * indices[e]) % n_parties;
    const double ang = kPi * key / n_parties;
    const double s0 = (2 * key <= n_parties) ? 1.0 : -1.0;
    plan.sx[e] = s0 * std::cos(ang);
    plan.sy[e] = s0 * std::sin(ang);
    plan.fx[e] = -2.0 * plan.sx[e];
    plan.fy[e] = -2.0 * plan.sy[e];
    const int pos = (2 * key + n_parties) % (2 * n_parties);
    if (pos != 0) order.emplace_back(pos, e);
  }
  std::sort(order.begin(), order.end());
  plan.flips.reserve(order.size());
  for (const auto& [pos, e] : order) plan.flips.push_back(e);
  return plan;
}

// max over sign vectors of |sum_j s_j r_j e^{i eta_j}|^2 for moduli r >= 0.
inline double max_sign_modsq(const SignWalkPlan& plan, const double* r, int m) {
  double rx = 0.0, ry = 0.0;
  for (int e = 0; e < m; ++e) {
    rx += r[e] * plan.sx[e];
    ry += r[e] * plan.sy[e];
  }
  double best = rx * rx + ry * ry;
  for (const int e : plan.flips) {
    rx += r[e] * plan.fx[e];
    ry += r[e] * plan.fy[e];
    const double q = rx * rx + ry * ry;
    if (q > best) best = q;
  }
  return best;
}

}  // namespace detail

// Max over all 2^m sign vectors of |sum_j sign_j v_j|, computed exactly by
// the arc sweep in O(m log m).
inline double max_sign_sum(const std::vector<cdouble>& values) {
  guard(values.size() <= kMaxSignLength,
        "sign maximisation capped at " + std::to_string(kMaxSignLength) +
            " entries, got " + std::to_string(values.size()));
  if (values.empty()) return 0.0;
  return detail::arc_walk_max(values);
}

// Literal enumeration over the precomputed +-1 matrix rows; reference kernel
// for max_sign_sum.
inline double max_sign_sum_enumerated(const std::vector<cdouble>& values) {
  guard(values.size() <= kMaxSignLength,
        "sign enumeration capped at " + std::to_string(kMaxSignLength) +
            " entries, got " + std::to_string(values.size()));
  const int m = static_cast<int>(values.size());
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << m); ++mask) {
    cdouble sum = 0.0;
    for (int j = 0; j < m; ++j)
      sum += ((mask >> j) & 1U) ? -values[j] : values[j];
    best = std::max(best, std::abs(sum));
  }
  return best;
}

// F^u_{z,N-k}: max over sign vectors of
// |sum_{j in S} sign_j z_j^u e^{i(N-k) theta_j}| / C.
inline double f_upper(const std::vector<double>& z_uppers, int k,
                      const SettingSet& s, double c_weight) {
  validate(s);
  require(static_cast<int>(z_uppers.size()) == s.size(),
          "z_uppers must have one entry per setting index");
  require(k >= 1 && k <= s.n_parties - 1, "k must lie in [1, N-1]");
  require(c_weight > 0.0, "C must be positive");
  for (double z : z_uppers)
    require(z >= 0.0 && z <= 1.0 + 1e-12, "z^u entries must lie in [0, 1]");
  std::vector<cdouble> v(z_uppers.size());
  for (std::size_t e = 0; e < v.size(); ++e) {
    const double eta = (s.n_parties - k) * setting_angle(s.indices[e], s.n_parties);
    v[e] = z_uppers[e] * cdouble(std::cos(eta), std::sin(eta));
  }
  return max_sign_sum(v) / c_weight;
}

// lambda^u = (x+y)/2 + sqrt((F^u)^2 + (x-y)^2/4); monotone in f_u.
inline double lambda_upper(const BoundaryPoint& pt, double f_u) {
  require(f_u >= 0.0, "F^u must be nonnegative");
  const double x = pt.x();
  const double y = pt.y();
  return 0.5 * (x + y) + std::sqrt(f_u * f_u + 0.25 * (x - y) * (x - y));
}

namespace detail {

struct ScanBest {
  double lambda = -std::numeric_limits<double>::infinity();
  std::uint64_t rank = std::numeric_limits<std::uint64_t>::max();
  double alpha = 0.0, beta = 0.0, phi = 0.0;
  int k = 1;

  // Loop-order tie break: first-encountered maximum wins.
  bool improves(double lam, std::uint64_t rk) const {
    return lam > lambda || (lam == lambda && rk < rank);
  }
};

}  // namespace detail

// Grid search for alpha_S^u = max_k max_{a_1, a_n} lambda^u, following the
// loop structure k, alpha, beta, phi over the base grid, then refine_rounds
// of local refinement around the running argmax. The reported value is
// deterministic for any worker count; ties resolve to the first point in
// loop order.
inline BoundResult alpha_upper(const SettingSet& s, double c_weight,
                               const GridSpec& grid, int workers = 1) {
  validate(s);
  require_weight_in_range(s, c_weight);
  validate(grid);
  guard(s.size() <= kMaxSignLength,
        "sign maximisation capped at " + std::to_string(kMaxSignLength) +
            " settings");

  const int n = s.n_parties;
  const int m = s.size();
  std::vector<double> theta(m);
  for (int e = 0; e < m; ++e) theta[e] = setting_angle(s.indices[e], n);

  const std::vector<double> alpha_axis = detail::grid_axis(0.0, kPi / 2.0, grid.step);
  const std::vector<double> beta_axis = alpha_axis;
  const std::vector<double> phi_axis = detail::grid_axis(0.0, kPi, grid.step);
  const std::size_t na = alpha_axis.size();
  const std::size_t nb = beta_axis.size();
  const std::size_t nphi = phi_axis.size();
  const int nk = n - 1;

  // Per-k plans and |cos(phi - k theta_j)| tables for the base grid.
  std::vector<detail::SignWalkPlan> plans(nk);
  std::vector<std::vector<double>> ctab(nk);
  for (int ki = 0; ki < nk; ++ki) {
    const int k = ki + 1;
    plans[ki] = detail::make_sign_walk_plan(n, k, s.indices);
    ctab[ki].resize(nphi * m);
    for (std::size_t ip = 0; ip < nphi; ++ip)
      for (int e = 0; e < m; ++e)
        ctab[ki][ip * m + e] = std::abs(std::cos(phi_axis[ip] - k * theta[e]));
  }

  const double inv_c2 = 1.0 / (c_weight * c_weight);
  const std::size_t items = static_cast<std::size_t>(nk) * na;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  const int used = std::max(1, std::min<int>(workers, static_cast<int>(items)));
  std::vector<detail::ScanBest> local(used);

  // Work item = one (k, alpha) pair; each worker keeps its own running best
  // and the merge below is order-insensitive.
  {
    std::atomic<std::size_t> next{0};
    auto body = [&](detail::ScanBest& best) {
      std::vector<double> r(m);
      while (true) {
        const std::size_t item = next.fetch_add(1, std::memory_order_relaxed);
        if (item >= items) break;
        const int ki = static_cast<int>(item / na);
        const std::size_t ia = item % na;
        const detail::SignWalkPlan& plan = plans[ki];
        const double* cbase = ctab[ki].data();
        const double a1 = std::cos(alpha_axis[ia]);
        const double sa = std::sin(alpha_axis[ia]);
        const double x = a1 * a1;
        for (std::size_t ib = 0; ib < nb; ++ib) {
          const double an = sa * std::cos(beta_axis[ib]);
          const double y = an * an;
          const double w = 2.0 * a1 * an;
          const double mid = std::max(0.0, 1.0 - x - y);
          double qbest = -1.0;
          std::size_t ip_best = 0;
          for (std::size_t ip = 0; ip < nphi; ++ip) {
            const double* c = cbase + ip * m;
            for (int e = 0; e < m; ++e) r[e] = w * c[e] + mid;
            const double q = detail::max_sign_modsq(plan, r.data(), m);
            if (q > qbest) {
              qbest = q;
              ip_best = ip;
            }
          }
          const double lam =
              0.5 * (x + y) + std::sqrt(qbest * inv_c2 + 0.25 * (x - y) * (x - y));
          const std::uint64_t rank =
              ((static_cast<std::uint64_t>(ki) * na + ia) * nb + ib) * nphi + ip_best;
          if (best.improves(lam, rank)) {
            best.lambda = lam;
            best.rank = rank;
            best.alpha = alpha_axis[ia];
            best.beta = beta_axis[ib];
            best.phi = phi_axis[ip_best];
            best.k = ki + 1;
          }
        }
      }
    };
    if (used <= 1) {
      body(local[0]);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(used);
      for (int t = 0; t < used; ++t)
        pool.emplace_back([&, t] { body(local[t]); });
      for (auto& th : pool) th.join();
    }
  }

  detail::ScanBest best;
  for (const auto& cand : local)
    if (best.improves(cand.lambda, cand.rank)) best = cand;
  std::uint64_t evaluations =
      static_cast<std::uint64_t>(nk) * na * nb * nphi;

  // Local refinement: window of one previous step around the running argmax,
  // step shrunk each round. Only strict improvements move the argmax, so the
  // result never decreases.
  double step = grid.step;
  std::vector<double> r(m);
  for (int round = 0; round < grid.refine_rounds; ++round) {
    const double half = step;
    step *= grid.refine_shrink;
    const int k = best.k;
    const detail::SignWalkPlan& plan = plans[k - 1];
    const auto ax = detail::grid_axis(std::max(0.0, best.alpha - half),
                                      std::min(kPi / 2.0, best.alpha + half), step);
    const auto bx = detail::grid_axis(std::max(0.0, best.beta - half),
                                      std::min(kPi / 2.0, best.beta + half), step);
    const auto px = detail::grid_axis(std::max(0.0, best.phi - half),
                                      std::min(kPi, best.phi + half), step);
    for (const double alpha : ax) {
      const double a1 = std::cos(alpha);
      const double sa = std::sin(alpha);
      const double x = a1 * a1;
      for (const double beta : bx) {
        const double an = sa * std::cos(beta);
        const double y = an * an;
        const double w = 2.0 * a1 * an;
        const double mid = std::max(0.0, 1.0 - x - y);
        for (const double phi : px) {
          for (int e = 0; e < m; ++e)
            r[e] = w * std::abs(std::cos(phi - k * theta[e])) + mid;
          const double q = detail::max_sign_modsq(plan, r.data(), m);
          const double lam =
              0.5 * (x + y) + std::sqrt(q * inv_c2 + 0.25 * (x - y) * (x - y));
          ++evaluations;
          if (lam > best.lambda) {
            best.lambda = lam;
            best.alpha = alpha;
            best.beta = beta;
            best.phi = phi;
          }
        }
      }
    }
  }

  BoundResult result;
  result.alpha_upper = best.lambda;
  result.arg_best = BoundaryPoint{std::cos(best.alpha),
                                  std::sin(best.alpha) * std::cos(best.beta),
                                  best.phi, best.k};
  result.grid_used = grid;
  result.evaluations = evaluations;
  return result;
}

}  // namespace ghzw::bound
