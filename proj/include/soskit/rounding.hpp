// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Finite-precision truncation of fitted parameters: the Givens-angle chart
// for unit direction vectors, unbiased stochastic rounding of angles onto a
// b_rot-bit grid, unbiased bin assignment for coefficient magnitudes on a
// b_coeff-bit alias table, whole-parameter truncation, and a rigorous bound
// on the induced one-body operator error.

#ifndef SOSKIT_ROUNDING_HPP
#define SOSKIT_ROUNDING_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "soskit/dfthc.hpp"
#include "soskit/errors.hpp"
#include "soskit/linalg.hpp"
#include "soskit/rng.hpp"

namespace soskit {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Canonical hyperspherical chart: angle j feeds the Givens rotation on
// coordinates (j, j+1), so u_0 = cos t_0, u_1 = sin t_0 cos t_1, ..., and the
// last coordinate carries the full product of sines. Angles lie in [0, 2pi);
// only the final angle uses the upper half to encode the trailing sign.
inline std::vector<double> angles_from_unit(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  if (n < 1) throw UsageError("angles_from_unit: empty vector");
  if (u.norm() < 1e-12) throw NormalizationError("angles_from_unit: zero vector");
  const Eigen::VectorXd v = u / u.norm();
  std::vector<double> theta;
  if (n == 1) return theta;
  theta.resize(static_cast<std::size_t>(n - 1));
  // suffix norms s_j = |v_{j:}|
  std::vector<double> tail(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index j = n - 1; j >= 0; --j)
    tail[static_cast<std::size_t>(j)] =
        std::hypot(v[j], tail[static_cast<std::size_t>(j) + 1]);
  for (Eigen::Index j = 0; j + 2 < n; ++j)
    theta[static_cast<std::size_t>(j)] =
        std::atan2(tail[static_cast<std::size_t>(j) + 1], v[j]);  // in [0, pi]
  double last = std::atan2(v[n - 1], v[n - 2]);
  if (last < 0.0) last += two_pi;
  theta[static_cast<std::size_t>(n - 2)] = last;
  return theta;
}

inline Eigen::VectorXd unit_from_angles(const std::vector<double>& theta) {
  const Eigen::Index n = static_cast<Eigen::Index>(theta.size()) + 1;
  Eigen::VectorXd u(n);
  double sines = 1.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    u[j] = sines * std::cos(theta[static_cast<std::size_t>(j)]);
    sines *= std::sin(theta[static_cast<std::size_t>(j)]);
  }
  u[n - 1] = sines;
  return u;
}

// Stochastic rounding onto the 2^(b_rot - 1)-point grid over [0, 2pi): the
// fractional cell position becomes the probability of rounding up, so the
// expectation equals the input angle.
inline double round_angle(double theta, int b_rot, RandomStream& stream) {
  if (b_rot < 1 || b_rot > 62) throw UsageError("round_angle: bits out of range");
  if (theta < 0.0 || theta >= two_pi + 1e-12)
    throw UsageError("round_angle: angle must lie in [0, 2pi)");
  const double delta = two_pi / static_cast<double>(1L << (b_rot - 1));
  const double cells = theta / delta;
  double base = std::floor(cells);
  double p = cells - base;
  if (p < 1e-12) p = 0.0;          // snap: grid points stay deterministic
  if (p > 1.0 - 1e-12) {
    base += 1.0;
    p = 0.0;
  }
  if (p > 0.0 && stream.uniform() < p) base += 1.0;
  return base * delta;
}

// Alias-table bin assignment for coefficient magnitudes. The table has
// M = (B+1) 2^(b_coeff - 1) bins; each label b deterministically owns
// floor(M |w_b| / |w|_1) bins and the K leftover bins are distributed by
// systematic sampling over the fractional parts, so every inclusion
// probability equals its fraction exactly and counts stay within +1 of the
// floor. Labels are implied by the canonical layout (label blocks in
// ascending order) rather than materialized, since M can be huge.
struct AliasAssignment {
  long total_bins = 0;
  std::vector<long> counts;

  long label_of(long bin) const {
    if (bin < 0 || bin >= total_bins) throw IndexError("AliasAssignment: bin out of range");
    long cum = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      cum += counts[b];
      if (bin < cum) return static_cast<long>(b);
    }
    throw IndexError("AliasAssignment: unlabeled bin");  // counts do not sum to M
  }
};

inline AliasAssignment alias_bins(const std::vector<double>& w, int b_coeff,
                                  RandomStream& stream) {
  if (w.empty()) throw UsageError("alias_bins: empty coefficient vector");
  if (b_coeff < 1 || b_coeff > 50) throw UsageError("alias_bins: bits out of range");
  double l1 = 0.0;
  for (double v : w) l1 += std::abs(v);
  if (l1 <= 0.0) throw DegenerateDistributionError("alias_bins: all coefficients vanish");

  AliasAssignment out;
  out.total_bins = static_cast<long>(w.size()) << (b_coeff - 1);
  out.counts.resize(w.size(), 0);
  std::vector<double> residual(w.size(), 0.0);
  long assigned = 0;
  for (std::size_t b = 0; b < w.size(); ++b) {
    const double exact =
        static_cast<double>(out.total_bins) * std::abs(w[b]) / l1;
    const double base = std::floor(exact);
    out.counts[b] = static_cast<long>(base);
    residual[b] = exact - base;
    assigned += out.counts[b];
  }
  const long leftover = out.total_bins - assigned;
  if (leftover > 0) {
    // systematic pass: K equally spaced points on the residual circle
    std::vector<double> cum(w.size(), 0.0);
    double acc = 0.0;
    for (std::size_t b = 0; b < w.size(); ++b) {
      acc += residual[b];
      cum[b] = acc;
    }
    cum.back() = static_cast<double>(leftover);  // exact by construction
    const double start = stream.uniform();
    std::size_t b = 0;
    for (long j = 0; j < leftover; ++j) {
      const double point = start + static_cast<double>(j);
      while (cum[b] <= point) ++b;
      out.counts[b] += 1;
    }
  }
  return out;
}

// One stochastic truncation draw of the whole parameter set: every direction
// row is pushed through its angle chart and rounded on the b_rot grid, and
// every (r, c) coefficient column is replaced by the magnitudes its alias
// table realizes, keeping the original signs. Draw order is direction rows
// (r-major), then columns (r-major), so a fixed stream reproduces bit-for-bit.
inline DfthcParams truncate_params(const DfthcParams& p, int b_rot, int b_coeff,
                                   RandomStream& stream) {
  p.validate();
  DfthcParams out = p;
  const int n = p.n_orb;
  if (n >= 2) {
    for (int r = 0; r < p.rank_r; ++r)
      for (int b = 0; b < p.rank_b; ++b) {
        Eigen::Map<const Eigen::VectorXd> row(p.u.data() + p.u_index(r, b, 0), n);
        auto theta = angles_from_unit(row);
        for (double& t : theta) t = round_angle(t, b_rot, stream);
        const Eigen::VectorXd rounded = unit_from_angles(theta);
        for (int j = 0; j < n; ++j) out.u[out.u_index(r, b, j)] = rounded[j];
      }
  }
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c) {
      std::vector<double> col(static_cast<std::size_t>(p.rank_b) + 1);
      double l1 = 0.0;
      for (int b = 0; b <= p.rank_b; ++b) {
        col[static_cast<std::size_t>(b)] = p.w[p.w_index(r, b, c)];
        l1 += std::abs(col[static_cast<std::size_t>(b)]);
      }
      if (l1 <= 0.0) continue;  // nothing to apportion
      const AliasAssignment bins = alias_bins(col, b_coeff, stream);
      for (int b = 0; b <= p.rank_b; ++b) {
        const double magnitude = static_cast<double>(bins.counts[static_cast<std::size_t>(b)]) *
                                 l1 / static_cast<double>(bins.total_bins);
        const double sign = col[static_cast<std::size_t>(b)] < 0.0 ? -1.0 : 1.0;
        out.w[out.w_index(r, b, c)] = sign * magnitude;
      }
    }
  return out;
}

struct OneBodyResidual {
  double bound = 0.0;     // rigorous cap on the induced operator error
  double envelope = 0.0;  // analytic grid-resolution part, linear in 2^(1-b_rot)
};

// Upper bound on ||H1 - H1^(b_rot)|| over every possible rounding outcome of
// the eigenvector directions: each eigenvector contributes twice its weight
// per spin times its worst-case displacement, where the displacement is the
// deterministic floor-grid deviation plus one grid cell per angle (the chart
// is 1-Lipschitz in each angle).
inline OneBodyResidual one_body_residual_bound(const Eigen::MatrixXd& h1_eff, int n_orb,
                                               int b_rot) {
  if (h1_eff.rows() != n_orb || h1_eff.cols() != n_orb)
    throw UsageError("one_body_residual_bound: shape mismatch");
  if (b_rot < 1 || b_rot > 62) throw UsageError("one_body_residual_bound: bits out of range");
  OneBodyResidual out;
  if (n_orb < 2) return out;
  const double delta = two_pi / static_cast<double>(1L << (b_rot - 1));
  const auto eig = jacobi_eigen_symmetric(h1_eff);
  for (int s = 0; s < n_orb; ++s) {
    const double weight = std::abs(eig.values[s]);
    if (weight < 1e-14) continue;
    auto theta = angles_from_unit(eig.vectors.col(s));
    for (double& t : theta) t = std::floor(t / delta) * delta;
    const double floor_dev = (eig.vectors.col(s) - unit_from_angles(theta)).norm();
    const double slack = static_cast<double>(n_orb - 1) * delta;
    out.bound += 4.0 * weight * (floor_dev + slack);
    out.envelope += 4.0 * weight * slack;
  }
  return out;
}

// One row of the truncation study export.
struct TruncationSample {
  int b_rot = 0;
  int b_coeff = 0;
  int sample = 0;
  double shift = 0.0;  // observable deviation of this draw, Ha
};

inline void write_truncation_csv(const std::vector<TruncationSample>& samples,
                                 std::ostream& os) {
  os << "b_rot,b_coeff,sample,shift\n";
  for (const auto& s : samples)
    os << s.b_rot << ',' << s.b_coeff << ',' << s.sample << ',' << s.shift << '\n';
}

}  // namespace soskit

#endif  // SOSKIT_ROUNDING_HPP
