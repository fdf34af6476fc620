// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOSKIT_LINALG_HPP
#define SOSKIT_LINALG_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "soskit/errors.hpp"

namespace soskit {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal, column j pairs with values[j]
};

// Cyclic Jacobi diagonalization of a symmetric matrix. Deterministic: the
// sweep order is fixed, so repeated calls on the same input produce the same
// bits. `tol` bounds the largest surviving off-diagonal entry relative to the
// largest input magnitude.
inline SymmetricEigen jacobi_eigen_symmetric(Eigen::MatrixXd a, double tol = 1e-13) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw UsageError("jacobi_eigen_symmetric: matrix must be square");
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  if (n <= 1) return {a.diagonal(), v};

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double stop = tol * scale;

  for (int sweep = 0; sweep < 128; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= stop) break;

    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= stop * 1e-3) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // A <- J^T A J on rows/cols p,q.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  Eigen::VectorXd d = a.diagonal();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return d[i] < d[j]; });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values[j] = d[order[static_cast<std::size_t>(j)]];
    out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

// Sum of absolute eigenvalues (trace norm of a symmetric matrix).
inline double schatten_norm1(const Eigen::MatrixXd& sym, double tol = 1e-13) {
  return jacobi_eigen_symmetric(sym, tol).values.cwiseAbs().sum();
}

// Gradient of the trace norm at a symmetric point: V sign(D) V^T, with the
// sign of eigenvalues below `zero_tol` in magnitude taken as zero.
inline Eigen::MatrixXd schatten_norm1_gradient(const Eigen::MatrixXd& sym,
                                               double zero_tol = 1e-12) {
  const SymmetricEigen eig = jacobi_eigen_symmetric(sym);
  Eigen::VectorXd sgn(eig.values.size());
  for (Eigen::Index i = 0; i < sgn.size(); ++i) {
    const double lam = eig.values[i];
    sgn[i] = (std::abs(lam) < zero_tol) ? 0.0 : (lam > 0.0 ? 1.0 : -1.0);
  }
  return eig.vectors * sgn.asDiagonal() * eig.vectors.transpose();
}

}  // namespace soskit

#endif  // SOSKIT_LINALG_HPP
