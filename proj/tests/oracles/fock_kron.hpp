// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent dense Fock-space oracle for tests.
//
// Everything in this header is built the slow, literal way: explicit
// Kronecker chains for ladder/Majorana operators and plain matrix products
// for composite operators. It deliberately shares no code with the library
// so that agreement between the two is meaningful evidence.
//
// Conventions (must match the library's documented layout):
//   mode m = sigma*N + p   (spin-up orbitals first, then spin-down)
//   basis index bit m      = occupation of mode m (mode 0 least significant)
//   annihilator            = Z-string on modes below m, then [[0,1],[0,0]]
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat pauli_i() { return Mat::Identity(2, 2); }
inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Mat pauli_y() {
  Mat m(2, 2);
  m << 0, Cplx(0, -1), Cplx(0, 1), 0;
  return m;
}
inline Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
// sigma^- : |1> -> |0>
inline Mat lower() {
  Mat m(2, 2);
  m << 0, 1, 0, 0;
  return m;
}

// f_{M-1} (x) ... (x) f_1 (x) f_0, so factor 0 acts on the least significant
// bit of the basis index.
inline Mat chain(const std::vector<Mat>& factors) {
  Mat op = Mat::Identity(1, 1);
  for (const Mat& f : factors) op = kron(f, op);
  return op;
}

inline Mat jw_site(int n_modes, int m, const Mat& site) {
  std::vector<Mat> f(static_cast<size_t>(n_modes), pauli_i());
  for (int j = 0; j < m; ++j) f[static_cast<size_t>(j)] = pauli_z();
  f[static_cast<size_t>(m)] = site;
  return chain(f);
}

inline Mat annihilator(int n_modes, int m) { return jw_site(n_modes, m, lower()); }
inline Mat creator(int n_modes, int m) { return annihilator(n_modes, m).adjoint(); }

// Majorana pair: gamma_{m,0} = Z...Z X, gamma_{m,1} = Z...Z Y, so that
// a_m = (gamma_{m,0} + i gamma_{m,1}) / 2.
inline Mat majorana(int n_modes, int m, int x) {
  return jw_site(n_modes, m, x == 0 ? pauli_x() : pauli_y());
}

inline Mat majorana_rotated(int N, const std::vector<double>& u, int sigma, int x) {
  const int n_modes = 2 * N;
  Mat op = Mat::Zero(1 << n_modes, 1 << n_modes);
  for (int j = 0; j < N; ++j) op += u[static_cast<size_t>(j)] * majorana(n_modes, sigma * N + j, x);
  return op;
}

// Spin-summed one-body excitation E_pq = sum_sigma adag_{p sigma} a_{q sigma}.
inline Mat e_pq(int N, int p, int q) {
  const int n_modes = 2 * N;
  Mat op = Mat::Zero(1 << n_modes, 1 << n_modes);
  for (int sigma = 0; sigma < 2; ++sigma)
    op += creator(n_modes, sigma * N + p) * annihilator(n_modes, sigma * N + q);
  return op;
}

inline size_t h2_index(int N, int p, int q, int r, int s) {
  return static_cast<size_t>(((p * N + q) * N + r) * N + s);
}

// H = sum h1 E_pq + 1/2 sum h2 E_pq E_rs + e_core, by explicit products.
inline Mat hamiltonian(int N, const Eigen::MatrixXd& h1, const std::vector<double>& h2,
                       double e_core) {
  const int dim = 1 << (2 * N);
  Mat h = e_core * Mat::Identity(dim, dim);
  std::vector<Mat> e(static_cast<size_t>(N * N));
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) e[static_cast<size_t>(p * N + q)] = e_pq(N, p, q);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      if (h1(p, q) != 0.0) h += h1(p, q) * e[static_cast<size_t>(p * N + q)];
      for (int r = 0; r < N; ++r)
        for (int s = 0; s < N; ++s) {
          const double v = h2[h2_index(N, p, q, r, s)];
          if (v != 0.0)
            h += 0.5 * v * (e[static_cast<size_t>(p * N + q)] * e[static_cast<size_t>(r * N + s)]);
        }
    }
  return h;
}

inline Mat number_operator(int n_modes) {
  Mat op = Mat::Zero(1 << n_modes, 1 << n_modes);
  for (int m = 0; m < n_modes; ++m) op += creator(n_modes, m) * annihilator(n_modes, m);
  return op;
}

inline std::vector<int> sector_indices(int n_modes, int eta) {
  std::vector<int> idx;
  for (int n = 0; n < (1 << n_modes); ++n)
    if (__builtin_popcount(static_cast<unsigned>(n)) == eta) idx.push_back(n);
  return idx;
}

inline Mat restrict_to(const Mat& op, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = op(idx[i], idx[j]);
  return out;
}

// Second, algorithmically different eigensolver path: the general
// (non-selfadjoint) solver. Returns sorted real parts.
inline std::vector<double> eigenvalues_general(const Mat& op) {
  Eigen::ComplexEigenSolver<Mat> es(op, /*computeEigenvectors=*/false);
  std::vector<double> ev(static_cast<size_t>(op.rows()));
  for (Eigen::Index i = 0; i < op.rows(); ++i) ev[static_cast<size_t>(i)] = es.eigenvalues()(i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double min_eigenvalue_general(const Mat& op) { return eigenvalues_general(op).front(); }

}  // namespace oracle
