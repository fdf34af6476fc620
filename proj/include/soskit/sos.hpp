// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Extraction of explicit sum-of-squares generators from a fitted parameter
// set: the signed eigendecomposition of the corrected one-body matrix, the
// certified scalar shift, dense generator assembly, the stacked square-root
// factor, and desk-scale verification of the operator identity.

#ifndef SOSKIT_SOS_HPP
#define SOSKIT_SOS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "soskit/dfthc.hpp"
#include "soskit/errors.hpp"
#include "soskit/linalg.hpp"
#include "soskit/tensors.hpp"

namespace soskit {

struct OneBodyTerm {
  double weight = 0.0;         // nonnegative
  Eigen::VectorXd direction;   // unit vector in orbital space
};

struct OneBodySos {
  std::vector<OneBodyTerm> d1;  // positive-eigenvalue pairs (particle side)
  std::vector<OneBodyTerm> q1;  // negative-eigenvalue pairs (hole side)
  double shift = 0.0;           // 2 * sum of negative eigenvalues
};

// Signed split of a symmetric one-body matrix: h = sum w+ u+ u+^T
// - sum w- u- u-^T with all weights nonnegative. The shift is twice the sum
// of the negative eigenvalues (one factor per spin). Terms are listed in the
// eigensolver's ascending-eigenvalue order.
inline OneBodySos one_body_sos(const Eigen::MatrixXd& h1_eff) {
  if (h1_eff.rows() != h1_eff.cols())
    throw UsageError("one_body_sos: matrix must be square");
  const SymmetricEigen eig = jacobi_eigen_symmetric(h1_eff, 1e-13);
  OneBodySos out;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double lam = eig.values[i];
    if (lam > 0.0) {
      out.d1.push_back({lam, eig.vectors.col(i)});
    } else if (lam < 0.0) {
      out.q1.push_back({-lam, eig.vectors.col(i)});
      out.shift += 2.0 * lam;
    }
  }
  return out;
}

// Certified lower shift of the sum-of-squares operator:
//   E_SOS = (one-body shift) - (1/2) sum_rc W_{rc}^2.
inline double e_sos(const DfthcParams& p, double one_body_shift) {
  p.validate();
  double acc = one_body_shift;
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c) {
      const double w = big_w(p, r, c);
      acc -= 0.5 * w * w;
    }
  return acc;
}

// Full generator inventory of one fitted parameter set. Generator order is
// canonical everywhere in the library: the one-body particle generators
// (spin 0 ascending, then spin 1), the hole generators likewise, then the
// squared factors in (r, c) lexicographic order.
struct SosDecomposition {
  int n_orb = 0;
  int rank_r = 0;
  int rank_b = 0;
  int rank_c = 0;
  std::vector<OneBodyTerm> d1;
  std::vector<OneBodyTerm> q1;
  std::vector<double> u;                // direction bank, layout (r*B + b)*N + j
  std::vector<std::vector<double>> sf;  // (r,c) lexicographic; each B+1 coefficients
  double e_sos = 0.0;
  std::vector<double> lambdas;          // per generator, canonical order
  double lambda_total = 0.0;            // Lambda
  double e_gap = 0.0;
  double delta_gap = 0.0;               // e_gap / (2 Lambda)

  std::size_t generator_count() const {
    return 2 * d1.size() + 2 * q1.size() + sf.size();
  }
};

inline SosDecomposition make_decomposition(const DfthcParams& p, const Problem& prob,
                                           double e_gs,
                                           TraceSource trace = TraceSource::fitted) {
  p.validate();
  SosDecomposition dec;
  dec.n_orb = p.n_orb;
  dec.rank_r = p.rank_r;
  dec.rank_b = p.rank_b;
  dec.rank_c = p.rank_c;
  dec.u = p.u;

  const Eigen::MatrixXd h1_eff = effective_h1(p, prob, true, trace);
  const OneBodySos ob = one_body_sos(h1_eff);
  dec.d1 = ob.d1;
  dec.q1 = ob.q1;
  dec.e_sos = e_sos(p, ob.shift);

  dec.sf.reserve(static_cast<std::size_t>(p.rank_r) * p.rank_c);
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c) {
      std::vector<double> col(static_cast<std::size_t>(p.rank_b) + 1);
      for (int b = 0; b <= p.rank_b; ++b) col[static_cast<std::size_t>(b)] = p.w[p.w_index(r, b, c)];
      dec.sf.push_back(std::move(col));
    }

  for (int copy = 0; copy < 2; ++copy)  // one generator per spin
    for (const auto& t : dec.d1) dec.lambdas.push_back(std::sqrt(t.weight));
  for (int copy = 0; copy < 2; ++copy)
    for (const auto& t : dec.q1) dec.lambdas.push_back(std::sqrt(t.weight));
  for (const auto& col : dec.sf) {
    double s = 0.0;
    for (double w : col) s += std::abs(w);
    dec.lambdas.push_back(s / std::sqrt(2.0));
  }

  dec.lambda_total = lambda_sos(p, h1_eff);
  dec.e_gap = e_gap(p, h1_eff, e_gs, prob);
  dec.delta_gap = dec.e_gap / (2.0 * dec.lambda_total);
  return dec;
}

namespace detail {

// Dense spin-summed one-body operator sum_pq m[p,q] E_pq.
inline DenseOperator dense_one_body(const Eigen::MatrixXd& m) {
  const int N = static_cast<int>(m.rows());
  require_oracle_scale(N);
  const Eigen::Index dim = Eigen::Index(1) << (2 * N);
  DenseOperator out = DenseOperator::zeros(dim);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      if (m(p, q) == 0.0) continue;
      out.data += m(p, q) * build_e_pq(N, p, q).data;
    }
  return out;
}

// Dense rotated annihilator sum_p u_p a_{p,sigma} = (g0 + i g1)/2 in terms of
// the rotated Majorana pair.
inline Eigen::MatrixXcd dense_rotated_annihilator(const Eigen::VectorXd& u, int sigma,
                                                  int n_orb) {
  const Eigen::MatrixXcd g0 = build_rotated_majorana(u, sigma, 0, n_orb).data;
  const Eigen::MatrixXcd g1 = build_rotated_majorana(u, sigma, 1, n_orb).data;
  return 0.5 * (g0 + std::complex<double>(0.0, 1.0) * g1);
}

}  // namespace detail

// Dense matrices of every generator, in the canonical order of `lambdas`.
inline std::vector<Eigen::MatrixXcd> dense_generators(const SosDecomposition& dec) {
  const int N = dec.n_orb;
  require_oracle_scale(N);
  std::vector<Eigen::MatrixXcd> ops;
  ops.reserve(dec.generator_count());
  for (int sigma = 0; sigma < 2; ++sigma)
    for (const auto& t : dec.d1)
      ops.push_back(std::sqrt(t.weight) *
                    detail::dense_rotated_annihilator(t.direction, sigma, N));
  for (int sigma = 0; sigma < 2; ++sigma)
    for (const auto& t : dec.q1)
      ops.push_back(std::sqrt(t.weight) *
                    detail::dense_rotated_annihilator(t.direction, sigma, N).adjoint());
  const Eigen::Index dim = Eigen::Index(1) << (2 * N);
  std::size_t idx = 0;
  for (int r = 0; r < dec.rank_r; ++r)
    for (int c = 0; c < dec.rank_c; ++c, ++idx) {
      const auto& col = dec.sf[idx];
      double w_total = col[static_cast<std::size_t>(dec.rank_b)];
      Eigen::MatrixXd l = Eigen::MatrixXd::Zero(N, N);
      for (int b = 0; b < dec.rank_b; ++b) {
        w_total -= col[static_cast<std::size_t>(b)];
        Eigen::Map<const Eigen::VectorXd> ub(
            dec.u.data() + (static_cast<std::size_t>(r) * dec.rank_b + b) * N, N);
        l.noalias() += col[static_cast<std::size_t>(b)] * (ub * ub.transpose());
      }
      Eigen::MatrixXcd op = detail::dense_one_body(l).data;
      op += w_total * Eigen::MatrixXcd::Identity(dim, dim);
      ops.push_back(op / std::sqrt(2.0));
    }
  return ops;
}

// Stacked square-root factor: generator blocks of shape 4^N x 4^N stacked in
// canonical order into an (L 4^N) x 4^N matrix, so that the conjugate product
// reproduces the sum-of-squares operator minus its scalar shift.
inline Eigen::MatrixXcd build_hsqrt(const SosDecomposition& dec, int n_orb) {
  require_oracle_scale(n_orb);
  if (dec.n_orb != n_orb) throw UsageError("build_hsqrt: n_orb mismatch");
  const auto ops = dense_generators(dec);
  const Eigen::Index dim = Eigen::Index(1) << (2 * n_orb);
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(ops.size()) * dim, dim);
  for (std::size_t a = 0; a < ops.size(); ++a)
    out.middleRows(static_cast<Eigen::Index>(a) * dim, dim) = ops[a];
  return out;
}

// Dense ansatz Hamiltonian, built literally from its definition: the
// corrected one-body part plus half the squared factors minus the identity
// completions,
//   H = sum_pq h1'_pq E_pq + (1/2) sum_rc [ (W_rc + L_rc)^2 - W_rc^2 ].
inline DenseOperator build_dense_dfthc(const DfthcParams& p, const Problem& prob,
                                       TraceSource trace = TraceSource::fitted) {
  p.validate();
  const int N = p.n_orb;
  require_oracle_scale(N);
  const Eigen::Index dim = Eigen::Index(1) << (2 * N);

  const Eigen::MatrixXd h1_eff = effective_h1(p, prob, true, trace);
  DenseOperator out = detail::dense_one_body(h1_eff);
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c) {
      const double w = big_w(p, r, c);
      const Eigen::MatrixXcd lhat = detail::dense_one_body(l_matrix(p, r, c)).data;
      const Eigen::MatrixXcd quad =
          lhat + w * Eigen::MatrixXcd::Identity(dim, dim);
      out.data += 0.5 * (quad * quad);
      out.data -= 0.5 * w * w * Eigen::MatrixXcd::Identity(dim, dim);
    }
  return out;
}

struct SosIdentityReport {
  double sos_residual = 0.0;  // || sum O^dag O + E_SOS - dense ansatz ||_max
  double fit_residual = 0.0;  // || dense shifted tensors - dense ansatz ||_max
};

// Desk-scale check of the two defining identities: the generator expansion
// reproduces the ansatz operator exactly, and the ansatz differs from the
// shifted tensor Hamiltonian only through the two-body fit error.
inline SosIdentityReport verify_sos_identity(const DfthcParams& p, const Problem& prob) {
  p.validate();
  const int N = p.n_orb;
  require_oracle_scale(N);
  const Eigen::Index dim = Eigen::Index(1) << (2 * N);

  const SosDecomposition dec = make_decomposition(p, prob, /*e_gs=*/0.0);
  const DenseOperator ansatz = build_dense_dfthc(p, prob, TraceSource::fitted);

  Eigen::MatrixXcd acc = dec.e_sos * Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& op : dense_generators(dec)) acc += op.adjoint() * op;

  SosIdentityReport report;
  report.sos_residual = (acc - ansatz.data).cwiseAbs().maxCoeff();

  const BlissTensors bt = bliss_tensors(prob, p.beta1, p.h_sym);
  Problem shifted = Problem::zeros(N, prob.eta);
  shifted.h1 = bt.h1;
  shifted.h2 = bt.h2;
  const DenseOperator href = build_dense_hamiltonian(shifted);
  report.fit_residual = (href.data - ansatz.data).cwiseAbs().maxCoeff();
  return report;
}

inline nlohmann::json decomposition_to_json(const SosDecomposition& dec) {
  nlohmann::json j;
  j["format"] = "soskit-sos";
  j["version"] = 1;
  j["shape"] = {{"n_orb", dec.n_orb},
                {"r", dec.rank_r},
                {"b", dec.rank_b},
                {"c", dec.rank_c}};
  auto terms = [](const std::vector<OneBodyTerm>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : v) {
      std::vector<double> dir(t.direction.data(), t.direction.data() + t.direction.size());
      arr.push_back({{"weight", t.weight}, {"direction", dir}});
    }
    return arr;
  };
  j["d1"] = terms(dec.d1);
  j["q1"] = terms(dec.q1);
  j["u"] = dec.u;
  j["sf"] = dec.sf;
  j["e_sos"] = dec.e_sos;
  j["lambdas"] = dec.lambdas;
  j["lambda"] = dec.lambda_total;
  j["e_gap"] = dec.e_gap;
  j["delta_gap"] = dec.delta_gap;
  return j;
}

}  // namespace soskit

#endif  // SOSKIT_SOS_HPP
