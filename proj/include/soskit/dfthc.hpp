// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Double-factorized tensor-hypercontraction ansatz: parameter container,
// tensor contraction, shifted one-body matrix, the one-norm and gap
// functionals, the training loss with its analytic gradient, and an Adam
// fitting loop with deterministic seeded restarts.

#ifndef SOSKIT_DFTHC_HPP
#define SOSKIT_DFTHC_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "soskit/errors.hpp"
#include "soskit/linalg.hpp"
#include "soskit/rng.hpp"
#include "soskit/tensors.hpp"

namespace soskit {

// Ansatz parameters. Layouts:
//   u: R*B*N doubles, index (r*B + b)*N + j, each (r,b) row unit-norm;
//   w: R*(B+1)*C doubles, index (r*(B+1) + b)*C + c.
// Slot b == B holds the identity coefficient of each squared factor; slots
// b < B weight the rank-one projectors built from the matching u row.
struct DfthcParams {
  int n_orb = 0;
  int rank_r = 0;
  int rank_b = 0;
  int rank_c = 0;
  std::vector<double> u;
  std::vector<double> w;
  double beta1 = 0.0;
  Eigen::MatrixXd h_sym;

  static DfthcParams zeros(int n_orb, int rank_r, int rank_b, int rank_c) {
    if (n_orb < 1) throw UsageError("DfthcParams: n_orb must be positive");
    if (rank_r < 1 || rank_b < 1 || rank_c < 1)
      throw UsageError("DfthcParams: every rank must be at least 1");
    DfthcParams p;
    p.n_orb = n_orb;
    p.rank_r = rank_r;
    p.rank_b = rank_b;
    p.rank_c = rank_c;
    p.u.assign(static_cast<std::size_t>(rank_r) * rank_b * n_orb, 0.0);
    for (int r = 0; r < rank_r; ++r)
      for (int b = 0; b < rank_b; ++b) p.u[p.u_index(r, b, 0)] = 1.0;
    p.w.assign(static_cast<std::size_t>(rank_r) * (rank_b + 1) * rank_c, 0.0);
    p.h_sym = Eigen::MatrixXd::Zero(n_orb, n_orb);
    return p;
  }

  std::size_t u_index(int r, int b, int j) const {
    return (static_cast<std::size_t>(r) * rank_b + b) * n_orb + j;
  }
  std::size_t w_index(int r, int b, int c) const {
    return (static_cast<std::size_t>(r) * (rank_b + 1) + b) * rank_c + c;
  }

  void validate() const {
    if (n_orb < 1) throw UsageError("DfthcParams: n_orb must be positive");
    if (rank_r < 1 || rank_b < 1 || rank_c < 1)
      throw UsageError("DfthcParams: every rank must be at least 1");
    if (u.size() != static_cast<std::size_t>(rank_r) * rank_b * n_orb)
      throw UsageError("DfthcParams: u size does not match shape");
    if (w.size() != static_cast<std::size_t>(rank_r) * (rank_b + 1) * rank_c)
      throw UsageError("DfthcParams: w size does not match shape");
    if (h_sym.rows() != n_orb || h_sym.cols() != n_orb)
      throw UsageError("DfthcParams: h_sym must be n_orb x n_orb");
  }
};

// Which two-body tensor supplies the partial-trace correction of the shifted
// one-body matrix: the problem tensor itself or the fitted contraction.
enum class TraceSource { problem, fitted };

struct Hyper {
  double eps_reg = 1.0;
  double lambda_reg = 1.0;
  double e_reg = 1.0;
  double lr_init = 1e-1;
  double lr_final = 1e-5;
  long steps = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eps_reg > 0.0) || !(lambda_reg > 0.0) || !(e_reg > 0.0))
      throw UsageError("Hyper: regularization scales must be positive");
    if (!(lr_init > 0.0) || !(lr_final > 0.0))
      throw UsageError("Hyper: learning rates must be positive");
    if (steps < 1) throw UsageError("Hyper: steps must be at least 1");
  }
};

struct BlissTensors {
  Eigen::MatrixXd h1;       // h1 - (eta/2) h_sym + beta1 I
  std::vector<double> h2;   // h2 + (h_sym (x) I + I (x) h_sym)/2
  double h0 = 0.0;          // e_core - eta * beta1
};

struct Gradients {
  std::vector<double> u;
  std::vector<double> w;
  double beta1 = 0.0;
  Eigen::MatrixXd h_sym;
};

struct LossBreakdown {
  double frobenius_term = 0.0;
  double one_norm_term = 0.0;
  double gap_term = 0.0;
  double total = 0.0;
  double residual_fro = 0.0;  // ||h2_S - h2'||_F
  double one_norm = 0.0;      // Lambda
  double e_gap = 0.0;
};

namespace detail {

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace detail

// Rank-one aggregate L^{(rc)} = sum_{b<B} w_{rbc} u_{rb} u_{rb}^T.
inline Eigen::MatrixXd l_matrix(const DfthcParams& p, int r, int c) {
  const int N = p.n_orb;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(N, N);
  for (int b = 0; b < p.rank_b; ++b) {
    const double wb = p.w[p.w_index(r, b, c)];
    if (wb == 0.0) continue;
    Eigen::Map<const Eigen::VectorXd> ub(p.u.data() + p.u_index(r, b, 0), N);
    l.noalias() += wb * (ub * ub.transpose());
  }
  return l;
}

// Identity coefficient minus the projector coefficients of one factor.
inline double big_w(const DfthcParams& p, int r, int c) {
  double acc = p.w[p.w_index(r, p.rank_b, c)];
  for (int b = 0; b < p.rank_b; ++b) acc -= p.w[p.w_index(r, b, c)];
  return acc;
}

namespace detail {

inline std::vector<Eigen::MatrixXd> all_l_matrices(const DfthcParams& p) {
  std::vector<Eigen::MatrixXd> ls;
  ls.reserve(static_cast<std::size_t>(p.rank_r) * p.rank_c);
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c) ls.push_back(l_matrix(p, r, c));
  return ls;
}

inline std::vector<double> contract_from_ls(const std::vector<Eigen::MatrixXd>& ls, int n) {
  const Eigen::Index n2 = static_cast<Eigen::Index>(n) * n;
  std::vector<double> h2(static_cast<std::size_t>(n2) * n2, 0.0);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> out(
      h2.data(), n2, n2);
  for (const auto& l : ls) {
    Eigen::Map<const Eigen::VectorXd> lv(l.data(), n2);  // symmetric, order immaterial
    out.noalias() += lv * lv.transpose();
  }
  return h2;
}

}  // namespace detail

// Fitted two-body tensor h2'_{pqmn} = sum_{rc} L^{(rc)}_{pq} L^{(rc)}_{mn},
// flat row-major N^4.
inline std::vector<double> contract_h2(const DfthcParams& p) {
  p.validate();
  return detail::contract_from_ls(detail::all_l_matrices(p), p.n_orb);
}

// Symmetry-shifted problem tensors. The two-body shift adds
// (h_sym_pq d_rs + d_pq h_sym_rs)/2; the one-body matrix gains
// -(eta/2) h_sym + beta1 I; the scalar drops by eta*beta1 so that the
// eta-electron sector spectrum is unchanged.
inline BlissTensors bliss_tensors(const Problem& prob, double beta1,
                                  const Eigen::MatrixXd& h_sym) {
  const int N = prob.n_orb;
  if (h_sym.rows() != N || h_sym.cols() != N)
    throw UsageError("bliss_tensors: h_sym must be n_orb x n_orb");
  const Eigen::MatrixXd s = detail::symmetrized(h_sym);
  BlissTensors out;
  out.h1 = prob.h1 - 0.5 * prob.eta * s;
  out.h1.diagonal().array() += beta1;
  out.h2 = prob.h2;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const double half = 0.5 * s(a, b);
      if (half == 0.0) continue;
      for (int n = 0; n < N; ++n) {
        out.h2[h2_index(N, a, b, n, n)] += half;
        out.h2[h2_index(N, n, n, a, b)] += half;
      }
    }
  out.h0 = prob.e_core - prob.eta * beta1;
  return out;
}

// Shifted one-body matrix
//   h1' = h1_S + sum_n T[p,q,n,n] - sum_{rc} w_B^{(rc)} L^{(rc)},
// where T is the problem two-body tensor (shifted when use_shift) or the
// fitted contraction, per `trace`.
inline Eigen::MatrixXd effective_h1(const DfthcParams& p, const Problem& prob,
                                    bool use_shift = true,
                                    TraceSource trace = TraceSource::problem) {
  p.validate();
  if (prob.n_orb != p.n_orb) throw UsageError("effective_h1: n_orb mismatch");
  const int N = p.n_orb;

  Eigen::MatrixXd h1s;
  const std::vector<double>* h2s = nullptr;
  BlissTensors bt;
  if (use_shift) {
    bt = bliss_tensors(prob, p.beta1, p.h_sym);
    h1s = bt.h1;
    h2s = &bt.h2;
  } else {
    h1s = prob.h1;
    h2s = &prob.h2;
  }

  Eigen::MatrixXd out = h1s;
  const auto ls = detail::all_l_matrices(p);
  if (trace == TraceSource::problem) {
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        double acc = 0.0;
        for (int n = 0; n < N; ++n) acc += (*h2s)[h2_index(N, a, b, n, n)];
        out(a, b) += acc;
      }
  } else {
    for (const auto& l : ls) out.noalias() += l.trace() * l;
  }
  std::size_t idx = 0;
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c, ++idx)
      out.noalias() -= p.w[p.w_index(r, p.rank_b, c)] * ls[idx];
  return out;
}

// Block-encoding one-norm of the sum-of-squares form:
//   Lambda = ||h1'||_1 + (1/4) sum_{rc} (sum_b |w_{rbc}|)^2
// with the inner sum over all B+1 coefficient slots.
inline double lambda_sos(const DfthcParams& p, const Eigen::MatrixXd& h1_eff) {
  p.validate();
  double quarter = 0.0;
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c) {
      double s = 0.0;
      for (int b = 0; b <= p.rank_b; ++b) s += std::abs(p.w[p.w_index(r, b, c)]);
      quarter += 0.25 * s * s;
    }
  return schatten_norm1(h1_eff) + quarter;
}

// Spectral gap functional
//   E_gap = E_gs + ||h1'||_1 - Tr[h1_S] - (1/2) sum_pq h2'_ppqq
//           + (1/2) sum_rc (w_B^{(rc)})^2.
// The double trace of h2' is accumulated as sum_rc (Tr L^{(rc)})^2, which is
// exact for any parameters.
inline double e_gap(const DfthcParams& p, const Eigen::MatrixXd& h1_eff, double e_gs,
                    const Problem& prob) {
  p.validate();
  if (prob.n_orb != p.n_orb) throw UsageError("e_gap: n_orb mismatch");
  const Eigen::MatrixXd s = detail::symmetrized(p.h_sym);
  const double tr_h1s =
      prob.h1.trace() - 0.5 * prob.eta * s.trace() + p.n_orb * p.beta1;
  double acc = e_gs + schatten_norm1(h1_eff) - tr_h1s;
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c) {
      const double trl = l_matrix(p, r, c).trace();
      const double wb = p.w[p.w_index(r, p.rank_b, c)];
      acc += -0.5 * trl * trl + 0.5 * wb * wb;
    }
  return acc;
}

// The tensor pair the ansatz represents: (h1_S, h2', scalar 0). Its dense
// Hamiltonian equals the sum-of-squares operator.
inline Problem represented_problem(const DfthcParams& p, const Problem& prob) {
  p.validate();
  Problem out = Problem::zeros(p.n_orb, prob.eta);
  const BlissTensors bt = bliss_tensors(prob, p.beta1, p.h_sym);
  out.h1 = bt.h1;
  out.h2 = contract_h2(p);
  out.e_core = 0.0;
  return out;
}

namespace detail {

struct LossWork {
  LossBreakdown breakdown;
  // Cached forward quantities for the backward pass.
  std::vector<Eigen::MatrixXd> ls;
  std::vector<double> d;       // h2_S - h2'
  double d_norm = 0.0;
  Eigen::MatrixXd h1p;
  Eigen::MatrixXd s;           // symmetrized h_sym
  bool relu_active = false;
};

// Forward pass of
//   loss = ||h2_S - h2'||_F / eps_reg + Lambda / lambda_reg
//          + Relu((E_gap - E_reg)/E_reg)
// evaluated literally through the L matrices (no unit-norm shortcuts) so the
// analytic gradient matches finite differences of this exact expression.
inline LossWork loss_forward(const DfthcParams& p, const Problem& prob, const Hyper& hy,
                             double e_gs) {
  p.validate();
  hy.validate();
  if (prob.n_orb != p.n_orb) throw UsageError("loss: n_orb mismatch");
  const int N = p.n_orb;

  LossWork work;
  work.s = symmetrized(p.h_sym);
  const BlissTensors bt = bliss_tensors(prob, p.beta1, work.s);
  work.ls = all_l_matrices(p);

  work.d = contract_from_ls(work.ls, N);
  double d2 = 0.0;
  for (std::size_t i = 0; i < work.d.size(); ++i) {
    work.d[i] = bt.h2[i] - work.d[i];
    d2 += work.d[i] * work.d[i];
  }
  work.d_norm = std::sqrt(d2);

  // h1' with the problem-tensor trace source (shifted).
  work.h1p = bt.h1;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double acc = 0.0;
      for (int n = 0; n < N; ++n) acc += bt.h2[h2_index(N, a, b, n, n)];
      work.h1p(a, b) += acc;
    }
  double half_tr2 = 0.0, half_wb2 = 0.0, quarter = 0.0;
  std::size_t idx = 0;
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c, ++idx) {
      const double wb = p.w[p.w_index(r, p.rank_b, c)];
      work.h1p.noalias() -= wb * work.ls[idx];
      const double trl = work.ls[idx].trace();
      half_tr2 += 0.5 * trl * trl;
      half_wb2 += 0.5 * wb * wb;
      double s = 0.0;
      for (int b = 0; b <= p.rank_b; ++b) s += std::abs(p.w[p.w_index(r, b, c)]);
      quarter += 0.25 * s * s;
    }

  const double schatten = schatten_norm1(work.h1p);
  const double tr_h1s = bt.h1.trace();
  const double lambda = schatten + quarter;
  const double gap = e_gs + schatten - tr_h1s - half_tr2 + half_wb2;

  LossBreakdown& b = work.breakdown;
  b.residual_fro = work.d_norm;
  b.one_norm = lambda;
  b.e_gap = gap;
  b.frobenius_term = work.d_norm / hy.eps_reg;
  b.one_norm_term = lambda / hy.lambda_reg;
  const double g = (gap - hy.e_reg) / hy.e_reg;
  work.relu_active = g > 0.0;
  b.gap_term = work.relu_active ? g : 0.0;
  b.total = b.frobenius_term + b.one_norm_term + b.gap_term;
  return work;
}

inline Gradients loss_backward(const DfthcParams& p, const Problem& prob, const Hyper& hy,
                               const LossWork& work) {
  const int N = p.n_orb;
  const Eigen::Index n2 = static_cast<Eigen::Index>(N) * N;
  Gradients g;
  g.u.assign(p.u.size(), 0.0);
  g.w.assign(p.w.size(), 0.0);
  g.h_sym = Eigen::MatrixXd::Zero(N, N);

  const double coef_d =
      (work.d_norm > 1e-14) ? 1.0 / (hy.eps_reg * work.d_norm) : 0.0;
  const double relu = work.relu_active ? 1.0 / hy.e_reg : 0.0;

  // Trace-norm gradient of h1', routed through both the one-norm and the gap
  // terms.
  const Eigen::MatrixXd a_mat =
      schatten_norm1_gradient(work.h1p) * (1.0 / hy.lambda_reg + relu);
  const double tr_a = a_mat.trace();

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      dmat(work.d.data(), n2, n2);

  std::size_t idx = 0;
  for (int r = 0; r < p.rank_r; ++r)
    for (int c = 0; c < p.rank_c; ++c, ++idx) {
      const Eigen::MatrixXd& l = work.ls[idx];
      const double wb = p.w[p.w_index(r, p.rank_b, c)];
      const double trl = l.trace();

      // dLoss/dL^{(rc)}: Frobenius term, -w_B L inside h1', and the
      // -(1/2)(Tr L)^2 gap piece.
      Eigen::Map<const Eigen::VectorXd> lv(l.data(), n2);
      Eigen::VectorXd m1v = dmat * lv;
      Eigen::Map<const Eigen::MatrixXd> m1(m1v.data(), N, N);
      Eigen::MatrixXd gl = (-2.0 * coef_d) * m1 - wb * a_mat;
      gl.diagonal().array() -= relu * trl;

      double s_abs = 0.0;
      for (int b = 0; b <= p.rank_b; ++b) s_abs += std::abs(p.w[p.w_index(r, b, c)]);
      const double s_half = 0.5 * s_abs / hy.lambda_reg;
      auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };

      for (int b = 0; b < p.rank_b; ++b) {
        Eigen::Map<const Eigen::VectorXd> ub(p.u.data() + p.u_index(r, b, 0), N);
        const double wbrc = p.w[p.w_index(r, b, c)];
        g.w[p.w_index(r, b, c)] += ub.dot(gl * ub) + s_half * sgn(wbrc);
        Eigen::Map<Eigen::VectorXd> gu(g.u.data() + p.u_index(r, b, 0), N);
        gu.noalias() += (2.0 * wbrc) * (gl * ub);
      }
      g.w[p.w_index(r, p.rank_b, c)] +=
          -(a_mat.array() * l.array()).sum() + s_half * sgn(wb) + relu * wb;
    }

  // beta1: +I inside h1_S feeds the trace norm; -Tr[h1_S] in the gap.
  g.beta1 = tr_a - relu * N;

  // h_sym: Frobenius term through the two-body shift, the (N - eta)/2 entry
  // plus trace coupling through h1', and +(eta/2) I from -Tr[h1_S].
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double td = 0.0;
      for (int n = 0; n < N; ++n) td += work.d[h2_index(N, a, b, n, n)];
      g.h_sym(a, b) = coef_d * td + 0.5 * (N - prob.eta) * a_mat(a, b);
    }
  g.h_sym.diagonal().array() += 0.5 * tr_a + relu * 0.5 * prob.eta;
  g.h_sym = symmetrized(g.h_sym);
  return g;
}

}  // namespace detail

inline LossBreakdown loss_breakdown(const DfthcParams& p, const Problem& prob,
                                    const Hyper& hy, double e_gs) {
  return detail::loss_forward(p, prob, hy, e_gs).breakdown;
}

inline double loss(const DfthcParams& p, const Problem& prob, const Hyper& hy,
                   double e_gs) {
  return detail::loss_forward(p, prob, hy, e_gs).breakdown.total;
}

inline Gradients gradient(const DfthcParams& p, const Problem& prob, const Hyper& hy,
                          double e_gs) {
  const detail::LossWork work = detail::loss_forward(p, prob, hy, e_gs);
  return detail::loss_backward(p, prob, hy, work);
}

// Removes the radial component of each u-row gradient so updates move along
// the unit sphere.
inline void project_u_tangent(const DfthcParams& p, Gradients* g) {
  for (int r = 0; r < p.rank_r; ++r)
    for (int b = 0; b < p.rank_b; ++b) {
      Eigen::Map<const Eigen::VectorXd> ub(p.u.data() + p.u_index(r, b, 0), p.n_orb);
      Eigen::Map<Eigen::VectorXd> gu(g->u.data() + p.u_index(r, b, 0), p.n_orb);
      gu.noalias() -= ub.dot(gu) * ub;
    }
}

// Seeded initialization: unit-norm u rows from normalized Gaussians, then w
// and h_sym entries from N(0, 0.01), then beta1 from N(0, 0.05). Draw order
// is part of the reproducibility contract.
inline DfthcParams random_init(int n_orb, int rank_r, int rank_b, int rank_c,
                               RandomStream& rng) {
  DfthcParams p = DfthcParams::zeros(n_orb, rank_r, rank_b, rank_c);
  for (int r = 0; r < rank_r; ++r)
    for (int b = 0; b < rank_b; ++b) {
      Eigen::Map<Eigen::VectorXd> ub(p.u.data() + p.u_index(r, b, 0), n_orb);
      double norm = 0.0;
      do {
        for (int j = 0; j < n_orb; ++j) ub[j] = rng.normal();
        norm = ub.norm();
      } while (norm < 1e-12);
      ub /= norm;
    }
  for (int r = 0; r < rank_r; ++r)
    for (int b = 0; b <= rank_b; ++b)
      for (int c = 0; c < rank_c; ++c) p.w[p.w_index(r, b, c)] = rng.normal(0.0, 0.01);
  for (int a = 0; a < n_orb; ++a)
    for (int b = a; b < n_orb; ++b) {
      const double v = rng.normal(0.0, 0.01);
      p.h_sym(a, b) = v;
      p.h_sym(b, a) = v;
    }
  p.beta1 = rng.normal(0.0, 0.05);
  return p;
}

struct OptimizeResult {
  DfthcParams params;
  std::vector<double> loss_trace;  // loss before each step, then the final loss
  double e_gs = 0.0;               // scalar-free ground energy used by the gap term
  double final_loss = 0.0;
  LossBreakdown final_breakdown;
};

namespace detail {

// Ground energy of the problem's eta-electron sector with the scalar core
// removed, matching the normalization of the represented tensor pair.
inline double reference_ground_energy(const Problem& prob) {
  return ground_energy(build_dense_hamiltonian(prob), prob.eta) - prob.e_core;
}

}  // namespace detail

// Adam fit of the ansatz to `prob`. Deterministic for a fixed (hyper, shape,
// problem): the seed fixes the initialization and the loop is free of any
// other entropy. The learning rate decays geometrically from lr_init to
// lr_final. Throws DivergenceError when the loss stops being finite.
inline OptimizeResult optimize(const Problem& prob, int rank_r, int rank_b, int rank_c,
                               const Hyper& hy,
                               std::optional<double> e_gs_external = std::nullopt) {
  hy.validate();
  double e_gs = 0.0;
  if (e_gs_external) {
    e_gs = *e_gs_external;
  } else {
    e_gs = detail::reference_ground_energy(prob);
  }

  RandomStream rng(hy.seed);
  DfthcParams p = random_init(prob.n_orb, rank_r, rank_b, rank_c, rng);

  const std::size_t nu = p.u.size(), nw = p.w.size();
  const std::size_t nh = static_cast<std::size_t>(prob.n_orb) * prob.n_orb;
  const std::size_t dof = nu + nw + 1 + nh;
  std::vector<double> m(dof, 0.0), v(dof, 0.0);
  const double b1 = 0.9, b2 = 0.999, eps_hat = 1e-8;

  OptimizeResult out;
  out.loss_trace.reserve(static_cast<std::size_t>(hy.steps) + 1);

  for (long t = 0; t < hy.steps; ++t) {
    const detail::LossWork work = detail::loss_forward(p, prob, hy, e_gs);
    if (!std::isfinite(work.breakdown.total))
      throw DivergenceError("optimize: loss is not finite", t);
    out.loss_trace.push_back(work.breakdown.total);

    Gradients g = detail::loss_backward(p, prob, hy, work);
    project_u_tangent(p, &g);

    const double lr =
        (hy.steps > 1)
            ? hy.lr_init * std::pow(hy.lr_final / hy.lr_init,
                                    static_cast<double>(t) / (hy.steps - 1.0))
            : hy.lr_init;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t) + 1.0);
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t) + 1.0);

    auto adam = [&](std::size_t slot, double grad, double* param) {
      m[slot] = b1 * m[slot] + (1.0 - b1) * grad;
      v[slot] = b2 * v[slot] + (1.0 - b2) * grad * grad;
      const double mhat = m[slot] / bc1;
      const double vhat = v[slot] / bc2;
      *param -= lr * mhat / (std::sqrt(vhat) + eps_hat);
    };

    std::size_t slot = 0;
    for (std::size_t i = 0; i < nu; ++i, ++slot) adam(slot, g.u[i], &p.u[i]);
    for (std::size_t i = 0; i < nw; ++i, ++slot) adam(slot, g.w[i], &p.w[i]);
    adam(slot++, g.beta1, &p.beta1);
    for (int a = 0; a < prob.n_orb; ++a)
      for (int b = 0; b < prob.n_orb; ++b, ++slot) adam(slot, g.h_sym(a, b), &p.h_sym(a, b));

    for (int r = 0; r < p.rank_r; ++r)
      for (int b = 0; b < p.rank_b; ++b) {
        Eigen::Map<Eigen::VectorXd> ub(p.u.data() + p.u_index(r, b, 0), p.n_orb);
        const double norm = ub.norm();
        if (!(norm > 1e-12) || !std::isfinite(norm))
          throw DivergenceError("optimize: u row collapsed", t);
        ub /= norm;
      }
  }

  out.final_breakdown = loss_breakdown(p, prob, hy, e_gs);
  out.final_loss = out.final_breakdown.total;
  out.loss_trace.push_back(out.final_loss);
  out.params = std::move(p);
  out.e_gs = e_gs;
  return out;
}

struct RestartStats {
  std::vector<double> proxies;  // fitted minus exact sector ground energy
  double mean = 0.0;
  double stddev = 0.0;          // sample standard deviation
  OptimizeResult best;          // restart with the smallest final loss
};

// Runs `restarts` independent seeded fits and summarizes the ground-energy
// error of the represented tensor pair. Each restart owns a seed derived by
// splitting hyper.seed unless an explicit list is supplied.
inline RestartStats restart_statistics(const Problem& prob, int rank_r, int rank_b,
                                       int rank_c, const Hyper& hy, int restarts,
                                       const std::vector<std::uint64_t>* seeds = nullptr) {
  if (restarts < 1) throw UsageError("restart_statistics: restarts must be positive");
  if (seeds && seeds->size() != static_cast<std::size_t>(restarts))
    throw UsageError("restart_statistics: seed list size must equal restarts");

  const double e_gs = detail::reference_ground_energy(prob);
  RandomStream base(hy.seed);

  RestartStats stats;
  stats.proxies.reserve(static_cast<std::size_t>(restarts));
  double best_loss = std::numeric_limits<double>::infinity();
  for (int k = 0; k < restarts; ++k) {
    Hyper hk = hy;
    hk.seed = seeds ? (*seeds)[static_cast<std::size_t>(k)]
                    : base.split(static_cast<std::uint64_t>(k)).key();
    OptimizeResult res = optimize(prob, rank_r, rank_b, rank_c, hk, e_gs);
    const Problem rep = represented_problem(res.params, prob);
    const double gs_fit = ground_energy(build_dense_hamiltonian(rep), prob.eta);
    stats.proxies.push_back(gs_fit - e_gs);
    if (res.final_loss < best_loss) {
      best_loss = res.final_loss;
      stats.best = std::move(res);
    }
  }

  double mean = 0.0;
  for (double x : stats.proxies) mean += x;
  mean /= static_cast<double>(restarts);
  double ss = 0.0;
  for (double x : stats.proxies) ss += (x - mean) * (x - mean);
  stats.mean = mean;
  stats.stddev = (restarts > 1) ? std::sqrt(ss / (restarts - 1)) : 0.0;
  return stats;
}

// ---------------------------------------------------------------------------
// Checkpoint container

struct Checkpoint {
  DfthcParams params;
  Hyper hyper;
  long step = 0;
  std::vector<double> loss_trace;
  double e_gs = 0.0;
};

inline nlohmann::json checkpoint_to_json(const Checkpoint& ck) {
  ck.params.validate();
  nlohmann::json j;
  j["format"] = "soskit-checkpoint";
  j["version"] = 1;
  j["shape"] = {{"n_orb", ck.params.n_orb},
                {"r", ck.params.rank_r},
                {"b", ck.params.rank_b},
                {"c", ck.params.rank_c}};
  j["u"] = ck.params.u;
  j["w"] = ck.params.w;
  j["beta1"] = ck.params.beta1;
  std::vector<double> hs(ck.params.h_sym.size());
  for (int a = 0; a < ck.params.n_orb; ++a)
    for (int b = 0; b < ck.params.n_orb; ++b)
      hs[static_cast<std::size_t>(a) * ck.params.n_orb + b] = ck.params.h_sym(a, b);
  j["h_sym"] = hs;
  j["hyper"] = {{"eps_reg", ck.hyper.eps_reg},     {"lambda_reg", ck.hyper.lambda_reg},
                {"e_reg", ck.hyper.e_reg},         {"lr_init", ck.hyper.lr_init},
                {"lr_final", ck.hyper.lr_final},   {"steps", ck.hyper.steps},
                {"seed", ck.hyper.seed}};
  j["step"] = ck.step;
  j["loss_trace"] = ck.loss_trace;
  j["e_gs"] = ck.e_gs;
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "soskit-checkpoint")
    throw ParseError("checkpoint: unrecognized container");
  if (j.value("version", 0) != 1) throw ParseError("checkpoint: unsupported version");
  try {
    const auto& sh = j.at("shape");
    Checkpoint ck;
    ck.params = DfthcParams::zeros(sh.at("n_orb").get<int>(), sh.at("r").get<int>(),
                                   sh.at("b").get<int>(), sh.at("c").get<int>());
    ck.params.u = j.at("u").get<std::vector<double>>();
    ck.params.w = j.at("w").get<std::vector<double>>();
    ck.params.beta1 = j.at("beta1").get<double>();
    const auto hs = j.at("h_sym").get<std::vector<double>>();
    if (hs.size() != static_cast<std::size_t>(ck.params.n_orb) * ck.params.n_orb)
      throw ParseError("checkpoint: h_sym size mismatch");
    for (int a = 0; a < ck.params.n_orb; ++a)
      for (int b = 0; b < ck.params.n_orb; ++b)
        ck.params.h_sym(a, b) = hs[static_cast<std::size_t>(a) * ck.params.n_orb + b];
    const auto& hj = j.at("hyper");
    ck.hyper.eps_reg = hj.at("eps_reg").get<double>();
    ck.hyper.lambda_reg = hj.at("lambda_reg").get<double>();
    ck.hyper.e_reg = hj.at("e_reg").get<double>();
    ck.hyper.lr_init = hj.at("lr_init").get<double>();
    ck.hyper.lr_final = hj.at("lr_final").get<double>();
    ck.hyper.steps = hj.at("steps").get<long>();
    ck.hyper.seed = hj.at("seed").get<std::uint64_t>();
    ck.step = j.at("step").get<long>();
    ck.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    ck.e_gs = j.at("e_gs").get<double>();
    ck.params.validate();
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace soskit

#endif  // SOSKIT_DFTHC_HPP
