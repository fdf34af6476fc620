// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Matrix-level simulation of the rectangular block-encoding of the stacked
// square-root factor, the reflect-and-apply walk operators built from it,
// and the Hermitian dilation used as a baseline comparison. Everything here
// is desk-scale: dense matrices, explicit unitary completions, and phases
// read off transition amplitudes.

#ifndef SOSKIT_WALK_HPP
#define SOSKIT_WALK_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <vector>

#include "soskit/errors.hpp"
#include "soskit/sos.hpp"
#include "soskit/tensors.hpp"

namespace soskit {

// A unitary together with the row/column index sets that cut out the encoded
// block and the normalization the block was divided by.
struct BlockEncoding {
  Eigen::MatrixXcd u;
  std::vector<Eigen::Index> rows;  // flagged-ancilla row block
  std::vector<Eigen::Index> cols;  // zero-ancilla column block
  double lambda = 0.0;             // lambda_sqrt; block = H_sqrt / lambda
};

inline Eigen::MatrixXcd extract_block(const BlockEncoding& be) {
  Eigen::MatrixXcd block(static_cast<Eigen::Index>(be.rows.size()),
                         static_cast<Eigen::Index>(be.cols.size()));
  for (std::size_t i = 0; i < be.rows.size(); ++i)
    for (std::size_t j = 0; j < be.cols.size(); ++j)
      block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          be.u(be.rows[i], be.cols[j]);
  return block;
}

namespace detail {

// Hermitian principal square root with tiny negative eigenvalues clipped.
inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw NormalizationError("psd_sqrt: matrix is not positive semidefinite");
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

inline double operator_norm(const Eigen::MatrixXcd& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.adjoint() * op,
                                                     Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace detail

// Unitary completion of the isometry [M; sqrt(I - M^dag M)], where M stacks
// the generator blocks over lambda_sqrt. Rows 0..Ld-1 carry the generator
// flags; the final d rows are the junk block that absorbs the leftover norm.
inline BlockEncoding encode_rectangular(const SosDecomposition& dec, int n_orb) {
  require_oracle_scale(n_orb);
  if (dec.n_orb != n_orb) throw UsageError("encode_rectangular: n_orb mismatch");
  const Eigen::Index d = Eigen::Index(1) << (2 * n_orb);

  const auto ops = dense_generators(dec);
  if (ops.size() != dec.lambdas.size())
    throw UsageError("encode_rectangular: lambdas do not match generators");
  const Eigen::Index big_l = static_cast<Eigen::Index>(ops.size());

  double sq = 0.0;
  for (std::size_t a = 0; a < ops.size(); ++a) {
    const double norm = detail::operator_norm(ops[a]);
    const double lam = dec.lambdas[a];
    if (norm > lam * (1.0 + 1e-12) + 1e-12)
      throw NormalizationError("encode_rectangular: generator norm exceeds its lambda");
    sq += lam * lam;
  }
  const double lambda_sqrt = std::sqrt(sq);

  BlockEncoding be;
  be.lambda = lambda_sqrt;
  for (Eigen::Index j = 0; j < d; ++j) be.cols.push_back(j);

  if (big_l == 0) {
    be.u = Eigen::MatrixXcd::Identity(d, d);
    return be;  // empty row set: the encoded block is empty
  }

  Eigen::MatrixXcd m(big_l * d, d);
  for (Eigen::Index a = 0; a < big_l; ++a)
    m.middleRows(a * d, d) = ops[static_cast<std::size_t>(a)] / lambda_sqrt;
  for (Eigen::Index i = 0; i < big_l * d; ++i) be.rows.push_back(i);

  const Eigen::Index n = (big_l + 1) * d;
  Eigen::MatrixXcd v(n, d);
  v.topRows(big_l * d) = m;
  v.bottomRows(d) =
      detail::psd_sqrt(Eigen::MatrixXcd::Identity(d, d) - m.adjoint() * m);

  // Householder completion: the trailing columns of Q are an orthonormal
  // basis of the complement of col(V), so [V | Q_rest] is unitary.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(v);
  Eigen::MatrixXcd q = qr.householderQ();
  be.u.resize(n, n);
  be.u.leftCols(d) = v;
  be.u.rightCols(n - d) = q.rightCols(n - d);
  return be;
}

struct PhaseRecord {
  double phase = 0.0;     // eigenphase in (-pi, pi]
  double energy = 0.0;    // matched eigenvalue lambda^2 x^2 of the squared factor
  double residual = 0.0;  // invariance defect of the analytic eigenstate
};

struct WalkSpectrum {
  std::vector<PhaseRecord> w1;  // reflect-then-apply
  std::vector<PhaseRecord> w2;  // reflect-then-unapply
};

namespace detail {

struct WalkBasis {
  // Per singular triple: the embedded pair the walk rotates between.
  std::vector<double> x;                    // clipped singular values
  std::vector<Eigen::VectorXcd> zero_psi;   // |0, psi_j>
  std::vector<Eigen::VectorXcd> perp;       // companion of |0, psi_j> (empty if collapsed)
  std::vector<Eigen::VectorXcd> tilde_emb;  // left vector embedded in the flag rows
  std::vector<Eigen::VectorXcd> junk_psi;   // |junk, psi_j> image component
  Eigen::VectorXd ref_flag;                 // +1 on flag rows, -1 on junk rows
  Eigen::VectorXd ref_zero;                 // +1 on zero-ancilla rows, -1 elsewhere
};

inline WalkBasis walk_basis(const BlockEncoding& be) {
  const Eigen::Index n = be.u.rows();
  const Eigen::Index d = static_cast<Eigen::Index>(be.cols.size());
  WalkBasis wb;
  wb.ref_flag = -Eigen::VectorXd::Ones(n);
  for (Eigen::Index r : be.rows) wb.ref_flag[r] = 1.0;
  wb.ref_zero = -Eigen::VectorXd::Ones(n);
  for (Eigen::Index c : be.cols) wb.ref_zero[c] = 1.0;
  if (be.rows.empty()) return wb;

  const Eigen::MatrixXcd m = extract_block(be);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double x = std::min(1.0, svd.singularValues()[j]);
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    Eigen::VectorXcd zero_psi = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index i = 0; i < d; ++i) zero_psi[be.cols[i]] = svd.matrixV()(i, j);
    Eigen::VectorXcd tilde = Eigen::VectorXcd::Zero(n);
    for (std::size_t i = 0; i < be.rows.size(); ++i)
      tilde[be.rows[i]] = svd.matrixU()(static_cast<Eigen::Index>(i), j);

    wb.x.push_back(x);
    wb.zero_psi.push_back(zero_psi);
    wb.tilde_emb.push_back(tilde);
    if (s > 1e-7) {
      wb.perp.push_back((be.u.adjoint() * tilde - x * zero_psi) / s);
      wb.junk_psi.push_back((be.u * zero_psi - x * tilde) / s);
    } else {
      wb.perp.push_back(Eigen::VectorXcd());
      wb.junk_psi.push_back(Eigen::VectorXcd());
    }
  }
  return wb;
}

inline PhaseRecord transition_phase(const Eigen::VectorXcd& to, const Eigen::VectorXcd& image,
                                    double energy) {
  // `image` is the walk step applied to the pair member; a unit transition
  // amplitude onto |to> certifies the rotating pair and its phase.
  const std::complex<double> t = to.dot(image);
  PhaseRecord rec;
  rec.phase = std::arg(t);
  rec.energy = energy;
  rec.residual = std::max(std::abs(std::abs(t) - 1.0), (image - t * to).norm());
  return rec;
}

}  // namespace detail

// Single walk steps W1 = Ref_flag U and W2 = Ref_zero U^dag. For each
// singular value x_j of the encoded block, the embedded pair rotates by
// theta_j = arccos(x_j), producing the phase pair {+theta_j, -theta_j}.
inline WalkSpectrum walk_once(const BlockEncoding& be) {
  const detail::WalkBasis wb = detail::walk_basis(be);
  WalkSpectrum out;
  const std::complex<double> im(0.0, 1.0);
  for (std::size_t j = 0; j < wb.x.size(); ++j) {
    const double x = wb.x[j];
    const double energy = (be.lambda * x) * (be.lambda * x);
    if (wb.perp[j].size() == 0) {
      // Saturated direction: the pair collapses and the step acts directly.
      const Eigen::VectorXcd img1 =
          wb.ref_flag.cast<std::complex<double>>().asDiagonal() * (be.u * wb.zero_psi[j]);
      const auto rec = detail::transition_phase(wb.tilde_emb[j], img1, energy);
      out.w1.push_back(rec);
      out.w1.push_back({-rec.phase, energy, rec.residual});
      const Eigen::VectorXcd img2 =
          wb.ref_zero.cast<std::complex<double>>().asDiagonal() *
          (be.u.adjoint() * wb.tilde_emb[j]);
      const auto rec2 = detail::transition_phase(wb.zero_psi[j], img2, energy);
      out.w2.push_back(rec2);
      out.w2.push_back({-rec2.phase, energy, rec2.residual});
      continue;
    }
    for (const double sign : {1.0, -1.0}) {
      const Eigen::VectorXcd phi =
          (wb.zero_psi[j] + sign * im * wb.perp[j]) / std::sqrt(2.0);
      const Eigen::VectorXcd phi_tilde =
          (wb.tilde_emb[j] + sign * im * wb.junk_psi[j]) / std::sqrt(2.0);
      const Eigen::VectorXcd img1 =
          wb.ref_flag.cast<std::complex<double>>().asDiagonal() * (be.u * phi);
      out.w1.push_back(detail::transition_phase(phi_tilde, img1, energy));
      const Eigen::VectorXcd img2 =
          wb.ref_zero.cast<std::complex<double>>().asDiagonal() * (be.u.adjoint() * phi_tilde);
      out.w2.push_back(detail::transition_phase(phi, img2, energy));
    }
  }
  return out;
}

struct WalkTwiceReport {
  std::vector<PhaseRecord> phases;     // eigenphases of W2 W1
  Eigen::MatrixXcd one_step_block;     // zero-ancilla block of U^dag Ref_flag U
  double block_residual = 0.0;         // defect against 2 M^dag M - I
};

// Composed step W2 W1 and the reflected one-step block. The embedded pairs
// are genuine eigenvectors of the composition with phases +-2 theta_j, and
// the zero-ancilla block of U^dag Ref_flag U is the Chebyshev-shifted
// operator 2 H / lambda^2 - I.
inline WalkTwiceReport walk_twice(const BlockEncoding& be) {
  const detail::WalkBasis wb = detail::walk_basis(be);
  WalkTwiceReport out;
  const std::complex<double> im(0.0, 1.0);
  const Eigen::MatrixXcd ref_flag_u =
      wb.ref_flag.cast<std::complex<double>>().asDiagonal() * be.u;

  for (std::size_t j = 0; j < wb.x.size(); ++j) {
    const double x = wb.x[j];
    const double energy = (be.lambda * x) * (be.lambda * x);
    if (wb.perp[j].size() == 0) {
      // theta = 0: the state is an exact fixed point of the composition.
      const Eigen::VectorXcd img =
          wb.ref_zero.cast<std::complex<double>>().asDiagonal() *
          (be.u.adjoint() * (ref_flag_u * wb.zero_psi[j]));
      const auto rec = detail::transition_phase(wb.zero_psi[j], img, energy);
      out.phases.push_back(rec);
      out.phases.push_back({-rec.phase, energy, rec.residual});
      continue;
    }
    for (const double sign : {1.0, -1.0}) {
      const Eigen::VectorXcd phi =
          (wb.zero_psi[j] + sign * im * wb.perp[j]) / std::sqrt(2.0);
      const Eigen::VectorXcd img =
          wb.ref_zero.cast<std::complex<double>>().asDiagonal() *
          (be.u.adjoint() * (ref_flag_u * phi));
      out.phases.push_back(detail::transition_phase(phi, img, energy));
    }
  }

  const Eigen::MatrixXcd m = extract_block(be);
  const Eigen::Index d = static_cast<Eigen::Index>(be.cols.size());
  const Eigen::MatrixXcd reflected = be.u.adjoint() * ref_flag_u;
  out.one_step_block.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      out.one_step_block(i, j) = reflected(be.cols[i], be.cols[j]);
  const Eigen::MatrixXcd want =
      2.0 * (m.adjoint() * m) - Eigen::MatrixXcd::Identity(d, d);
  out.block_residual = (out.one_step_block - want).cwiseAbs().maxCoeff();
  return out;
}

struct HermitianDilation {
  Eigen::MatrixXcd matrix;
  std::vector<double> eigenvalues;   // ascending
  Eigen::Index walk_dimension = 0;   // dimension a walk on the dilation needs
};

// Baseline construction: the off-diagonal dilation of the generator stack.
// Its nonzero eigenvalues are +-sqrt(E_j); walking on it requires doubling
// the dilated space, which is what the rectangular encoding avoids.
inline HermitianDilation hermitian_dilation(const SosDecomposition& dec, int n_orb) {
  require_oracle_scale(n_orb);
  if (dec.n_orb != n_orb) throw UsageError("hermitian_dilation: n_orb mismatch");
  const Eigen::Index d = Eigen::Index(1) << (2 * n_orb);
  const auto ops = dense_generators(dec);
  const Eigen::Index big_l = static_cast<Eigen::Index>(ops.size());
  const Eigen::Index n = (big_l + 1) * d;

  HermitianDilation out;
  out.matrix = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index a = 0; a < big_l; ++a) {
    out.matrix.block((a + 1) * d, 0, d, d) = ops[static_cast<std::size_t>(a)];
    out.matrix.block(0, (a + 1) * d, d, d) = ops[static_cast<std::size_t>(a)].adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.matrix, Eigen::EigenvaluesOnly);
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  out.walk_dimension = 2 * n;
  return out;
}

// CSV dump of a phase list: one line per record.
inline void write_spectrum_csv(const std::vector<PhaseRecord>& phases, std::ostream& os) {
  os << "phase,energy,residual\n";
  for (const auto& rec : phases)
    os << rec.phase << ',' << rec.energy << ',' << rec.residual << '\n';
}

}  // namespace soskit

#endif  // SOSKIT_WALK_HPP
