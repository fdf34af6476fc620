// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale semidefinite lower bound on the Fock-space ground energy via a
// sum-of-squares over the spin-free operator algebra. The basis vector per
// spin is
//   o_sigma = ( I/sqrt2,
//               a_{1 sigma} .. a_{N sigma},
//               a+_{1 sigma} .. a+_{N sigma},
//               E_ij/sqrt2,    with E_ij  = sum_tau a+_{i tau} a_{j tau},
//               F_ij/sqrt2 )   with F_ij  = sum_tau a_{i tau} a+_{j tau},
// so the represented operator is sum_sigma o_sigma^dag G o_sigma with one
// shared real symmetric G: odd basis entries contribute once per spin and the
// spin-summed even entries carry 1/sqrt2 per copy so their squares appear
// exactly once. Normal-ordering every basis product yields one linear
// equation per monomial; the identity coefficient is the (negated) shift
// E_SOS being maximized. The solver is a low-rank factorization G = L L^T
// driven by an augmented-Lagrangian outer loop with Adam inner steps.

#ifndef SOSKIT_SDP_HPP
#define SOSKIT_SDP_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "soskit/errors.hpp"
#include "soskit/rng.hpp"
#include "soskit/tensors.hpp"

namespace soskit {

namespace detail {

inline constexpr double inv_sqrt2 = 0.70710678118654752440;

// One ladder factor: fermionic mode (0..2N-1, spin-major: mode = sigma*N + p)
// and whether it is a creator.
struct LadderOp {
  int mode = 0;
  bool dag = false;
};

struct LadderTerm {
  double c = 0.0;
  std::vector<LadderOp> ops;  // at most 4 factors here
};

// Canonical monomial key: creator mode mask in the high word, annihilator
// mask in the low word. The monomial's value is the product of creators in
// ascending mode order times annihilators in descending mode order, so the
// adjoint of a canonical monomial is the canonical monomial with swapped
// masks and no sign.
inline std::uint64_t monomial_key(std::uint32_t creators, std::uint32_t annihilators) {
  return (static_cast<std::uint64_t>(creators) << 32) | annihilators;
}

using Poly = std::map<std::uint64_t, double>;

// parity of the permutation sorting `v` (0 ascending, 1 descending);
// returns 0 on a repeated entry, else +-1.
inline int sort_sign(std::vector<int>* v, bool descending) {
  int sign = 1;
  for (std::size_t i = 0; i < v->size(); ++i)
    for (std::size_t j = i + 1; j < v->size(); ++j) {
      if ((*v)[i] == (*v)[j]) return 0;
      const bool swap = descending ? (*v)[i] < (*v)[j] : (*v)[i] > (*v)[j];
      if (swap) {
        std::swap((*v)[i], (*v)[j]);
        sign = -sign;
      }
    }
  return sign;
}

// Expand a ladder product into canonical normal-ordered monomials by
// repeatedly applying a a+ = delta - a+ a.
inline void accumulate_normal_ordered(const LadderTerm& seed, Poly* out) {
  std::vector<LadderTerm> work{seed};
  while (!work.empty()) {
    LadderTerm t = std::move(work.back());
    work.pop_back();
    if (t.c == 0.0) continue;
    bool reduced = false;
    for (std::size_t i = 0; i + 1 < t.ops.size(); ++i) {
      if (!t.ops[i].dag && t.ops[i + 1].dag) {
        LadderTerm swapped = t;
        std::swap(swapped.ops[i], swapped.ops[i + 1]);
        swapped.c = -t.c;
        if (t.ops[i].mode == t.ops[i + 1].mode) {
          LadderTerm contracted;
          contracted.c = t.c;
          contracted.ops.reserve(t.ops.size() - 2);
          for (std::size_t j = 0; j < t.ops.size(); ++j)
            if (j != i && j != i + 1) contracted.ops.push_back(t.ops[j]);
          work.push_back(std::move(contracted));
        }
        work.push_back(std::move(swapped));
        reduced = true;
        break;
      }
    }
    if (reduced) continue;
    // all creators precede all annihilators; canonicalize each side
    std::vector<int> cre, ann;
    for (const auto& op : t.ops) (op.dag ? cre : ann).push_back(op.mode);
    const int sc = sort_sign(&cre, false);
    const int sa = sort_sign(&ann, true);
    if (sc == 0 || sa == 0) continue;
    std::uint32_t ca = 0, an = 0;
    for (int m : cre) ca |= (1u << m);
    for (int m : ann) an |= (1u << m);
    (*out)[monomial_key(ca, an)] += t.c * sc * sa;
  }
}

inline LadderTerm adjoint(const LadderTerm& t) {
  LadderTerm out;
  out.c = t.c;
  out.ops.reserve(t.ops.size());
  for (auto it = t.ops.rbegin(); it != t.ops.rend(); ++it)
    out.ops.push_back({it->mode, !it->dag});
  return out;
}

}  // namespace detail

// Abstract element of the spin-free generating algebra, as the coefficient
// blocks of the basis vector. Its spin-sigma realization is
//   ident/sqrt2 * I + sum_i ann_i a_{i sigma} + sum_i cre_i a+_{i sigma}
//   + (1/sqrt2) sum_ij rot_ij E_ij + (1/sqrt2) sum_ij hole_ij F_ij,
// and the element contributes O_up^dag O_up + O_down^dag O_down.
struct SosElement {
  double ident = 0.0;
  Eigen::VectorXd ann, cre;   // length N
  Eigen::MatrixXd rot, hole;  // N x N
};

struct GramFactor {
  int basis_size = 0;  // 1 + 2N + 2N^2
  Eigen::MatrixXd l;   // basis_size x k, G = l l^T

  void validate() const {
    if (l.rows() != basis_size) throw UsageError("GramFactor: factor rows mismatch");
    if (l.cols() < 1 || l.cols() > basis_size)
      throw UsageError("GramFactor: rank must lie in [1, basis_size]");
  }
};

inline int sdp_basis_size(int n_orb) { return 1 + 2 * n_orb + 2 * n_orb * n_orb; }

// Linear identification of the Gram expansion with the normal-ordered target
// coefficients. `pairs[a * m_b + b]` holds the monomial coefficients of
// sum_sigma (o_a sigma)^dag (o_b sigma); `ident` is that product's identity
// coefficient, whose total over G is the negated shift.
struct ConstraintSystem {
  int n_orb = 0;
  int basis_size = 0;
  std::vector<std::uint64_t> monomials;  // sorted keys, identity excluded
  Eigen::VectorXd targets;
  struct PairEntries {
    std::vector<std::pair<int, double>> rows;  // (monomial index, coefficient)
    double ident = 0.0;
  };
  std::vector<PairEntries> pairs;  // basis_size^2, row-major ordered pairs

  int constraint_count() const { return static_cast<int>(monomials.size()); }

  // shift functional: E_SOS(G) = -sum_ab ident_ab G_ab
  double e_sos_of(const Eigen::MatrixXd& gram) const {
    double acc = 0.0;
    for (int a = 0; a < basis_size; ++a)
      for (int b = 0; b < basis_size; ++b)
        acc += pairs[static_cast<std::size_t>(a) * basis_size + b].ident * gram(a, b);
    return -acc;
  }

  // A(G) - b over the constraint monomials
  Eigen::VectorXd residual(const Eigen::MatrixXd& gram) const {
    Eigen::VectorXd r = -targets;
    for (int a = 0; a < basis_size; ++a)
      for (int b = 0; b < basis_size; ++b) {
        const double g = gram(a, b);
        for (const auto& [row, t] : pairs[static_cast<std::size_t>(a) * basis_size + b].rows)
          r[row] += t * g;
      }
    return r;
  }
};

namespace detail {

// sigma realization of basis element `a` as ladder terms
inline std::vector<LadderTerm> basis_symbol(int a, int sigma, int n_orb) {
  const auto mode = [&](int p, int tau) { return tau * n_orb + p; };
  std::vector<LadderTerm> out;
  if (a == 0) {
    out.push_back({inv_sqrt2, {}});
    return out;
  }
  a -= 1;
  if (a < n_orb) {
    out.push_back({1.0, {{mode(a, sigma), false}}});
    return out;
  }
  a -= n_orb;
  if (a < n_orb) {
    out.push_back({1.0, {{mode(a, sigma), true}}});
    return out;
  }
  a -= n_orb;
  const int i = a / n_orb % n_orb, j = a % n_orb;
  if (a < n_orb * n_orb) {
    for (int tau = 0; tau < 2; ++tau)
      out.push_back({inv_sqrt2, {{mode(i, tau), true}, {mode(j, tau), false}}});
    return out;
  }
  for (int tau = 0; tau < 2; ++tau)
    out.push_back({inv_sqrt2, {{mode(i, tau), false}, {mode(j, tau), true}}});
  return out;
}

inline Poly pair_polynomial(int a, int b, int n_orb) {
  Poly out;
  for (int sigma = 0; sigma < 2; ++sigma) {
    const auto lhs = basis_symbol(a, sigma, n_orb);
    const auto rhs = basis_symbol(b, sigma, n_orb);
    for (const auto& x : lhs)
      for (const auto& y : rhs) {
        const LadderTerm xd = adjoint(x);
        LadderTerm prod;
        prod.c = xd.c * y.c;
        prod.ops = xd.ops;
        prod.ops.insert(prod.ops.end(), y.ops.begin(), y.ops.end());
        accumulate_normal_ordered(prod, &out);
      }
  }
  return out;
}

inline Poly hamiltonian_polynomial(const Problem& prob) {
  const int N = prob.n_orb;
  const auto mode = [&](int p, int tau) { return tau * N + p; };
  Poly out;
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      const double c1 = prob.h1(p, q);
      if (c1 != 0.0)
        for (int s = 0; s < 2; ++s)
          accumulate_normal_ordered({c1, {{mode(p, s), true}, {mode(q, s), false}}}, &out);
      for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
          const double c2 = 0.5 * prob.h2[h2_index(N, p, q, m, n)];
          if (c2 == 0.0) continue;
          for (int s = 0; s < 2; ++s)
            for (int t = 0; t < 2; ++t)
              accumulate_normal_ordered({c2,
                                         {{mode(p, s), true},
                                          {mode(q, s), false},
                                          {mode(m, t), true},
                                          {mode(n, t), false}}},
                                        &out);
        }
    }
  return out;
}

}  // namespace detail

// One linear equation per normal-ordered monomial appearing in either the
// Gram expansion or the Hamiltonian; absent Hamiltonian terms get target 0.
// The scalar e_core never enters (it is added back to the reported bound).
inline ConstraintSystem assemble_constraints(const Problem& prob) {
  if (prob.n_orb < 1 || prob.n_orb > 16)
    throw UsageError("assemble_constraints: n_orb out of the symbolic range [1, 16]");
  ConstraintSystem sys;
  sys.n_orb = prob.n_orb;
  sys.basis_size = sdp_basis_size(prob.n_orb);
  const int m_b = sys.basis_size;

  const detail::Poly target = detail::hamiltonian_polynomial(prob);
  std::vector<detail::Poly> polys(static_cast<std::size_t>(m_b) * m_b);
  std::map<std::uint64_t, int> index;
  for (const auto& [key, coeff] : target)
    if (key != 0 && std::abs(coeff) > 1e-14) index.emplace(key, 0);
  for (int a = 0; a < m_b; ++a)
    for (int b = 0; b < m_b; ++b) {
      detail::Poly& p = polys[static_cast<std::size_t>(a) * m_b + b];
      p = detail::pair_polynomial(a, b, prob.n_orb);
      for (const auto& [key, coeff] : p)
        if (key != 0 && std::abs(coeff) > 1e-14) index.emplace(key, 0);
    }

  sys.monomials.reserve(index.size());
  for (auto& [key, slot] : index) {
    slot = static_cast<int>(sys.monomials.size());
    sys.monomials.push_back(key);
  }
  sys.targets = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.monomials.size()));
  for (const auto& [key, coeff] : target) {
    if (key == 0 || std::abs(coeff) <= 1e-14) continue;
    sys.targets[index.at(key)] = coeff;
  }
  sys.pairs.resize(polys.size());
  for (std::size_t pi = 0; pi < polys.size(); ++pi) {
    auto& entry = sys.pairs[pi];
    for (const auto& [key, coeff] : polys[pi]) {
      if (std::abs(coeff) <= 1e-14) continue;
      if (key == 0)
        entry.ident = coeff;
      else
        entry.rows.emplace_back(index.at(key), coeff);
    }
  }
  return sys;
}

struct SdpOptions {
  int rank = 0;  // 0: ceil(log2(constraints)) + 2, clamped to [1, basis_size]
  long outer = 60;
  long inner = 320;
  double lr_init = 0.02;
  double lr_final = 1e-9;
  double rho_init = 4.0;
  double rho_cap = 1e8;
  double certify_tol = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    if (rank < 0) throw UsageError("SdpOptions: rank must be nonnegative");
    if (outer < 1 || inner < 1) throw UsageError("SdpOptions: iteration budget must be positive");
    if (!(lr_init > 0.0) || !(lr_final > 0.0)) throw UsageError("SdpOptions: learning rates");
    if (!(rho_init > 0.0) || !(rho_cap >= rho_init)) throw UsageError("SdpOptions: penalty");
    if (!(certify_tol > 0.0)) throw UsageError("SdpOptions: certify_tol");
  }
};

struct SdpReport {
  double bound = 0.0;            // e_core + E_SOS of the candidate
  double certified_bound = 0.0;  // bound - slack, a true lower bound
  double slack = 0.0;            // residual_l2 * basis_size
  double residual_l2 = 0.0;
  double residual_l1 = 0.0;
  bool certified = false;
  int rank = 0;
  long iterations = 0;
  std::uint64_t seed = 0;
  int constraints = 0;
  GramFactor gram;
};

inline int default_sdp_rank(int constraints, int basis_size) {
  int k = 2;
  int m = constraints > 1 ? constraints : 1;
  while (m > 1) {
    m = (m + 1) / 2;
    ++k;
  }
  if (k < 1) k = 1;
  if (k > basis_size) k = basis_size;
  return k;
}

// Levenberg-damped Gauss-Newton descent on |residual(L L^T)|^2. The residual
// is quadratic in L, so from a near-feasible iterate a handful of steps land
// on the constraint manifold to machine precision; on an unrepresentable
// system it settles at the nearest stationary point and reports that norm.
inline double feasibility_polish(const ConstraintSystem& sys, Eigen::MatrixXd* l,
                                 double target_res, int max_iters) {
  const int m_b = sys.basis_size;
  const int k = static_cast<int>(l->cols());
  const int m = sys.constraint_count();
  const int nvar = m_b * k;
  Eigen::VectorXd r = sys.residual(*l * l->transpose());
  double res = r.norm();
  double damping = 1e-10;
  Eigen::MatrixXd jac(m, nvar);
  for (int iter = 0; iter < max_iters && res > target_res; ++iter) {
    jac.setZero();
    for (int a = 0; a < m_b; ++a)
      for (int b = 0; b < m_b; ++b) {
        const auto& entry = sys.pairs[static_cast<std::size_t>(a) * m_b + b];
        for (const auto& [row, t] : entry.rows)
          for (int c = 0; c < k; ++c) {
            jac(row, a * k + c) += t * (*l)(b, c);
            jac(row, b * k + c) += t * (*l)(a, c);
          }
      }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    const double scale = std::max(jtj.diagonal().maxCoeff(), 1e-300);
    bool stepped = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += damping * scale;
      const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
      Eigen::MatrixXd cand = *l;
      for (int a = 0; a < m_b; ++a)
        for (int c = 0; c < k; ++c) cand(a, c) += delta[a * k + c];
      const Eigen::VectorXd rc = sys.residual(cand * cand.transpose());
      if (cand.allFinite() && rc.norm() < res) {
        *l = cand;
        r = rc;
        res = rc.norm();
        damping = std::max(damping * 0.1, 1e-14);
        stepped = true;
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) break;
  }
  return res;
}

// Augmented-Lagrangian maximization of the shift over G = L L^T: Adam inner
// descent on c_I(G) + mu.r + (rho/2)|r|^2. Each round ramps the step size
// down geometrically from a ceiling proportional to the current residual
// (Adam steps are size-normalized, and the distance still to cover scales
// with the residual), floored by one slow global ramp so that objective
// descent along residual-flat directions is never starved. A round that
// shrinks the residual takes the multiplier step mu += rho r; a stalled
// round doubles the penalty (capped) and leaves the multipliers alone, so
// noise never accumulates into mu. The best-residual iterate then gets a
// Gauss-Newton feasibility polish, which Adam cannot match near the
// manifold; `certified` marks residual_l2 < certify_tol.
inline SdpReport solve_lower_bound(const Problem& prob, const SdpOptions& opts = {}) {
  opts.validate();
  const ConstraintSystem sys = assemble_constraints(prob);
  const int m_b = sys.basis_size;
  const int m = sys.constraint_count();
  const int k = opts.rank > 0 ? (opts.rank > m_b ? m_b : opts.rank)
                              : default_sdp_rank(m, m_b);

  RandomStream rng(opts.seed);
  Eigen::MatrixXd l(m_b, k);
  for (int a = 0; a < m_b; ++a)
    for (int c = 0; c < k; ++c) l(a, c) = rng.normal(0.0, 0.1);

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  double rho = opts.rho_init;
  long iterations = 0;
  const double total_steps = static_cast<double>(opts.outer) * static_cast<double>(opts.inner);

  Eigen::MatrixXd best_l = l;
  double best_res = std::numeric_limits<double>::infinity();
  double round_res = sys.residual(l * l.transpose()).norm();

  Eigen::MatrixXd grad(m_b, k), scatter(m_b, m_b);
  for (long round = 0; round < opts.outer; ++round) {
    // fresh Adam state against the updated multipliers
    Eigen::MatrixXd madam = Eigen::MatrixXd::Zero(m_b, k);
    Eigen::MatrixXd vadam = Eigen::MatrixXd::Zero(m_b, k);
    const double b1 = 0.9, b2 = 0.999, eps_hat = 1e-8;
    double lr_hi = 0.5 * round_res;
    if (lr_hi > opts.lr_init) lr_hi = opts.lr_init;
    if (lr_hi < opts.lr_final) lr_hi = opts.lr_final;
    for (long t = 0; t < opts.inner; ++t, ++iterations) {
      const Eigen::MatrixXd gram = l * l.transpose();
      const Eigen::VectorXd r = sys.residual(gram);
      const Eigen::VectorXd q = mu + rho * r;
      for (int a = 0; a < m_b; ++a)
        for (int b = 0; b < m_b; ++b) {
          const auto& entry = sys.pairs[static_cast<std::size_t>(a) * m_b + b];
          double s = entry.ident;
          for (const auto& [row, coeff] : entry.rows) s += q[row] * coeff;
          scatter(a, b) = s;
        }
      grad.noalias() = (scatter + scatter.transpose()) * l;
      const double settle = (opts.inner > 1)
                                ? lr_hi * std::pow(1e-3, static_cast<double>(t) /
                                                             (static_cast<double>(opts.inner) - 1.0))
                                : lr_hi;
      const double floor_ramp =
          (total_steps > 1.0)
              ? opts.lr_init * std::pow(opts.lr_final / opts.lr_init,
                                        static_cast<double>(iterations) / (total_steps - 1.0))
              : opts.lr_final;
      double lr = settle > floor_ramp ? settle : floor_ramp;
      if (lr > opts.lr_init) lr = opts.lr_init;
      if (lr < opts.lr_final) lr = opts.lr_final;
      const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t) + 1.0);
      const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t) + 1.0);
      for (int a = 0; a < m_b; ++a)
        for (int c = 0; c < k; ++c) {
          const double g = grad(a, c);
          madam(a, c) = b1 * madam(a, c) + (1.0 - b1) * g;
          vadam(a, c) = b2 * vadam(a, c) + (1.0 - b2) * g * g;
          l(a, c) -= lr * (madam(a, c) / bc1) / (std::sqrt(vadam(a, c) / bc2) + eps_hat);
        }
      if (!l.allFinite()) throw DivergenceError("solve_lower_bound: factor diverged", iterations);
    }
    const Eigen::VectorXd r = sys.residual(l * l.transpose());
    const double res = r.norm();
    if (res <= 0.9 * best_res) {
      mu += rho * r;
    } else {
      rho = std::min(rho * 2.0, opts.rho_cap);
    }
    if (res < best_res) {
      best_res = res;
      best_l = l;
    }
    round_res = res;
    if (res < 0.1 * opts.certify_tol && round >= 5) break;
  }

  if (best_res > 0.01 * opts.certify_tol)
    best_res = feasibility_polish(sys, &best_l, 0.001 * opts.certify_tol, 60);

  SdpReport report;
  report.gram.basis_size = m_b;
  report.gram.l = best_l;
  report.gram.validate();
  const Eigen::MatrixXd gram = best_l * best_l.transpose();
  const Eigen::VectorXd r = sys.residual(gram);
  report.residual_l2 = r.norm();
  report.residual_l1 = r.lpNorm<1>();
  report.bound = prob.e_core + sys.e_sos_of(gram);
  report.slack = report.residual_l2 * m_b;
  report.certified_bound = report.bound - report.slack;
  report.certified = report.residual_l2 < opts.certify_tol;
  report.rank = k;
  report.iterations = iterations;
  report.seed = opts.seed;
  report.constraints = m;
  return report;
}

// Independent seeded solves in parallel; each future owns its options copy.
inline std::vector<SdpReport> solve_multi_seed(const Problem& prob, const SdpOptions& base,
                                               const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw UsageError("solve_multi_seed: no seeds");
  std::vector<std::future<SdpReport>> futures;
  futures.reserve(seeds.size());
  for (std::uint64_t s : seeds) {
    SdpOptions o = base;
    o.seed = s;
    futures.push_back(std::async(std::launch::async,
                                 [&prob, o]() { return solve_lower_bound(prob, o); }));
  }
  std::vector<SdpReport> out;
  out.reserve(seeds.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

// Columns of the factor as algebra elements; zero columns are dropped.
// The basis is linearly dependent as operators (the hole block satisfies
// F_ij = 2 delta_ij I - E_ji), so every column is reported in the canonical
// gauge with those null directions projected out; the represented operator
// is unchanged and repeated extraction is a fixed point.
inline std::vector<SosElement> extract_generators(const GramFactor& gf) {
  gf.validate();
  const int m_b = gf.basis_size;
  int n = 0;
  while (sdp_basis_size(n) < m_b) ++n;
  if (sdp_basis_size(n) != m_b) throw UsageError("extract_generators: basis size is not 1+2N+2N^2");
  Eigen::MatrixXd null_gauge;
  if (n > 0) {
    Eigen::MatrixXd dirs = Eigen::MatrixXd::Zero(m_b, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Eigen::Index col = static_cast<Eigen::Index>(i) * n + j;
        dirs(1 + 2 * n + i * n + j, col) = 1.0;
        dirs(1 + 2 * n + n * n + j * n + i, col) = 1.0;
        if (i == j) dirs(0, col) = -2.0;
      }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(dirs);
    null_gauge = qr.householderQ() * Eigen::MatrixXd::Identity(m_b, n * n);
  }
  std::vector<SosElement> out;
  for (Eigen::Index c = 0; c < gf.l.cols(); ++c) {
    Eigen::VectorXd v = gf.l.col(c);
    if (n > 0) v -= null_gauge * (null_gauge.transpose() * v);
    if (v.norm() <= 1e-14) continue;
    SosElement el;
    el.ident = v[0];
    el.ann = v.segment(1, n);
    el.cre = v.segment(1 + n, n);
    el.rot = Eigen::MatrixXd(n, n);
    el.hole = Eigen::MatrixXd(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        el.rot(i, j) = v[1 + 2 * n + i * n + j];
        el.hole(i, j) = v[1 + 2 * n + n * n + i * n + j];
      }
    out.push_back(std::move(el));
  }
  return out;
}

// Inverse of extract_generators: stack the elements' coefficient vectors.
inline GramFactor gram_from_elements(const std::vector<SosElement>& elements, int n_orb) {
  GramFactor gf;
  gf.basis_size = sdp_basis_size(n_orb);
  const Eigen::Index k = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(elements.size()));
  gf.l = Eigen::MatrixXd::Zero(gf.basis_size, k);
  for (std::size_t c = 0; c < elements.size(); ++c) {
    const SosElement& el = elements[c];
    Eigen::VectorXd v(gf.basis_size);
    v[0] = el.ident;
    v.segment(1, n_orb) = el.ann;
    v.segment(1 + n_orb, n_orb) = el.cre;
    for (int i = 0; i < n_orb; ++i)
      for (int j = 0; j < n_orb; ++j) {
        v[1 + 2 * n_orb + i * n_orb + j] = el.rot(i, j);
        v[1 + 2 * n_orb + n_orb * n_orb + i * n_orb + j] = el.hole(i, j);
      }
    gf.l.col(static_cast<Eigen::Index>(c)) = v;
  }
  return gf;
}

// Dense spin-sigma realization of an algebra element (desk-scale only).
inline Eigen::MatrixXcd dense_sos_element(const SosElement& el, int sigma, int n_orb) {
  require_oracle_scale(n_orb);
  const Eigen::Index dim = Eigen::Index(1) << (2 * n_orb);
  Eigen::MatrixXcd op = detail::inv_sqrt2 * el.ident * Eigen::MatrixXcd::Identity(dim, dim);
  for (int i = 0; i < n_orb; ++i) {
    if (el.ann[i] == 0.0 && el.cre[i] == 0.0) continue;
    const Eigen::MatrixXcd g0 = build_majorana(i, sigma, 0, n_orb).data;
    const Eigen::MatrixXcd g1 = build_majorana(i, sigma, 1, n_orb).data;
    const Eigen::MatrixXcd a = 0.5 * (g0 + std::complex<double>(0.0, 1.0) * g1);
    op += el.ann[i] * a + el.cre[i] * a.adjoint();
  }
  for (int i = 0; i < n_orb; ++i)
    for (int j = 0; j < n_orb; ++j) {
      if (el.rot(i, j) != 0.0)
        op += detail::inv_sqrt2 * el.rot(i, j) * build_e_pq(n_orb, i, j).data;
      if (el.hole(i, j) != 0.0) {
        // F_ij = 2 delta_ij - E_ji
        Eigen::MatrixXcd f = -build_e_pq(n_orb, j, i).data;
        if (i == j) f += 2.0 * Eigen::MatrixXcd::Identity(dim, dim);
        op += detail::inv_sqrt2 * el.hole(i, j) * f;
      }
    }
  return op;
}

// Dense sum_alpha sum_sigma O^dag O of a generator list (desk-scale only).
inline Eigen::MatrixXcd dense_gram_operator(const std::vector<SosElement>& elements, int n_orb) {
  require_oracle_scale(n_orb);
  const Eigen::Index dim = Eigen::Index(1) << (2 * n_orb);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& el : elements)
    for (int sigma = 0; sigma < 2; ++sigma) {
      const Eigen::MatrixXcd op = dense_sos_element(el, sigma, n_orb);
      acc += op.adjoint() * op;
    }
  return acc;
}

inline nlohmann::json sdp_report_to_json(const SdpReport& rep) {
  return nlohmann::json{{"bound", rep.bound},
                        {"certified_bound", rep.certified_bound},
                        {"slack", rep.slack},
                        {"residual", rep.residual_l2},
                        {"residual_l1", rep.residual_l1},
                        {"certified", rep.certified},
                        {"rank", rep.rank},
                        {"iterations", rep.iterations},
                        {"seed", rep.seed},
                        {"constraints", rep.constraints}};
}

}  // namespace soskit

#endif  // SOSKIT_SDP_HPP
