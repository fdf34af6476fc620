// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Toffoli and qubit cost model for the block-encoded walk: per-subroutine
// line items, lookup split-parameter optimization, effective normalization,
// phase-estimation query counts, the kurtosis correction to the estimator
// width, and chemical-accuracy error budgets. All counts are exact integer
// arithmetic; no floating point enters any Toffoli or qubit number.

#ifndef SOSKIT_COSTS_HPP
#define SOSKIT_COSTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "soskit/errors.hpp"

namespace soskit {

// Smallest k with 2^k >= n, on exact integers. ceil_log2(1) = 0.
inline int ceil_log2(long n) {
  if (n < 1) throw UsageError("ceil_log2: argument must be positive");
  int k = 0;
  long pow = 1;
  while (pow < n) {
    pow *= 2;
    ++k;
  }
  return k;
}

inline long ceil_div(long a, long b) { return (a + b - 1) / b; }

struct CostInputs {
  int n_orb = 1;
  int rank_r = 1;
  int rank_b = 1;
  int rank_c = 1;
  int b_rot = 15;
  int b_coeff = 15;
  std::optional<int> b_k1;  // default: b_coeff
  std::optional<int> b_k2;  // default: b_coeff
  std::optional<int> k1, k2, k4, k5;  // unset: chosen by optimize_k
  double sigma_pea = 1e-3;   // Ha
  double sigma_corr = 0.0;   // Ha
  double sigma_trunc = 0.0;  // Ha
  double eps_corr = 0.0;     // Ha
  double eps_trunc = 0.0;    // Ha
  double lambda_cap = 0.0;   // Ha
  double e_gap = 0.0;        // Ha

  int bk1() const { return b_k1 ? *b_k1 : b_coeff; }
  int bk2() const { return b_k2 ? *b_k2 : b_coeff; }

  void validate() const {
    if (n_orb < 1 || rank_r < 1 || rank_b < 1 || rank_c < 1)
      throw UsageError("CostInputs: ranks and orbital count must be >= 1");
    if (b_rot < 1 || b_coeff < 1 || bk1() < 1 || bk2() < 1)
      throw UsageError("CostInputs: bit counts must be >= 1");
    for (const auto& k : {k1, k2, k4, k5})
      if (k && *k < 0) throw UsageError("CostInputs: split parameters must be >= 0");
    if (sigma_pea < 0 || sigma_corr < 0 || sigma_trunc < 0 || eps_corr < 0 ||
        eps_trunc < 0)
      throw UsageError("CostInputs: error-budget terms must be >= 0");
    if (lambda_cap < e_gap || e_gap < 0)
      throw UsageError("CostInputs: requires lambda >= e_gap >= 0");
  }
};

struct KChoice {
  int k1 = 0, k2 = 0, k4 = 0, k5 = 0;
};

// One walk step: outer preparation once, inner preparation / rotation lookup /
// select twice each, then the two reflections.
struct CostReport {
  KChoice k;
  // outer state preparation (1 call)
  long outer_uniform = 0, outer_alias = 0, outer_alias_inv = 0, outer_uniform_inv = 0;
  long outer_total = 0, outer_persistent = 0, outer_temporary = 0;
  // inner state preparation (2 calls)
  long inner_uniform = 0, inner_qroam = 0, inner_qroam_inv = 0, inner_uniform_inv = 0;
  long inner_total = 0, inner_persistent = 0, inner_temporary = 0;
  // rotation-angle lookup (2 calls)
  long rprep_qrom = 0, rprep_qrom_inv = 0;
  long rprep_total = 0, rprep_persistent = 0, rprep_temporary = 0;
  // select (2 calls)
  long sel_rot = 0, sel_cswap = 0, sel_majorana_control = 0;
  long sel_total = 0, sel_persistent = 0, sel_temporary = 0;
  // reflections (1 call each)
  long ref_t2 = 0, ref_walk = 0;
  // totals
  long total_toffoli = 0;
  long persistent_qubits = 0;  // ancilla only
  long system_qubits = 0;
  long max_temporary_qubits = 0;
  long total_qubits = 0;
  std::vector<std::string> notes;
};

namespace detail {

inline CostReport cost_for_k(const CostInputs& in, const KChoice& k) {
  const long n = in.n_orb;
  const long rc = static_cast<long>(in.rank_r) * in.rank_c;
  const long nl = n + rc;           // outer alphabet size
  const long bp1 = in.rank_b + 1;   // inner alphabet size, identity slot included
  const int log_nl = ceil_log2(nl);
  const int log_bp1 = ceil_log2(bp1);
  const long b1 = log_nl + in.bk1();
  const long b2 = log_bp1 + in.bk2();

  CostReport r;
  r.k = k;

  r.outer_uniform = 4 * log_nl;
  r.outer_alias = ceil_div(nl, 1L << k.k1) + (1L << k.k1) * b1;
  r.outer_alias_inv = b1 + ceil_div(nl, 1L << k.k5) + (1L << k.k5);
  r.outer_uniform_inv = 4 * log_nl;
  r.outer_total = r.outer_uniform + r.outer_alias + r.outer_alias_inv + r.outer_uniform_inv;
  r.outer_persistent = (log_nl + 2) + (b1 + in.bk1());
  r.outer_temporary = std::max(0, log_nl - 2) +
                      ((1L << k.k1) * b1 + ceil_log2(ceil_div(nl, 1L << k.k1)));

  r.inner_uniform = 4 * log_bp1;
  r.inner_qroam = rc * ceil_div(bp1, 1L << k.k2) + (1L << k.k2) * b2;
  r.inner_qroam_inv = b2 + n + ceil_div(rc, 1L << k.k4) + (1L << k.k4) * bp1;
  r.inner_uniform_inv = 4 * log_bp1;
  r.inner_total = r.inner_uniform + r.inner_qroam + r.inner_qroam_inv + r.inner_uniform_inv;
  r.inner_persistent = (b2 + in.bk2() + ceil_log2(in.rank_r) + ceil_log2(in.rank_c) + 2) +
                       (log_bp1 + 2);
  r.inner_temporary = (ceil_log2(rc * ceil_div(bp1, 1L << k.k2)) + ((1L << k.k2) - 1) * b2) +
                      std::max(0, log_bp1 - 2);

  r.rprep_qrom = n + static_cast<long>(in.rank_r) * in.rank_b;
  r.rprep_qrom_inv = in.rank_r + in.rank_b;
  r.rprep_total = r.rprep_qrom + r.rprep_qrom_inv;
  r.rprep_persistent = (n - 1) * in.b_rot;
  r.rprep_temporary =
      std::max(log_nl, ceil_log2(static_cast<long>(in.rank_r) * in.rank_b));

  r.sel_rot = 4 * in.b_rot * (n - 1);
  r.sel_cswap = 2 * n;
  r.sel_majorana_control = 7;
  r.sel_total = r.sel_rot + r.sel_cswap + r.sel_majorana_control;
  r.sel_persistent = in.b_rot;
  r.sel_temporary = 0;

  r.ref_t2 = log_bp1 + in.bk2() + 1;
  r.ref_walk = log_nl + log_bp1 + in.bk1() + in.bk2() + 2;

  r.total_toffoli = r.outer_total + 2 * (r.inner_total + r.rprep_total + r.sel_total) +
                    r.ref_t2 + r.ref_walk;

  r.persistent_qubits =
      r.outer_persistent + r.inner_persistent + r.rprep_persistent + r.sel_persistent;
  r.system_qubits = 2 * n;
  // The inner-lookup scratch runs while the rotation-output register is still
  // idle, so it borrows those persistent qubits; only the overflow counts.
  const long inner_effective = std::max(0L, r.inner_temporary - r.rprep_persistent);
  r.max_temporary_qubits = std::max({r.outer_temporary, inner_effective,
                                     r.rprep_temporary, r.sel_temporary});
  r.total_qubits = r.persistent_qubits + r.system_qubits + r.max_temporary_qubits;

  r.notes.push_back(
      "controlled-swap counted at 2N per call from the worked breakdown; the "
      "coarser 4(N+1) estimate is intentionally not used");
  return r;
}

// Scratch budget the inner lookup must fit into to reuse idle qubits.
inline long inner_lookup_temporary(const CostInputs& in, int k2) {
  const long rc = static_cast<long>(in.rank_r) * in.rank_c;
  const long bp1 = in.rank_b + 1;
  const long b2 = ceil_log2(bp1) + in.bk2();
  return ceil_log2(rc * ceil_div(bp1, 1L << k2)) + ((1L << k2) - 1) * b2;
}

}  // namespace detail

// Brute-force split parameters minimizing total Toffoli per walk step,
// subject to the inner lookup's scratch fitting in the idle rotation-output
// register; ties break toward smaller k. If no split satisfies the scratch
// budget the constraint is dropped rather than failing.
inline KChoice optimize_k(const CostInputs& in) {
  in.validate();
  const long nl = static_cast<long>(in.n_orb) + static_cast<long>(in.rank_r) * in.rank_c;
  const int k1_max = ceil_log2(nl);
  const int k2_max = ceil_log2(static_cast<long>(in.rank_b) + 1);
  const int k4_max = ceil_log2(static_cast<long>(in.rank_r) * in.rank_c);
  const long budget = static_cast<long>(in.n_orb - 1) * in.b_rot;

  bool feasible = false;
  for (int k2 = 0; k2 <= k2_max && !feasible; ++k2)
    feasible = detail::inner_lookup_temporary(in, k2) <= budget;

  KChoice best;
  long best_cost = -1;
  for (int k1 = 0; k1 <= k1_max; ++k1)
    for (int k2 = 0; k2 <= k2_max; ++k2) {
      if (feasible && detail::inner_lookup_temporary(in, k2) > budget) continue;
      for (int k4 = 0; k4 <= k4_max; ++k4)
        for (int k5 = 0; k5 <= k1_max; ++k5) {
          const KChoice k{k1, k2, k4, k5};
          const long cost = detail::cost_for_k(in, k).total_toffoli;
          if (best_cost < 0 || cost < best_cost) {
            best_cost = cost;
            best = k;
          }
        }
    }
  return best;
}

// Full per-walk-step cost report; unset split parameters are optimized.
inline CostReport block_encoding_cost(const CostInputs& in) {
  in.validate();
  if (in.k1 && in.k2 && in.k4 && in.k5)
    return detail::cost_for_k(in, KChoice{*in.k1, *in.k2, *in.k4, *in.k5});
  KChoice k = optimize_k(in);
  if (in.k1) k.k1 = *in.k1;
  if (in.k2) k.k2 = *in.k2;
  if (in.k4) k.k4 = *in.k4;
  if (in.k5) k.k5 = *in.k5;
  return detail::cost_for_k(in, k);
}

// Effective normalization of the amplified walk, sqrt(E_gap (2 lambda - E_gap)).
inline double lambda_eff(double lambda_cap, double e_gap) {
  if (e_gap < 0.0 || e_gap > 2.0 * lambda_cap)
    throw DomainError("lambda_eff: requires 0 <= e_gap <= 2 lambda");
  return std::sqrt(e_gap * (2.0 * lambda_cap - e_gap));
}

struct PeaCost {
  long queries = 0;
  long total_toffoli = 0;
};

// Phase-estimation query count at target standard deviation sigma_pea, and
// the resulting Toffoli total given the per-query block-encoding cost.
inline PeaCost pea_cost(double lambda_eff_value, double sigma_pea, long c_be) {
  if (sigma_pea <= 0.0) throw UsageError("pea_cost: sigma must be positive");
  PeaCost out;
  out.queries = std::max(1L, static_cast<long>(
                                 std::ceil(M_PI * lambda_eff_value / (2.0 * sigma_pea))));
  out.total_toffoli = out.queries * c_be;
  return out;
}

struct SigmaCorrection {
  double sigma_e = 0.0;     // corrected energy standard deviation, Ha
  double fractional = 0.0;  // leading-order relative widening
};

// Width of the energy estimate once the estimator's kurtosis kappa is
// accounted for: sigma_qpe is the phase-level deviation, and the corrected
// energy deviation is sigma_qpe sqrt(E_min(2 lambda - E_min) +
// (kappa-1)/4 lambda^2 sigma_qpe^2). kappa = 3 gives the Gaussian case.
inline SigmaCorrection sigma_correction(double lambda_cap, double e_min,
                                        double sigma_qpe, double kappa = 3.0) {
  if (sigma_qpe <= 0.0) throw UsageError("sigma_correction: sigma must be positive");
  const double leff_sq = e_min * (2.0 * lambda_cap - e_min);
  const double term = 0.25 * (kappa - 1.0) * lambda_cap * lambda_cap * sigma_qpe * sigma_qpe;
  SigmaCorrection out;
  out.sigma_e = sigma_qpe * std::sqrt(leff_sq + term);
  if (term == 0.0)
    out.fractional = 0.0;
  else if (leff_sq <= 0.0)
    out.fractional = std::numeric_limits<double>::infinity();
  else
    out.fractional = (kappa - 1.0) * lambda_cap * lambda_cap * sigma_qpe * sigma_qpe /
                     (8.0 * leff_sq);
  return out;
}

inline constexpr double epsilon_chem = 1.6e-3;  // Ha

struct BudgetBound {
  std::string name;
  double value = 0.0;  // combined error, Ha
  double slack = 0.0;  // epsilon_chem - value
  bool pass = false;
};

struct ErrorBudget {
  std::array<BudgetBound, 4> bounds;
  bool all_pass = false;
};

// Four standard combinations of the phase-estimation width, representation
// correction, and truncation terms, each tested against chemical accuracy.
inline ErrorBudget error_budget(const CostInputs& in) {
  in.validate();
  ErrorBudget out;
  const double quad2 = std::hypot(in.sigma_pea, in.sigma_corr);
  const double quad3 = std::sqrt(in.sigma_pea * in.sigma_pea +
                                 in.sigma_corr * in.sigma_corr +
                                 in.sigma_trunc * in.sigma_trunc);
  out.bounds[0] = {"linear", in.sigma_pea + in.eps_corr, 0.0, false};
  out.bounds[1] = {"quadrature", quad2, 0.0, false};
  out.bounds[2] = {"truncated",
                   std::hypot(in.sigma_pea, in.sigma_trunc) + in.eps_corr + in.eps_trunc,
                   0.0, false};
  out.bounds[3] = {"robust", quad3, 0.0, false};
  out.all_pass = true;
  for (auto& b : out.bounds) {
    b.slack = epsilon_chem - b.value;
    b.pass = b.slack >= 0.0;
    out.all_pass = out.all_pass && b.pass;
  }
  return out;
}

// --- report formatting ------------------------------------------------------

inline nlohmann::json cost_report_to_json(const CostInputs& in, const CostReport& r) {
  nlohmann::json j;
  j["inputs"] = {{"n", in.n_orb},       {"r", in.rank_r},        {"b", in.rank_b},
                 {"c", in.rank_c},      {"b_rot", in.b_rot},     {"b_coeff", in.b_coeff},
                 {"b_k1", in.bk1()},    {"b_k2", in.bk2()}};
  j["k"] = {{"k1", r.k.k1}, {"k2", r.k.k2}, {"k4", r.k.k4}, {"k5", r.k.k5}};
  j["outer_prep"] = {{"uniform", r.outer_uniform},
                     {"alias", r.outer_alias},
                     {"alias_inverse", r.outer_alias_inv},
                     {"uniform_inverse", r.outer_uniform_inv},
                     {"total", r.outer_total},
                     {"persistent", r.outer_persistent},
                     {"temporary", r.outer_temporary},
                     {"calls", 1}};
  j["inner_prep"] = {{"uniform", r.inner_uniform},
                     {"lookup", r.inner_qroam},
                     {"lookup_inverse", r.inner_qroam_inv},
                     {"uniform_inverse", r.inner_uniform_inv},
                     {"total", r.inner_total},
                     {"persistent", r.inner_persistent},
                     {"temporary", r.inner_temporary},
                     {"calls", 2}};
  j["rotation_prep"] = {{"lookup", r.rprep_qrom},
                        {"lookup_inverse", r.rprep_qrom_inv},
                        {"total", r.rprep_total},
                        {"persistent", r.rprep_persistent},
                        {"temporary", r.rprep_temporary},
                        {"calls", 2}};
  j["select"] = {{"rotations", r.sel_rot},
                 {"controlled_swap", r.sel_cswap},
                 {"majorana_control", r.sel_majorana_control},
                 {"total", r.sel_total},
                 {"persistent", r.sel_persistent},
                 {"temporary", r.sel_temporary},
                 {"calls", 2}};
  j["reflections"] = {{"t2", r.ref_t2}, {"walk", r.ref_walk}, {"calls", 1}};
  j["totals"] = {{"toffoli", r.total_toffoli},
                 {"persistent_qubits", r.persistent_qubits},
                 {"system_qubits", r.system_qubits},
                 {"max_temporary_qubits", r.max_temporary_qubits},
                 {"qubits", r.total_qubits}};
  j["notes"] = r.notes;
  return j;
}

inline std::string cost_report_table(const CostReport& r) {
  std::ostringstream os;
  const auto line = [&os](const char* block, const char* item, long cost, long pers,
                          long temp, int calls) {
    os << std::left << std::setw(12) << block << std::setw(22) << item << std::right
       << std::setw(10) << cost << std::setw(12) << pers << std::setw(11) << temp
       << std::setw(7) << calls << '\n';
  };
  os << std::left << std::setw(12) << "block" << std::setw(22) << "item" << std::right
     << std::setw(10) << "toffoli" << std::setw(12) << "persistent" << std::setw(11)
     << "temporary" << std::setw(7) << "calls" << '\n';
  line("outer prep", "uniform", r.outer_uniform, -1, -1, 1);
  line("outer prep", "alias", r.outer_alias, -1, -1, 1);
  line("outer prep", "alias inverse", r.outer_alias_inv, -1, -1, 1);
  line("outer prep", "uniform inverse", r.outer_uniform_inv, -1, -1, 1);
  line("outer prep", "total", r.outer_total, r.outer_persistent, r.outer_temporary, 1);
  line("inner prep", "uniform", r.inner_uniform, -1, -1, 2);
  line("inner prep", "lookup", r.inner_qroam, -1, -1, 2);
  line("inner prep", "lookup inverse", r.inner_qroam_inv, -1, -1, 2);
  line("inner prep", "uniform inverse", r.inner_uniform_inv, -1, -1, 2);
  line("inner prep", "total", r.inner_total, r.inner_persistent, r.inner_temporary, 2);
  line("rot prep", "lookup", r.rprep_qrom, -1, -1, 2);
  line("rot prep", "lookup inverse", r.rprep_qrom_inv, -1, -1, 2);
  line("rot prep", "total", r.rprep_total, r.rprep_persistent, r.rprep_temporary, 2);
  line("select", "rotations", r.sel_rot, -1, -1, 2);
  line("select", "controlled swap", r.sel_cswap, -1, -1, 2);
  line("select", "majorana control", r.sel_majorana_control, -1, -1, 2);
  line("select", "total", r.sel_total, r.sel_persistent, r.sel_temporary, 2);
  line("reflection", "inner step", r.ref_t2, 0, 0, 1);
  line("reflection", "walk", r.ref_walk, 0, 0, 1);
  os << '\n';
  os << "split parameters: k1=" << r.k.k1 << " k2=" << r.k.k2 << " k4=" << r.k.k4
     << " k5=" << r.k.k5 << '\n';
  os << "total toffoli per walk step: " << r.total_toffoli << '\n';
  os << "qubits: " << r.persistent_qubits << " persistent + " << r.system_qubits
     << " system + " << r.max_temporary_qubits << " temporary = " << r.total_qubits
     << '\n';
  for (const auto& note : r.notes) os << "note: " << note << '\n';
  std::string text = os.str();
  // -1 marks cells that only apply to block totals
  std::size_t pos;
  while ((pos = text.find("         -1")) != std::string::npos)
    text.replace(pos, 11, "           ");
  return text;
}

// One row of the scaling export: system label plus the quantities that the
// summary plots track against orbital count.
struct ScalingPoint {
  std::string name;
  int n_orb = 0;
  double lambda_cap = 0.0;
  double e_gap = 0.0;
  double lambda_eff = 0.0;
  long c_be = 0;
  long qubits = 0;
  double total_toffoli = 0.0;
};

inline void write_scaling_csv(const std::vector<ScalingPoint>& points, std::ostream& os) {
  os << "name,n,lambda,e_gap,lambda_eff,c_be,qubits,total_toffoli\n";
  for (const auto& p : points)
    os << p.name << ',' << p.n_orb << ',' << p.lambda_cap << ',' << p.e_gap << ','
       << p.lambda_eff << ',' << p.c_be << ',' << p.qubits << ',' << p.total_toffoli
       << '\n';
}

}  // namespace soskit

#endif  // SOSKIT_COSTS_HPP
