// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Electronic-structure data model, FCIDUMP ingestion, and the dense
// Fock-space oracle.
//
// Layout conventions used across the library:
//   - orbitals p in [0, N); spin modes m = sigma*N + p with spin-up first
//   - Fock basis index bit m = occupation of mode m (mode 0 least significant)
//   - h2 stored flat row-major, h2[p][q][r][s] in chemists' order (pq|rs)
#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "soskit/errors.hpp"

namespace soskit {

using Complex = std::complex<double>;

inline std::size_t h2_index(int n_orb, int p, int q, int r, int s) {
  return static_cast<std::size_t>(((p * n_orb + q) * n_orb + r) * n_orb + s);
}

// Active-space electronic-structure problem.
struct Problem {
  int n_orb = 0;
  Eigen::MatrixXd h1;       // symmetric N x N
  std::vector<double> h2;   // flat N^4, 8-fold permutational symmetry
  double e_core = 0.0;
  int eta = 0;              // electron count

  static Problem zeros(int n_orb, int eta = 0) {
    Problem p;
    p.n_orb = n_orb;
    p.h1 = Eigen::MatrixXd::Zero(n_orb, n_orb);
    p.h2.assign(static_cast<std::size_t>(n_orb) * n_orb * n_orb * n_orb, 0.0);
    p.eta = eta;
    return p;
  }
};

// Largest N for which dense 4^N x 4^N builds are permitted. Overridable via
// the SOSKIT_ORACLE_LIMIT environment variable.
inline int oracle_limit() {
  if (const char* env = std::getenv("SOSKIT_ORACLE_LIMIT")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 7;
}

inline void require_oracle_scale(int n_orb) {
  if (n_orb > oracle_limit())
    throw OracleLimitError("dense Fock-space build requested for N=" + std::to_string(n_orb) +
                           " above the oracle limit " + std::to_string(oracle_limit()) +
                           " (set SOSKIT_ORACLE_LIMIT to override)");
}

// Dense operator on the full Fock space of 2N spin-orbitals.
struct DenseOperator {
  Eigen::Index dim = 0;
  Eigen::MatrixXcd data;

  static DenseOperator zeros(Eigen::Index dim) {
    DenseOperator op;
    op.dim = dim;
    op.data = Eigen::MatrixXcd::Zero(dim, dim);
    return op;
  }
};

// ---------------------------------------------------------------------------
// FCIDUMP ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline bool parse_double_token(const std::string& tok, double* out) {
  try {
    std::size_t pos = 0;
    *out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline bool parse_int_token(const std::string& tok, long* out) {
  try {
    std::size_t pos = 0;
    *out = std::stol(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Scans a namelist-style header chunk for KEY= <integer>.
inline std::optional<long> header_int(const std::string& header, const std::string& key) {
  const std::string up = upper(header);
  std::size_t at = 0;
  while ((at = up.find(key, at)) != std::string::npos) {
    // must be a standalone key followed by '='
    const std::size_t after = at + key.size();
    if (at > 0 && (std::isalnum(static_cast<unsigned char>(up[at - 1])) || up[at - 1] == '_')) {
      at = after;
      continue;
    }
    std::size_t eq = after;
    while (eq < up.size() && std::isspace(static_cast<unsigned char>(up[eq]))) ++eq;
    if (eq >= up.size() || up[eq] != '=') {
      at = after;
      continue;
    }
    ++eq;
    while (eq < up.size() && std::isspace(static_cast<unsigned char>(up[eq]))) ++eq;
    std::size_t end = eq;
    while (end < up.size() && (std::isdigit(static_cast<unsigned char>(up[end])) ||
                               up[end] == '+' || up[end] == '-'))
      ++end;
    if (end == eq) return std::nullopt;
    long v = 0;
    if (!parse_int_token(up.substr(eq, end - eq), &v)) return std::nullopt;
    return v;
  }
  return std::nullopt;
}

inline void warn(std::vector<std::string>* sink, const std::string& msg) {
  if (sink)
    sink->push_back(msg);
  else
    std::cerr << "soskit: warning: " << msg << "\n";
}

}  // namespace detail

// Parses the FCIDUMP text convention: a namelist header declaring NORB and
// NELEC terminated by &END (or a bare /), then records `value p q r s` with
// 1-based indices. `value p q 0 0` feeds h1, `value 0 0 0 0` the core energy,
// full index quadruples feed h2 at all eight symmetry images. Conflicting
// duplicate records are resolved last-writer-wins with a warning when they
// disagree by more than 1e-10.
inline Problem parse_fcidump(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  std::string header;
  std::string line;
  bool header_done = false;
  while (std::getline(in, line)) {
    const std::string up = detail::upper(line);
    const std::size_t endpos = up.find("&END");
    if (endpos != std::string::npos) {
      header += line.substr(0, endpos);
      header_done = true;
      break;
    }
    // A namelist may also end with a bare '/'.
    const std::size_t slash = line.find('/');
    if (slash != std::string::npos) {
      header += line.substr(0, slash);
      header_done = true;
      break;
    }
    header += line + "\n";
  }
  if (!header_done) throw ParseError("FCIDUMP header is missing an &END terminator");
  const auto norb = detail::header_int(header, "NORB");
  const auto nelec = detail::header_int(header, "NELEC");
  if (!norb || *norb < 1) throw ParseError("FCIDUMP header does not declare a valid NORB");
  if (!nelec || *nelec < 0) throw ParseError("FCIDUMP header does not declare a valid NELEC");
  const int N = static_cast<int>(*norb);

  Problem prob = Problem::zeros(N, static_cast<int>(*nelec));
  if (prob.eta > 2 * N) throw ParseError("NELEC exceeds the 2*NORB spin-orbital capacity");
  std::vector<char> h2_seen(prob.h2.size(), 0);
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> h1_seen =
      Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(N, N);
  bool core_seen = false;

  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 5)
      throw ParseError("FCIDUMP record with " + std::to_string(tok.size()) +
                       " fields (want 5): '" + line + "'");
    double value = 0.0;
    if (!detail::parse_double_token(tok[0], &value))
      throw ParseError("non-numeric FCIDUMP value '" + tok[0] + "'");
    long idx[4];
    for (int i = 0; i < 4; ++i)
      if (!detail::parse_int_token(tok[static_cast<std::size_t>(i + 1)], &idx[i]))
        throw ParseError("non-numeric FCIDUMP index '" + tok[static_cast<std::size_t>(i + 1)] +
                         "'");
    for (int i = 0; i < 4; ++i)
      if (idx[0] < 0 || idx[1] < 0 || idx[2] < 0 || idx[3] < 0 || idx[i] > N)
        throw IndexError("FCIDUMP index " + std::to_string(idx[i]) + " outside [0, " +
                         std::to_string(N) + "]");
    const long p = idx[0], q = idx[1], r = idx[2], s = idx[3];
    if (p == 0 && q == 0 && r == 0 && s == 0) {
      if (core_seen && std::abs(prob.e_core - value) > 1e-10)
        detail::warn(warnings, "conflicting core-energy records; keeping the last one");
      prob.e_core = value;
      core_seen = true;
    } else if (p > 0 && q > 0 && r == 0 && s == 0) {
      const int a = static_cast<int>(p) - 1, b = static_cast<int>(q) - 1;
      if ((h1_seen(a, b) || h1_seen(b, a)) &&
          (std::abs(prob.h1(a, b) - value) > 1e-10 || std::abs(prob.h1(b, a) - value) > 1e-10))
        detail::warn(warnings, "conflicting one-body records at (" + std::to_string(p) + "," +
                                   std::to_string(q) + "); keeping the last one");
      prob.h1(a, b) = value;
      prob.h1(b, a) = value;
      h1_seen(a, b) = h1_seen(b, a) = 1;
    } else if (p > 0 && q > 0 && r > 0 && s > 0) {
      const int a = static_cast<int>(p) - 1, b = static_cast<int>(q) - 1,
                c = static_cast<int>(r) - 1, d = static_cast<int>(s) - 1;
      const int perms[8][4] = {{a, b, c, d}, {b, a, c, d}, {a, b, d, c}, {b, a, d, c},
                               {c, d, a, b}, {d, c, a, b}, {c, d, b, a}, {d, c, b, a}};
      bool warned = false;
      for (const auto& g : perms) {
        const std::size_t at = h2_index(N, g[0], g[1], g[2], g[3]);
        if (h2_seen[at] && std::abs(prob.h2[at] - value) > 1e-10 && !warned) {
          detail::warn(warnings, "conflicting two-body records at line " +
                                     std::to_string(line_no) + "; keeping the last one");
          warned = true;
        }
        prob.h2[at] = value;
        h2_seen[at] = 1;
      }
    } else {
      throw ParseError("unsupported FCIDUMP index pattern (" + std::to_string(p) + " " +
                       std::to_string(q) + " " + std::to_string(r) + " " + std::to_string(s) +
                       ")");
    }
  }
  return prob;
}

inline Problem parse_fcidump(const std::string& text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_fcidump(in, warnings);
}

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Emits one canonical record per 8-fold h2 orbit plus the lower h1 triangle
// and the core energy, at full double precision so a parse round-trips all
// values bit-exactly.
inline void write_fcidump(const Problem& p, std::ostream& out) {
  const int N = p.n_orb;
  out << "&FCI NORB=" << N << ",NELEC=" << p.eta << ",MS2=0,\n&END\n";
  for (int a = 0; a < N; ++a)
    for (int b = 0; b <= a; ++b)
      for (int c = 0; c < N; ++c)
        for (int d = 0; d <= c; ++d) {
          if (a * N + b < c * N + d) continue;  // (ab) >= (cd) canonical pair order
          const double v = p.h2[h2_index(N, a, b, c, d)];
          if (v != 0.0)
            out << ' ' << detail::fmt_g17(v) << ' ' << a + 1 << ' ' << b + 1 << ' ' << c + 1
                << ' ' << d + 1 << "\n";
        }
  for (int a = 0; a < N; ++a)
    for (int b = 0; b <= a; ++b)
      if (p.h1(a, b) != 0.0)
        out << ' ' << detail::fmt_g17(p.h1(a, b)) << ' ' << a + 1 << ' ' << b + 1 << " 0 0\n";
  out << ' ' << detail::fmt_g17(p.e_core) << " 0 0 0 0\n";
}

inline std::string write_fcidump(const Problem& p) {
  std::ostringstream out;
  write_fcidump(p, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Canonical serialization (JSON and little-endian binary)
// ---------------------------------------------------------------------------

inline nlohmann::json problem_to_json(const Problem& p) {
  nlohmann::json j;
  j["format"] = "soskit-problem";
  j["version"] = 1;
  j["n_orb"] = p.n_orb;
  j["eta"] = p.eta;
  j["e_core"] = p.e_core;
  std::vector<double> h1_flat(static_cast<std::size_t>(p.n_orb) * p.n_orb);
  for (int a = 0; a < p.n_orb; ++a)
    for (int b = 0; b < p.n_orb; ++b) h1_flat[static_cast<std::size_t>(a * p.n_orb + b)] = p.h1(a, b);
  j["h1"] = h1_flat;
  j["h2"] = p.h2;
  return j;
}

inline Problem problem_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "soskit-problem")
    throw ParseError("not a soskit problem document");
  if (j.value("version", 0) != 1) throw ParseError("unsupported problem document version");
  Problem p = Problem::zeros(j.at("n_orb").get<int>(), j.at("eta").get<int>());
  p.e_core = j.at("e_core").get<double>();
  const auto h1 = j.at("h1").get<std::vector<double>>();
  const auto h2 = j.at("h2").get<std::vector<double>>();
  const std::size_t n = static_cast<std::size_t>(p.n_orb);
  if (h1.size() != n * n || h2.size() != n * n * n * n)
    throw ParseError("problem document tensor sizes do not match n_orb");
  for (int a = 0; a < p.n_orb; ++a)
    for (int b = 0; b < p.n_orb; ++b) p.h1(a, b) = h1[static_cast<std::size_t>(a * p.n_orb + b)];
  p.h2 = h2;
  return p;
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError("truncated binary problem container");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw ParseError("truncated binary problem container");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace detail

// Binary container, all little-endian:
//   "SKPB" | u32 version=1 | u32 n_orb | u32 eta | f64 e_core
//   | n_orb^2 f64 h1 row-major | n_orb^4 f64 h2 row-major
inline void write_problem_binary(const Problem& p, std::ostream& out) {
  out.write("SKPB", 4);
  detail::put_u32(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(p.n_orb));
  detail::put_u32(out, static_cast<std::uint32_t>(p.eta));
  detail::put_f64(out, p.e_core);
  for (int a = 0; a < p.n_orb; ++a)
    for (int b = 0; b < p.n_orb; ++b) detail::put_f64(out, p.h1(a, b));
  for (double v : p.h2) detail::put_f64(out, v);
}

inline Problem read_problem_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SKPB", 4) != 0)
    throw ParseError("not a soskit binary problem container");
  if (detail::get_u32(in) != 1) throw ParseError("unsupported binary container version");
  const int n_orb = static_cast<int>(detail::get_u32(in));
  const int eta = static_cast<int>(detail::get_u32(in));
  if (n_orb < 1) throw ParseError("binary container declares invalid n_orb");
  Problem p = Problem::zeros(n_orb, eta);
  p.e_core = detail::get_f64(in);
  for (int a = 0; a < n_orb; ++a)
    for (int b = 0; b < n_orb; ++b) p.h1(a, b) = detail::get_f64(in);
  for (double& v : p.h2) v = detail::get_f64(in);
  return p;
}

// ---------------------------------------------------------------------------
// Dense Fock-space operators
// ---------------------------------------------------------------------------

namespace detail {

// Applies a_m (dagger=false) or a_m^dag (dagger=true) to basis state n.
// Returns false when the result vanishes; otherwise updates n and sign.
inline bool apply_ladder(int mode, bool dagger, unsigned* n, int* sign) {
  const unsigned bit = 1u << mode;
  const bool occupied = (*n & bit) != 0;
  if (dagger == occupied) return false;
  if (std::popcount(*n & (bit - 1)) & 1) *sign = -*sign;
  *n ^= bit;
  return true;
}

struct Amplitude {
  unsigned state;
  Complex amp;
};

// E_pq |n> = sum_sigma adag_{p sigma} a_{q sigma} |n>: at most two branches.
inline int apply_e_pq(int n_orb, int p, int q, unsigned n, Amplitude out[2]) {
  int count = 0;
  for (int sigma = 0; sigma < 2; ++sigma) {
    unsigned m = n;
    int sign = 1;
    if (!apply_ladder(sigma * n_orb + q, false, &m, &sign)) continue;
    if (!apply_ladder(sigma * n_orb + p, true, &m, &sign)) continue;
    out[count++] = {m, Complex(static_cast<double>(sign), 0.0)};
  }
  return count;
}

}  // namespace detail

// Dense spin-summed excitation operator E_pq.
inline DenseOperator build_e_pq(int n_orb, int p, int q) {
  require_oracle_scale(n_orb);
  const Eigen::Index dim = Eigen::Index(1) << (2 * n_orb);
  DenseOperator op = DenseOperator::zeros(dim);
  detail::Amplitude amps[2];
  for (Eigen::Index col = 0; col < dim; ++col) {
    const int k = detail::apply_e_pq(n_orb, p, q, static_cast<unsigned>(col), amps);
    for (int i = 0; i < k; ++i) op.data(static_cast<Eigen::Index>(amps[i].state), col) += amps[i].amp;
  }
  return op;
}

// Dense H = sum h1 E_pq + 1/2 sum h2 E_pq E_rs + e_core, built column by
// column with ladder-operator bit arithmetic (no matrix products).
inline DenseOperator build_dense_hamiltonian(const Problem& prob) {
  const int N = prob.n_orb;
  require_oracle_scale(N);
  const Eigen::Index dim = Eigen::Index(1) << (2 * N);
  DenseOperator op = DenseOperator::zeros(dim);
  detail::Amplitude first[2], second[2];
  for (Eigen::Index col = 0; col < dim; ++col) {
    auto column = op.data.col(col);
    column(col) += prob.e_core;
    const unsigned n = static_cast<unsigned>(col);
    for (int p = 0; p < N; ++p)
      for (int q = 0; q < N; ++q) {
        const double c1 = prob.h1(p, q);
        if (c1 != 0.0) {
          const int k = detail::apply_e_pq(N, p, q, n, first);
          for (int i = 0; i < k; ++i)
            column(static_cast<Eigen::Index>(first[i].state)) += c1 * first[i].amp;
        }
      }
    for (int r = 0; r < N; ++r)
      for (int s = 0; s < N; ++s) {
        const int kf = detail::apply_e_pq(N, r, s, n, first);
        if (kf == 0) continue;
        for (int p = 0; p < N; ++p)
          for (int q = 0; q < N; ++q) {
            const double c2 = 0.5 * prob.h2[h2_index(N, p, q, r, s)];
            if (c2 == 0.0) continue;
            for (int i = 0; i < kf; ++i) {
              const int ks = detail::apply_e_pq(N, p, q, first[i].state, second);
              for (int j = 0; j < ks; ++j)
                column(static_cast<Eigen::Index>(second[j].state)) +=
                    c2 * first[i].amp * second[j].amp;
            }
          }
      }
  }
  return op;
}

// Hermitian, unitary Majorana operator gamma_{p sigma x}.
inline DenseOperator build_majorana(int p_index, int sigma, int x, int n_orb) {
  require_oracle_scale(n_orb);
  if (p_index < 0 || p_index >= n_orb) throw IndexError("Majorana orbital index out of range");
  if (sigma < 0 || sigma > 1 || x < 0 || x > 1)
    throw IndexError("Majorana spin/component index out of range");
  const int mode = sigma * n_orb + p_index;
  const Eigen::Index dim = Eigen::Index(1) << (2 * n_orb);
  DenseOperator op = DenseOperator::zeros(dim);
  const unsigned bit = 1u << mode;
  for (Eigen::Index col = 0; col < dim; ++col) {
    const unsigned n = static_cast<unsigned>(col);
    const double string = (std::popcount(n & (bit - 1)) & 1) ? -1.0 : 1.0;
    const unsigned flipped = n ^ bit;
    Complex amp;
    if (x == 0) {
      amp = Complex(string, 0.0);
    } else {
      // gamma_1 = i(adag - a): +i when creating, -i when annihilating.
      amp = (n & bit) ? Complex(0.0, -string) : Complex(0.0, string);
    }
    op.data(static_cast<Eigen::Index>(flipped), col) = amp;
  }
  return op;
}

// Rotated Majorana gamma_{u sigma x} = sum_j u_j gamma_{j sigma x}.
inline DenseOperator build_rotated_majorana(const Eigen::VectorXd& u, int sigma, int x,
                                            int n_orb) {
  require_oracle_scale(n_orb);
  if (u.size() != n_orb) throw IndexError("rotation vector length does not match n_orb");
  if (std::abs(u.norm() - 1.0) > 1e-12)
    throw NormalizationError("rotation vector is not unit norm");
  const Eigen::Index dim = Eigen::Index(1) << (2 * n_orb);
  DenseOperator op = DenseOperator::zeros(dim);
  for (int j = 0; j < n_orb; ++j) {
    if (u(j) == 0.0) continue;
    op.data += u(j) * build_majorana(j, sigma, x, n_orb).data;
  }
  return op;
}

inline DenseOperator build_number_operator(int n_orb) {
  require_oracle_scale(n_orb);
  const Eigen::Index dim = Eigen::Index(1) << (2 * n_orb);
  DenseOperator op = DenseOperator::zeros(dim);
  for (Eigen::Index n = 0; n < dim; ++n)
    op.data(n, n) = static_cast<double>(std::popcount(static_cast<unsigned>(n)));
  return op;
}

inline std::vector<Eigen::Index> sector_indices(int n_modes, int eta) {
  std::vector<Eigen::Index> idx;
  const Eigen::Index dim = Eigen::Index(1) << n_modes;
  for (Eigen::Index n = 0; n < dim; ++n)
    if (std::popcount(static_cast<unsigned>(n)) == eta) idx.push_back(n);
  return idx;
}

// Minimum eigenvalue over all of Fock space, or over the eta-particle sector.
inline double ground_energy(const DenseOperator& op, std::optional<int> eta = std::nullopt) {
  if (!eta) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.data, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  const int n_modes = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(op.dim)));
  const auto idx = sector_indices(n_modes, *eta);
  if (idx.empty()) throw DomainError("empty particle-number sector");
  Eigen::MatrixXcd sub(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = op.data(idx[i], idx[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace soskit
