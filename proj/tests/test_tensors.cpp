// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0

#include "soskit/tensors.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles/fock_kron.hpp"
#include "soskit/rng.hpp"

namespace {

using soskit::Problem;

std::string data_path(const std::string& name) {
  return std::string(SOSKIT_TEST_DATA_DIR) + "/" + name;
}

Problem parse_file(const std::string& name, std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(data_path(name));
  EXPECT_TRUE(in.good()) << "missing fixture " << name;
  return soskit::parse_fcidump(in, warnings);
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Problem random_problem(int n_orb, soskit::RandomStream& rng, double scale = 1.0) {
  Problem p = Problem::zeros(n_orb, n_orb);
  for (int a = 0; a < n_orb; ++a)
    for (int b = 0; b <= a; ++b) {
      const double v = scale * rng.normal();
      p.h1(a, b) = v;
      p.h1(b, a) = v;
    }
  // fill one representative per 8-fold orbit, then copy to the orbit
  for (int a = 0; a < n_orb; ++a)
    for (int b = 0; b <= a; ++b)
      for (int c = 0; c < n_orb; ++c)
        for (int d = 0; d <= c; ++d) {
          if (a * n_orb + b < c * n_orb + d) continue;
          const double v = scale * rng.normal();
          const int g[8][4] = {{a, b, c, d}, {b, a, c, d}, {a, b, d, c}, {b, a, d, c},
                               {c, d, a, b}, {d, c, a, b}, {c, d, b, a}, {d, c, b, a}};
          for (const auto& e : g) p.h2[soskit::h2_index(n_orb, e[0], e[1], e[2], e[3])] = v;
        }
  p.e_core = scale * rng.normal();
  return p;
}

TEST(ParseFcidump, TrivialSingleOrbital) {
  Problem p = parse_file("n1.fcidump");
  EXPECT_EQ(p.n_orb, 1);
  EXPECT_EQ(p.eta, 2);
  EXPECT_DOUBLE_EQ(p.h2[soskit::h2_index(1, 0, 0, 0, 0)], 0.5);
  EXPECT_DOUBLE_EQ(p.h1(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(p.e_core, 0.7);
}

TEST(ParseFcidump, SymmetryExpansion) {
  Problem p = parse_file("n2.fcidump");
  // record `0.3 2 1 1 1` populates every image of (1,0,0,0)
  const int g[8][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0},
                       {0, 0, 1, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}};
  for (const auto& e : g)
    EXPECT_DOUBLE_EQ(p.h2[soskit::h2_index(2, e[0], e[1], e[2], e[3])], 0.3);
  EXPECT_DOUBLE_EQ(p.h1(0, 1), -0.47);
  EXPECT_DOUBLE_EQ(p.h1(1, 0), -0.47);
}

TEST(ParseFcidump, Errors) {
  EXPECT_THROW(parse_file("bad_header.fcidump"), soskit::ParseError);
  EXPECT_THROW(parse_file("bad_value.fcidump"), soskit::ParseError);
  EXPECT_THROW(parse_file("bad_index.fcidump"), soskit::IndexError);
  EXPECT_THROW(soskit::parse_fcidump("&FCI NORB=2,NELEC=2,\n&END\n 0.1 1 0 0 0\n"),
               soskit::ParseError);
  EXPECT_THROW(soskit::parse_fcidump("&FCI NORB=2,NELEC=2,\n&END\n 0.1 1 2 2 0\n"),
               soskit::ParseError);
  EXPECT_THROW(soskit::parse_fcidump("&FCI NORB=2,NELEC=2,\n 0.1 1 1 1 1\n"),
               soskit::ParseError);
}

TEST(ParseFcidump, LastWriterWinsWithWarning) {
  std::vector<std::string> warnings;
  Problem p = soskit::parse_fcidump(
      "&FCI NORB=1,NELEC=1,\n&END\n 0.5 1 1 1 1\n 0.25 1 1 1 1\n", &warnings);
  EXPECT_DOUBLE_EQ(p.h2[0], 0.25);
  ASSERT_EQ(warnings.size(), 1u);
  // identical duplicates stay silent
  warnings.clear();
  soskit::parse_fcidump("&FCI NORB=1,NELEC=1,\n&END\n 0.5 1 1 1 1\n 0.5 1 1 1 1\n", &warnings);
  EXPECT_TRUE(warnings.empty());
}

TEST(ParseFcidump, WriteParseRoundTripIsBitExact) {
  soskit::RandomStream rng(11);
  Problem p = random_problem(3, rng);
  p.eta = 4;
  const std::string text = soskit::write_fcidump(p);
  Problem q = soskit::parse_fcidump(text);
  ASSERT_EQ(q.n_orb, p.n_orb);
  EXPECT_EQ(q.eta, p.eta);
  EXPECT_EQ(std::memcmp(&q.e_core, &p.e_core, sizeof(double)), 0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double x = p.h1(a, b), y = q.h1(a, b);
      EXPECT_EQ(std::memcmp(&x, &y, sizeof(double)), 0);
    }
  ASSERT_EQ(q.h2.size(), p.h2.size());
  EXPECT_EQ(std::memcmp(q.h2.data(), p.h2.data(), p.h2.size() * sizeof(double)), 0);
}

TEST(Serialization, JsonRoundTrip) {
  soskit::RandomStream rng(12);
  Problem p = random_problem(2, rng);
  Problem q = soskit::problem_from_json(soskit::problem_to_json(p));
  EXPECT_EQ(q.n_orb, p.n_orb);
  EXPECT_EQ(q.eta, p.eta);
  EXPECT_EQ(q.e_core, p.e_core);
  EXPECT_EQ(q.h2, p.h2);
  EXPECT_TRUE(q.h1.isApprox(p.h1, 0.0));
}

TEST(Serialization, BinaryRoundTrip) {
  soskit::RandomStream rng(13);
  Problem p = random_problem(2, rng);
  std::stringstream buf;
  soskit::write_problem_binary(p, buf);
  Problem q = soskit::read_problem_binary(buf);
  EXPECT_EQ(q.h2, p.h2);
  EXPECT_TRUE(q.h1.isApprox(p.h1, 0.0));
  EXPECT_EQ(q.e_core, p.e_core);
  std::stringstream bad("junk");
  EXPECT_THROW(soskit::read_problem_binary(bad), soskit::ParseError);
}

TEST(DenseHamiltonian, NumberOperatorSpectrum) {
  const double v = -0.7;
  Problem p = Problem::zeros(1, 1);
  p.h1(0, 0) = v;
  const auto h = soskit::build_dense_hamiltonian(p);
  const auto ev = oracle::eigenvalues_general(h.data);
  const std::vector<double> want = {2 * v, v, v, 0};
  ASSERT_EQ(ev.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev[static_cast<size_t>(i)], want[static_cast<size_t>(i)], 1e-12);
}

TEST(DenseHamiltonian, MatchesKronOracle) {
  soskit::RandomStream rng(14);
  for (int n_orb = 1; n_orb <= 2; ++n_orb) {
    Problem p = random_problem(n_orb, rng);
    const auto h = soskit::build_dense_hamiltonian(p);
    const auto ref = oracle::hamiltonian(n_orb, p.h1, p.h2, p.e_core);
    EXPECT_LT(max_abs(h.data - ref), 1e-12) << "n_orb=" << n_orb;
  }
}

TEST(DenseHamiltonian, DoublyOccupiedPairEnergy) {
  const double u = 0.5;
  Problem p = Problem::zeros(1, 2);
  p.h2[0] = u;
  const auto h = soskit::build_dense_hamiltonian(p);
  // states: |0>, up, down, both; 1/2 u E00 E00 gives u/2 on singles, 2u on the pair
  EXPECT_NEAR(h.data(3, 3).real(), 2 * u, 1e-14);
  EXPECT_NEAR(h.data(1, 1).real(), 0.5 * u, 1e-14);
  EXPECT_NEAR(h.data(2, 2).real(), 0.5 * u, 1e-14);
  EXPECT_NEAR(h.data(0, 0).real(), 0.0, 1e-14);
}

TEST(DenseHamiltonian, HermitianAndCommutesWithNumber) {
  soskit::RandomStream rng(15);
  Problem p = random_problem(2, rng);
  const auto h = soskit::build_dense_hamiltonian(p);
  EXPECT_LT(max_abs(h.data - h.data.adjoint()), 1e-12);
  const auto num = oracle::number_operator(4);
  EXPECT_LT(max_abs(h.data * num - num * h.data), 1e-10);
}

TEST(DenseHamiltonian, LinearInTensors) {
  soskit::RandomStream rng(16);
  Problem t1 = random_problem(2, rng);
  Problem t2 = random_problem(2, rng);
  const double a = 0.75, b = -1.5;
  Problem mix = Problem::zeros(2, 2);
  mix.h1 = a * t1.h1 + b * t2.h1;
  for (size_t i = 0; i < mix.h2.size(); ++i) mix.h2[i] = a * t1.h2[i] + b * t2.h2[i];
  mix.e_core = a * t1.e_core + b * t2.e_core;
  const auto hm = soskit::build_dense_hamiltonian(mix);
  const auto h1 = soskit::build_dense_hamiltonian(t1);
  const auto h2 = soskit::build_dense_hamiltonian(t2);
  EXPECT_LT(max_abs(hm.data - (a * h1.data + b * h2.data)), 1e-11);
}

TEST(DenseHamiltonian, OracleLimit) {
  EXPECT_THROW(soskit::build_dense_hamiltonian(Problem::zeros(8, 0)), soskit::OracleLimitError);
}

TEST(Epq, DaggerAndCommutator) {
  const int N = 2;
  std::vector<Eigen::MatrixXcd> e(static_cast<size_t>(N * N));
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) e[static_cast<size_t>(p * N + q)] = soskit::build_e_pq(N, p, q).data;
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      EXPECT_LT(max_abs(e[static_cast<size_t>(p * N + q)].adjoint() - e[static_cast<size_t>(q * N + p)]), 1e-13);
      EXPECT_LT(max_abs(e[static_cast<size_t>(p * N + q)] - oracle::e_pq(N, p, q)), 1e-13);
      for (int r = 0; r < N; ++r)
        for (int s = 0; s < N; ++s) {
          const auto& epq = e[static_cast<size_t>(p * N + q)];
          const auto& ers = e[static_cast<size_t>(r * N + s)];
          Eigen::MatrixXcd comm = epq * ers - ers * epq;
          Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(comm.rows(), comm.cols());
          if (q == r) want += e[static_cast<size_t>(p * N + s)];
          if (s == p) want -= e[static_cast<size_t>(r * N + q)];
          EXPECT_LT(max_abs(comm - want), 1e-12);
        }
    }
}

TEST(Majorana, HermitianUnitaryAnticommuting) {
  const int N = 2;
  std::vector<Eigen::MatrixXcd> gam;
  for (int sigma = 0; sigma < 2; ++sigma)
    for (int p = 0; p < N; ++p)
      for (int x = 0; x < 2; ++x) gam.push_back(soskit::build_majorana(p, sigma, x, N).data);
  const Eigen::Index dim = gam[0].rows();
  for (size_t a = 0; a < gam.size(); ++a) {
    EXPECT_LT(max_abs(gam[a] - gam[a].adjoint()), 1e-13);
    for (size_t b = 0; b < gam.size(); ++b) {
      Eigen::MatrixXcd anti = gam[a] * gam[b] + gam[b] * gam[a];
      Eigen::MatrixXcd want =
          (a == b) ? Eigen::MatrixXcd(2.0 * Eigen::MatrixXcd::Identity(dim, dim))
                   : Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(dim, dim));
      EXPECT_LT(max_abs(anti - want), 1e-12);
    }
  }
  // a_m = (gamma_0 + i gamma_1)/2 against the kron chain
  for (int sigma = 0; sigma < 2; ++sigma)
    for (int p = 0; p < N; ++p) {
      const auto g0 = soskit::build_majorana(p, sigma, 0, N).data;
      const auto g1 = soskit::build_majorana(p, sigma, 1, N).data;
      const Eigen::MatrixXcd a = (g0 + soskit::Complex(0, 1) * g1) / 2.0;
      EXPECT_LT(max_abs(a - oracle::annihilator(2 * N, sigma * N + p)), 1e-13);
    }
}

TEST(Majorana, RotatedMatchesExplicitSum) {
  const int N = 2;
  soskit::RandomStream rng(17);
  Eigen::VectorXd u(N);
  for (int j = 0; j < N; ++j) u(j) = rng.normal();
  u.normalize();
  const std::vector<double> uv = {u(0), u(1)};
  for (int sigma = 0; sigma < 2; ++sigma)
    for (int x = 0; x < 2; ++x) {
      const auto got = soskit::build_rotated_majorana(u, sigma, x, N).data;
      EXPECT_LT(max_abs(got - oracle::majorana_rotated(N, uv, sigma, x)), 1e-13);
      Eigen::MatrixXcd sq = got * got;
      EXPECT_LT(max_abs(sq - Eigen::MatrixXcd::Identity(sq.rows(), sq.cols())), 1e-12);
    }
  // basis-vector case reduces to the plain operator
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(N);
  e1(1) = 1.0;
  EXPECT_LT(max_abs(soskit::build_rotated_majorana(e1, 0, 1, N).data -
                    soskit::build_majorana(1, 0, 1, N).data),
            1e-15);
  Eigen::VectorXd bad = 2.0 * e1;
  EXPECT_THROW(soskit::build_rotated_majorana(bad, 0, 0, N), soskit::NormalizationError);
}

TEST(GroundEnergy, SectorsAndOracleAgreement) {
  const double v = -0.7;
  Problem p = Problem::zeros(1, 1);
  p.h1(0, 0) = v;
  const auto h = soskit::build_dense_hamiltonian(p);
  EXPECT_NEAR(soskit::ground_energy(h), 2 * v, 1e-13);
  EXPECT_NEAR(soskit::ground_energy(h, 1), v, 1e-13);
  EXPECT_NEAR(soskit::ground_energy(h, 0), 0.0, 1e-13);

  const auto zero = soskit::DenseOperator::zeros(4);
  EXPECT_DOUBLE_EQ(soskit::ground_energy(zero), 0.0);

  soskit::RandomStream rng(18);
  Problem q = random_problem(2, rng);
  const auto hq = soskit::build_dense_hamiltonian(q);
  EXPECT_NEAR(soskit::ground_energy(hq), oracle::min_eigenvalue_general(hq.data), 1e-10);
}

}  // namespace
