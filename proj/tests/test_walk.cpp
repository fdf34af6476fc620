// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0

#include "soskit/walk.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "oracles/fock_kron.hpp"
#include "oracles/instances.hpp"
#include "soskit/dfthc.hpp"
#include "soskit/rng.hpp"
#include "soskit/sos.hpp"

namespace {

using oracle::random_problem;
using soskit::BlockEncoding;
using soskit::DfthcParams;
using soskit::Problem;
using soskit::RandomStream;
using soskit::SosDecomposition;
using soskit::TraceSource;

DfthcParams random_params(int n_orb, int R, int B, int C, std::uint64_t seed) {
  RandomStream rng(seed);
  DfthcParams p = soskit::random_init(n_orb, R, B, C, rng);
  p.beta1 = 0.0;
  p.h_sym.setZero();
  return p;
}

// Ascending eigenvalues of the shift-free sum-of-squares operator, computed
// from the literal dense build rather than from the encoding under test.
std::vector<double> dense_sos_spectrum(const DfthcParams& p, const Problem& prob,
                                       const SosDecomposition& dec) {
  const Eigen::Index dim = Eigen::Index(1) << (2 * p.n_orb);
  oracle::Mat h = soskit::build_dense_dfthc(p, prob, TraceSource::fitted).data -
                  dec.e_sos * oracle::Mat::Identity(dim, dim);
  return oracle::eigenvalues_general(h);
}

double circle_distance(double a, double b) {
  return std::abs(std::arg(std::exp(std::complex<double>(0.0, a - b))));
}

// Greedy multiset matching on the unit circle; returns the worst pairing gap.
double match_circular(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return 10.0;
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (double phase : a) {
    double best = 1e300;
    std::size_t pick = b.size();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double dist = circle_distance(phase, b[j]);
      if (dist < best) {
        best = dist;
        pick = j;
      }
    }
    used[pick] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<double> phases_of(const std::vector<soskit::PhaseRecord>& recs) {
  std::vector<double> out;
  for (const auto& r : recs) out.push_back(r.phase);
  return out;
}

// Single identity generator: direction bank unused, one scalar column whose
// identity coefficient makes the generator exactly I with lambda 1.
SosDecomposition identity_generator_decomposition() {
  SosDecomposition dec;
  dec.n_orb = 1;
  dec.rank_r = 1;
  dec.rank_b = 1;
  dec.rank_c = 1;
  dec.u = {1.0};
  dec.sf = {{0.0, std::sqrt(2.0)}};
  dec.e_sos = -1.0;
  dec.lambdas = {1.0};
  dec.lambda_total = 0.5;
  return dec;
}

// One annihilator pair: the conjugate product is the total number operator,
// whose spectrum {0, 1, 1, 2} exercises both spectral endpoints.
SosDecomposition number_operator_decomposition() {
  SosDecomposition dec;
  dec.n_orb = 1;
  soskit::OneBodyTerm t;
  t.weight = 1.0;
  t.direction = Eigen::VectorXd::Ones(1);
  dec.d1 = {t};
  dec.e_sos = 0.0;
  dec.lambdas = {1.0, 1.0};
  dec.lambda_total = 1.0;
  return dec;
}

TEST(Encode, UnitaryWithStackedFactorBlock) {
  RandomStream rng(41);
  const Problem prob = random_problem(2, rng);
  const DfthcParams p = random_params(2, 1, 2, 1, 7);
  const auto dec = soskit::make_decomposition(p, prob, 0.0);
  const auto be = soskit::encode_rectangular(dec, 2);

  const Eigen::Index n = be.u.rows();
  EXPECT_EQ(n, static_cast<Eigen::Index>(dec.generator_count() + 1) * 16);
  const double unitarity =
      (be.u.adjoint() * be.u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  EXPECT_LT(unitarity, 1e-11);

  EXPECT_NEAR(be.lambda * be.lambda, 2.0 * dec.lambda_total, 1e-10);
  const Eigen::MatrixXcd block = soskit::extract_block(be);
  const Eigen::MatrixXcd want = soskit::build_hsqrt(dec, 2) / be.lambda;
  EXPECT_LT((block - want).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Encode, SingularValuesMatchDenseSpectrum) {
  RandomStream rng(5);
  const Problem prob = random_problem(1, rng);
  const DfthcParams p = random_params(1, 1, 1, 1, 3);
  const auto dec = soskit::make_decomposition(p, prob, 0.0);
  const auto be = soskit::encode_rectangular(dec, 1);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(soskit::extract_block(be));
  const auto energies = dense_sos_spectrum(p, prob, dec);
  ASSERT_EQ(svd.singularValues().size(), static_cast<Eigen::Index>(energies.size()));
  std::vector<double> want;
  for (double e : energies) want.push_back(std::sqrt(std::max(0.0, e)) / be.lambda);
  std::sort(want.begin(), want.end(), std::greater<double>());
  for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j)
    EXPECT_NEAR(svd.singularValues()[j], want[static_cast<std::size_t>(j)], 1e-9);
}

TEST(Encode, UnitaryGeneratorAppearsVerbatim) {
  const auto dec = identity_generator_decomposition();
  const auto be = soskit::encode_rectangular(dec, 1);
  EXPECT_NEAR(be.lambda, 1.0, 1e-14);
  const Eigen::MatrixXcd block = soskit::extract_block(be);
  EXPECT_LT((block - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Encode, EmptyDecompositionGivesEmptyBlockInUnitary) {
  SosDecomposition dec;
  dec.n_orb = 1;
  const auto be = soskit::encode_rectangular(dec, 1);
  EXPECT_TRUE(be.rows.empty());
  EXPECT_EQ(be.cols.size(), 4u);
  EXPECT_LT((be.u - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
  const Eigen::MatrixXcd block = soskit::extract_block(be);
  EXPECT_EQ(block.rows(), 0);
  EXPECT_EQ(block.cols(), 4);
}

TEST(Encode, RejectsUndersizedNormalization) {
  RandomStream rng(11);
  const Problem prob = random_problem(1, rng);
  const DfthcParams p = random_params(1, 1, 1, 1, 9);
  auto dec = soskit::make_decomposition(p, prob, 0.0);
  ASSERT_FALSE(dec.lambdas.empty());
  dec.lambdas.back() *= 0.5;
  EXPECT_THROW(soskit::encode_rectangular(dec, 1), soskit::NormalizationError);
}

TEST(WalkOnce, PhaseMultisetMatchesSpectrum) {
  RandomStream rng(17);
  const Problem prob = random_problem(2, rng);
  const DfthcParams p = random_params(2, 1, 2, 1, 23);
  const auto dec = soskit::make_decomposition(p, prob, 0.0);
  const auto be = soskit::encode_rectangular(dec, 2);
  const auto spec = soskit::walk_once(be);

  std::vector<double> want;
  for (double e : dense_sos_spectrum(p, prob, dec)) {
    const double theta =
        std::acos(std::min(1.0, std::sqrt(std::max(0.0, e)) / be.lambda));
    want.push_back(theta);
    want.push_back(-theta);
  }
  EXPECT_LT(match_circular(phases_of(spec.w1), want), 1e-8);
  EXPECT_LT(match_circular(phases_of(spec.w2), want), 1e-8);
  EXPECT_LT(match_circular(phases_of(spec.w1), phases_of(spec.w2)), 1e-8);
  for (const auto& rec : spec.w1) EXPECT_LT(rec.residual, 1e-8);
  for (const auto& rec : spec.w2) EXPECT_LT(rec.residual, 1e-8);

  // negation symmetry of the full multiset
  std::vector<double> negated = phases_of(spec.w1);
  for (double& v : negated) v = -v;
  EXPECT_LT(match_circular(phases_of(spec.w1), negated), 1e-8);
}

TEST(WalkOnce, SpectralEndpointsLandOnAxisPhases) {
  const auto dec = number_operator_decomposition();
  const auto be = soskit::encode_rectangular(dec, 1);
  EXPECT_NEAR(be.lambda * be.lambda, 2.0, 1e-14);
  const auto spec = soskit::walk_once(be);

  // spectrum {0,1,1,2}: E=0 sits at +-pi/2, the saturated E=lambda^2 at 0.
  std::vector<double> want = {M_PI_2, -M_PI_2, M_PI_4, -M_PI_4,
                              M_PI_4, -M_PI_4, 0.0,    0.0};
  EXPECT_LT(match_circular(phases_of(spec.w1), want), 1e-9);
  // the saturated direction reports its collapse defect, bounded by the
  // degeneracy threshold of the pair construction
  for (const auto& rec : spec.w1) EXPECT_LT(rec.residual, 1e-7);
}

TEST(WalkTwice, DoubledPhasesMatchShiftedSpectrum) {
  RandomStream rng(29);
  const Problem prob = random_problem(2, rng);
  const DfthcParams p = random_params(2, 1, 2, 1, 31);
  const auto dec = soskit::make_decomposition(p, prob, 0.0);
  const auto be = soskit::encode_rectangular(dec, 2);
  const auto once = soskit::walk_once(be);
  const auto twice = soskit::walk_twice(be);

  const double cap = dec.lambda_total;  // half of lambda^2
  std::vector<double> want;
  for (double e : dense_sos_spectrum(p, prob, dec)) {
    const double angle = std::acos(std::max(-1.0, std::min(1.0, e / cap - 1.0)));
    want.push_back(angle);
    want.push_back(-angle);
  }
  EXPECT_LT(match_circular(phases_of(twice.phases), want), 1e-8);
  for (const auto& rec : twice.phases) EXPECT_LT(rec.residual, 1e-8);

  // Chebyshev consistency: composing once more doubles every phase mod 2pi.
  std::vector<double> doubled = phases_of(once.w1);
  for (double& v : doubled) v *= 2.0;
  EXPECT_LT(match_circular(phases_of(twice.phases), doubled), 1e-8);

  // the reflected one-step block is the shifted operator 2 H / lambda^2 - I
  const Eigen::Index dim = 16;
  oracle::Mat h = soskit::build_dense_dfthc(p, prob, TraceSource::fitted).data -
                  dec.e_sos * oracle::Mat::Identity(dim, dim);
  const Eigen::MatrixXcd want_block =
      2.0 * h / (be.lambda * be.lambda) - Eigen::MatrixXcd::Identity(dim, dim);
  EXPECT_LT((twice.one_step_block - want_block).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(twice.block_residual, 1e-10);
}

TEST(WalkTwice, EndpointEnergiesGiveStraightAndQuarterTurns) {
  const auto dec = number_operator_decomposition();
  const auto be = soskit::encode_rectangular(dec, 1);
  const auto twice = soskit::walk_twice(be);

  // E=0 -> pi, E=Lambda -> pi/2 (twice), E=2 Lambda -> 0
  std::vector<double> want = {M_PI, M_PI, M_PI_2, -M_PI_2, M_PI_2, -M_PI_2, 0.0, 0.0};
  EXPECT_LT(match_circular(phases_of(twice.phases), want), 1e-9);
}

TEST(Dilation, SymmetricSpectrumMatchesSquareRoots) {
  RandomStream rng(37);
  const Problem prob = random_problem(1, rng);
  const DfthcParams p = random_params(1, 1, 1, 1, 43);
  const auto dec = soskit::make_decomposition(p, prob, 0.0);
  const auto dil = soskit::hermitian_dilation(dec, 1);

  const Eigen::Index n = dil.matrix.rows();
  EXPECT_EQ(n, static_cast<Eigen::Index>(dec.generator_count() + 1) * 4);
  EXPECT_LT((dil.matrix - dil.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-14);

  // spectrum is symmetric about zero
  ASSERT_EQ(dil.eigenvalues.size(), static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < dil.eigenvalues.size(); ++j)
    EXPECT_NEAR(dil.eigenvalues[j], -dil.eigenvalues[dil.eigenvalues.size() - 1 - j],
                1e-10);

  // every +-sqrt(E_j) appears
  for (double e : dense_sos_spectrum(p, prob, dec)) {
    const double root = std::sqrt(std::max(0.0, e));
    for (double target : {root, -root}) {
      double best = 1e300;
      for (double v : dil.eigenvalues) best = std::min(best, std::abs(v - target));
      EXPECT_LT(best, 1e-9);
    }
  }

  // squaring the dilation recovers the operator in the zero-ancilla corner
  const Eigen::MatrixXcd sq = dil.matrix * dil.matrix;
  oracle::Mat h = soskit::build_dense_dfthc(p, prob, TraceSource::fitted).data -
                  dec.e_sos * oracle::Mat::Identity(4, 4);
  EXPECT_LT((sq.topLeftCorner(4, 4) - h).cwiseAbs().maxCoeff(), 1e-10);

  // the rectangular walk lives in a strictly smaller space
  const auto be = soskit::encode_rectangular(dec, 1);
  EXPECT_LT(be.u.rows(), dil.walk_dimension);
}

TEST(Dilation, EmptyDecompositionIsZero) {
  SosDecomposition dec;
  dec.n_orb = 1;
  const auto dil = soskit::hermitian_dilation(dec, 1);
  EXPECT_EQ(dil.matrix.rows(), 4);
  EXPECT_LT(dil.matrix.cwiseAbs().maxCoeff(), 1e-300);
  for (double v : dil.eigenvalues) EXPECT_NEAR(v, 0.0, 1e-300);
}

TEST(Csv, SpectrumDumpHasHeaderAndRows) {
  std::vector<soskit::PhaseRecord> recs = {{0.5, 1.25, 1e-12}, {-0.5, 1.25, 1e-12}};
  std::ostringstream os;
  soskit::write_spectrum_csv(recs, os);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("phase,energy,residual\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

}  // namespace
