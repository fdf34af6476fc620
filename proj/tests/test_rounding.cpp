// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Angle chart round trips, unbiasedness of the stochastic rounders, whole
// parameter truncation, and the rigorous one-body residual bound checked
// against the dense oracle.

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "oracles/instances.hpp"
#include "soskit/dfthc.hpp"
#include "soskit/rounding.hpp"
#include "soskit/sos.hpp"

namespace {

using soskit::RandomStream;
using soskit::two_pi;

Eigen::VectorXd random_unit(int n, RandomStream& rng) {
  Eigen::VectorXd v(n);
  for (int j = 0; j < n; ++j) v[j] = rng.normal();
  return v / v.norm();
}

// Largest |eigenvalue| of the dense spin-summed one-body operator of m.
double dense_one_body_norm(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXcd op = soskit::detail::dense_one_body(m).data;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double ground_energy(const soskit::DfthcParams& p, const soskit::Problem& prob) {
  const Eigen::MatrixXcd h =
      soskit::build_dense_dfthc(p, prob, soskit::TraceSource::fitted).data;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  return es.eigenvalues().minCoeff();
}

TEST(Angles, FirstBasisVectorHasAllZeroAngles) {
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(4);
  e0[0] = 1.0;
  const auto theta = soskit::angles_from_unit(e0);
  ASSERT_EQ(theta.size(), 3u);
  for (double t : theta) EXPECT_DOUBLE_EQ(t, 0.0);

  e0[0] = -1.0;  // opposite pole: leading angle flips to pi
  const auto flipped = soskit::angles_from_unit(e0);
  EXPECT_NEAR(flipped[0], two_pi / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(flipped[1], 0.0);
  EXPECT_DOUBLE_EQ(flipped[2], 0.0);
}

TEST(Angles, PlanarVectorRecoversItsAngle) {
  for (double a : {0.3, 1.0, 2.0, 3.141592653589793, 4.5, 6.0}) {
    Eigen::VectorXd u(2);
    u << std::cos(a), std::sin(a);
    const auto theta = soskit::angles_from_unit(u);
    ASSERT_EQ(theta.size(), 1u);
    EXPECT_NEAR(theta[0], a, 1e-12) << "a=" << a;
  }
}

TEST(Angles, RoundTripIsExactOnTheSphere) {
  RandomStream rng(11);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd u = random_unit(5, rng);
    const Eigen::VectorXd back = soskit::unit_from_angles(soskit::angles_from_unit(u));
    EXPECT_LT((u - back).lpNorm<Eigen::Infinity>(), 1e-12);
  }
  // the chart always lands on the sphere, whatever the angles
  for (int k = 0; k < 20; ++k) {
    std::vector<double> theta(6);
    for (double& t : theta) t = rng.uniform(0.0, two_pi);
    EXPECT_NEAR(soskit::unit_from_angles(theta).norm(), 1.0, 1e-13);
  }
}

TEST(Angles, ZeroVectorIsRejected) {
  EXPECT_THROW(soskit::angles_from_unit(Eigen::VectorXd::Zero(3)),
               soskit::NormalizationError);
  EXPECT_THROW(soskit::angles_from_unit(Eigen::VectorXd(0)), soskit::UsageError);
  EXPECT_TRUE(soskit::angles_from_unit(Eigen::VectorXd::Ones(1)).empty());
}

TEST(RoundAngle, GridPointsAreFixedPoints) {
  RandomStream rng(3);
  const int b = 7;
  const double delta = two_pi / 64.0;  // 2^(b-1) cells
  for (int k = 0; k < 50; ++k) {
    EXPECT_DOUBLE_EQ(soskit::round_angle(5.0 * delta, b, rng), 5.0 * delta);
    EXPECT_DOUBLE_EQ(soskit::round_angle(0.0, b, rng), 0.0);
  }
  EXPECT_THROW(soskit::round_angle(-0.1, b, rng), soskit::UsageError);
  EXPECT_THROW(soskit::round_angle(7.0, b, rng), soskit::UsageError);
}

TEST(RoundAngle, MidpointIsUnbiased) {
  RandomStream rng(17);
  const int b = 6;
  const double delta = two_pi / 32.0;
  const double theta = 3.5 * delta;
  const int n = 100000;
  long ups = 0;
  for (int k = 0; k < n; ++k) {
    const double out = soskit::round_angle(theta, b, rng);
    const bool up = out > theta;
    if (up)
      EXPECT_DOUBLE_EQ(out, 4.0 * delta);
    else
      EXPECT_DOUBLE_EQ(out, 3.0 * delta);
    ups += up;
  }
  // coin flip: mean within four standard errors of one half
  const double freq = static_cast<double>(ups) / n;
  EXPECT_NEAR(freq, 0.5, 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(AliasBins, EqualPairSplitsEvenlyAndDeterministically) {
  RandomStream rng(5);
  const auto a = soskit::alias_bins({1.0, 1.0}, 2, rng);
  EXPECT_EQ(a.total_bins, 4);
  ASSERT_EQ(a.counts.size(), 2u);
  EXPECT_EQ(a.counts[0], 2);
  EXPECT_EQ(a.counts[1], 2);
  EXPECT_EQ(a.label_of(0), 0);
  EXPECT_EQ(a.label_of(1), 0);
  EXPECT_EQ(a.label_of(2), 1);
  EXPECT_EQ(a.label_of(3), 1);
  EXPECT_THROW(a.label_of(4), soskit::IndexError);
}

TEST(AliasBins, SingleCoefficientTakesEveryBin) {
  RandomStream rng(6);
  const auto a = soskit::alias_bins({0.0, 3.0, 0.0}, 3, rng);
  EXPECT_EQ(a.total_bins, 12);
  EXPECT_EQ(a.counts[0], 0);
  EXPECT_EQ(a.counts[1], 12);
  EXPECT_EQ(a.counts[2], 0);
}

TEST(AliasBins, AllZeroCoefficientsAreRejected) {
  RandomStream rng(7);
  EXPECT_THROW(soskit::alias_bins({0.0, 0.0}, 4, rng),
               soskit::DegenerateDistributionError);
}

TEST(AliasBins, LeftoverBinFollowsResidualWeights) {
  // M = 2 bins over weights (1, 2): floors are (0, 1), the single leftover
  // bin goes to label 0 with probability 2/3 and to label 1 with 1/3.
  RandomStream rng(23);
  const int n = 100000;
  long first = 0;
  for (int k = 0; k < n; ++k) {
    const auto a = soskit::alias_bins({1.0, 2.0}, 1, rng);
    EXPECT_EQ(a.counts[0] + a.counts[1], 2);
    EXPECT_LE(a.counts[0], 1);
    EXPECT_GE(a.counts[1], 1);
    first += a.counts[0];
  }
  const double p = 2.0 / 3.0;
  const double freq = static_cast<double>(first) / n;
  EXPECT_NEAR(freq, p, 4.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST(AliasBins, CountsStayWithinOneOfTheExactShare) {
  RandomStream rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> w(7);
    double l1 = 0.0;
    for (double& v : w) {
      v = rng.normal();
      l1 += std::abs(v);
    }
    const auto a = soskit::alias_bins(w, 4, rng);
    long sum = 0;
    for (std::size_t b = 0; b < w.size(); ++b) {
      const double exact = static_cast<double>(a.total_bins) * std::abs(w[b]) / l1;
      EXPECT_GE(a.counts[b], static_cast<long>(std::floor(exact)));
      EXPECT_LE(a.counts[b], static_cast<long>(std::floor(exact)) + 1);
      sum += a.counts[b];
    }
    EXPECT_EQ(sum, a.total_bins);
  }
}

TEST(Truncate, FineGridIsTheIdentity) {
  RandomStream init(41);
  const soskit::DfthcParams p = soskit::random_init(4, 2, 3, 2, init);
  RandomStream stream(42);
  const soskit::DfthcParams q = soskit::truncate_params(p, 40, 40, stream);
  for (std::size_t i = 0; i < p.u.size(); ++i) EXPECT_NEAR(q.u[i], p.u[i], 1e-9);
  for (std::size_t i = 0; i < p.w.size(); ++i) EXPECT_NEAR(q.w[i], p.w[i], 1e-9);
  EXPECT_DOUBLE_EQ(q.beta1, p.beta1);
  EXPECT_TRUE(q.h_sym.isApprox(p.h_sym, 0.0));
}

TEST(Truncate, SingleOrbitalRowsPassThroughUnchanged) {
  soskit::DfthcParams p = soskit::DfthcParams::zeros(1, 1, 2, 1);
  p.w[p.w_index(0, 0, 0)] = 0.4;
  p.w[p.w_index(0, 1, 0)] = -0.1;
  p.w[p.w_index(0, 2, 0)] = 0.7;
  RandomStream stream(9);
  const soskit::DfthcParams q = soskit::truncate_params(p, 10, 10, stream);
  EXPECT_EQ(q.u, p.u);  // no angles exist for one-dimensional rows
}

TEST(Truncate, DeterministicForAFixedSeed) {
  RandomStream init(51);
  const soskit::DfthcParams p = soskit::random_init(4, 2, 3, 2, init);
  RandomStream s1(77), s2(77), s3(78);
  const auto a = soskit::truncate_params(p, 9, 9, s1);
  const auto b = soskit::truncate_params(p, 9, 9, s2);
  const auto c = soskit::truncate_params(p, 9, 9, s3);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.w, b.w);
  EXPECT_NE(a.u, c.u);
  // rounded rows stay on the unit sphere
  for (int r = 0; r < p.rank_r; ++r)
    for (int bb = 0; bb < p.rank_b; ++bb) {
      Eigen::Map<const Eigen::VectorXd> row(a.u.data() + a.u_index(r, bb, 0), a.n_orb);
      EXPECT_NEAR(row.norm(), 1.0, 1e-12);
    }
}

TEST(Truncate, GroundEnergyShiftHasNoVisibleBias) {
  RandomStream init(61);
  const soskit::DfthcParams p = soskit::random_init(3, 1, 2, 1, init);
  RandomStream prng(62);
  const soskit::Problem prob = oracle::random_problem(3, prng, 0.1);
  const double e0 = ground_energy(p, prob);

  const int n = 64;
  std::vector<double> shift(n);
  double mean = 0.0;
  for (int k = 0; k < n; ++k) {
    RandomStream stream(1000 + static_cast<std::uint64_t>(k));
    shift[static_cast<std::size_t>(k)] =
        ground_energy(soskit::truncate_params(p, 15, 15, stream), prob) - e0;
    mean += shift[static_cast<std::size_t>(k)];
  }
  mean /= n;
  double var = 0.0;
  for (double s : shift) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / (n - 1));
  ASSERT_GT(sd, 0.0);
  EXPECT_LT(std::abs(mean), 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(ResidualBound, DominatesTheDenseOracleOnEveryDraw) {
  RandomStream rng(71);
  const Eigen::MatrixXd h1_eff = oracle::random_symmetric(3, rng);
  const int b_rot = 6;
  const auto res = soskit::one_body_residual_bound(h1_eff, 3, b_rot);
  ASSERT_GT(res.bound, 0.0);

  const auto eig = soskit::jacobi_eigen_symmetric(h1_eff);
  RandomStream stream(72);
  for (int k = 0; k < 100; ++k) {
    Eigen::MatrixXd rounded = Eigen::MatrixXd::Zero(3, 3);
    for (int s = 0; s < 3; ++s) {
      auto theta = soskit::angles_from_unit(eig.vectors.col(s));
      for (double& t : theta) t = soskit::round_angle(t, b_rot, stream);
      const Eigen::VectorXd v = soskit::unit_from_angles(theta);
      rounded += eig.values[s] * (v * v.transpose());
    }
    const double diff = dense_one_body_norm(h1_eff - rounded);
    EXPECT_LE(diff, res.bound) << "draw " << k;
  }
}

TEST(ResidualBound, EnvelopeHalvesPerBitAndBoundVanishes) {
  RandomStream rng(81);
  const Eigen::MatrixXd h1_eff = oracle::random_symmetric(4, rng);
  for (int b = 5; b < 20; ++b) {
    const auto coarse = soskit::one_body_residual_bound(h1_eff, 4, b);
    const auto fine = soskit::one_body_residual_bound(h1_eff, 4, b + 1);
    EXPECT_DOUBLE_EQ(coarse.envelope, 2.0 * fine.envelope);
    EXPECT_GE(coarse.bound, coarse.envelope);
    EXPECT_LE(coarse.bound, 2.0 * coarse.envelope + 1e-15);
  }
  EXPECT_LT(soskit::one_body_residual_bound(h1_eff, 4, 40).bound, 1e-8);
  const auto trivial = soskit::one_body_residual_bound(Eigen::MatrixXd::Zero(1, 1), 1, 10);
  EXPECT_EQ(trivial.bound, 0.0);
  EXPECT_EQ(trivial.envelope, 0.0);
}

TEST(ResidualBound, LogSlopeIsMinusOnePerBit) {
  RandomStream rng(91);
  const Eigen::MatrixXd h1_eff = oracle::random_symmetric(4, rng);
  const double lo = soskit::one_body_residual_bound(h1_eff, 4, 8).bound;
  const double hi = soskit::one_body_residual_bound(h1_eff, 4, 14).bound;
  const double slope = (std::log2(hi) - std::log2(lo)) / 6.0;
  EXPECT_GT(slope, -1.2);
  EXPECT_LT(slope, -0.8);
}

// RMS parameter deviation under repeated truncation halves per bit in both
// bit budgets: direction rows follow b_rot, coefficient columns follow
// b_coeff, each over four octaves.
TEST(Truncate, RmsDeviationHalvesPerBit) {
  RandomStream init(101);
  const soskit::DfthcParams p = soskit::random_init(5, 3, 5, 3, init);
  const int draws = 32;

  auto rms_u = [&](int b_rot) {
    double acc = 0.0;
    for (int k = 0; k < draws; ++k) {
      RandomStream stream(5000 + static_cast<std::uint64_t>(b_rot) * 100 + k);
      const auto q = soskit::truncate_params(p, b_rot, 40, stream);
      for (std::size_t i = 0; i < p.u.size(); ++i)
        acc += (q.u[i] - p.u[i]) * (q.u[i] - p.u[i]);
    }
    return std::sqrt(acc / draws);
  };
  auto rms_w = [&](int b_coeff) {
    double acc = 0.0;
    for (int k = 0; k < draws; ++k) {
      RandomStream stream(9000 + static_cast<std::uint64_t>(b_coeff) * 100 + k);
      const auto q = soskit::truncate_params(p, 40, b_coeff, stream);
      for (std::size_t i = 0; i < p.w.size(); ++i)
        acc += (q.w[i] - p.w[i]) * (q.w[i] - p.w[i]);
    }
    return std::sqrt(acc / draws);
  };

  const double slope_u = (std::log2(rms_u(14)) - std::log2(rms_u(6))) / 8.0;
  EXPECT_GT(slope_u, -1.2);
  EXPECT_LT(slope_u, -0.8);
  const double slope_w = (std::log2(rms_w(14)) - std::log2(rms_w(6))) / 8.0;
  EXPECT_GT(slope_w, -1.2);
  EXPECT_LT(slope_w, -0.8);
}

TEST(Csv, TruncationStudyFormat) {
  std::vector<soskit::TruncationSample> rows = {
      {8, 10, 0, 1.5e-4},
      {8, 10, 1, -2.0e-4},
  };
  std::ostringstream os;
  soskit::write_truncation_csv(rows, os);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, 28), "b_rot,b_coeff,sample,shift\n8");
  EXPECT_NE(text.find("8,10,1,-0.0002"), std::string::npos);
}

}  // namespace
