#include <doctest.h>

#include "helpers.hpp"
#include "spanvol/spanner.hpp"

using namespace spanvol;
using testutil::gaussian_points;

TEST_SUITE_BEGIN("spanner");

TEST_CASE("coefficients against an orthonormal subset") {
  MatrixX<double> raw(3, 2);
  raw << 1, 0, 0, 1, 3, 4;
  const auto points = preprocess(raw);
  const auto alpha = coefficients(points, {0, 1}, 2);
  REQUIRE(alpha.size() == 2);
  CHECK(alpha(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(alpha(1) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(lp_norm(alpha, 2.0) == doctest::Approx(5.0).epsilon(1e-12));

  const auto indicator = coefficients(points, {0, 1}, 1);
  CHECK(indicator(0) == 0.0);
  CHECK(indicator(1) == 1.0);
}

TEST_CASE("coefficient norm squared equals the leverage score") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    const auto points = gaussian_points(12, 3, rng());
    const VectorXi counts = testutil::random_counts(points, 5, rng());
    std::vector<Index> subset;
    for (Index i = 0; i < points.n(); ++i) {
      if (counts(i) > 0) subset.push_back(i);
    }
    auto state = make_selection(points, counts);
    for (Index j = 0; j < points.n(); ++j) {
      if (counts(j) > 0) continue;
      const auto alpha = coefficients(points, subset, j);
      CHECK(alpha.squaredNorm() ==
            doctest::Approx(leverage(state, points.point(j))).epsilon(1e-8));
    }
  }
}

TEST_CASE("coefficients rejects rank-deficient subsets") {
  MatrixX<double> raw(3, 2);
  raw << 1, 0, 2, 0, 0, 1;
  const auto points = preprocess(raw);
  CHECK_THROWS_AS(coefficients(points, {0, 1}, 2), error);
}

TEST_CASE("lp spanner size search confirms the crossover by direct evaluation") {
  // Oracle: scan the certifying inequality r^(2/p-1) * 2d / (r-d+1) <= 1.
  auto oracle = [](Index d, double p) {
    Index r = d + 1;
    while (std::pow(static_cast<double>(r), 2.0 / p - 1.0) * 2.0 * d /
               (static_cast<double>(r) - d + 1.0) >
           1.0) {
      ++r;
    }
    return r;
  };
  for (Index d : {2, 4, 8, 16}) {
    for (double p : {1.2, 1.5, 1.8}) {
      CHECK(lp_spanner_size(d, p) == oracle(d, p));
    }
  }
  // d = 4, p = 1.5: the inequality 8 r^(1/3) <= r - 3 first holds at r = 27
  // (exact arithmetic: 8 * 3 = 24 = 27 - 3); floating evaluation may land on
  // either side of the tie, so accept the two adjacent answers.
  const Index r = lp_spanner_size(4, 1.5);
  CHECK(r >= 27);
  CHECK(r <= 28);
}

TEST_CASE("standard basis p=2 gives the trivial exact spanner") {
  MatrixX<double> raw = MatrixX<double>::Identity(4, 4);
  const auto points = preprocess(raw);
  const auto res = build_spanner(points, 2.0);
  CHECK(res.certificate.subset.size() == 4);
  CHECK(res.certificate.c_achieved == doctest::Approx(1.0));
  CHECK(res.certificate.c_guaranteed == doctest::Approx(1.0));
  CHECK(res.certificate.max_residual < 1e-14);
}

TEST_CASE("gaussian p=2: size 3d, candidate norms below sqrt(2d/(2d+1))") {
  const Index d = 10;
  const auto points = gaussian_points(200, d, 1234);
  const auto res = build_spanner(points, 2.0);
  const auto& cert = res.certificate;
  CHECK(cert.subset.size() == 30);
  CHECK(cert.c_achieved <= 1.0 + 1e-9);
  CHECK(cert.c_guaranteed == doctest::Approx(1.0));
  CHECK(cert.max_candidate_norm <= std::sqrt(20.0 / 21.0) + 1e-9);
  CHECK(cert.max_residual <= 1e-8);
  CHECK(cert.c_achieved <= cert.c_guaranteed + 1e-8);
}

TEST_CASE("p = 1.5 certificate is exact at the searched size") {
  const Index d = 4;
  const auto points = gaussian_points(300, d, 777);
  const auto res = build_spanner(points, 1.5);
  CHECK(res.r == lp_spanner_size(d, 1.5));
  CHECK(res.delta == doctest::Approx(static_cast<double>(d) / res.r));
  CHECK(res.certificate.c_guaranteed <= 1.0 + 1e-12);
  CHECK(res.certificate.c_achieved <= 1.0 + 1e-9);
  CHECK(res.certificate.max_residual <= 1e-8);
}

TEST_CASE("p = 1 certifies sqrt(3d)") {
  const Index d = 5;
  const auto points = gaussian_points(100, d, 31);
  const auto res = build_spanner(points, 1.0);
  CHECK(res.certificate.subset.size() == 15);
  CHECK(res.certificate.c_guaranteed == doctest::Approx(std::sqrt(15.0)).epsilon(1e-12));
  CHECK(res.certificate.c_achieved <= res.certificate.c_guaranteed + 1e-8);
}

TEST_CASE("n below the rule size yields the trivial all-points spanner") {
  const auto points = gaussian_points(5, 3, 8);  // 3d = 9 > 5
  const auto res = build_spanner(points, 2.0);
  CHECK(res.certificate.subset.size() == 5);
  CHECK(res.certificate.c_achieved == doctest::Approx(1.0));
  CHECK(res.certificate.c_guaranteed == doctest::Approx(1.0));
  CHECK(res.certificate.max_candidate_norm == 0.0);
}

TEST_CASE("r_override changes the engine size") {
  const auto points = gaussian_points(50, 3, 21);
  const auto res = build_spanner(points, 2.0, 12);
  CHECK(res.r == 12);
  CHECK(res.certificate.subset.size() == 12);
  CHECK(res.certificate.c_achieved <= res.certificate.c_guaranteed + 1e-8);
}

TEST_CASE("lp norms are monotone in p for produced coefficients") {
  const auto points = gaussian_points(60, 4, 91);
  const auto res = build_spanner(points, 2.0);
  for (Index j = 0; j < points.n(); ++j) {
    const VectorX<double> alpha = res.certificate.coefficients.row(j).transpose();
    const double n15 = lp_norm(alpha, 1.5);
    const double n20 = lp_norm(alpha, 2.0);
    const double n30 = lp_norm(alpha, 3.0);
    CHECK(n30 <= n20 * (1.0 + 1e-12));
    CHECK(n20 <= n15 * (1.0 + 1e-12));
    // On the l2 unit ball the max norm is below the l2 norm.
    if (n20 <= 1.0) CHECK(alpha.cwiseAbs().maxCoeff() <= n20 * (1.0 + 1e-12));
  }
}

TEST_CASE("lp size law: r grows like d^(p/(2p-2)) within a factor of 8") {
  const double p = 1.5;
  const double exponent = p / (2.0 * p - 2.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Index d : {4, 8, 16, 32}) {
    const double ratio =
        static_cast<double>(lp_spanner_size(d, p)) / std::pow(static_cast<double>(d), exponent);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi <= 8.0 * lo);
}

TEST_CASE("reconstruction holds on rank-deficient inputs via the span basis") {
  MatrixX<double> raw(6, 3);
  raw << 1, 1, 0, 2, 0, 0, 0, 1, 0, 1, 2, 0, 3, 1, 0, 0.5, 0.5, 0;
  const auto points = preprocess(raw);
  REQUIRE(points.dim() == 2);
  const auto res = build_spanner(points, 2.0);
  const auto& cert = res.certificate;
  for (Index j = 0; j < points.n(); ++j) {
    VectorX<double> rebuilt = VectorX<double>::Zero(3);
    for (Index t = 0; t < static_cast<Index>(cert.subset.size()); ++t) {
      rebuilt += cert.coefficients(j, t) * raw.row(cert.subset[t]).transpose();
    }
    CHECK((rebuilt - raw.row(j).transpose()).norm() <= 1e-8 * (1.0 + raw.row(j).norm()));
  }
}

TEST_SUITE_END();
