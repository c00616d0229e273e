#include "doctest.h"

#include "softabs/errors.hpp"
#include "softabs/rng.hpp"
#include "softabs/spectral.hpp"

#include <cmath>
#include <stdexcept>

using namespace softabs;

namespace {

struct ScalarRef {
  double lambda, alpha, f, df;
};

// 40-digit evaluations of lambda coth(alpha lambda) and its derivative.
const ScalarRef kScalarRefs[] = {
    {1.0, 1.0, 1.3130352854993313036, 0.58897362453302083723},
    {0.5, 1.0, 1.0819767068693264244, 0.32260622532306821088},
    {-2.5, 1.0, 2.5339182745315211555, -0.94527058101068789657},
    {0.003, 1.0, 1.0000029999982000015, 0.0019999976000030857522},
    {0.25, 4.0, 0.32825882137483282591, 0.58897362453302083723},
    {1e-6, 1e6, 1.313035285499331277e-6, 0.58897362453302081671},
    {-4e-6, 1e6, 4.0026846016067297795e-6, -0.99530014541677585489},
    {2e-5, 1e6, 2.0000000000000000018e-5, 0.99999999999999966863},
    {7.0, 2.0, 7.0000000000096801601, 0.99999999996266223942},
    {-0.9, 10.0, 0.9000000274139639802, -0.99999948218067244311},
    {5e-5, 1.0, 1.0000000008333333332, 3.3333333322222223824e-5},
    {1e-5, 1.0, 1.0000000000333333333, 6.6666666665777783231e-6},
};

struct PairRef {
  double a, b, alpha, j;
};

const PairRef kPairRefs[] = {
    {1.0, 0.0, 1.0, 0.31303528549933130364},
    {1.0, 0.999, 1.0, 0.58874691143140094343},
    {0.3, -0.2, 2.0, 0.064442336099124391435},
    {2e-6, 1.5e-6, 1e6, 0.83488470396265666719},
    {5.0, 4.9, 1.0, 0.99910564100167662006},
    {1e-5, 3e-5, 1.0, 1.3333333332444444971e-5},
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Eigen::MatrixXd random_symmetric(int n, Rng& rng, double scale) {
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      a(i, j) = scale * rng.normal();
  return 0.5 * (a + a.transpose());
}

} // namespace

TEST_CASE("scalar map matches high-precision references") {
  for (const auto& r : kScalarRefs) {
    CAPTURE(r.lambda);
    CAPTURE(r.alpha);
    CHECK(rel(softabs_scalar(r.lambda, r.alpha), r.f) <= 1e-12);
    CHECK(rel(softabs_scalar_deriv(r.lambda, r.alpha), r.df) <= 1e-12);
  }
}

TEST_CASE("scalar map basics") {
  CHECK(softabs_scalar(0.0, 1.0) == 1.0);
  CHECK(softabs_scalar(0.0, 1e6) == doctest::Approx(1e-6).epsilon(1e-15));
  CHECK(softabs_scalar_deriv(0.0, 3.0) == 0.0);
  CHECK(softabs_scalar(-1e3, 1e6) == 1e3);
  CHECK(softabs_scalar(0.7, 2.0) == softabs_scalar(-0.7, 2.0));
  CHECK(softabs_scalar_deriv(0.7, 2.0) == -softabs_scalar_deriv(-0.7, 2.0));
}

TEST_CASE("scalar map is floored at max(|lambda|, 1/alpha)") {
  for (double alpha : {1e-2, 1.0, 37.0, 1e6}) {
    for (double x = -60.0; x <= 60.0; x += 0.173) {
      const double lambda = x / alpha;
      const double f = softabs_scalar(lambda, alpha);
      CHECK(f >= std::max(std::abs(lambda), 1.0 / alpha) * (1.0 - 1e-15));
      CHECK(std::abs(softabs_scalar_deriv(lambda, alpha)) <= 1.0);
    }
  }
}

TEST_CASE("scalar map is continuous across regime switches") {
  for (double edge : {kTaylorThreshold, kSaturationThreshold}) {
    for (double sign : {-1.0, 1.0}) {
      const double at = sign * edge;
      const double lo = std::nextafter(at, 0.0);
      const double hi = std::nextafter(at, sign * INFINITY);
      CAPTURE(at);
      CHECK(rel(softabs_scalar(lo, 1.0), softabs_scalar(hi, 1.0)) <= 1e-12);
      CHECK(std::abs(softabs_scalar_deriv(lo, 1.0) - softabs_scalar_deriv(hi, 1.0)) <= 1e-13);
    }
  }
}

TEST_CASE("invalid alpha and non-finite eigenvalues are rejected") {
  CHECK_THROWS_AS(softabs_scalar(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(softabs_scalar(1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(softabs_scalar_deriv(1.0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(softabs_scalar(std::nan(""), 1.0), DivergenceError);
  CHECK_THROWS_AS(softabs_divided_difference(1.0, INFINITY, 1.0), DivergenceError);
}

TEST_CASE("divided differences match high-precision references") {
  for (const auto& r : kPairRefs) {
    CAPTURE(r.a);
    CAPTURE(r.b);
    CHECK(rel(softabs_divided_difference(r.a, r.b, r.alpha), r.j) <= 1e-12);
    CHECK(softabs_divided_difference(r.a, r.b, r.alpha) == softabs_divided_difference(r.b, r.a, r.alpha));
  }
}

TEST_CASE("divided difference approaches the derivative at ties") {
  for (double a : {-3.0, -0.4, 1e-5, 0.02, 1.0, 17.99}) {
    const double d = softabs_scalar_deriv(a, 1.0);
    CHECK(softabs_divided_difference(a, a, 1.0) == d);
    for (double gap : {1e-11, 1e-8, 1e-6}) {
      CAPTURE(a);
      CAPTURE(gap);
      const double mid = softabs_scalar_deriv(a + 0.5 * gap, 1.0);
      CHECK(std::abs(softabs_divided_difference(a, a + gap, 1.0) - mid) <= 1e-11);
    }
  }
}

TEST_CASE("divided differences are bounded by one") {
  Rng rng(11);
  for (int k = 0; k < 2000; ++k) {
    const double a = rng.uniform(-30.0, 30.0);
    const double b = rng.uniform(-30.0, 30.0);
    CHECK(std::abs(softabs_divided_difference(a, b, 1.0)) <= 1.0 + 1e-15);
  }
}

TEST_CASE("build_pieces reconstructs H and yields an SPD metric") {
  Rng rng(5);
  for (int n : {1, 3, 8, 20}) {
    for (double alpha : {0.5, 1e6}) {
      const Eigen::MatrixXd H = random_symmetric(n, rng, 2.0);
      const SoftAbsPieces pc = build_pieces(H, alpha);
      const auto& Q = pc.eig.eigenvectors;
      CHECK((Q * pc.eig.eigenvalues.asDiagonal() * Q.transpose() - H).norm() <= 1e-12 * (1.0 + H.norm()));
      CHECK((Q.transpose() * Q - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-12);
      const Eigen::MatrixXd S = pc.metric();
      CHECK((S - S.transpose()).norm() <= 1e-14 * S.norm());
      Eigen::LLT<Eigen::MatrixXd> llt(S);
      CHECK(llt.info() == Eigen::Success);
      for (int i = 0; i < n; ++i) {
        const double lam = pc.eig.eigenvalues(i);
        CHECK(pc.lambda_soft(i) >= std::max(std::abs(lam), 1.0 / alpha) * (1.0 - 1e-15));
        CHECK(pc.jmat(i, i) == softabs_scalar_deriv(lam, alpha));
        for (int j = 0; j < n; ++j)
          CHECK(pc.jmat(i, j) == pc.jmat(j, i));
      }
    }
  }
}

TEST_CASE("metric eigenvalues of a large-alpha map approach |lambda|") {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 3);
  H.diagonal() << -4.0, 0.0, 2.5;
  const SoftAbsPieces pc = build_pieces(H, 1e6);
  Eigen::VectorXd sorted = pc.lambda_soft;
  std::sort(sorted.data(), sorted.data() + 3);
  CHECK(sorted(0) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(sorted(1) == 2.5);
  CHECK(sorted(2) == 4.0);
}

TEST_CASE("sym_eigen rejects bad input") {
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, 2);
  H(0, 1) = std::nan("");
  CHECK_THROWS_AS(sym_eigen(H), DivergenceError);
  CHECK_THROWS_AS(sym_eigen(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("series helpers") {
  for (double y : {0.1, 1.3, 1.999, 2.0, 5.0, -0.7}) {
    CAPTURE(y);
    CHECK(detail::sinh_minus_identity(y) == doctest::Approx(std::sinh(y) - y).epsilon(1e-12));
    CHECK(detail::xcosh_minus_sinh(y) == doctest::Approx(y * std::cosh(y) - std::sinh(y)).epsilon(1e-12));
    CHECK(detail::coth_minus_reciprocal(y) == doctest::Approx(1.0 / std::tanh(y) - 1.0 / y).epsilon(1e-12));
  }
  CHECK(detail::sinh_minus_identity(1e-6) == doctest::Approx(1e-18 / 6.0).epsilon(1e-12));
  CHECK(detail::xcosh_minus_sinh(1e-3) == doctest::Approx(1e-9 / 3.0).epsilon(1e-6));
  CHECK(detail::coth_minus_reciprocal(0.0) == 0.0);
}
