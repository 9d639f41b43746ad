#include <doctest.h>

#include <cmath>

#include "ibot/oracles.hpp"
#include "ibot/prob.hpp"

using namespace ibot;

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

TEST_CASE("inverse_binary_entropy inverts binary_entropy on [0, 1/2]") {
  for (double u : {0.0, 0.05, 0.2, 0.35})
    CHECK(inverse_binary_entropy(binary_entropy(u)) == doctest::Approx(u).epsilon(1e-12));
  CHECK(inverse_binary_entropy(0.0) == doctest::Approx(0.0).epsilon(1e-13));
  // the entropy is flat at u = 1/2, so the inversion is only sqrt-accurate there
  CHECK(inverse_binary_entropy(kLn2) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK_THROWS_AS(inverse_binary_entropy(-1e-6), std::domain_error);
  CHECK_THROWS_AS(inverse_binary_entropy(0.8), std::domain_error);
}

TEST_CASE("bernoulli_R endpoints and monotonicity") {
  const double e = 0.15;
  const double cap = kLn2 - binary_entropy(e);
  CHECK(bernoulli_R(0.0, e) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bernoulli_R(cap, e) == doctest::Approx(kLn2).epsilon(1e-10));
  double prev = -1.0;
  for (int k = 0; k < 50; ++k) {
    const double I = cap * k / 49.0;
    const double R = bernoulli_R(I, e);
    CHECK(R >= prev - 1e-12);
    CHECK(R >= I - 1e-12);  // data-processing: R(I) >= I
    prev = R;
  }
  CHECK_THROWS_AS(bernoulli_R(cap + 1e-3, e), std::domain_error);
  CHECK_THROWS_AS(bernoulli_R(-1e-3, e), std::domain_error);
}

TEST_CASE("bernoulli_R with e = 0 is the identity curve") {
  CHECK(bernoulli_R(0.3, 0.0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("gaussian_R closed form and domain") {
  const double snr = 1.0;
  const double cap = 0.5 * std::log(1.0 + snr);
  CHECK(gaussian_R(0.0, snr) == doctest::Approx(0.0).epsilon(1e-12));
  // -0.5 log(((1 + snr) exp(-2 I) - 1) / snr) at I = 0.2
  CHECK(gaussian_R(0.2, snr) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::exp(-0.4) - 1.0)).epsilon(1e-14));
  double prev = -1.0;
  for (int k = 0; k < 50; ++k) {
    const double I = 0.999 * cap * k / 49.0;
    const double R = gaussian_R(I, snr);
    CHECK(R >= prev - 1e-12);
    prev = R;
  }
  CHECK_THROWS_AS(gaussian_R(cap, snr), std::domain_error);
  CHECK_THROWS_AS(gaussian_R(0.1, -1.0), std::domain_error);
}

TEST_CASE("constant_slope_R is the identity on [0, log 2]") {
  CHECK(constant_slope_R(0.0) == 0.0);
  CHECK(constant_slope_R(0.35) == 0.35);
  CHECK(constant_slope_R(kLn2) == kLn2);
  CHECK_THROWS_AS(constant_slope_R(0.8), std::domain_error);
}

TEST_CASE("oracle slopes match the Table I duals by finite differences") {
  // zeta = dR/dI at the tested thresholds
  const double h = 1e-6;
  const auto slope = [h](auto f, double I) { return (f(I + h) - f(I - h)) / (2.0 * h); };
  const auto bern = [](double I) { return bernoulli_R(I, 0.15); };
  CHECK(slope(bern, 0.0823) == doctest::Approx(2.1906).epsilon(1e-4));
  CHECK(slope(bern, 0.1308) == doctest::Approx(2.3299).epsilon(1e-4));
  CHECK(slope(bern, 0.1927) == doctest::Approx(2.6432).epsilon(1e-4));
  const auto gauss = [](double I) { return gaussian_R(I, 1.0); };
  CHECK(slope(gauss, 0.1) == doctest::Approx(2.5687).epsilon(1e-4));
  CHECK(slope(gauss, 0.2) == doctest::Approx(3.9357).epsilon(1e-4));
  CHECK(slope(gauss, 0.3) == doctest::Approx(11.2435).epsilon(1e-4));
}
