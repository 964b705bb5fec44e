// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "vdib/numerics.hpp"

using namespace vdib;

namespace {

// Composite Simpson rule for the standard normal tail, truncated 14 sigma past x.
double simpson_tail(double x) {
  const int n = 40000;
  const double b = x + 14.0;
  const double h = (b - x) / n;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = phi(x) + phi(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * phi(x + i * h);
  return s * h / 3.0;
}

}  // namespace

// Reference constants below come from 40-digit arithmetic.
TEST_CASE("oracle: high-precision reference values") {
  CHECK(sigmoid(10.0) == doctest::Approx(0.9999546021312975656).epsilon(1e-15));
  CHECK(sigmoid(-30.0) == doctest::Approx(9.357622968839298954e-14).epsilon(1e-13));
  CHECK(q_function(2.0) == doctest::Approx(0.02275013194817920720).epsilon(1e-13));
  CHECK(q_function(0.5) == doctest::Approx(0.30853753872598689636).epsilon(1e-13));
  CHECK(q_function(5.0) == doctest::Approx(2.866515718791939117e-7).epsilon(1e-12));
  CHECK(ebn0_to_epsilon_bpsk(1.0) == doctest::Approx(0.07864960352514256533).epsilon(1e-13));
}

TEST_CASE("oracle: Gaussian tail by numerical integration") {
  for (double x : {0.0, 0.5, 1.0, 2.0, 3.0, 4.5}) {
    CHECK(std::abs(q_function(x) - simpson_tail(x)) < 1e-12);
  }
}

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-std::log(3.0)) == doctest::Approx(0.25).epsilon(1e-15));
  SUBCASE("stable at large magnitude") {
    CHECK(sigmoid(700.0) == 1.0);
    CHECK(sigmoid(-700.0) > 0.0);
    CHECK(std::isfinite(sigmoid(-745.0)));
    CHECK(sigmoid(-1e6) == 0.0);
  }
  SUBCASE("symmetry") {
    for (double x = -40.0; x <= 40.0; x += 0.37) {
      CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-15);
    }
  }
}

TEST_CASE("log_sigmoid and log_add_exp") {
  for (double x : {-30.0, -2.0, 0.0, 1.5, 30.0}) {
    CHECK(log_sigmoid(x) == doctest::Approx(std::log(sigmoid(x))).epsilon(1e-14));
  }
  CHECK(log_sigmoid(-800.0) == doctest::Approx(-800.0));
  CHECK(log_sigmoid(800.0) == 0.0);
  CHECK(log_add_exp(std::log(0.25), std::log(0.5)) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_add_exp(ninf, -3.0) == -3.0);
  CHECK(log_add_exp(-3.0, ninf) == -3.0);
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("ebn0_to_epsilon") {
  CHECK(ebn0_to_epsilon(0.0) == 0.5);
  CHECK(ebn0_to_epsilon(std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(ebn0_to_epsilon(1e3) < 1e-300);
  CHECK(ebn0_to_epsilon(db_to_linear(0.0)) == doctest::Approx(0.02275013194817920720).epsilon(1e-13));
  CHECK_THROWS_AS(ebn0_to_epsilon(-1e-9), DomainError);
  CHECK_THROWS_AS(ebn0_to_epsilon_bpsk(-1.0), DomainError);
  CHECK_THROWS_AS(ebn0_to_epsilon(std::nan("")), DomainError);

  SUBCASE("monotone non-increasing over a dense grid") {
    for (EpsilonMapping map : {&ebn0_to_epsilon, &ebn0_to_epsilon_bpsk}) {
      double prev = map(0.0);
      for (double db = -40.0; db <= 15.0; db += 0.05) {
        const double eps = map(db_to_linear(db));
        CHECK(eps <= prev);
        CHECK(eps >= 0.0);
        CHECK(eps <= 0.5);
        prev = eps;
      }
    }
  }
  SUBCASE("dB conversion") {
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(db_to_linear(-std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
    CHECK_THROWS_AS(linear_to_db(0.0), DomainError);
  }
}

TEST_CASE("causal_convolve") {
  CHECK(causal_convolve(Kernel{{1.0}}, std::vector<std::uint8_t>{0, 1, 0}, 1) == 1.0);
  CHECK(causal_convolve(Kernel{{1.0, 1.0, 1.0}}, std::vector<std::uint8_t>(6, 1), 5) == 3.0);
  CHECK(causal_convolve(Kernel{{0.5, 0.25}}, std::vector<std::uint8_t>{1, 0, 1}, 2) == 0.5);
  SUBCASE("window longer than the history so far") {
    CHECK(causal_convolve(Kernel{{1.0, 2.0, 4.0}}, std::vector<std::uint8_t>{1, 1}, 1) == 3.0);
    CHECK(causal_convolve(Kernel{{1.0, 2.0, 4.0}}, std::vector<std::uint8_t>{1}, 0) == 1.0);
  }
  CHECK_THROWS_AS(causal_convolve(Kernel{{1.0}}, std::vector<std::uint8_t>{1}, -1), DomainError);

  SUBCASE("linear in the history") {
    // Binary histories are only closed under disjoint sums, so check that form
    // plus scaling of the result.
    const Kernel k = Kernel::exponential(3.0, 6);
    const std::vector<std::uint8_t> s{1, 0, 0, 1, 0, 0, 1, 0, 1};
    const std::vector<std::uint8_t> r{0, 1, 0, 0, 1, 0, 0, 0, 0};
    std::vector<std::uint8_t> both(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) both[i] = s[i] | r[i];
    for (long t = 0; t < static_cast<long>(s.size()); ++t) {
      CHECK(causal_convolve(k, both, t) ==
            doctest::Approx(causal_convolve(k, s, t) + causal_convolve(k, r, t)).epsilon(1e-15));
    }
  }
}

TEST_CASE("Kernel") {
  const Kernel k = Kernel::exponential(5.0, 10);
  REQUIRE(k.window() == 10);
  CHECK(k.coefficients[0] == 1.0);
  CHECK(k.coefficients[5] == doctest::Approx(std::exp(-1.0)));
  CHECK_NOTHROW(k.validate());
  CHECK_THROWS_AS(Kernel::exponential(0.0, 3), DomainError);
  CHECK_THROWS_AS(Kernel::exponential(1.0, 0), DomainError);
  CHECK_THROWS_AS(Kernel{}.validate(), DomainError);
  CHECK_THROWS_AS((Kernel{{1.0, std::nan("")}}.validate()), DomainError);
}

TEST_CASE("finite_diff_grad") {
  const auto square = [](std::span<const double> x) { return x[0] * x[0]; };
  CHECK(std::abs(finite_diff_grad(square, std::vector<double>{3.0}, 1e-5)[0] - 6.0) < 1e-8);

  const auto constant = [](std::span<const double>) { return 4.2; };
  for (double g : finite_diff_grad(constant, std::vector<double>{1.0, -2.0, 3.0}, 1e-4)) CHECK(g == 0.0);

  const auto sig = [](std::span<const double> x) { return sigmoid(x[0]); };
  CHECK(std::abs(finite_diff_grad(sig, std::vector<double>{0.0}, 1e-5)[0] - 0.25) < 1e-8);

  const auto blowup = [](std::span<const double> x) { return x[0] > 0.0 ? INFINITY : 0.0; };
  CHECK_THROWS_AS(finite_diff_grad(blowup, std::vector<double>{0.0}, 1e-3), OracleError);
  CHECK_THROWS_AS(finite_diff_grad(square, std::vector<double>{1.0}, 0.0), DomainError);
}
