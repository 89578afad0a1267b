#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "fracgrad/frac_calculus.hpp"

using namespace fracgrad;

namespace {

// Closed-form Riemann-Liouville derivative of x^n with terminal 0.
double power_rule(double n, double alpha, double x) {
  return std::tgamma(n + 1.0) / std::tgamma(n + 1.0 - alpha) * std::pow(x, n - alpha);
}

// Direct product formula prod_{j<k} (alpha - j) / k!.
double binomial_by_product(double alpha, int k) {
  double num = 1.0;
  double den = 1.0;
  for (int j = 0; j < k; ++j) {
    num *= alpha - j;
    den *= j + 1;
  }
  return num / den;
}

FracConfig with_alpha(double alpha, double h = 1e-4) {
  FracConfig cfg;
  cfg.alpha = alpha;
  cfg.step_h = h;
  return cfg;
}

}  // namespace

TEST_CASE("gamma and reciprocal gamma") {
  CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-10));
  CHECK(recip_gamma(0.0) == 0.0);
  CHECK(recip_gamma(-3.0) == 0.0);
  CHECK(recip_gamma(4.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
  CHECK_THROWS_AS(gamma_fn(-2.0), DomainError);
  CHECK(gamma_fn(-0.5) == doctest::Approx(-2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("digamma matches known values and the log-gamma derivative") {
  constexpr double euler_gamma = 0.57721566490153286061;
  CHECK(digamma(1.0) == doctest::Approx(-euler_gamma).epsilon(1e-13));
  CHECK(digamma(0.5) == doctest::Approx(-euler_gamma - 2.0 * std::log(2.0)).epsilon(1e-13));
  for (double x : {0.05, 0.3, 0.9, 2.5, 7.0, -0.4, -1.7}) {
    const double h = 1e-6;
    const double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2 * h);
    CHECK(digamma(x) == doctest::Approx(fd).epsilon(1e-7));
  }
  CHECK_THROWS_AS(digamma(-1.0), DomainError);
}

TEST_CASE("generalized binomial") {
  CHECK(gen_binomial(0.5, 0) == 1.0);
  CHECK(gen_binomial(0.5, 2) == doctest::Approx(-0.125).epsilon(1e-15));
  CHECK(gen_binomial(1.0, 2) == 0.0);

  SUBCASE("matches the product formula for k <= 50, alpha in [-2, 2]") {
    for (int ia = 0; ia <= 40; ++ia) {
      const double alpha = -2.0 + 0.1 * ia;
      for (int k = 0; k <= 50; ++k) {
        const double expected = binomial_by_product(alpha, k);
        CHECK(std::abs(gen_binomial(alpha, static_cast<std::size_t>(k)) - expected) <=
              1e-12 * std::max(1.0, std::abs(expected)));
      }
    }
  }
}

TEST_CASE("Grunwald-Letnikov derivative") {
  auto square = [](double x) { return x * x; };
  CHECK(gl_derivative(square, 1.0, with_alpha(1.0)) == doctest::Approx(2.0).epsilon(1e-3));
  // Gamma(3)/Gamma(2.5)
  CHECK(std::abs(gl_derivative(square, 1.0, with_alpha(0.5)) - 1.5045055561273500985) <= 1e-2);

  SUBCASE("constant functions give c x^-alpha / Gamma(1 - alpha)") {
    const double c = 3.0;
    const double got = gl_derivative([&](double) { return c; }, 1.0, with_alpha(0.5));
    CHECK(std::abs(got - 0.56418958354775628695 * c) <= 1e-2 * c);
  }

  SUBCASE("sum is anchored at the terminal") {
    FracConfig cfg = with_alpha(0.5);
    cfg.terminal_a = 1.0;
    // shifted power rule: D^a_{1} (x - 1)^2 at x = 2 equals power_rule(2, a, 1)
    const double got = gl_derivative([](double x) { return (x - 1) * (x - 1); }, 2.0, cfg);
    CHECK(std::abs(got - power_rule(2, 0.5, 1.0)) <= 1e-2);
  }

  SUBCASE("error decreases roughly linearly in h") {
    for (double n : {1.0, 2.0, 3.0}) {
      for (double alpha : {0.25, 0.5, 0.75}) {
        auto f = [n](double x) { return std::pow(x, n); };
        const double exact = power_rule(n, alpha, 1.5);
        const double e1 = std::abs(gl_derivative(f, 1.5, with_alpha(alpha, 1e-2)) - exact);
        const double e2 = std::abs(gl_derivative(f, 1.5, with_alpha(alpha, 1e-3)) - exact);
        const double order = std::log10(e1 / e2);
        CHECK(order > 0.8);
        CHECK(order < 1.2);
      }
    }
  }

  CHECK_THROWS_AS(gl_derivative(square, 0.0, with_alpha(0.5)), DomainError);
  CHECK_THROWS_AS(gl_derivative(square, 1e-5, with_alpha(0.5)), DomainError);
}

TEST_CASE("Riemann-Liouville quadrature oracle") {
  FracConfig cfg = with_alpha(0.5);
  auto identity = [](double x) { return x; };
  CHECK(std::abs(rl_quadrature(identity, 1.0, cfg) - 1.1283791670955125739) <= 1e-4);
  CHECK(std::abs(rl_quadrature([](double) { return 2.0; }, 1.0, cfg) -
                 2.0 * 0.56418958354775628695) <= 1e-4);
  cfg.alpha = 0.999;
  CHECK(std::abs(rl_quadrature(identity, 1.0, cfg) - 1.0) <= 5e-3);

  cfg.alpha = 1.0;
  CHECK_THROWS_AS(rl_quadrature(identity, 1.0, cfg), DomainError);
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(rl_quadrature(identity, 1.0, cfg), DomainError);

  SUBCASE("agrees with Grunwald-Letnikov on polynomials") {
    for (double x : {0.5, 1.0, 2.0}) {
      for (double alpha : {0.25, 0.5, 0.75}) {
        auto f = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t * t; };
        CHECK(std::abs(rl_quadrature(f, x, with_alpha(alpha)) -
                       gl_derivative(f, x, with_alpha(alpha))) <= 1e-3);
      }
    }
  }
}

TEST_CASE("Caputo composition annihilates constants") {
  const FracConfig cfg = with_alpha(0.5);
  CHECK(caputo_quadrature([](double) { return 0.0; }, 1.3, cfg) == 0.0);
  // f = x^2: Caputo and RL agree because f(0) = 0
  CHECK(std::abs(caputo_quadrature([](double t) { return 2 * t; }, 1.3, cfg) -
                 power_rule(2, 0.5, 1.3)) <= 1e-8);
}

TEST_CASE("first-order Taylor surrogate") {
  FracConfig cfg;
  cfg.alpha = 1.0;
  const Vec g1 = frac_taylor_direction(123.0, Vec{2.0, -3.0}, cfg);
  CHECK(g1 == Vec{2.0, -3.0});

  cfg.alpha = 0.0;
  CHECK(frac_taylor_direction(4.0, Vec{7.0, -1.0, 0.5}, cfg) == Vec{4.0, 4.0, 4.0});

  cfg.alpha = 0.5;
  const Vec g = frac_taylor_direction(1.0, Vec{1.0}, cfg);
  CHECK(g[0] == doctest::Approx(0.84628437532163443042).epsilon(1e-9));

  SUBCASE("reduces to the gradient at alpha = 1 for random inputs") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    FracConfig one;
    one.alpha = 1.0;
    for (int i = 0; i < 200; ++i) {
      const Vec grad{u(gen), u(gen), u(gen)};
      const Vec got = frac_taylor_direction(u(gen), grad, one);
      for (std::size_t k = 0; k < grad.size(); ++k) CHECK(std::abs(got[k] - grad[k]) <= 1e-15 * std::abs(grad[k]));
    }
  }

  SUBCASE("coordinate displacement mode uses X - a") {
    FracConfig c;
    c.alpha = 1.0;
    c.taylor_dx_mode = TaylorDxMode::coordinate;
    c.terminal_a = 1.0;
    CHECK(frac_taylor_direction(0.0, Vec{2.0, 2.0}, c, Vec{3.0, -1.0}) == Vec{4.0, -4.0});
    CHECK_THROWS_AS(frac_taylor_direction(0.0, Vec{2.0, 2.0}, c, Vec{3.0}), DimensionError);
  }

  SUBCASE("alpha derivative matches central differences") {
    for (double a : {0.1, 0.37, 0.5, 0.9, 0.995}) {
      FracConfig c;
      c.alpha = a;
      const Vec grad{1.5, -0.25};
      const double h = 1e-6;
      FracConfig lo = c;
      FracConfig hi = c;
      lo.alpha -= h;
      hi.alpha += h;
      const Vec d = frac_taylor_alpha_derivative(2.0, grad, c);
      const Vec p = frac_taylor_direction(2.0, grad, hi);
      const Vec m = frac_taylor_direction(2.0, grad, lo);
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK(d[i] == doctest::Approx((p[i] - m[i]) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("fractional Jacobian") {
  SUBCASE("alpha = 1 gives the classical Jacobian") {
    const auto j = frac_jacobian_example(0.5, 0.5, 1.0);
    CHECK(j.entries[0][0] == doctest::Approx(1.0));
    CHECK(j.entries[0][1] == doctest::Approx(-1.0));
    CHECK(j.entries[1][0] == doctest::Approx(1.5));
    CHECK(j.entries[1][1] == doctest::Approx(1.5));
    const auto k = frac_jacobian_example(2.0, 3.0, 1.0);
    CHECK(k.entries[0][0] == doctest::Approx(4.0));
    CHECK(k.entries[0][1] == doctest::Approx(-6.0));
    CHECK(k.entries[1][0] == doctest::Approx(9.0));
    CHECK(k.entries[1][1] == doctest::Approx(6.0));
  }

  SUBCASE("alpha = 1.2 at (1, 1) matches the per-term power rule") {
    const auto j = frac_jacobian_example(1.0, 1.0, 1.2);
    CHECK(j.entries[0][0] == doctest::Approx(2.3191299519066021484).epsilon(1e-12));
    CHECK(j.entries[0][1] == doctest::Approx(-2.3191299519066021484).epsilon(1e-12));
    CHECK(j.entries[1][0] == doctest::Approx(2.5768110576740023871).epsilon(1e-12));
    CHECK(j.entries[1][1] == doctest::Approx(2.5768110576740023871).epsilon(1e-12));
  }

  SUBCASE("entries agree with Grunwald-Letnikov partials for alpha > 1") {
    const double x = 0.8;
    const double y = 0.6;
    const double alpha = 1.25;
    FracConfig cfg;
    cfg.alpha = alpha;
    cfg.step_h = 1e-5;
    const auto j = frac_jacobian_example(x, y, alpha);
    const double d00 = gl_derivative([&](double t) { return t * t - y * y; }, x, cfg);
    const double d01 = gl_derivative([&](double t) { return x * x - t * t; }, y, cfg);
    const double d10 = gl_derivative([&](double t) { return 3 * t * y; }, x, cfg);
    CHECK(j.entries[0][0] == doctest::Approx(d00).epsilon(1e-2));
    CHECK(j.entries[0][1] == doctest::Approx(d01).epsilon(1e-2));
    CHECK(j.entries[1][0] == doctest::Approx(d10).epsilon(1e-2));
  }

  CHECK_THROWS_AS(frac_jacobian_example(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(frac_jacobian_example(1.0, -1.0, 0.5), DomainError);
}

TEST_CASE("grid transform") {
  const auto single = grid_transform({1.0, 1.0, 1}, 1.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].out[0] == doctest::Approx(0.0));
  CHECK(single[0].out[1] == doctest::Approx(6.0));

  const auto lattice = grid_transform({0.5, 1.5, 3}, 1.0);
  REQUIRE(lattice.size() == 9);
  CHECK(lattice[1].in == std::array<double, 2>{1.0, 0.5});  // x varies fastest
  for (const auto& p : lattice) {
    const double x = p.in[0];
    const double y = p.in[1];
    CHECK(p.out[0] == doctest::Approx(2 * x * x - 2 * y * y));
    CHECK(p.out[1] == doctest::Approx(6 * x * y));
  }

  const auto linear = grid_transform({0.1, 1.0, 10}, 1.0);
  const auto curved = grid_transform({0.1, 1.0, 10}, 1.2);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < linear.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(linear[i].out[0] - curved[i].out[0]));
  }
  CHECK(max_diff > 1e-3);
  CHECK_THROWS_AS(grid_transform({-1.0, 1.0, 3}, 1.0), DomainError);
}
