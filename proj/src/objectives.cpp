#include "fracgrad/objectives.hpp"

#include <cmath>
#include <numbers>

namespace fracgrad {
namespace {

using std::numbers::pi;

ObjectiveFn rosenbrock2d() {
  return {"rosenbrock2d",
          2,
          [](std::span<const double> p) {
            const double a = 1.0 - p[0];
            const double b = p[1] - p[0] * p[0];
            return a * a + 100.0 * b * b;
          },
          [](std::span<const double> p) {
            const double b = p[1] - p[0] * p[0];
            return Vec{-2.0 * (1.0 - p[0]) - 400.0 * p[0] * b, 200.0 * b};
          },
          {{-5.0, 10.0}, {-5.0, 10.0}},
          0.0,
          {{1.0, 1.0}}};
}

ObjectiveFn sphere2d() {
  return {"sphere2d",
          2,
          [](std::span<const double> p) { return p[0] * p[0] + p[1] * p[1]; },
          [](std::span<const double> p) { return Vec{2.0 * p[0], 2.0 * p[1]}; },
          {{-5.0, 5.0}, {-5.0, 5.0}},
          0.0,
          {{0.0, 0.0}}};
}

ObjectiveFn booth() {
  return {"booth",
          2,
          [](std::span<const double> p) {
            const double a = p[0] + 2.0 * p[1] - 7.0;
            const double b = 2.0 * p[0] + p[1] - 5.0;
            return a * a + b * b;
          },
          [](std::span<const double> p) {
            const double a = p[0] + 2.0 * p[1] - 7.0;
            const double b = 2.0 * p[0] + p[1] - 5.0;
            return Vec{2.0 * a + 4.0 * b, 4.0 * a + 2.0 * b};
          },
          {{-10.0, 10.0}, {-10.0, 10.0}},
          0.0,
          {{1.0, 3.0}}};
}

ObjectiveFn beale() {
  return {"beale",
          2,
          [](std::span<const double> p) {
            const double x = p[0];
            const double y = p[1];
            const double a = 1.5 - x + x * y;
            const double b = 2.25 - x + x * y * y;
            const double c = 2.625 - x + x * y * y * y;
            return a * a + b * b + c * c;
          },
          [](std::span<const double> p) {
            const double x = p[0];
            const double y = p[1];
            const double a = 1.5 - x + x * y;
            const double b = 2.25 - x + x * y * y;
            const double c = 2.625 - x + x * y * y * y;
            return Vec{2.0 * (a * (y - 1.0) + b * (y * y - 1.0) + c * (y * y * y - 1.0)),
                       2.0 * x * (a + 2.0 * b * y + 3.0 * c * y * y)};
          },
          {{-4.5, 4.5}, {-4.5, 4.5}},
          0.0,
          {{3.0, 0.5}}};
}

ObjectiveFn himmelblau() {
  return {"himmelblau",
          2,
          [](std::span<const double> p) {
            const double a = p[0] * p[0] + p[1] - 11.0;
            const double b = p[0] + p[1] * p[1] - 7.0;
            return a * a + b * b;
          },
          [](std::span<const double> p) {
            const double a = p[0] * p[0] + p[1] - 11.0;
            const double b = p[0] + p[1] * p[1] - 7.0;
            return Vec{4.0 * a * p[0] + 2.0 * b, 2.0 * a + 4.0 * b * p[1]};
          },
          {{-5.0, 5.0}, {-5.0, 5.0}},
          0.0,
          {{3.0, 2.0},
           {-2.8051180869527448531, 3.1313125182505729658},
           {-3.7793102533777468919, -3.2831859912861694123},
           {3.5844283403304917449, -1.8481265269644035535}}};
}

ObjectiveFn rastrigin2d() {
  return {"rastrigin2d",
          2,
          [](std::span<const double> p) {
            double s = 20.0;
            for (double v : p) s += v * v - 10.0 * std::cos(2.0 * pi * v);
            return s;
          },
          [](std::span<const double> p) {
            Vec g(2);
            for (std::size_t i = 0; i < 2; ++i) {
              g[i] = 2.0 * p[i] + 20.0 * pi * std::sin(2.0 * pi * p[i]);
            }
            return g;
          },
          {{-5.0, 5.0}, {-5.0, 5.0}},
          0.0,
          {{0.0, 0.0}}};
}

ObjectiveFn ackley2d() {
  return {"ackley2d",
          2,
          [](std::span<const double> p) {
            const double r = std::sqrt(0.5 * (p[0] * p[0] + p[1] * p[1]));
            const double c = 0.5 * (std::cos(2.0 * pi * p[0]) + std::cos(2.0 * pi * p[1]));
            return -20.0 * std::exp(-0.2 * r) - std::exp(c) + std::numbers::e + 20.0;
          },
          [](std::span<const double> p) {
            const double r = std::sqrt(0.5 * (p[0] * p[0] + p[1] * p[1]));
            const double c = 0.5 * (std::cos(2.0 * pi * p[0]) + std::cos(2.0 * pi * p[1]));
            const double ec = std::exp(c);
            // the radial term is not differentiable at the origin; use the zero subgradient
            const double radial = r > 0.0 ? 2.0 * std::exp(-0.2 * r) / r : 0.0;
            Vec g(2);
            for (std::size_t i = 0; i < 2; ++i) {
              g[i] = radial * p[i] + ec * pi * std::sin(2.0 * pi * p[i]);
            }
            return g;
          },
          {{-5.0, 5.0}, {-5.0, 5.0}},
          0.0,
          {{0.0, 0.0}}};
}

// f(x) = log(x^2 + 1 + sin 3x) + 1.5; the log argument is >= x^2 > 0 away from 0 and 1 at 0.
ObjectiveFn chaotic1d() {
  return {"chaotic1d",
          1,
          [](std::span<const double> p) {
            const double x = p[0];
            return std::log(x * x + 1.0 + std::sin(3.0 * x)) + 1.5;
          },
          [](std::span<const double> p) {
            const double x = p[0];
            return Vec{(2.0 * x + 3.0 * std::cos(3.0 * x)) / (x * x + 1.0 + std::sin(3.0 * x))};
          },
          {{-4.0, 4.0}},
          0.0040086232102988649104,
          {{-0.42730784687523010912}}};
}

}  // namespace

const std::vector<ObjectiveFn>& registry() {
  static const std::vector<ObjectiveFn> fns = {rosenbrock2d(), sphere2d(),    booth(),
                                               beale(),        himmelblau(),  rastrigin2d(),
                                               ackley2d(),     chaotic1d()};
  return fns;
}

const ObjectiveFn& lookup(std::string_view name) {
  for (const auto& fn : registry()) {
    if (fn.name == name) return fn;
  }
  throw ConfigError("unknown objective function '" + std::string(name) + "'");
}

Vec sample_start(const ObjectiveFn& fn, Rng& rng) {
  Vec x(fn.dim);
  for (std::size_t i = 0; i < fn.dim; ++i) x[i] = rng.uniform(fn.domain[i].lo, fn.domain[i].hi);
  return x;
}

}  // namespace fracgrad
