#pragma once

// Deterministic quadrature building blocks shared by the sphere integral,
// the singular time pairings and the oscillatory-integral coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "degentrace/errors.hpp"

namespace degentrace::quad {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_intervals = 20000;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// Gauss-Kronrod 10/21 abscissae and weights on [-1, 1] (QUADPACK qk21).
inline constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525452011, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T, class F>
Result<T> gk21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T resk = fc * kWgk[10];
  T resg{};
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    resk += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) resg += (f1 + f2) * kWg[j / 2];
  }
  Result<T> r;
  r.value = resk * h;
  r.error = magnitude((resk - resg) * h);
  r.intervals = 1;
  return r;
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (21-point) quadrature on [a, b]. The
// interval with the largest error estimate is bisected until the summed
// estimate meets max(abs_tol, rel_tol * |I|).
template <class F>
auto integrate(F f, double a, double b, const Options& opt = {}) {
  using T = std::decay_t<decltype(f(a))>;
  if (a == b) return Result<T>{};
  struct Piece {
    double a, b;
    Result<T> r;
    bool operator<(const Piece& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Piece> heap;
  auto first = detail::gk21<T>(f, a, b);
  heap.push({a, b, first});
  T total = first.value;
  double err = first.error;
  int count = 1;
  auto done = [&] {
    return err <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
  };
  while (!done()) {
    if (count >= opt.max_intervals) {
      throw ConvergenceError("adaptive quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                             "] stopped at " + std::to_string(count) +
                             " intervals with error estimate " + std::to_string(err));
    }
    Piece worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) {
      throw ConvergenceError("adaptive quadrature: interval cannot be bisected further");
    }
    auto left = detail::gk21<T>(f, worst.a, m);
    auto right = detail::gk21<T>(f, m, worst.b);
    total += left.value + right.value - worst.r.value;
    err += left.error + right.error - worst.r.error;
    heap.push({worst.a, m, left});
    heap.push({m, worst.b, right});
    ++count;
  }
  // Re-sum to shed the drift of the incremental updates.
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().r.value;
    esum += heap.top().r.error;
    heap.pop();
  }
  return Result<T>{sum, esum, count};
}

// Integrates over consecutive breakpoints and adds the results.
template <class F>
auto integrate_pieces(F f, const std::vector<double>& breaks, const Options& opt = {}) {
  using T = std::decay_t<decltype(f(breaks.front()))>;
  Result<T> total;
  Options local = opt;
  local.abs_tol = opt.abs_tol / std::max<std::size_t>(1, breaks.size() - 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto r = integrate(f, breaks[i], breaks[i + 1], local);
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
  }
  return total;
}

// int_0^b g(t) t^alpha dt for alpha > -1 through t = v^(1/(1+alpha)), which
// turns the weight into the constant 1/(1+alpha).
template <class F>
auto integrate_power_weight(F g, double alpha, double b, const Options& opt = {}) {
  if (!(alpha > -1.0)) throw DomainError("power weight exponent must exceed -1");
  const double p = 1.0 + alpha;
  const double vmax = std::pow(b, p);
  auto h = [&](double v) { return g(std::pow(v, 1.0 / p)); };
  auto r = integrate(h, 0.0, vmax, opt);
  r.value /= p;
  r.error /= p;
  return r;
}

// int_0^inf g(s) ds for g decaying at least like exp(-s), via s = x/(1-x).
template <class F>
auto integrate_half_line(F g, const Options& opt = {}) {
  auto h = [&](double x) {
    using T = std::decay_t<decltype(g(0.0))>;
    if (x >= 1.0) return T{};
    const double om = 1.0 - x;
    return g(x / om) / (om * om);
  };
  return integrate(h, 0.0, 1.0, opt);
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      // Recompute the derivative at the converged node.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

}  // namespace degentrace::quad
