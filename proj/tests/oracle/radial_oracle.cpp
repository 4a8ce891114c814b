#include "radial_oracle.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace oracle {

namespace {

using State = std::array<double, 2>;

// Series start near the origin: Q = a + (a - a^p) r^2 / 4.
State series_start(double a, int p, double r) {
  const double c = (a - std::pow(a, p)) / 4.0;
  return {a + c * r * r, 2.0 * c * r};
}

template <class Rhs>
State rk4(const State& y, double r, double h, Rhs&& f) {
  auto add = [](const State& a, const State& b, double s) { return State{a[0] + s * b[0], a[1] + s * b[1]}; };
  const State k1 = f(r, y);
  const State k2 = f(r + h / 2, add(y, k1, h / 2));
  const State k3 = f(r + h / 2, add(y, k2, h / 2));
  const State k4 = f(r + h, add(y, k3, h));
  return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

// +1: overshoot (crosses zero), -1: undershoot (turns back up), 0: undecided.
int classify(double a, int p, double h, double r_max, std::vector<double>* out) {
  auto f = [p](double r, const State& y) {
    return State{y[1], -y[1] / r + y[0] - std::pow(std::abs(y[0]), p - 1) * y[0]};
  };
  double r = h;
  State y = series_start(a, p, r);
  if (out) {
    out->clear();
    out->push_back(a);
    out->push_back(y[0]);
  }
  while (r < r_max) {
    y = rk4(y, r, h, f);
    r += h;
    if (out) out->push_back(y[0]);
    if (y[0] < 0.0) return 1;
    if (y[1] > 0.0) return -1;
  }
  return 0;
}

}  // namespace

double RadialProfile::operator()(double r) const {
  r = std::abs(r);
  const double x = r / h;
  const auto i = static_cast<std::size_t>(x);
  if (r < r_trust && i + 1 < q.size()) {
    const double t = x - static_cast<double>(i);
    return (1 - t) * q[i] + t * q[i + 1];
  }
  // K0-type tail matched at r_trust.
  const auto j = static_cast<std::size_t>(r_trust / h);
  const double rt = static_cast<double>(j) * h;
  return q[j] * std::sqrt(rt / r) * std::exp(-(r - rt));
}

RadialProfile shoot_ground_state(int p, double h, int bisections) {
  // Bracket: Q(0) = 1 undershoots (Q'' > 0 at origin with a - a^p = 0), large
  // values overshoot.
  double lo = 1.0 + 1e-6, hi = 10.0;
  for (int k = 0; k < bisections; ++k) {
    const double mid = 0.5 * (lo + hi);
    const int c = classify(mid, p, h, 40.0, nullptr);
    if (c > 0) hi = mid;
    else lo = mid;
  }
  RadialProfile out;
  out.p = p;
  out.q0 = 0.5 * (lo + hi);
  out.h = h;
  // March the two bracketing shots and keep the region where they agree.
  std::vector<double> a, b;
  classify(lo, p, h, 40.0, &a);
  classify(hi, p, h, 40.0, &b);
  const std::size_t n = std::min(a.size(), b.size());
  out.q.resize(n);
  std::size_t trust = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    out.q[i] = 0.5 * (a[i] + b[i]);
    if (std::abs(a[i] - b[i]) > 1e-6 * std::abs(out.q[i]) && trust == n - 1) trust = i;
  }
  // Keep a safety margin before divergence sets in.
  out.r_trust = std::max(1.0, 0.8 * static_cast<double>(trust) * h);
  return out;
}

double shoot_lambda0(const RadialProfile& q, int bisections) {
  const int p = q.p;
  auto nodes = [&](double lambda) {
    // phi(0) = 1, phi'(0) = 0; series phi = 1 + (1 + lambda - p Q0^{p-1}) r^2/4.
    auto f = [&](double r, const State& y) {
      const double v = p * std::pow(q(r), p - 1);
      return State{y[1], -y[1] / r + (1.0 + lambda - v) * y[0]};
    };
    const double h = q.h;
    double r = h;
    const double c = (1.0 + lambda - p * std::pow(q.q0, p - 1)) / 4.0;
    State y{1.0 + c * r * r, 2.0 * c * r};
    const double r_max = q.r_trust;
    while (r < r_max) {
      y = rk4(y, r, h, f);
      r += h;
      if (y[0] < 0.0) return 1;   // lambda too small: oscillates
      if (y[1] > 0.0) return -1;  // lambda too large: grows
    }
    return 0;
  };
  double lo = 0.0, hi = p * std::pow(q.q0, p - 1);
  for (int k = 0; k < bisections; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (nodes(mid) > 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double radial_integral(const RadialProfile& q, double (*f)(double, int)) {
  // Integrate over the stored grid up to r_trust, then the tail on a coarse
  // extension; both by composite Simpson.
  const double R = 30.0;
  const int n = 2 * static_cast<int>(R / (2 * q.h));
  const double h = R / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * f(q(r), q.p) * r;
  }
  return 2.0 * std::numbers::pi * s * h / 3.0;
}

}  // namespace oracle
