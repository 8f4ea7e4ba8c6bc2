#pragma once

// Explicit adaptive Dormand-Prince 5(4) stepper with cubic Hermite dense output.
//
// The stepper only ever takes one accepted step at a time; callers drive the
// loop themselves so they can clip steps at schedule breakpoints, inspect the
// result for events, and restart with a different right-hand side.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace capguard::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Tolerances {
  double abs = 1e-10;
  double rel = 1e-10;
  double initial_step = 1e-3;
  double max_step = 1.0;
  double min_step = 1e-13;
};

/// An accepted step [t0, t1] with endpoint values and derivatives.
template <std::size_t N>
struct Step {
  double t0 = 0.0;
  double t1 = 0.0;
  Vec<N> y0{};
  Vec<N> y1{};
  Vec<N> f0{};
  Vec<N> f1{};
};

/// Cubic Hermite interpolant of an accepted step, t in [t0, t1].
template <std::size_t N>
Vec<N> hermite(const Step<N>& s, double t) {
  const double h = s.t1 - s.t0;
  if (h == 0.0) return s.y0;
  const double th = (t - s.t0) / h;
  const double th2 = th * th;
  const double th3 = th2 * th;
  const double h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
  const double h10 = th3 - 2.0 * th2 + th;
  const double h01 = -2.0 * th3 + 3.0 * th2;
  const double h11 = th3 - th2;
  Vec<N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = h00 * s.y0[i] + h10 * h * s.f0[i] + h01 * s.y1[i] + h11 * h * s.f1[i];
  }
  return out;
}

namespace dp {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                        b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
}  // namespace dp

/// Rhs is any callable Vec<N>(double t, const Vec<N>& y).
template <std::size_t N, class Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, Tolerances tol) : rhs_(std::move(rhs)), tol_(tol), h_(tol.initial_step) {}

  Vec<N> eval(double t, const Vec<N>& y) const { return rhs_(t, y); }

  /// Takes one accepted step from (t, y) with derivative f0 = rhs(t, y),
  /// never stepping past t_limit. A step clipped by t_limit ends exactly on it.
  Step<N> advance(double t, const Vec<N>& y, const Vec<N>& f0, double t_limit) {
    if (!(t_limit > t)) throw std::invalid_argument("ode: t_limit must lie ahead of t");
    for (;;) {
      double h = std::min(h_, tol_.max_step);
      bool clipped = false;
      if (t + h >= t_limit) {
        h = t_limit - t;
        clipped = true;
      }
      Vec<N> tmp{};
      const Vec<N>& k1 = f0;
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * dp::a21 * k1[i];
      const Vec<N> k2 = rhs_(t + dp::c2 * h, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (dp::a31 * k1[i] + dp::a32 * k2[i]);
      const Vec<N> k3 = rhs_(t + dp::c3 * h, tmp);
      for (std::size_t i = 0; i < N; ++i) {
        tmp[i] = y[i] + h * (dp::a41 * k1[i] + dp::a42 * k2[i] + dp::a43 * k3[i]);
      }
      const Vec<N> k4 = rhs_(t + dp::c4 * h, tmp);
      for (std::size_t i = 0; i < N; ++i) {
        tmp[i] = y[i] + h * (dp::a51 * k1[i] + dp::a52 * k2[i] + dp::a53 * k3[i] + dp::a54 * k4[i]);
      }
      const Vec<N> k5 = rhs_(t + dp::c5 * h, tmp);
      for (std::size_t i = 0; i < N; ++i) {
        tmp[i] = y[i] + h * (dp::a61 * k1[i] + dp::a62 * k2[i] + dp::a63 * k3[i] +
                             dp::a64 * k4[i] + dp::a65 * k5[i]);
      }
      const Vec<N> k6 = rhs_(t + h, tmp);
      Vec<N> y1{};
      for (std::size_t i = 0; i < N; ++i) {
        y1[i] = y[i] + h * (dp::b1 * k1[i] + dp::b3 * k3[i] + dp::b4 * k4[i] + dp::b5 * k5[i] +
                            dp::b6 * k6[i]);
      }
      const double t1 = clipped ? t_limit : t + h;
      const Vec<N> k7 = rhs_(t1, y1);

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (dp::e1 * k1[i] + dp::e3 * k3[i] + dp::e4 * k4[i] + dp::e5 * k5[i] +
                              dp::e6 * k6[i] + dp::e7 * k7[i]);
        const double scale = tol_.abs + tol_.rel * std::max(std::abs(y[i]), std::abs(y1[i]));
        err = std::max(err, std::abs(e) / scale);
      }
      if (!std::isfinite(err)) err = 1e10;

      if (err <= 1.0) {
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // A clipped step says nothing about the natural step length; keep the
        // previous suggestion unless the clipped step itself was longer.
        const double grown = std::min(h * factor, tol_.max_step);
        h_ = clipped ? std::max(h_, grown) : grown;
        h_ = std::min(h_, tol_.max_step);
        return Step<N>{t, t1, y, y1, f0, k7};
      }
      h_ = h * std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9);
      if (h_ < tol_.min_step) throw std::runtime_error("ode: step size underflow");
    }
  }

  double suggested_step() const { return h_; }
  void set_suggested_step(double h) { h_ = h; }
  const Tolerances& tolerances() const { return tol_; }

 private:
  Rhs rhs_;
  Tolerances tol_;
  double h_;
};

template <std::size_t N, class Rhs>
DormandPrince<N, Rhs> make_stepper(Rhs rhs, Tolerances tol = {}) {
  return DormandPrince<N, Rhs>(std::move(rhs), tol);
}

}  // namespace capguard::ode
