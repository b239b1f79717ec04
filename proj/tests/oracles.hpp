#pragma once

// Test-only oracles, kept independent of the library's closed-form paths.

#include "horolab/observable.hpp"

namespace horolab::oracle {

/// Matrix exponential by scaling-and-squaring with a truncated Taylor series.
inline Mat2 expm(const Mat2& m) {
  double norm = m.max_abs();
  int squarings = 0;
  while (norm > 0.25 && squarings < 60) {
    norm /= 2.0;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  const Mat2 a = m * scale;
  Mat2 sum = Mat2::identity();
  Mat2 term = Mat2::identity();
  for (int k = 1; k <= 24; ++k) {
    term = term * a * (1.0 / k);
    sum = sum + term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Dirichlet condition checked against the full word ball, not just the
/// generators the greedy reduction uses.
inline bool dirichlet_condition(const Mat2& rep, const FuchsianGroupModel& gamma, int ball_len,
                                double tol = 1e-9) {
  const HPoint z = mobius(rep, gamma.center);
  const double d0 = hyp_dist(z, gamma.center);
  for (const auto& g : word_ball(gamma, ball_len)) {
    if (hyp_dist(mobius(g, z), gamma.center) < d0 - tol) return false;
  }
  return true;
}

/// Plain fine Riemann sum of f along s -> p exp(sW), independent of the
/// walker/trapezoid machinery.
inline double riemann_arc_integral(const Observable& f, const QuotientPoint& p,
                                   const AlgebraVector& w, double length, long n,
                                   const FuchsianGroupModel& gamma) {
  double acc = 0.0;
  const double h = length / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * h;
    const QuotientPoint q = quotient_flow(p, w, s, gamma);
    acc += f.eval(q);
  }
  return acc * h;
}

}  // namespace horolab::oracle
