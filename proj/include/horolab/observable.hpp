#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "horolab/lattice.hpp"

namespace horolab {

/// Compactly supported C^{k-1} bump on SL(2,R), either in the matrix-deviation
/// metric or (surface = true) depending only on the i-image, hence K-invariant.
struct BumpSpec {
  Mat2 center = Mat2::identity();
  double radius = 0.5;  // Frobenius radius, or hyperbolic radius for surface bumps
  int smoothness = 6;
  double amplitude = 1.0;
  bool surface = false;
};

namespace detail {

inline double pos_pow(double x, int k) {
  if (x <= 0.0) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace detail

inline double bump_eval(const BumpSpec& spec, const Mat2& g) {
  if (spec.surface) {
    const HPoint z0 = mobius(spec.center, HPoint{0, 1});
    const double q = cosh_dist_m1(mobius(g, HPoint{0, 1}), z0);
    const double qr = std::cosh(spec.radius) - 1.0;
    return spec.amplitude * detail::pos_pow(1.0 - q / qr, spec.smoothness);
  }
  const double rho = frob_dist(spec.center.inverse() * g, Mat2::identity());
  const double r = rho / spec.radius;
  return spec.amplitude * detail::pos_pow(1.0 - r * r, spec.smoothness);
}

/// Smooth zero-average test function on the quotient, realized as a truncated
/// Poincare series of a bump over a lattice ball.
struct Observable {
  BumpSpec bump;
  std::vector<Mat2> ball;        // all gamma with a possibly nonzero term
  std::vector<HPoint> centers;   // gamma^{-1} z0 (surface fast path)
  double q_radius = 0.0;         // cosh(radius) - 1 for surface bumps
  double mean_hat = 0.0;
  double mean_se = 0.0;
  double sup_hat = 0.0;
  double sobolev_hat = 0.0;
  bool k_invariant = false;
  int ball_depth = 0;

  /// Un-centered Poincare series at a group element.
  double eval_raw(const Mat2& g) const {
    double acc = 0.0;
    if (bump.surface) {
      const HPoint z = mobius(g, HPoint{0, 1});
      const double inv2y = 0.5 / z.imag();
      for (const auto& w : centers) {
        const double q = std::norm(z - w) * inv2y / w.imag();
        if (q < q_radius) acc += detail::pos_pow(1.0 - q / q_radius, bump.smoothness);
      }
      return bump.amplitude * acc;
    }
    for (const auto& gam : ball) {
      acc += bump_eval(bump, gam * g);
    }
    return acc;
  }

  double eval(const Mat2& g) const { return eval_raw(g) - mean_hat; }
  double eval(const QuotientPoint& p) const { return eval(p.rep); }
};

inline double observable_eval(const Observable& f, const QuotientPoint& p) { return f.eval(p); }

/// Estimate the mean by Monte Carlo over Haar samples and subtract it.
/// Also refreshes the sup estimate. Idempotent up to sampling noise.
inline Observable make_zero_average(Observable f, long n, Rng& rng,
                                    const FuchsianGroupModel& gamma) {
  if (n < 10000) throw std::invalid_argument("make_zero_average: need n >= 1e4");
  double sum = 0.0, comp = 0.0, sum_sq = 0.0, sup = 0.0;
  for (long i = 0; i < n; ++i) {
    const double v = f.eval(haar_sample(gamma, rng).rep);
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    sum_sq += v * v;
    sup = std::max(sup, std::abs(v));
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
  f.mean_hat += mean;
  f.mean_se = std::sqrt(var / static_cast<double>(n));
  f.sup_hat = sup + std::abs(mean);
  return f;
}

/// Build the truncated series: enlarge the lattice ball until evaluation is
/// invariant under every generator at the probe points (truncation complete).
inline Observable make_observable(const BumpSpec& bump, const FuchsianGroupModel& gamma,
                                  std::uint64_t seed = 7, int max_depth = 3,
                                  int probe_count = 100) {
  Observable f;
  f.bump = bump;
  f.k_invariant = bump.surface;
  if (bump.surface) f.q_radius = std::cosh(bump.radius) - 1.0;

  Rng rng = Rng::stream(seed, /*tag=*/0x0b5e);
  std::vector<QuotientPoint> probes;
  probes.reserve(static_cast<std::size_t>(probe_count));
  for (int i = 0; i < probe_count; ++i) probes.push_back(haar_sample(gamma, rng));

  const HPoint z0 = mobius(bump.center, HPoint{0, 1});
  const double tol = 1e-8 * std::max(1.0, std::abs(bump.amplitude));
  for (int depth = 1; depth <= max_depth; ++depth) {
    f.ball = word_ball(gamma, depth);
    f.ball_depth = depth;
    if (bump.surface) {
      f.centers.clear();
      for (const auto& g : f.ball) f.centers.push_back(mobius(g.inverse(), z0));
    }
    double max_dev = 0.0;
    for (const auto& p : probes) {
      const double v = f.eval_raw(p.rep);
      for (const auto& g : gamma.generators) {
        max_dev = std::max(max_dev, std::abs(f.eval_raw(g * p.rep) - v));
      }
    }
    if (max_dev <= tol) return f;
  }
  throw std::runtime_error("make_observable: lattice ball still incomplete at max depth");
}

/// Right-SO(2)-invariant observable: bump on the underlying surface point.
inline Observable k_invariant_observable(HPoint surface_center, double radius, int smoothness,
                                         double amplitude, const FuchsianGroupModel& gamma,
                                         std::uint64_t seed = 7) {
  BumpSpec spec;
  spec.center = frame_at(surface_center);
  spec.radius = radius;
  spec.smoothness = smoothness;
  spec.amplitude = amplitude;
  spec.surface = true;
  return make_observable(spec, gamma, seed);
}

namespace detail {

// central-difference coefficients for the m-th derivative: offsets m/2 - j
inline void central_stencil(int m, std::vector<double>& offsets, std::vector<double>& coeffs) {
  offsets.clear();
  coeffs.clear();
  double binom = 1.0;
  for (int j = 0; j <= m; ++j) {
    offsets.push_back(m / 2.0 - j);
    coeffs.push_back((j % 2 == 0 ? 1.0 : -1.0) * binom);
    binom = binom * (m - j) / (j + 1.0);
  }
}

}  // namespace detail

/// Mixed frame derivative V^i X^j U^k f at a point, by nested central
/// differences along the three flows at the given step.
inline double frame_derivative(const Observable& f, const Mat2& rep, int iv, int ix, int iu,
                               double h) {
  std::vector<double> ov, cv, ox, cx, ou, cu;
  detail::central_stencil(iv, ov, cv);
  detail::central_stencil(ix, ox, cx);
  detail::central_stencil(iu, ou, cu);
  double acc = 0.0;
  for (std::size_t a = 0; a < ov.size(); ++a) {
    const Mat2 mv = rep * exp_algebra(kGenV, ov[a] * h);
    for (std::size_t b = 0; b < ox.size(); ++b) {
      const Mat2 mx = mv * exp_algebra(kGenX, ox[b] * h);
      for (std::size_t c = 0; c < ou.size(); ++c) {
        acc += cv[a] * cx[b] * cu[c] * f.eval(mx * exp_algebra(kGenU, ou[c] * h));
      }
    }
  }
  return acc / std::pow(h, iv + ix + iu);
}

/// Sobolev-norm proxy: max over sample points of the sum of |mixed frame
/// derivatives| up to the given order, central differences at step 1e-3.
/// A relative-comparison proxy, not the analytic Sobolev norm.
inline double sobolev_proxy(const Observable& f, int order,
                            const std::vector<QuotientPoint>& points, double h = 1e-3) {
  if (order > 6) throw std::invalid_argument("sobolev_proxy: order exceeds bump smoothness");
  double best = 0.0;
  for (const auto& p : points) {
    double sum = 0.0;
    for (int iv = 0; iv <= order; ++iv) {
      for (int ix = 0; ix + iv <= order; ++ix) {
        for (int iu = 0; iu + ix + iv <= order; ++iu) {
          sum += std::abs(frame_derivative(f, p.rep, iv, ix, iu, h));
        }
      }
    }
    best = std::max(best, sum);
  }
  return best;
}

inline double sobolev_proxy(const Observable& f, int order, const FuchsianGroupModel& gamma,
                            std::uint64_t seed = 11, int n_points = 24, double h = 1e-3) {
  Rng rng = Rng::stream(seed, /*tag=*/0x50b0);
  std::vector<QuotientPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) pts.push_back(haar_sample(gamma, rng));
  return sobolev_proxy(f, order, pts, h);
}

}  // namespace horolab
