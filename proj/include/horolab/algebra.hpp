#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace horolab {

/// Element vV + xX + uU of sl(2,R) in the frame {V, X, U}.
struct AlgebraVector {
  double v = 0.0;
  double x = 0.0;
  double u = 0.0;

  AlgebraVector operator+(const AlgebraVector& o) const { return {v + o.v, x + o.x, u + o.u}; }
  AlgebraVector operator-(const AlgebraVector& o) const { return {v - o.v, x - o.x, u - o.u}; }
  AlgebraVector operator*(double s) const { return {v * s, x * s, u * s}; }
  AlgebraVector operator/(double s) const { return {v / s, x / s, u / s}; }

  double max_abs() const { return std::max({std::abs(v), std::abs(x), std::abs(u)}); }
  bool finite() const { return std::isfinite(v) && std::isfinite(x) && std::isfinite(u); }
};

inline const AlgebraVector kGenV{1, 0, 0};  // unstable horocycle
inline const AlgebraVector kGenX{0, 1, 0};  // geodesic
inline const AlgebraVector kGenU{0, 0, 1};  // stable horocycle

/// 2x2 real matrix; unit determinant when used as a group element.
struct Mat2 {
  double a = 1.0, b = 0.0;
  double c = 0.0, d = 1.0;

  static Mat2 identity() { return {}; }

  double det() const { return a * d - b * c; }

  Mat2 inverse() const {
    // valid for unit-determinant elements
    return {d, -b, -c, a};
  }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }

  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

  double frob() const { return std::sqrt(a * a + b * b + c * c + d * d); }
  double max_abs() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }
};

inline double frob_dist(const Mat2& m, const Mat2& n) { return (m - n).frob(); }

/// Matrix of W in the basis {V, X, U}: [[x/2, u], [v, -x/2]].
inline Mat2 basis_matrix(const AlgebraVector& w) {
  return {w.x / 2.0, w.u, w.v, -w.x / 2.0};
}

namespace detail {

// cosh(sqrt(delta)) and sinh(sqrt(delta))/sqrt(delta), valid for either sign of delta.
struct CoshSinc {
  double ch;
  double shc;
};

inline CoshSinc cosh_sinc(double delta) {
  if (std::abs(delta) <= 1e-14) {
    // series around the nilpotent branch, avoids 0/0
    return {1.0 + delta / 2.0 + delta * delta / 24.0, 1.0 + delta / 6.0 + delta * delta / 120.0};
  }
  if (delta > 0.0) {
    const double r = std::sqrt(delta);
    return {std::cosh(r), std::sinh(r) / r};
  }
  const double r = std::sqrt(-delta);
  return {std::cos(r), std::sin(r) / r};
}

}  // namespace detail

/// exp(s W) in closed form. Discriminant delta = s^2 (x^2/4 + u v) selects the
/// cosh/cos/nilpotent branch.
inline Mat2 exp_algebra(const AlgebraVector& w, double s) {
  const double delta = s * s * (w.x * w.x / 4.0 + w.u * w.v);
  const auto [ch, shc] = detail::cosh_sinc(delta);
  const double hx = shc * s * w.x / 2.0;
  return {ch + hx, shc * s * w.u, shc * s * w.v, ch - hx};
}

/// Ad_g(W) = g^{-1} W g, coordinates in the basis {V, X, U}.
/// Throws if the conjugated matrix fails to be trace-free (corrupted g).
inline AlgebraVector adjoint(const Mat2& g, const AlgebraVector& w) {
  // conjugation keeps the trace at zero for any invertible g, so the usable
  // corruption signal is the determinant
  const double det_residual = std::abs(g.det() - 1.0);
  if (det_residual > 1e-9 * std::max(1.0, g.max_abs())) {
    throw std::runtime_error("adjoint: group element determinant off by " +
                             std::to_string(det_residual));
  }
  const Mat2 m = g.inverse() * basis_matrix(w) * g;
  return {m.c, m.a - m.d, m.b};
}

/// Tangent of the sheared arc h_t(p exp(sW)): Ad_{exp(tU)}(W) in closed form.
inline AlgebraVector sheared_tangent(const AlgebraVector& w, double t) {
  return {w.v, w.x - 2.0 * t * w.v, w.u + w.x * t - w.v * t * t};
}

/// Tangent of the renormalized arc h^u_{-t} g_{2 log t} h_t (p exp(sW)), t >= 1.
/// Uniformly bounded in t when max(|v|,|x|,|u|) <= 1.
inline AlgebraVector renormalized_tangent(const AlgebraVector& w, double t) {
  return {-w.u, -(w.x + 2.0 * w.u / t), w.u / (t * t) + w.x / t - w.v};
}

/// log of a group element near the identity, as an algebra vector.
inline AlgebraVector log_near_identity(const Mat2& m) {
  const Mat2 e = m - Mat2::identity();
  if (e.frob() >= 0.8) {
    throw std::domain_error("log_near_identity: element too far from identity");
  }
  Mat2 acc = e;        // current power E^k
  Mat2 sum = e;
  double sign = -1.0;
  for (int k = 2; k <= 40; ++k) {
    acc = acc * e;
    sum = sum + acc * (sign / k);
    sign = -sign;
    if (acc.frob() / k < 1e-18) break;
  }
  return {sum.c, sum.a - sum.d, sum.b};
}

/// Spectral bookkeeping derived from the bottom of the nonzero Laplace spectrum.
struct SpectralProfile {
  double mu0 = 0.0;
  double nu0 = 0.0;
  int eps0 = 0;
  int delta0 = 0;
};

inline SpectralProfile spectral_profile(double mu0) {
  if (!(mu0 > 0.0)) {
    throw std::domain_error("spectral_profile: mu0 must be positive");
  }
  SpectralProfile sp;
  sp.mu0 = mu0;
  sp.nu0 = mu0 < 0.25 ? std::sqrt(1.0 - 4.0 * mu0) : 0.0;
  sp.eps0 = mu0 == 0.25 ? 1 : 0;
  sp.delta0 = mu0 >= 0.25 ? 1 : 0;
  return sp;
}

}  // namespace horolab
