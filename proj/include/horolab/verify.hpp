#pragma once

#include <string>
#include <vector>

#include "horolab/arcs.hpp"

namespace horolab {

struct SuiteResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline AlgebraVector random_vector(Rng& rng, double scale) {
  return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

inline Mat2 random_group_element(Rng& rng, double scale) {
  return exp_algebra(random_vector(rng, scale), 1.0) * exp_algebra(random_vector(rng, scale), 1.0);
}

}  // namespace detail

/// Closed-form exponential: determinant preservation and the group law.
inline SuiteResult verify_exponential(std::uint64_t seed, int trials = 1000) {
  Rng rng = Rng::stream(seed, 0xe4b0);
  SuiteResult res{"exponential", 0.0, 1e-10, false};
  for (int i = 0; i < trials; ++i) {
    const AlgebraVector w = detail::random_vector(rng, 2.0);
    const double s = rng.uniform(-2.0, 2.0);
    const double sp = rng.uniform(-2.0, 2.0);
    res.max_residual = std::max(res.max_residual, std::abs(exp_algebra(w, s).det() - 1.0));
    res.max_residual = std::max(
        res.max_residual,
        frob_dist(exp_algebra(w, s + sp), exp_algebra(w, s) * exp_algebra(w, sp)));
  }
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

/// Finite-difference check of d/ds exp(sW) = exp(sW) B(W).
inline SuiteResult verify_derivative(std::uint64_t seed, int trials = 100) {
  Rng rng = Rng::stream(seed, 0xd123);
  SuiteResult res{"derivative", 0.0, 1e-6, false};
  for (int i = 0; i < trials; ++i) {
    const AlgebraVector w = detail::random_vector(rng, 2.0);
    const double s = rng.uniform(-2.0, 2.0);
    const double h = 1e-5;
    const Mat2 fd = (exp_algebra(w, s + h) - exp_algebra(w, s - h)) * (1.0 / (2.0 * h));
    const Mat2 exact = exp_algebra(w, s) * basis_matrix(w);
    res.max_residual = std::max(res.max_residual, frob_dist(fd, exact) / std::max(exact.frob(), 1.0));
  }
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

/// Adjoint action: morphism law, the contraction Ad_{exp(sX)} U = e^{-s} U,
/// and the sheared-tangent closed form against direct conjugation.
inline SuiteResult verify_adjoint(std::uint64_t seed, int trials = 1000) {
  Rng rng = Rng::stream(seed, 0xad70);
  SuiteResult res{"adjoint", 0.0, 1e-9, false};
  auto vec_dist = [](const AlgebraVector& a, const AlgebraVector& b) {
    return (a - b).max_abs();
  };
  for (int i = 0; i < trials; ++i) {
    const AlgebraVector w = detail::random_vector(rng, 1.0);
    const Mat2 g = detail::random_group_element(rng, 1.0);
    const Mat2 h = detail::random_group_element(rng, 1.0);
    res.max_residual =
        std::max(res.max_residual, vec_dist(adjoint(g * h, w), adjoint(h, adjoint(g, w))));

    const double s = rng.uniform(-2.0, 2.0);
    const AlgebraVector contracted = adjoint(exp_algebra(kGenX, s), kGenU);
    res.max_residual = std::max(res.max_residual,
                                vec_dist(contracted, AlgebraVector{0, 0, std::exp(-s)}));

    const double t = rng.uniform(0.0, 50.0);
    const AlgebraVector direct = adjoint(exp_algebra(kGenU, t), w);
    const AlgebraVector closed = sheared_tangent(w, t);
    res.max_residual =
        std::max(res.max_residual, vec_dist(direct, closed) / std::max(1.0, closed.max_abs()));
  }
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

/// Renormalized tangent: closed form vs composed adjoints, and the uniform
/// component bound 3 over t in [1, 1e6].
inline SuiteResult verify_key_lemma(std::uint64_t seed, int trials = 100) {
  Rng rng = Rng::stream(seed, 0x4321);
  SuiteResult res{"key_lemma", 0.0, 1e-10, false};
  bool bounded = true;
  for (int i = 0; i < trials; ++i) {
    AlgebraVector w = detail::random_vector(rng, 1.0);
    const double scale = w.max_abs();
    if (scale > 0.0) w = w / scale;  // max coefficient exactly 1
    for (double t : {1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
      const AlgebraVector closed = renormalized_tangent(w, t);
      // exact diagonal for the geodesic factor: the composition cancels
      // entries of size t, which a cosh/sinh-rounded t would survive as t*eps
      const Mat2 comp = exp_algebra(kGenU, t) * Mat2{t, 0.0, 0.0, 1.0 / t} *
                        exp_algebra(kGenV, -t);
      const AlgebraVector via_adjoint = adjoint(comp, w);
      res.max_residual = std::max(
          res.max_residual, (closed - via_adjoint).max_abs() / std::max(1.0, closed.max_abs()));
      if (closed.max_abs() > 3.0) bounded = false;
    }
  }
  res.pass = res.max_residual <= res.tolerance && bounded;
  return res;
}

/// Shadowing: the leaf factorization exp(sW) exp(tU) exp(J0 V) = exp(J2 U) exp(J1 X)
/// entrywise, the U-component closed form -v t^2 + x t + u, and the X bound 20 t.
inline SuiteResult verify_shadow(std::uint64_t seed, int trials = 1000) {
  Rng rng = Rng::stream(seed, 0x5bad);
  SuiteResult res{"shadow", 0.0, 1e-10, false};
  double tangent_res = 0.0;
  bool x_bounded = true;
  for (int i = 0; i < trials; ++i) {
    AlgebraVector w = detail::random_vector(rng, 1.0);
    if (w.max_abs() > 0.0) w = w / w.max_abs();
    const double t = std::exp(rng.uniform(std::log(2.0), std::log(1e3)));
    const double ell = ell_constant(w, 1.0, 400);
    const double s = rng.uniform(0.0, 1.0 / (ell * t));
    const ShadowFrame fr = shadow_frame(w, t, s);
    const Mat2 lhs = exp_algebra(w, s) * exp_algebra(kGenU, t) * exp_algebra(kGenV, fr.j0);
    const Mat2 rhs = exp_algebra(kGenU, fr.j2) * exp_algebra(kGenX, fr.j1);
    res.max_residual =
        std::max(res.max_residual, frob_dist(lhs, rhs) / std::max(1.0, rhs.frob()));

    // finite-difference tangent of the leaf coordinates vs the closed form;
    // fourth-order stencil keeps truncation below the 1e-8 pin at small t
    const double fd = std::min(1e-4 / t, s > 0 ? s / 2.0 : 1e-9);
    const ShadowFrame lo2 = shadow_frame(w, t, s - 2.0 * fd);
    const ShadowFrame lo = shadow_frame(w, t, s - fd);
    const ShadowFrame hi = shadow_frame(w, t, s + fd);
    const ShadowFrame hi2 = shadow_frame(w, t, s + 2.0 * fd);
    auto deriv4 = [fd](double m2, double m1, double p1, double p2) {
      return (m2 - p2 + 8.0 * (p1 - m1)) / (12.0 * fd);
    };
    // the shadow window keeps the sheared arc's U-speed; expanding the
    // Wronskian (b'+a't)(d+ct) - (b+at)(d'+c't) with ad - bc = 1 gives the
    // x-term with a full factor t
    const double u_comp = deriv4(lo2.j2, lo.j2, hi.j2, hi2.j2) * std::exp(-fr.j1);
    const double u_exact = -w.v * t * t + w.x * t + w.u;
    tangent_res = std::max(tangent_res,
                           std::abs(u_comp - u_exact) / std::max(1.0, std::abs(u_exact)));
    const double x_comp = deriv4(lo2.j1, lo.j1, hi.j1, hi2.j1);
    if (std::abs(x_comp) > 20.0 * t) x_bounded = false;
  }
  res.pass = res.max_residual <= res.tolerance && tangent_res <= 1e-8 && x_bounded;
  return res;
}

/// Lattice: generator determinants, reduction idempotence and left-invariance.
inline SuiteResult verify_lattice(const FuchsianGroupModel& gamma, std::uint64_t seed,
                                  int trials = 100) {
  Rng rng = Rng::stream(seed, 0x1a77);
  SuiteResult res{"lattice", 0.0, 1e-9, false};
  for (const auto& g : gamma.generators) {
    res.max_residual = std::max(res.max_residual, std::abs(g.det() - 1.0));
  }
  for (int i = 0; i < trials; ++i) {
    const Mat2 g = detail::random_group_element(rng, 1.5);
    const QuotientPoint p = reduce(g, gamma);
    const QuotientPoint p2 = reduce(p.rep, gamma);
    const HPoint z = mobius(p.rep, gamma.center);
    res.max_residual = std::max(res.max_residual, hyp_dist(z, mobius(p2.rep, gamma.center)));
    for (const auto& gen : gamma.generators) {
      const QuotientPoint q = reduce(gen * g, gamma);
      res.max_residual = std::max(res.max_residual, hyp_dist(z, mobius(q.rep, gamma.center)));
    }
  }
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

inline std::vector<SuiteResult> verify_all(const FuchsianGroupModel& gamma, std::uint64_t seed) {
  return {verify_exponential(seed), verify_derivative(seed), verify_adjoint(seed),
          verify_key_lemma(seed),   verify_shadow(seed),     verify_lattice(gamma, seed)};
}

}  // namespace horolab
