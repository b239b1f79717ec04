#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "horolab/algebra.hpp"
#include "horolab/rng.hpp"

namespace horolab {

using HPoint = std::complex<double>;

/// Moebius action of g on the upper half-plane.
inline HPoint mobius(const Mat2& g, HPoint z) {
  const HPoint den = g.c * z + g.d;
  if (std::norm(den) < 1e-60) {
    throw std::domain_error("mobius: numerically singular denominator");
  }
  return (g.a * z + g.b) / den;
}

/// cosh(d(z,w)) - 1 = |z-w|^2 / (2 Im z Im w). Monotone proxy for hyperbolic
/// distance, cheap enough for the reduction hot loop.
inline double cosh_dist_m1(HPoint z, HPoint w) {
  return std::norm(z - w) / (2.0 * z.imag() * w.imag());
}

inline double hyp_dist(HPoint z, HPoint w) {
  const double q = cosh_dist_m1(z, w);
  // acosh(1+q) written to stay accurate for small q
  return std::log1p(q + std::sqrt(q * (q + 2.0)));
}

/// Axis-aligned sampling window in the upper half-plane. The default covers
/// the Bolza Dirichlet octagon about i: circumradius acosh(3 + 2 sqrt 2), a
/// side facing straight up (max y = e^{inradius} = 1 + sqrt 2 + sqrt(2 + 2
/// sqrt 2)), vertices 22.5 degrees off vertical at the bottom.
struct UpperHalfBox {
  double x_min = -4.25, x_max = 4.25;
  double y_min = 0.0885, y_max = 4.65;

  bool operator==(const UpperHalfBox&) const = default;

  double hyp_area() const { return (x_max - x_min) * (1.0 / y_min - 1.0 / y_max); }
};

/// Co-compact Fuchsian group given by a finite symmetric generating set.
struct FuchsianGroupModel {
  std::vector<Mat2> generators;  // closed under inverses
  HPoint center{0.0, 1.0};
  std::string label;
  UpperHalfBox bbox;

  /// Genus-2 Bolza surface group: g_k = R^k T R^{-k}, k = 0..3, plus inverses,
  /// with T the standard hyperbolic translation and R the order-8 rotation at i.
  static FuchsianGroupModel bolza() {
    const double al = 1.0 + std::sqrt(2.0);
    const double be = std::sqrt(2.0 + 2.0 * std::sqrt(2.0));
    const Mat2 t{al, be, be, al};
    const Mat2 t_inv{al, -be, -be, al};
    const double th = M_PI / 8.0;
    const Mat2 r{std::cos(th), std::sin(th), -std::sin(th), std::cos(th)};
    const Mat2 r_inv{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)};

    FuchsianGroupModel g;
    g.label = "bolza";
    Mat2 rk = Mat2::identity(), rk_inv = Mat2::identity();
    for (int k = 0; k < 4; ++k) {
      g.generators.push_back(rk * t * rk_inv);
      g.generators.push_back(rk * t_inv * rk_inv);
      rk = rk * r;
      rk_inv = r_inv * rk_inv;
    }
    return g;
  }

  /// Determinant check plus a discreteness probe over the word-length-<=4 ball.
  void validate() const;
};

/// Coset representative reduced into the Dirichlet domain around the center.
struct QuotientPoint {
  Mat2 rep;
  std::vector<int> word;  // generator indices applied during reduction; diagnostic only
};

namespace detail {

// One greedy descent pass; returns number of generator applications.
// Renormalizes the determinant to absorb round-off from long products.
inline int reduce_inplace(Mat2& rep, const FuchsianGroupModel& gamma, std::vector<int>* word,
                          int cap = 10000) {
  const double dd = rep.det();
  if (std::abs(dd - 1.0) > 1e-13) {
    if (dd <= 0.0) throw std::runtime_error("reduce: non-positive determinant");
    const double s = 1.0 / std::sqrt(dd);
    rep = rep * s;
  }
  const HPoint c = gamma.center;
  int steps = 0;
  HPoint z = mobius(rep, c);
  double best = cosh_dist_m1(z, c);
  for (; steps < cap; ++steps) {
    int best_i = -1;
    double best_q = best - 1e-12;
    for (std::size_t i = 0; i < gamma.generators.size(); ++i) {
      const double q = cosh_dist_m1(mobius(gamma.generators[i], z), c);
      if (q < best_q) {
        best_q = q;
        best_i = static_cast<int>(i);
      }
    }
    if (best_i < 0) return steps;
    rep = gamma.generators[static_cast<std::size_t>(best_i)] * rep;
    z = mobius(rep, c);
    best = cosh_dist_m1(z, c);
    if (word) word->push_back(best_i);
  }
  throw std::runtime_error("reduce: iteration cap exceeded (non-discrete group or blow-up?)");
}

}  // namespace detail

/// Reduce g to the Dirichlet representative of its coset.
inline QuotientPoint reduce(const Mat2& g, const FuchsianGroupModel& gamma, int cap = 10000) {
  QuotientPoint p{g, {}};
  detail::reduce_inplace(p.rep, gamma, &p.word, cap);
  return p;
}

/// Right translation p exp(tW) on the quotient, split into steps whose
/// center-image displacement stays <= 1 so intermediate entries stay bounded.
inline QuotientPoint quotient_flow(const QuotientPoint& p, const AlgebraVector& w, double t,
                                   const FuchsianGroupModel& gamma) {
  QuotientPoint out{p.rep, p.word};
  if (t == 0.0 || w.max_abs() == 0.0) return out;
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  // largest step with unit displacement of the center image
  double dt = remaining;
  while (cosh_dist_m1(mobius(exp_algebra(w, sgn * dt), HPoint{0, 1}), HPoint{0, 1}) >
         std::cosh(1.0) - 1.0) {
    dt /= 2.0;
  }
  while (remaining > 0.0) {
    const double step = std::min(dt, remaining);
    out.rep = out.rep * exp_algebra(w, sgn * step);
    detail::reduce_inplace(out.rep, gamma, &out.word);
    remaining -= step;
  }
  return out;
}

/// Group element moving i to z = x + iy with an upright frame.
inline Mat2 frame_at(HPoint z) {
  const double sy = std::sqrt(z.imag());
  return {sy, z.real() / sy, 0.0, 1.0 / sy};
}

inline Mat2 rotation(double theta) {
  return {std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta)};
}

/// Base point z distributed per hyperbolic area on the bounding box.
inline HPoint sample_box_point(const FuchsianGroupModel& gamma, Rng& rng) {
  const auto& b = gamma.bbox;
  const double x = rng.uniform(b.x_min, b.x_max);
  // inverse CDF of the density 1/y^2 on [y_min, y_max]
  const double y = 1.0 / (1.0 / b.y_min - rng.uniform() * (1.0 / b.y_min - 1.0 / b.y_max));
  return {x, y};
}

/// Haar-distributed point of the quotient: rejection sampling of the surface
/// point over the bounding box, uniform frame angle on the fiber.
inline QuotientPoint haar_sample(const FuchsianGroupModel& gamma, Rng& rng, int max_tries = 4000) {
  for (int k = 0; k < max_tries; ++k) {
    const HPoint z = sample_box_point(gamma, rng);
    Mat2 rep = frame_at(z);
    Mat2 probe = rep;
    if (detail::reduce_inplace(probe, gamma, nullptr) == 0) {
      return {rep * rotation(rng.uniform(0.0, 2.0 * M_PI)), {}};
    }
  }
  throw std::runtime_error("haar_sample: acceptance rate below floor (wrong bounding region?)");
}

/// All distinct elements of word length <= max_len, identity included.
/// Elements are deduplicated up to sign (gamma and -gamma act identically).
inline std::vector<Mat2> word_ball(const FuchsianGroupModel& gamma, int max_len) {
  std::vector<Mat2> ball{Mat2::identity()};
  auto canon = [](Mat2 m) {
    if (m.a < 0 || (m.a == 0 && (m.b < 0 || (m.b == 0 && m.c < 0)))) m = m * -1.0;
    return m;
  };
  auto known = [&](const Mat2& m) {
    const Mat2 cm = canon(m);
    for (const auto& e : ball) {
      if (frob_dist(canon(e), cm) < 1e-8) return true;
    }
    return false;
  };
  std::vector<Mat2> frontier{Mat2::identity()};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Mat2> next;
    for (const auto& w : frontier) {
      for (const auto& g : gamma.generators) {
        Mat2 m = g * w;
        if (!known(m)) {
          ball.push_back(m);
          next.push_back(m);
        }
      }
    }
    frontier = std::move(next);
  }
  return ball;
}

inline void FuchsianGroupModel::validate() const {
  for (const auto& g : generators) {
    if (std::abs(g.det() - 1.0) > 1e-9) {
      throw std::runtime_error("lattice: generator determinant off by " +
                               std::to_string(std::abs(g.det() - 1.0)));
    }
  }
  for (const auto& g : word_ball(*this, 4)) {
    if (frob_dist(g, Mat2::identity()) < 1e-8) continue;
    if (hyp_dist(mobius(g, center), center) < 1e-3) {
      throw std::runtime_error("lattice: discreteness probe failed (short displacement)");
    }
  }
}

}  // namespace horolab
