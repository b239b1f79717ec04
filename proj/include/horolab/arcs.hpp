#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "horolab/observable.hpp"

namespace horolab {

/// A sheared arc s -> h_t(p exp(sW)), s in [0, S], S <= sigma.
struct ArcSpec {
  QuotientPoint base;
  AlgebraVector direction;
  double length = 1.0;          // S
  double sigma = 1.0;
  double horocycle_time = 0.0;  // t
};

/// Leaf coordinates of the shadowing construction.
struct ShadowFrame {
  double j0 = 0.0;  // stable-horocycle correction
  double j1 = 0.0;  // geodesic coordinate -2 log(d + c t)
  double j2 = 0.0;  // horocycle coordinate (b + a t)/(d + c t)
};

enum class CurveKind { Plain, Sheared, Renormalized, Shadow };

/// Sampled rectifiable arc with tangents in the frame {V, X, U}.
struct Curve {
  struct Node {
    double s = 0.0;
    QuotientPoint point;
    AlgebraVector tangent;
  };
  std::vector<Node> nodes;
  CurveKind kind = CurveKind::Plain;
  AlgebraVector direction;      // generating W (normalized)
  double horocycle_time = 0.0;  // t

  /// Arclength of one dual-frame component: trapezoid of |component| in s.
  double abs_integral(double AlgebraVector::* comp) const {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      acc += 0.5 * (std::abs(nodes[i].tangent.*comp) + std::abs(nodes[i + 1].tangent.*comp)) *
             (nodes[i + 1].s - nodes[i].s);
    }
    return acc;
  }
  double abs_integral_V() const { return abs_integral(&AlgebraVector::v); }
  double abs_integral_X() const { return abs_integral(&AlgebraVector::x); }
  double abs_integral_U() const { return abs_integral(&AlgebraVector::u); }
};

/// Rescale W to max coefficient 1; the arc is unchanged as a point set,
/// only the parameter is stretched by c.
struct NormalizedDirection {
  AlgebraVector direction;
  double length;
  double sigma;
  double scale;
};

inline NormalizedDirection normalize_direction(const AlgebraVector& w, double length,
                                               double sigma) {
  const double c = w.max_abs();
  if (c == 0.0) throw std::invalid_argument("normalize_direction: zero direction");
  return {w / c, c * length, c * sigma, c};
}

/// l(sigma) = 4 max entry of d/ds exp(sW) over [0, sigma], on a grid of 1e4
/// points with 1% safety inflation.
inline double ell_constant(const AlgebraVector& w, double sigma, int grid = 10000) {
  const Mat2 bw = basis_matrix(w);
  double m = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double s = sigma * i / grid;
    const Mat2 deriv = exp_algebra(w, s) * bw;
    m = std::max(m, deriv.max_abs());
  }
  return 4.0 * m * 1.01;
}

/// Streaming node source for a sheared arc. Successive points differ by right
/// multiplication with the fixed step element exp(ds Ad_{exp(tU)} W), reduced
/// after every step so entries stay bounded.
class ShearedArcWalker {
 public:
  ShearedArcWalker(const ArcSpec& spec, long node_count, const FuchsianGroupModel& gamma)
      : gamma_(&gamma), n_(node_count) {
    if (node_count < 2) throw std::invalid_argument("sheared arc: need at least 2 nodes");
    ds_ = spec.length / static_cast<double>(node_count - 1);
    step_ = exp_algebra(sheared_tangent(spec.direction, spec.horocycle_time), ds_);
    rep_ = quotient_flow(spec.base, kGenU, spec.horocycle_time, gamma).rep;
  }

  long size() const { return n_; }
  double ds() const { return ds_; }
  double s() const { return static_cast<double>(index_) * ds_; }
  const Mat2& rep() const { return rep_; }

  bool advance() {
    if (index_ + 1 >= n_) return false;
    ++index_;
    rep_ = rep_ * step_;
    detail::reduce_inplace(rep_, *gamma_, nullptr);
    return true;
  }

 private:
  const FuchsianGroupModel* gamma_;
  Mat2 rep_;
  Mat2 step_;
  double ds_;
  long n_ = 0;
  long index_ = 0;
};

/// Materialized sheared arc; every node carries the constant tangent
/// Ad_{exp(tU)}(W).
inline Curve sheared_arc(const ArcSpec& spec, long node_count, const FuchsianGroupModel& gamma) {
  Curve curve;
  curve.kind = spec.horocycle_time == 0.0 ? CurveKind::Plain : CurveKind::Sheared;
  curve.direction = spec.direction;
  curve.horocycle_time = spec.horocycle_time;
  const AlgebraVector tangent = sheared_tangent(spec.direction, spec.horocycle_time);
  ShearedArcWalker walk(spec, node_count, gamma);
  curve.nodes.reserve(static_cast<std::size_t>(node_count));
  do {
    curve.nodes.push_back({walk.s(), QuotientPoint{walk.rep(), {}}, tangent});
  } while (walk.advance());
  return curve;
}

/// Apply h^u_{-t} o g_{2 log t} pointwise; the result has tangents uniformly
/// bounded by 3 whenever max(|v|,|x|,|u|) <= 1.
inline Curve renormalize_arc(const Curve& curve, const FuchsianGroupModel& gamma) {
  const double t = curve.horocycle_time;
  if (t < 1.0) throw std::invalid_argument("renormalize_arc: need t >= 1");
  const Mat2 post = exp_algebra(kGenX, 2.0 * std::log(t)) * exp_algebra(kGenV, -t);
  Curve out;
  out.kind = CurveKind::Renormalized;
  out.direction = curve.direction;
  out.horocycle_time = t;
  const AlgebraVector tangent = renormalized_tangent(curve.direction, t);
  out.nodes.reserve(curve.nodes.size());
  for (const auto& node : curve.nodes) {
    Mat2 rep = node.point.rep * post;
    detail::reduce_inplace(rep, gamma, nullptr);
    out.nodes.push_back({node.s, QuotientPoint{rep, {}}, tangent});
  }
  return out;
}

/// Partition points p_k = p exp(k/(l t) W), k = 0 .. floor(S l t) - 1.
inline std::vector<QuotientPoint> partition_arc(const ArcSpec& spec, double ell,
                                                const FuchsianGroupModel& gamma) {
  const double t = spec.horocycle_time;
  if (t < 2.0) throw std::invalid_argument("partition_arc: need t >= 2");
  const long count = static_cast<long>(std::floor(spec.length * ell * t));
  const double ds = 1.0 / (ell * t);
  const Mat2 step = exp_algebra(spec.direction, ds);
  std::vector<QuotientPoint> points;
  points.reserve(static_cast<std::size_t>(std::max(count, 0L)));
  Mat2 rep = spec.base.rep;
  for (long k = 0; k < count; ++k) {
    points.push_back({rep, {}});
    rep = rep * step;
    detail::reduce_inplace(rep, gamma, nullptr);
  }
  return points;
}

/// Leaf coordinates J0, J1, J2 at parameter s of the shadow window.
inline ShadowFrame shadow_frame(const AlgebraVector& w, double t, double s) {
  const Mat2 e = exp_algebra(w, s);
  const double den = e.d + e.c * t;
  if (den < 0.5) {
    throw std::domain_error("shadow_frame: d + c t below 1/2, parameter outside window");
  }
  return {-e.c / den, -2.0 * std::log(den), (e.b + e.a * t) / den};
}

/// Shadow arc in the {X,U}-leaf of p_k. Tangent X and U components computed by
/// central differences of the leaf coordinates, so they form an independent
/// route against the closed forms -v t^2 + (x/2) t + u and the 20 t bound.
inline Curve shadow_curve(const QuotientPoint& p_k, const AlgebraVector& w, double t,
                          long node_count, double s_max, const FuchsianGroupModel& gamma) {
  if (t < 2.0) throw std::invalid_argument("shadow_curve: need t >= 2");
  if (node_count < 2) throw std::invalid_argument("shadow_curve: need at least 2 nodes");
  Curve out;
  out.kind = CurveKind::Shadow;
  out.direction = w;
  out.horocycle_time = t;
  const double fd_step = std::min(1e-4 / std::max(t, 1.0), s_max / 10.0);
  out.nodes.reserve(static_cast<std::size_t>(node_count));
  for (long j = 0; j < node_count; ++j) {
    const double s = s_max * static_cast<double>(j) / static_cast<double>(node_count - 1);
    const ShadowFrame fr = shadow_frame(w, t, s);
    Mat2 rep = p_k.rep * exp_algebra(kGenU, fr.j2) * exp_algebra(kGenX, fr.j1);
    detail::reduce_inplace(rep, gamma, nullptr);
    const ShadowFrame lo = shadow_frame(w, t, s - fd_step);
    const ShadowFrame hi = shadow_frame(w, t, s + fd_step);
    const double j1_dot = (hi.j1 - lo.j1) / (2.0 * fd_step);
    const double j2_dot = (hi.j2 - lo.j2) / (2.0 * fd_step);
    out.nodes.push_back({s, QuotientPoint{rep, {}},
                         AlgebraVector{0.0, j1_dot, j2_dot * std::exp(-fr.j1)}});
  }
  return out;
}

/// Distance (left-invariant metric, orthonormal frame {V,X,U}) between the true
/// sheared point and its shadow at parameter s of the window starting at p_k.
inline double shadow_distance(const QuotientPoint& p_k, const AlgebraVector& w, double t,
                              double s) {
  const ShadowFrame fr = shadow_frame(w, t, s);
  const Mat2 truth = p_k.rep * exp_algebra(w, s) * exp_algebra(kGenU, t);
  const Mat2 shadow = p_k.rep * exp_algebra(kGenU, fr.j2) * exp_algebra(kGenX, fr.j1);
  const AlgebraVector delta = log_near_identity(truth.inverse() * shadow);
  return std::sqrt(delta.v * delta.v + delta.x * delta.x + delta.u * delta.u);
}

/// Trapezoid quadrature of f against the U-component of the tangent.
/// Exactly additive over node-aligned splits.
inline double line_integral_U(const Observable& f, const Curve& curve) {
  if (curve.nodes.size() < 2) throw std::invalid_argument("line_integral_U: need >= 2 nodes");
  double acc = 0.0, comp = 0.0;
  double prev = f.eval(curve.nodes.front().point) * curve.nodes.front().tangent.u;
  for (std::size_t i = 1; i < curve.nodes.size(); ++i) {
    const double cur = f.eval(curve.nodes[i].point) * curve.nodes[i].tangent.u;
    const double term = 0.5 * (prev + cur) * (curve.nodes[i].s - curve.nodes[i - 1].s);
    const double y = term - comp;
    const double t2 = acc + y;
    comp = (t2 - acc) - y;
    acc = t2;
    prev = cur;
  }
  return acc;
}

/// Streaming variant over a sheared arc (constant tangent), for node counts too
/// large to materialize.
inline double line_integral_U_sheared(const Observable& f, const ArcSpec& spec, long node_count,
                                      const FuchsianGroupModel& gamma) {
  const double tan_u = sheared_tangent(spec.direction, spec.horocycle_time).u;
  ShearedArcWalker walk(spec, node_count, gamma);
  double acc = 0.0, comp = 0.0;
  double prev = f.eval(walk.rep());
  while (walk.advance()) {
    const double cur = f.eval(walk.rep());
    const double term = 0.5 * (prev + cur) * walk.ds();
    const double y = term - comp;
    const double t2 = acc + y;
    comp = (t2 - acc) - y;
    acc = t2;
    prev = cur;
  }
  return acc * tan_u;
}

/// Node-count policy: resolution tracks the U-speed |v| t^2 + |x| t + |u| of
/// the sheared arc against the observable scale r_b.
inline long arc_node_count(const AlgebraVector& w, double length, double t, double kappa,
                           double bump_radius) {
  const double speed =
      std::abs(w.v) * t * t + std::abs(w.x) * std::abs(t) + std::abs(w.u);
  const double n = std::ceil(kappa * length * std::max(1.0, speed) / bump_radius);
  return std::max(2L, static_cast<long>(n));
}

}  // namespace horolab
