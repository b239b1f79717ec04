#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "horolab/arcs.hpp"
#include "horolab/parallel.hpp"

namespace horolab {

enum class Precision { Double, DoubleDouble };

namespace detail {

/// Compensated accumulator; the double-double mode keeps the full error term
/// of every addition for validation runs.
class Accumulator {
 public:
  explicit Accumulator(Precision mode) : dd_(mode == Precision::DoubleDouble) {}

  void add(double x) {
    if (dd_) {
      // two-sum into (hi, lo)
      const double s = hi_ + x;
      const double bp = s - hi_;
      lo_ += (hi_ - (s - bp)) + (x - bp);
      hi_ = s;
    } else {
      // Neumaier
      const double s = hi_ + x;
      lo_ += std::abs(hi_) >= std::abs(x) ? (hi_ - s) + x : (x - s) + hi_;
      hi_ = s;
    }
  }

  double value() const { return hi_ + lo_; }

 private:
  bool dd_;
  double hi_ = 0.0;
  double lo_ = 0.0;
};

}  // namespace detail

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // Richardson probe |fine - coarse|
  long nodes = 0;               // coarse node count n (fine grid has 2n - 1)
  bool converged = true;
};

/// I(t) = integral over s in [0, S] of f(h_t(p exp(sW))), composite trapezoid
/// on the policy grid, with one coarse/fine refinement as the error probe.
inline QuadratureResult pushforward_integral(const Observable& f, const QuotientPoint& p,
                                             const AlgebraVector& w, double length, double t,
                                             double kappa, const FuchsianGroupModel& gamma,
                                             Precision mode = Precision::Double,
                                             long node_override = 0) {
  const long n = node_override > 0
                     ? node_override
                     : arc_node_count(w, length, t, kappa, f.bump.radius);
  const long fine_n = 2 * n - 1;
  ArcSpec spec{p, w, length, length, t};
  ShearedArcWalker walk(spec, fine_n, gamma);
  const double h = walk.ds();

  detail::Accumulator fine(mode), coarse(mode);
  long j = 0;
  do {
    const double v = f.eval(walk.rep());
    const bool endpoint = (j == 0 || j == fine_n - 1);
    fine.add(endpoint ? 0.5 * v : v);
    if (j % 2 == 0) coarse.add(endpoint ? 0.5 * v : v);
    ++j;
  } while (walk.advance());

  QuadratureResult out;
  out.value = fine.value() * h;
  out.error_estimate = std::abs(out.value - coarse.value() * 2.0 * h);
  out.nodes = n;
  const double scale = std::max(f.sup_hat, std::abs(f.bump.amplitude));
  out.converged = out.error_estimate <= 1e-3 * std::max(scale, 1e-300) * length;
  return out;
}

/// Measured |I(t)| against t, aggregated by RMS over Haar-random base points.
struct DecaySeries {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> values;       // [t][base], signed I(t)
  std::vector<std::vector<double>> quad_errors;  // [t][base]
  std::vector<long> nodes;                       // per t (coarse count)
  std::vector<double> rms, rms_se, quad_error;   // aggregates per t
  AlgebraVector direction;
  double length = 1.0;
  double kappa = 20.0;
  std::uint64_t seed = 0;
  std::string observable_id;
  bool any_nonconverged = false;
};

inline DecaySeries run_decay_experiment(const Observable& f, const AlgebraVector& w, double length,
                                        const std::vector<double>& t_grid, int n_base,
                                        std::uint64_t seed, const FuchsianGroupModel& gamma,
                                        double kappa = 20.0, int workers = 1,
                                        Precision mode = Precision::Double) {
  if (n_base < 1) throw std::invalid_argument("run_decay_experiment: need base points");
  DecaySeries series;
  series.t_grid = t_grid;
  series.direction = w;
  series.length = length;
  series.kappa = kappa;
  series.seed = seed;

  std::vector<QuotientPoint> bases;
  bases.reserve(static_cast<std::size_t>(n_base));
  for (int i = 0; i < n_base; ++i) {
    Rng rng = Rng::stream(seed, /*tag=*/0xba5e, static_cast<std::uint64_t>(i));
    bases.push_back(haar_sample(gamma, rng));
  }

  const std::size_t nt = t_grid.size();
  const std::size_t nb = static_cast<std::size_t>(n_base);
  series.values.assign(nt, std::vector<double>(nb, 0.0));
  series.quad_errors.assign(nt, std::vector<double>(nb, 0.0));
  series.nodes.assign(nt, 0);

  parallel_for(nt * nb, workers, [&](std::size_t task) {
    const std::size_t ti = task / nb;
    const std::size_t bi = task % nb;
    const QuadratureResult q =
        pushforward_integral(f, bases[bi], w, length, t_grid[ti], kappa, gamma, mode);
    series.values[ti][bi] = q.value;
    series.quad_errors[ti][bi] = q.error_estimate;
    series.nodes[ti] = q.nodes;
    if (!q.converged) series.any_nonconverged = true;
  });

  for (std::size_t ti = 0; ti < nt; ++ti) {
    double mean_sq = 0.0, mean_q4 = 0.0, qmax = 0.0;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const double v = series.values[ti][bi];
      mean_sq += v * v;
      mean_q4 += v * v * v * v;
      qmax = std::max(qmax, series.quad_errors[ti][bi]);
    }
    mean_sq /= static_cast<double>(nb);
    mean_q4 /= static_cast<double>(nb);
    const double rms = std::sqrt(mean_sq);
    const double var_sq = std::max(0.0, mean_q4 - mean_sq * mean_sq);
    series.rms.push_back(rms);
    series.rms_se.push_back(rms > 0.0 ? std::sqrt(var_sq / static_cast<double>(nb)) / (2.0 * rms)
                                      : 0.0);
    series.quad_error.push_back(qmax);
  }
  return series;
}

enum class DecayModel { PurePower, PowerTimesLog };

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;  // log prefactor
  double log_coeff = 0.0;  // coefficient of log log t (corrected model)
  bool log_correction = false;
  double residual_rms = 0.0;
  int points_used = 0;
};

/// Weighted least squares of log y against log t (and log log t for the
/// corrected model). Entries below the noise floor (10x quadrature error) and
/// nonpositive entries are excluded.
inline FitResult fit_powerlaw(const std::vector<double>& ts, const std::vector<double>& ys,
                              const std::vector<double>& ses, const std::vector<double>& floors,
                              DecayModel model) {
  std::vector<double> lt, ly, wgt, llt;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ys[i] > 0.0)) continue;
    if (i < floors.size() && ys[i] < 10.0 * floors[i]) continue;
    lt.push_back(std::log(ts[i]));
    llt.push_back(std::log(std::log(ts[i])));
    ly.push_back(std::log(ys[i]));
    const double se_log = i < ses.size() && ses[i] > 0.0 ? ses[i] / ys[i] : 1.0;
    wgt.push_back(1.0 / (se_log * se_log + 1e-12));
  }
  const int dim = model == DecayModel::PowerTimesLog ? 3 : 2;
  if (static_cast<int>(lt.size()) < std::max(5, dim)) {
    throw std::runtime_error("fit_powerlaw: fewer than 5 usable entries");
  }
  // normal equations
  double a[3][3] = {};
  double b[3] = {};
  for (std::size_t i = 0; i < lt.size(); ++i) {
    const double row[3] = {1.0, lt[i], llt[i]};
    for (int r = 0; r < dim; ++r) {
      b[r] += wgt[i] * row[r] * ly[i];
      for (int c = 0; c < dim; ++c) a[r][c] += wgt[i] * row[r] * row[c];
    }
  }
  // Gaussian elimination with partial pivoting
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < dim; ++col) {
    int piv = col;
    for (int r = col + 1; r < dim; ++r) {
      if (std::abs(a[perm[r]][col]) > std::abs(a[perm[piv]][col])) piv = r;
    }
    std::swap(perm[col], perm[piv]);
    const double diag = a[perm[col]][col];
    if (std::abs(diag) < 1e-14) throw std::runtime_error("fit_powerlaw: singular system");
    for (int r = col + 1; r < dim; ++r) {
      const double factor = a[perm[r]][col] / diag;
      for (int c = col; c < dim; ++c) a[perm[r]][c] -= factor * a[perm[col]][c];
      b[perm[r]] -= factor * b[perm[col]];
    }
  }
  double coef[3] = {};
  for (int r = dim - 1; r >= 0; --r) {
    double s = b[perm[r]];
    for (int c = r + 1; c < dim; ++c) s -= a[perm[r]][c] * coef[c];
    coef[r] = s / a[perm[r]][r];
  }

  FitResult fit;
  fit.intercept = coef[0];
  fit.slope = coef[1];
  fit.log_coeff = dim == 3 ? coef[2] : 0.0;
  fit.log_correction = dim == 3;
  fit.points_used = static_cast<int>(lt.size());
  double rss = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    const double pred = coef[0] + coef[1] * lt[i] + (dim == 3 ? coef[2] * llt[i] : 0.0);
    rss += (ly[i] - pred) * (ly[i] - pred);
  }
  fit.residual_rms = std::sqrt(rss / static_cast<double>(lt.size()));
  return fit;
}

inline FitResult fit_decay(const DecaySeries& series, DecayModel model) {
  return fit_powerlaw(series.t_grid, series.rms, series.rms_se, series.quad_error, model);
}

struct MixingEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo correlation <f o h_t, g> for centered observables.
inline MixingEstimate mixing_correlation(const Observable& f, const Observable& g, double t,
                                         long n_mc, Rng& rng, const FuchsianGroupModel& gamma) {
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n_mc; ++i) {
    const QuotientPoint p = haar_sample(gamma, rng);
    const double v = f.eval(quotient_flow(p, kGenU, t, gamma)) * g.eval(p);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(n_mc);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n_mc) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(n_mc))};
}

/// Low-variance estimator of <f o h_t, g>: for each Haar base point the
/// point product is replaced by its trapezoid average along the unstable
/// arc s -> p exp(sV), exact in expectation by Haar right-invariance. The
/// product decorrelates in s on the shearing scale radius/t^2, so one arc
/// contributes ~ sigma t^2 / radius independent samples; node counts are
/// capped accordingly and the remaining budget goes into fresh arcs.
inline MixingEstimate sheared_correlation(const Observable& f, const Observable& g, double t,
                                          double sigma, double node_budget, std::uint64_t seed,
                                          const FuchsianGroupModel& gamma) {
  const double radius = std::max(f.bump.radius, 1e-3);
  const long cap = static_cast<long>(sigma * t * t / radius) + 1;
  const long s_nodes = std::min<long>(32769, std::max<long>(17, cap));
  const long n_arcs = std::max<long>(48, static_cast<long>(node_budget / static_cast<double>(s_nodes)));
  Rng rng = Rng::stream(seed, /*tag=*/0x5c02, static_cast<std::uint64_t>(t * 1024));
  const double ds = sigma / static_cast<double>(s_nodes - 1);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n_arcs; ++i) {
    const QuotientPoint p = haar_sample(gamma, rng);
    ArcSpec spec{p, kGenV, sigma, sigma, t};
    ShearedArcWalker walk(spec, s_nodes, gamma);  // nodes p exp(sV) exp(tU)
    QuotientPoint q = p;                          // nodes p exp(sV)
    double b = 0.0;
    long j = 0;
    do {
      if (j > 0) q = quotient_flow(q, kGenV, ds, gamma);
      const double term = f.eval(walk.rep()) * g.eval(q);
      b += (j == 0 || j == s_nodes - 1) ? 0.5 * term : term;
      ++j;
    } while (walk.advance());
    b *= ds / sigma;
    sum += b;
    sum_sq += b * b;
  }
  const double mean = sum / static_cast<double>(n_arcs);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n_arcs) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(n_arcs))};
}

/// Running max of |integral over [0, S]| of f o h_t o h^u_s (p) over S <= sigma.
inline double sup_partial_integral(const Observable& f, const QuotientPoint& p, double sigma,
                                   double t, double kappa, const FuchsianGroupModel& gamma) {
  const long n = arc_node_count(kGenV, sigma, t, kappa, f.bump.radius);
  ArcSpec spec{p, kGenV, sigma, sigma, t};
  ShearedArcWalker walk(spec, n, gamma);
  const double h = walk.ds();
  double acc = 0.0, comp = 0.0, sup = 0.0;
  double prev = f.eval(walk.rep());
  while (walk.advance()) {
    const double cur = f.eval(walk.rep());
    const double term = 0.5 * (prev + cur) * h;
    const double y = term - comp;
    const double t2 = acc + y;
    comp = (t2 - acc) - y;
    acc = t2;
    prev = cur;
    sup = std::max(sup, std::abs(acc));
  }
  return sup;
}

struct ShearingReport {
  double t = 0.0;
  double corr = 0.0, corr_se = 0.0;        // <f o h_t, g> (plain estimator)
  double sheared = 0.0, sheared_se = 0.0;  // (1/sigma) int <f o h_t o h^u_s, g o h^u_s> ds
  double diff = 0.0, diff_se = 0.0;        // paired difference, zero-mean under Haar invariance
  bool identity_ok = false;
  double sup_arc = 0.0;
  double g_l2 = 0.0, vg_l2 = 0.0;
  double bound_rhs = 0.0;
  bool bound_ok = false;
};

/// Verifies the Haar-invariance identity behind mixing-via-shearing and the
/// resulting correlation bound via the sup of sheared-arc integrals.
inline ShearingReport shearing_identity_check(const Observable& f, const Observable& g, double t,
                                              double sigma, long n_mc, std::uint64_t seed,
                                              const FuchsianGroupModel& gamma, int s_nodes = 9,
                                              int n_sup_points = 8, double kappa = 20.0) {
  ShearingReport rep;
  rep.t = t;
  Rng rng = Rng::stream(seed, /*tag=*/0x51d3, static_cast<std::uint64_t>(t * 1024));

  // paired samples: A = plain product, B = trapezoid over the unstable shear
  double sa = 0.0, saa = 0.0, sb = 0.0, sbb = 0.0, sd = 0.0, sdd = 0.0;
  const double ds = sigma / static_cast<double>(s_nodes - 1);
  for (long i = 0; i < n_mc; ++i) {
    const QuotientPoint p = haar_sample(gamma, rng);
    const double a_val = f.eval(quotient_flow(p, kGenU, t, gamma)) * g.eval(p);

    ArcSpec spec{p, kGenV, sigma, sigma, t};
    ShearedArcWalker walk(spec, s_nodes, gamma);  // nodes p exp(sV) exp(tU)
    QuotientPoint q = p;                          // nodes p exp(sV)
    double b_val = 0.0;
    long j = 0;
    do {
      if (j > 0) q = quotient_flow(q, kGenV, ds, gamma);
      const double term = f.eval(walk.rep()) * g.eval(q);
      b_val += (j == 0 || j == s_nodes - 1) ? 0.5 * term : term;
      ++j;
    } while (walk.advance());
    b_val *= ds / sigma;

    const double d_val = a_val - b_val;
    sa += a_val;
    saa += a_val * a_val;
    sb += b_val;
    sbb += b_val * b_val;
    sd += d_val;
    sdd += d_val * d_val;
  }
  const double n = static_cast<double>(n_mc);
  rep.corr = sa / n;
  rep.corr_se = std::sqrt(std::max(0.0, saa / n - rep.corr * rep.corr) / n);
  rep.sheared = sb / n;
  rep.sheared_se = std::sqrt(std::max(0.0, sbb / n - rep.sheared * rep.sheared) / n);
  rep.diff = sd / n;
  rep.diff_se = std::sqrt(std::max(0.0, sdd / n - rep.diff * rep.diff) / n);
  rep.identity_ok = std::abs(rep.diff) <= 3.0 * std::max(rep.diff_se, 1e-300);

  // norms of g and Vg (central difference along the unstable flow)
  Rng nrng = Rng::stream(seed, /*tag=*/0x2042, static_cast<std::uint64_t>(t * 1024));
  const long n_norm = std::max(n_mc, 20000L);
  const double hv = 1e-3;
  double sg = 0.0, svg = 0.0;
  for (long i = 0; i < n_norm; ++i) {
    const QuotientPoint p = haar_sample(gamma, nrng);
    const double gv = g.eval(p);
    const double dgv = (g.eval(p.rep * exp_algebra(kGenV, hv)) -
                        g.eval(p.rep * exp_algebra(kGenV, -hv))) /
                       (2.0 * hv);
    sg += gv * gv;
    svg += dgv * dgv;
  }
  rep.g_l2 = std::sqrt(sg / static_cast<double>(n_norm));
  rep.vg_l2 = std::sqrt(svg / static_cast<double>(n_norm));

  double sup = 0.0;
  for (int i = 0; i < n_sup_points; ++i) {
    Rng srng = Rng::stream(seed, /*tag=*/0x50b1, static_cast<std::uint64_t>(i));
    sup = std::max(sup, sup_partial_integral(f, haar_sample(gamma, srng), sigma, t, kappa, gamma));
  }
  rep.sup_arc = sup;
  rep.bound_rhs = (rep.g_l2 + rep.vg_l2) / sigma * sup;
  rep.bound_ok = std::abs(rep.corr) <= rep.bound_rhs + 3.0 * rep.corr_se;
  return rep;
}

}  // namespace horolab
