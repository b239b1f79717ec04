// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and parameter choices are pinned here on purpose; a
// change that moves a number out of its window should fail loudly.

#include <chrono>
#include <cstdio>
#include <vector>

#include "horolab/experiments.hpp"
#include "horolab/io.hpp"
#include "horolab/verify.hpp"

using namespace horolab;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %d (%s): %s  [%s]\n", index, name, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

constexpr std::uint64_t kSeed = 20240817;

Observable centered_bump(const FuchsianGroupModel& gamma, HPoint center, std::uint64_t tag) {
  Observable f = k_invariant_observable(center, 0.6, 6, 1.0, gamma, kSeed + tag);
  Rng rng = Rng::stream(kSeed, 0xa060, tag);
  return make_zero_average(f, 2000000, rng, gamma);
}

}  // namespace

int main() {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();

  // 1: closed-form identities at solver precision, under 10 seconds
  {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    double worst = 0.0;
    for (const SuiteResult& s :
         {verify_exponential(kSeed), verify_derivative(kSeed), verify_adjoint(kSeed),
          verify_key_lemma(kSeed), verify_shadow(kSeed)}) {
      pass = pass && s.pass;
      worst = std::max(worst, s.max_residual / s.tolerance);
    }
    const double dt = seconds_since(start);
    pass = pass && dt < 10.0;
    report(1, "identity suites", pass, fmt("worst residual %.2f of tolerance, %.1f s", worst, dt));
  }

  // 2: lattice reduction invariants plus the Gauss-Bonnet area 4 pi within 2%
  {
    const auto start = std::chrono::steady_clock::now();
    const SuiteResult lat = verify_lattice(gamma, kSeed);
    Rng rng = Rng::stream(kSeed, 0xa43a);
    const long n = 1000000;
    long accepted = 0;
    for (long k = 0; k < n; ++k) {
      Mat2 probe = frame_at(sample_box_point(gamma, rng));
      if (detail::reduce_inplace(probe, gamma, nullptr) == 0) ++accepted;
    }
    const double area = gamma.bbox.hyp_area() * static_cast<double>(accepted) / n;
    const double rel = std::abs(area - 4.0 * M_PI) / (4.0 * M_PI);
    const double dt = seconds_since(start);
    const bool pass = lat.pass && rel < 0.02 && dt < 60.0;
    report(2, "lattice and area", pass, fmt("area %.4f (4pi off by %.3f%%), %.1f s", area, rel * 100.0, dt));
  }

  const Observable f = centered_bump(gamma, HPoint{0.25, 1.1}, 1);

  // 3: two independent quadrature routes agree across 18 (point, direction, t) configs
  {
    bool pass = true;
    double worst = 0.0;
    const std::vector<AlgebraVector> dirs{
        kGenV, normalize_direction(AlgebraVector{1.0, 0.5, -0.3}, 1, 1).direction, kGenX};
    int cfg = 0;
    for (double t : {4.0, 32.0, 256.0}) {
      for (const auto& w : dirs) {
        for (int b = 0; b < 2; ++b, ++cfg) {
          Rng rng = Rng::stream(kSeed, 0xc0f1, static_cast<std::uint64_t>(cfg));
          const QuotientPoint p = haar_sample(gamma, rng);
          const double length = 0.5;
          const QuadratureResult q =
              pushforward_integral(f, p, w, length, t, 20.0, gamma);
          const double tan_u = sheared_tangent(w, t).u;
          const ArcSpec spec{p, w, length, length, t};
          const double other =
              line_integral_U_sheared(f, spec, 2 * (2 * q.nodes - 1) + 17, gamma) / tan_u;
          const double tol = 3.0 * q.error_estimate + 1e-9;
          const double gap = std::abs(q.value - other);
          worst = std::max(worst, gap / tol);
          pass = pass && gap <= tol && q.converged;
        }
      }
    }
    report(3, "quadrature consistency", pass, fmt("worst gap %.2f of tolerance over %g configs", worst, cfg));
  }

  // 4: shadowing distance decays essentially like 1/t
  {
    const AlgebraVector w = normalize_direction(AlgebraVector{1.0, 0.3, 0.2}, 1, 1).direction;
    const double ell = ell_constant(w, 1.0);
    std::vector<double> ts, ys;
    for (double t : {4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) {
      double worst = 0.0;
      for (int b = 0; b < 3; ++b) {
        Rng rng = Rng::stream(kSeed, 0x54ad, static_cast<std::uint64_t>(t) * 8 + b);
        const QuotientPoint p = haar_sample(gamma, rng);
        const auto parts = partition_arc(ArcSpec{p, w, 1.0, 1.0, t}, ell, gamma);
        const std::size_t stride = std::max<std::size_t>(1, parts.size() / 6);
        for (std::size_t k = 0; k < parts.size(); k += stride) {
          for (int j = 1; j <= 12; ++j) {
            worst = std::max(worst, shadow_distance(parts[k], w, t, j / (12.0 * ell * t)));
          }
        }
      }
      ts.push_back(t);
      ys.push_back(worst);
    }
    const FitResult fit = fit_powerlaw(ts, ys, std::vector<double>(ts.size(), 0.0),
                                       std::vector<double>(ts.size(), 0.0),
                                       DecayModel::PurePower);
    const bool pass = fit.slope <= -0.9;
    report(4, "shadowing rate", pass, fmt("slope %.3f (need <= -0.90)", fit.slope));
  }

  // 5: equidistribution rates along X and V arcs separate as predicted
  DecaySeries series_x, series_v;
  {
    const std::vector<double> ts{2, 4, 8, 16, 32, 64, 128, 256, 512};
    series_x = run_decay_experiment(f, kGenX, 1.0, ts, 8, kSeed, gamma);
    series_v = run_decay_experiment(f, kGenV, 1.0, ts, 8, kSeed, gamma);
    const FitResult fx = fit_decay(series_x, DecayModel::PurePower);
    const FitResult fv_pure = fit_decay(series_v, DecayModel::PurePower);
    const FitResult fv = fit_decay(series_v, DecayModel::PowerTimesLog);
    const bool window_x = fx.slope >= -0.75 && fx.slope <= -0.35;
    const bool window_v = fv.slope <= -0.8;
    const bool separated = fx.slope - fv_pure.slope >= 0.25;
    const bool pass = window_x && window_v && separated && !series_x.any_nonconverged &&
                      !series_v.any_nonconverged;
    report(5, "equidistribution rates", pass,
           fmt("slope X %.3f in [-0.75,-0.35], slope V %.3f <= -0.80 (log-corrected), gap %.3f >= 0.25",
               fx.slope, fv.slope, fx.slope - fv_pure.slope));
  }

  // 6: mixing via shearing: identity within 3 se, bound everywhere, rate
  {
    // larger overlapping bumps keep the correlation resolvable out to t = 256
    auto mixing_bump = [&](HPoint center, std::uint64_t tag) {
      Observable b = k_invariant_observable(center, 0.8, 6, 1.0, gamma, kSeed + tag);
      Rng rng = Rng::stream(kSeed, 0xa060, tag);
      return make_zero_average(b, 2000000, rng, gamma);
    };
    const Observable fm = mixing_bump(HPoint{0.2, 1.1}, 3);
    const Observable gm = mixing_bump(HPoint{0.1, 1.05}, 4);

    bool identity = true, bound = true;
    for (double t : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) {
      const ShearingReport rep = shearing_identity_check(fm, gm, t, 1.0, 60000, kSeed, gamma);
      identity = identity && rep.identity_ok;
      bound = bound && rep.bound_ok;
      std::printf("  mixing t=%-6g corr %+.3e +- %.1e identity %s bound %s\n", t, rep.corr,
                  rep.corr_se, rep.identity_ok ? "ok" : "FAIL", rep.bound_ok ? "ok" : "FAIL");
      std::fflush(stdout);
    }

    // the correlation oscillates under its decaying envelope, so the rate is
    // fitted on the noise-debiased RMS over octave windows of the arc-averaged
    // estimator, which resolves the signal out to t = 256
    std::vector<double> ts, ys, ses, floors;
    for (int k = 0; k < 7; ++k) {
      const double t0 = 2.0 * static_cast<double>(1 << k);
      const int subs = (k == 6) ? 5 : 4;  // last window reaches t = 256 exactly
      double sum_sq = 0.0, var_rms2 = 0.0;
      for (int j = 0; j < subs; ++j) {
        const double tau = t0 * std::pow(2.0, j / 4.0);
        const double budget = std::max(2e6, 2.5e5 * tau);
        const MixingEstimate est = sheared_correlation(fm, gm, tau, 1.0, budget, kSeed, gamma);
        sum_sq += est.value * est.value - est.stderr_ * est.stderr_;
        var_rms2 += 4.0 * est.value * est.value * est.stderr_ * est.stderr_ +
                    2.0 * std::pow(est.stderr_, 4);
      }
      const double m = static_cast<double>(subs);
      const double rms = std::sqrt(std::max(sum_sq / m, 0.0));
      const double se_rms = std::sqrt(var_rms2) / m / (2.0 * std::max(rms, 1e-12));
      ts.push_back(t0 * std::pow(2.0, (subs - 1) / 8.0));
      ys.push_back(rms);
      ses.push_back(se_rms);
      floors.push_back(se_rms / 2.0);  // drop windows below 5 standard errors
      std::printf("  mixing window [%g,%g] rms %.3e +- %.1e\n", t0,
                  t0 * std::pow(2.0, (subs - 1) / 4.0), rms, se_rms);
      std::fflush(stdout);
    }

    bool pass = identity && bound;
    double slope = 0.0;
    try {
      const FitResult fit = fit_powerlaw(ts, ys, ses, floors, DecayModel::PowerTimesLog);
      slope = fit.slope;
      pass = pass && fit.slope <= -0.8;
    } catch (const std::exception&) {
      pass = false;
    }
    report(6, "mixing via shearing", pass,
           fmt("slope %.3f <= -0.80 (log-corrected), identity ok %.0f, bound ok %.0f", slope,
               identity ? 1.0 : 0.0, bound ? 1.0 : 0.0));
  }

  // 7: byte determinism of the experiment outputs, independent of worker count
  {
    const std::vector<double> ts{2, 4, 8, 16, 32};
    const DecaySeries a = run_decay_experiment(f, kGenX, 1.0, ts, 3, kSeed, gamma, 20.0, 1);
    const DecaySeries b = run_decay_experiment(f, kGenX, 1.0, ts, 3, kSeed, gamma, 20.0, 1);
    const DecaySeries c = run_decay_experiment(f, kGenX, 1.0, ts, 3, kSeed, gamma, 20.0, 3);
    const std::string csv_a = decay_csv(a), csv_b = decay_csv(b), csv_c = decay_csv(c);

    Rng r1 = Rng::stream(kSeed, 7, 7), r2 = Rng::stream(kSeed, 7, 7);
    const MixingEstimate m1 = mixing_correlation(f, f, 8.0, 5000, r1, gamma);
    const MixingEstimate m2 = mixing_correlation(f, f, 8.0, 5000, r2, gamma);

    const bool pass = csv_a == csv_b && csv_a == csv_c && m1.value == m2.value;
    report(7, "byte determinism", pass,
           fmt("csv identical across reruns/workers %.0f, mixing bit-equal %.0f",
               csv_a == csv_c ? 1.0 : 0.0, m1.value == m2.value ? 1.0 : 0.0));
  }

  return failures == 0 ? 0 : 1;
}
