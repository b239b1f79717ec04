#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "horolab/lattice.hpp"
#include "oracles.hpp"

using namespace horolab;

namespace {

Mat2 random_element(Rng& rng, double scale) {
  auto rv = [&] {
    return AlgebraVector{rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                         rng.uniform(-scale, scale)};
  };
  return exp_algebra(rv(), 1.0) * exp_algebra(rv(), 1.0);
}

// representatives of the same coset may differ by -I
double coset_dist(const Mat2& a, const Mat2& b) {
  return std::min(frob_dist(a, b), frob_dist(a, b * -1.0));
}

}  // namespace

TEST_CASE("mobius action basics") {
  const HPoint i{0.0, 1.0};
  CHECK(mobius(Mat2::identity(), i) == i);
  const Mat2 shift{1, 1, 0, 1};
  CHECK(std::abs(mobius(shift, i) - HPoint{1.0, 1.0}) < 1e-15);
  const Mat2 inv{0, -1, 1, 0};  // z -> -1/z
  CHECK(std::abs(mobius(inv, HPoint{0.0, 2.0}) - HPoint{0.0, 0.5}) < 1e-15);
  CHECK_THROWS_AS(mobius(inv, HPoint{0.0, 0.0}), std::domain_error);
}

TEST_CASE("hyperbolic distance: axis values and isometry invariance") {
  const HPoint i{0.0, 1.0};
  CHECK(hyp_dist(i, HPoint{0.0, std::exp(1.0)}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hyp_dist(i, HPoint{0.0, std::exp(2.0)}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(hyp_dist(i, i) == 0.0);

  Rng rng(41);
  for (int k = 0; k < 200; ++k) {
    const HPoint z{rng.uniform(-2, 2), rng.uniform(0.2, 4.0)};
    const HPoint w{rng.uniform(-2, 2), rng.uniform(0.2, 4.0)};
    const Mat2 g = random_element(rng, 1.0);
    CHECK(hyp_dist(mobius(g, z), mobius(g, w)) ==
          doctest::Approx(hyp_dist(z, w)).epsilon(1e-9));
  }
}

TEST_CASE("Bolza group: determinants, trace, validation") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  CHECK(gamma.generators.size() == 8);
  for (const auto& g : gamma.generators) {
    CHECK(std::abs(g.det() - 1.0) < 1e-12);
    CHECK(std::abs(g.a + g.d) == doctest::Approx(2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-12));
  }
  // generators come in inverse pairs
  for (std::size_t k = 0; k + 1 < gamma.generators.size(); k += 2) {
    CHECK(frob_dist(gamma.generators[k] * gamma.generators[k + 1], Mat2::identity()) < 1e-12);
  }
  CHECK_NOTHROW(gamma.validate());

  FuchsianGroupModel bad = gamma;
  bad.generators[0].a *= 1.001;  // breaks det = 1
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
}

TEST_CASE("reduction: idempotence, left invariance, boundedness") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  Rng rng(43);
  for (int k = 0; k < 100; ++k) {
    const Mat2 g = random_element(rng, 1.5);
    const QuotientPoint p = reduce(g, gamma);
    const HPoint z = mobius(p.rep, gamma.center);

    // the reduced center image lies within the octagon circumradius
    CHECK(hyp_dist(z, gamma.center) < std::acosh(3.0 + 2.0 * std::sqrt(2.0)) + 1e-6);
    CHECK(p.rep.max_abs() < 10.0);
    CHECK(std::abs(p.rep.det() - 1.0) < 1e-9);

    const QuotientPoint p2 = reduce(p.rep, gamma);
    CHECK(hyp_dist(z, mobius(p2.rep, gamma.center)) < 1e-9);

    for (const auto& gen : gamma.generators) {
      const QuotientPoint q = reduce(gen * g, gamma);
      CHECK(hyp_dist(z, mobius(q.rep, gamma.center)) < 1e-9);
    }
  }
}

TEST_CASE("reduced representatives satisfy the word-ball Dirichlet condition") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  Rng rng(47);
  for (int k = 0; k < 25; ++k) {
    const QuotientPoint p = reduce(random_element(rng, 1.5), gamma);
    CHECK(oracle::dirichlet_condition(p.rep, gamma, 3));
  }
}

TEST_CASE("quotient flow: composition and the geodesic/horocycle commutation") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  Rng rng(53);
  for (int k = 0; k < 20; ++k) {
    const QuotientPoint p = haar_sample(gamma, rng);

    // splitting the time parameter lands in the same coset
    const QuotientPoint one = quotient_flow(p, kGenU, 7.0, gamma);
    const QuotientPoint two = quotient_flow(quotient_flow(p, kGenU, 3.0, gamma), kGenU, 4.0, gamma);
    CHECK(coset_dist(one.rep, two.rep) < 1e-8);

    // p h_t g_s = p g_s h_{t e^{-s}}
    const double s = rng.uniform(-1.0, 1.0), t = rng.uniform(0.0, 5.0);
    const QuotientPoint lhs = quotient_flow(quotient_flow(p, kGenU, t, gamma), kGenX, s, gamma);
    const QuotientPoint rhs =
        quotient_flow(quotient_flow(p, kGenX, s, gamma), kGenU, t * std::exp(-s), gamma);
    CHECK(coset_dist(lhs.rep, rhs.rep) < 1e-8);

    // matches one-shot right multiplication
    const Mat2 direct = reduce(p.rep * exp_algebra(kGenU, t), gamma).rep;
    CHECK(coset_dist(direct, quotient_flow(p, kGenU, t, gamma).rep) < 1e-8);
  }
}

TEST_CASE("box sampler reproduces the 1/y^2 marginal") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  Rng rng(59);
  const long n = 100000;
  long below = 0;
  const double y_split = 0.5;
  for (long k = 0; k < n; ++k) {
    if (sample_box_point(gamma, rng).imag() < y_split) ++below;
  }
  const auto& b = gamma.bbox;
  const double expect = (1.0 / b.y_min - 1.0 / y_split) / (1.0 / b.y_min - 1.0 / b.y_max);
  const double got = static_cast<double>(below) / static_cast<double>(n);
  CHECK(std::abs(got - expect) < 4.0 * std::sqrt(expect * (1 - expect) / n) + 1e-6);
}

TEST_CASE("acceptance rate of the Haar sampler recovers the Gauss-Bonnet area") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  Rng rng(61);
  const long n = 200000;
  long accepted = 0;
  for (long k = 0; k < n; ++k) {
    Mat2 probe = frame_at(sample_box_point(gamma, rng));
    if (detail::reduce_inplace(probe, gamma, nullptr) == 0) ++accepted;
  }
  const double area =
      gamma.bbox.hyp_area() * static_cast<double>(accepted) / static_cast<double>(n);
  CHECK(area == doctest::Approx(4.0 * M_PI).epsilon(0.02));
}

TEST_CASE("frame angle of Haar samples is uniform (chi-squared, 16 bins)") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  Rng rng(67);
  const int bins = 16;
  const long n = 32000;
  long count[16] = {};
  for (long k = 0; k < n; ++k) {
    const QuotientPoint p = haar_sample(gamma, rng);
    const HPoint z = mobius(p.rep, HPoint{0, 1});
    const Mat2 r = frame_at(z).inverse() * p.rep;
    double theta = std::atan2(r.b, r.a);
    if (theta < 0) theta += 2.0 * M_PI;
    ++count[std::min(bins - 1, static_cast<int>(theta / (2.0 * M_PI) * bins))];
  }
  const double expect = static_cast<double>(n) / bins;
  double chi2 = 0.0;
  for (long c : count) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 60.0);  // df = 15, far beyond the 1e-5 quantile
}

TEST_CASE("word ball sizes and closure under inversion") {
  const FuchsianGroupModel gamma = FuchsianGroupModel::bolza();
  const auto b0 = word_ball(gamma, 0);
  const auto b1 = word_ball(gamma, 1);
  CHECK(b0.size() == 1);
  CHECK(b1.size() == 9);
  const auto b2 = word_ball(gamma, 2);
  CHECK(b2.size() > b1.size());
  // every element's inverse appears (up to sign)
  for (const auto& g : b2) {
    bool found = false;
    for (const auto& h : b2) {
      if (frob_dist(g * h, Mat2::identity()) < 1e-8 ||
          frob_dist(g * h, Mat2::identity() * -1.0) < 1e-8) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}
