#include <doctest.h>

#include <cmath>

#include "applications/phase_retrieval.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"
#include "priors_channels/bayes.hpp"
#include "priors_channels/channel.hpp"
#include "priors_channels/prior.hpp"
#include "priors_channels/score.hpp"

using namespace gfomlb;

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * M_PI);

double phi(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

// Trapezoid of f over [lo, hi] with `steps` intervals.
template <class F>
double trapezoid(F f, double lo, double hi, int steps) {
  const double h = (hi - lo) / steps;
  double acc = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < steps; ++i) acc += f(lo + i * h);
  return acc * h;
}

JointPrior random_scalar_prior(const CounterRng& rng, std::uint64_t at, int atoms) {
  std::vector<PriorAtom> pa;
  std::vector<double> w;
  for (int k = 0; k < atoms; ++k) {
    pa.push_back({Vec::Constant(1, 4.0 * rng.uniform(at + 2 * k) - 2.0), Vec::Zero(1)});
    w.push_back(0.05 + rng.uniform(at + 2 * k + 1));
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return JointPrior(1, pa, w);
}

}  // namespace

TEST_CASE("three-point builder moments and JSON round trip") {
  const JointPrior p = JointPrior::three_point(2.0, 0.25, 1.5);
  CHECK(p.dim() == 1);
  CHECK(p.mean()(0) == doctest::Approx(0.0));
  CHECK(p.second_moment_trace() == doctest::Approx(0.25 * 4.0 * 2.25));
  const JointPrior back = JointPrior::from_json(p.to_json());
  CHECK(back.second_moment_trace() == doctest::Approx(p.second_moment_trace()));
  CHECK(back.atoms().size() == p.atoms().size());

  const JointPrior built = JointPrior::from_json({{"kind", "three_point"}, {"mu", 2.0}, {"eps", 0.25}});
  CHECK(built.second_moment_trace() == doctest::Approx(1.0));
}

TEST_CASE("prior JSON errors name the offending field") {
  CHECK_THROWS_AS(JointPrior::from_json({{"kind", "laplace"}}), ConfigError);
  CHECK_THROWS_AS(JointPrior::from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(JointPrior::from_json({{"dim", 1}, {"atoms", {{{1.0}, {0.0}}}}}), ConfigError);
  try {
    JointPrior::from_json({{"dim", 1}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("prior.atoms") != std::string::npos);
  }
}

TEST_CASE("sampling reproduces the atom weights") {
  const JointPrior p = JointPrior::three_point(1.0, 0.3);
  Mat theta, v;
  p.sample(9, 1, 200000, theta, v);
  REQUIRE(theta.rows() == 200000);
  const double zero_share = (theta.array() == 0.0).cast<double>().mean();
  CHECK(std::abs(zero_share - 0.7) < 5.0 * std::sqrt(0.21 / 200000));
  Mat theta2, v2;
  p.sample(9, 1, 200000, theta2, v2);
  CHECK(theta == theta2);
}

TEST_CASE("mmse of a symmetric two-point prior against a refined-grid oracle") {
  const JointPrior p = JointPrior::symmetric_two_point(1.0);
  for (double snr : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    // Nishimori: mmse = 1 − E tanh(snr + √snr G).
    const double oracle =
        1.0 - trapezoid([&](double g) { return phi(g) * std::tanh(snr + std::sqrt(snr) * g); },
                        -12.0, 12.0, 24000);
    CHECK(mmse_scalar(p, 1.0 / snr) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("mmse edge cases") {
  const JointPrior p = JointPrior::symmetric_two_point(1.5);
  CHECK(mmse_scalar(p, kInf) == doctest::Approx(2.25));
  CHECK_THROWS_AS(mmse_scalar(p, 0.0), DomainError);
  CHECK_THROWS_AS(mmse_scalar(p, -1.0), DomainError);
  CHECK(mmse_scalar(JointPrior::point_mass(Vec::Constant(1, 3.0)), 0.7) == doctest::Approx(0.0));
  // Discretized Gaussian prior tracks the linear-estimator formula.
  const JointPrior g = JointPrior::gaussian(41);
  for (double tau2 : {0.25, 1.0, 4.0}) {
    CHECK(mmse_scalar(g, tau2) == doctest::Approx(tau2 / (1.0 + tau2)).epsilon(1e-6));
  }
}

TEST_CASE("posterior mean is monotone in the observation (random priors)") {
  const CounterRng rng(77, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const JointPrior p = random_scalar_prior(rng, 100 * trial, 2 + trial % 5);
    const double q = 0.1 + 3.0 * rng.uniform(100 * trial + 50);
    double prev = -1e300;
    for (double y = -8.0; y <= 8.0; y += 0.05) {
      const double m = posterior_mean(p, Vec::Constant(1, y), Mat::Constant(1, 1, q), Vec::Zero(1))(0);
      REQUIRE(m >= prev - 1e-12);
      prev = m;
    }
  }
}

TEST_CASE("second-moment map is PSD, bounded and monotone (random priors)") {
  const CounterRng rng(78, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const JointPrior p = random_scalar_prior(rng, 100 * trial, 2 + trial % 4);
    const double total = p.second_moment_trace();
    double prev = -1.0;
    for (double q : {0.0, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0}) {
      const double v = v_second_moment(p, Mat::Constant(1, 1, q))(0, 0);
      const double m0 = p.mean()(0);
      CHECK(v >= m0 * m0 - 1e-10);  // at Q = 0 the posterior mean is the prior mean
      CHECK(v <= total + 1e-10);
      CHECK(v >= prev - 1e-10);
      prev = v;
    }
  }
}

TEST_CASE("two-dimensional map factorizes for independent coordinates") {
  // Product of two scalar priors; with diagonal Q the map is diagonal.
  const JointPrior a = JointPrior::symmetric_two_point(1.0);
  const JointPrior b = JointPrior::three_point(2.0, 0.3);
  std::vector<PriorAtom> atoms;
  std::vector<double> w;
  for (std::size_t i = 0; i < a.atoms().size(); ++i) {
    for (std::size_t j = 0; j < b.atoms().size(); ++j) {
      Vec th(2);
      th << a.atoms()[i].theta(0), b.atoms()[j].theta(0);
      atoms.push_back({th, Vec::Zero(2)});
      w.push_back(a.weights()[i] * b.weights()[j]);
    }
  }
  const JointPrior prod(2, atoms, w);
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = 0.7;
  q(1, 1) = 1.9;
  const Mat v = v_second_moment(prod, q);
  CHECK(v(0, 0) == doctest::Approx(v_second_moment(a, Mat::Constant(1, 1, 0.7))(0, 0)).epsilon(1e-8));
  CHECK(v(1, 1) == doctest::Approx(v_second_moment(b, Mat::Constant(1, 1, 1.9))(0, 0)).epsilon(1e-8));
  CHECK(std::abs(v(0, 1)) < 1e-10);
  const auto mom = gaussian_observation_moments(prod, q);
  CHECK(max_abs(mom.mean_second_moment + mom.error_covariance - prod.second_moment()) < 1e-9);
}

TEST_CASE("Gaussian side information adds to the observation precision") {
  // With a Gaussian side channel of SNR s, V(Q) equals the side-free map at Q + s.
  const double s = 0.6;
  const JointPrior with_side = JointPrior::three_point(1.5, 0.4, 1.0, s);
  const JointPrior plain = JointPrior::three_point(1.5, 0.4, 1.0, 0.0);
  for (double q : {0.0, 0.5, 2.0}) {
    CHECK(v_second_moment(with_side, Mat::Constant(1, 1, q))(0, 0) ==
          doctest::Approx(v_second_moment(plain, Mat::Constant(1, 1, q + s))(0, 0)).epsilon(1e-8));
  }
}

TEST_CASE("channel densities integrate to one") {
  for (const auto& ch : {linear_gauss_channel(0.3), abs_gauss_channel(0.2), uninformative_channel(1.0)}) {
    for (double x : {-2.0, -0.3, 0.0, 1.1}) {
      const double mass = trapezoid([&](double y) { return ch.density(y, x, 0.0); }, -15.0, 15.0, 30000);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_NOTHROW(validate_channel(ch));
  }
  CHECK_THROWS_AS(make_channel({{"name", "cubic"}, {"sigma", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_channel({{"name", "abs_gauss"}}), ConfigError);
  CHECK_THROWS_AS(abs_gauss_channel(0.0), ConfigError);
}

TEST_CASE("smoothed density matches direct integration and its derivatives") {
  for (const auto& ch : {linear_gauss_channel(0.4), abs_gauss_channel(0.25)}) {
    for (double y : {-0.5, 0.2, 1.3}) {
      for (double m : {-0.7, 0.0, 0.9}) {
        const double var = 0.36;
        const auto s = smoothed_density(ch, y, m, var, 0.0);
        // Oracle: fine trapezoid over x = m + 0.6 g, differentiating the Gaussian
        // kernel in m under the integral (handles the |x| kink).
        const auto moment = [&](auto weight) {
          return trapezoid([&](double g) { return phi(g) * weight(g) * ch.density(y, m + 0.6 * g, 0.0); },
                           -12.0, 12.0, 48000);
        };
        CHECK(s.value == doctest::Approx(moment([](double) { return 1.0; })).epsilon(1e-7));
        CHECK(s.d1 == doctest::Approx(moment([](double g) { return g / 0.6; })).epsilon(1e-6));
        CHECK(s.d2 ==
              doctest::Approx(moment([&](double g) { return (g * g - 1.0) / var; })).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("score expectation closed forms") {
  // Linear channel: E[E[G1|Y,G0]²]/τ̃² = 1/(τ̃² + σ_w²) for any σ.
  for (double noise : {0.2, 0.7}) {
    for (double tt : {0.3, 1.0}) {
      const auto r = score_expectation(linear_gauss_channel(noise), 0.8, tt);
      CHECK(r.value == doctest::Approx(1.0 / (tt * tt + noise * noise)).epsilon(1e-7));
      CHECK_FALSE(r.degenerate);
    }
  }
  CHECK(score_expectation(uninformative_channel(1.0), 0.5, 0.5).value == doctest::Approx(0.0));
  const auto tiny = score_expectation(linear_gauss_channel(0.5), 1.0, 1e-14);
  CHECK(tiny.degenerate);
  CHECK(tiny.value == 0.0);
}

TEST_CASE("delta_sp of the absolute-value channel against a brute-force oracle") {
  const double sigma = 0.2;
  const OutputChannel ch = abs_gauss_channel(sigma);
  const DeltaSpResult r = delta_sp(ch);
  // Oracle: 1/δ_sp = ∫ E_G[p(y|G)(G²−1)]² / E_G[p(y|G)] dy on a fine product grid.
  const auto inner = [&](double y, bool weighted) {
    return trapezoid(
        [&](double g) {
          const double p = ch.density(y, g, 0.0);
          return phi(g) * p * (weighted ? g * g - 1.0 : 1.0);
        },
        -10.0, 10.0, 8000);
  };
  const double inv = trapezoid(
      [&](double y) {
        const double den = inner(y, false);
        const double num = inner(y, true);
        return den > 0.0 ? num * num / den : 0.0;
      },
      -2.0, 12.0, 2800);
  CHECK(r.value == doctest::Approx(1.0 / inv).epsilon(1e-6));
  CHECK(r.value == doctest::Approx(0.54072888).epsilon(1e-7));
  CHECK_FALSE(r.ratio_form_integrable);
  CHECK(std::isinf(delta_sp(uninformative_channel(1.0)).value));
  CHECK_THROWS_AS(delta_sp(linear_gauss_channel(0.2)), DomainError);
}
