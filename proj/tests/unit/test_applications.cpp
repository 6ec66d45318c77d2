#include <doctest.h>

#include <cmath>
#include <vector>

#include "applications/phase_retrieval.hpp"
#include "applications/spca.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"
#include "priors_channels/channel.hpp"
#include "state_evolution/se.hpp"

using namespace gfomlb;

namespace {

const double kRefMu = std::sqrt(5.0);

// E[E[Θ0 | √s Θ0 + G]²] for Θ0 ∈ {0, ±mu} by a trapezoid over the observation.
double posterior_second_moment_oracle(double mu, double eps, double snr) {
  const double rs = std::sqrt(snr);
  const double atoms[3] = {-mu, 0.0, mu};
  const double weights[3] = {0.5 * eps, 1.0 - eps, 0.5 * eps};
  const double lo = -rs * mu - 12.0;
  const double hi = rs * mu + 12.0;
  const int steps = 40000;
  const double h = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double y = lo + i * h;
    double dens = 0.0, num = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = y - rs * atoms[k];
      const double w = weights[k] * std::exp(-0.5 * d * d);
      dens += w;
      num += w * atoms[k];
    }
    if (dens <= 0.0) continue;
    const double m = num / dens;
    acc += (i == 0 || i == steps ? 0.5 : 1.0) * m * m * dens;
  }
  return acc * h / std::sqrt(2.0 * M_PI);
}

// Smallest positive fixed point of q = V(q+α̃)/(1+V(q+α̃)) by scan then bisection.
double spca_fixed_point_oracle(const SpcaConfig& cfg) {
  const double at = cfg.alpha_tilde();
  auto gap = [&](double q) {
    const double v = posterior_second_moment_oracle(cfg.mu, cfg.eps, cfg.delta * (q + at));
    return q - v / (1.0 + v);
  };
  double lo = 0.0;
  double hi = 0.0;
  for (double q = 0.0; q < 1.0; q += 0.01) {
    if (gap(q + 0.01) >= 0.0) {
      lo = q;
      hi = q + 0.01;
      break;
    }
  }
  REQUIRE(hi > 0.0);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("posterior second moment matches a direct trapezoid on both evaluation branches") {
  for (double eps : {1.0, 0.3, 0.05}) {
    for (double mu : {1.0, 2.0}) {
      // a = mu √snr crosses the branch point at 1.5.
      for (double a : {0.05, 0.8, 1.4, 1.6, 3.1, 6.0, 15.0}) {
        const double snr = (a / mu) * (a / mu);
        const double got = three_point_posterior_second_moment(mu, eps, snr);
        const double want = posterior_second_moment_oracle(mu, eps, snr);
        CHECK(got == doctest::Approx(want).epsilon(1e-9).scale(mu * mu * eps));
      }
    }
  }
  CHECK(three_point_posterior_second_moment(2.0, 0.3, 0.0) == 0.0);
  CHECK(three_point_posterior_second_moment(2.0, 0.3, kInf) == doctest::Approx(1.2));
  CHECK_THROWS_AS(three_point_posterior_second_moment(2.0, 0.3, -1.0), DomainError);
}

TEST_CASE("V map at the reference configuration against a 10^7-sample Monte Carlo oracle") {
  const SpcaConfig cfg{kRefMu, 0.2, 1.5, 0.1};
  const double q = 0.3;
  const double s = cfg.delta * q;
  const double rs = std::sqrt(s);
  const double mu = cfg.mu;
  const CounterRng rng(77, 0);
  const std::uint64_t count = 10000000;
  double sum = 0.0, sumsq = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const double u = rng.uniform(2 * i);
    const double theta = u < 0.8 ? 0.0 : (u < 0.9 ? mu : -mu);
    const double y = rs * theta + rng.normal_pair(2 * i + 1)[0];
    const double wp = 0.1 * std::exp(rs * mu * y - 0.5 * s * mu * mu);
    const double wm = 0.1 * std::exp(-rs * mu * y - 0.5 * s * mu * mu);
    const double m = mu * (wp - wm) / (0.8 + wp + wm);
    sum += m * m;
    sumsq += m * m * m * m;
  }
  const double mean = sum / count;
  const double se = std::sqrt((sumsq / count - mean * mean) / count);
  CHECK(std::abs(spca_vpm(cfg, q) - mean) <= 3.0 * se);
}

TEST_CASE("V map is bounded and non-decreasing (random configurations)") {
  const CounterRng rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const SpcaConfig cfg{0.5 + 2.5 * rng.uniform(4 * trial), 0.02 + 0.98 * rng.uniform(4 * trial + 1),
                         0.2 + 3.0 * rng.uniform(4 * trial + 2), 0.0};
    CHECK(spca_vpm(cfg, 0.0) == 0.0);
    double prev = 0.0;
    for (double q = 1e-4; q < 200.0; q *= 1.7) {
      const double v = spca_vpm(cfg, q);
      CHECK(v >= prev - 1e-10 * cfg.mu * cfg.mu * cfg.eps);
      CHECK(v <= cfg.mu * cfg.mu * cfg.eps);
      prev = v;
    }
  }
}

TEST_CASE("SPCA recursion stays in [0, 1) (random configurations)") {
  const CounterRng rng(9, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const SpcaConfig cfg{0.5 + 3.0 * rng.uniform(5 * trial), 0.02 + 0.98 * rng.uniform(5 * trial + 1),
                         0.2 + 3.0 * rng.uniform(5 * trial + 2), 0.9 * rng.uniform(5 * trial + 3)};
    const SpcaTrace tr = spca_recursion(cfg, 30);
    REQUIRE(tr.q.size() == 31);
    for (double q : tr.q) {
      CHECK(q >= 0.0);
      CHECK(q < 1.0);
    }
  }
  const SpcaTrace zero = spca_recursion({1.0, 0.5, 0.5, 0.0}, 10);
  for (double q : zero.q) CHECK(q == 0.0);
  CHECK(spca_correlation_bound({1.0, 0.5, 0.5, 0.0}, 5) == 0.0);
}

TEST_CASE("SPCA recursion equals low-rank state evolution on the simulation priors") {
  for (const SpcaConfig& cfg : {SpcaConfig{kRefMu, 0.2, 1.5, 0.1}, SpcaConfig{1.3, 0.6, 0.8, 0.3}}) {
    const SpcaTrace tr = spca_recursion(cfg, 10, 0.0);
    const SpcaPriors priors = spca_priors(cfg);
    SeOptions opts;
    opts.t_max = 11;
    opts.stop_on_convergence = false;
    const LowRankTrace lr = se_lowrank_run(priors.theta, priors.lambda, cfg.delta, opts);
    for (int t = 0; t <= 10; ++t) {
      CHECK(lr.states[t + 1].Q(0, 0) == doctest::Approx(tr.q[t]).epsilon(1e-8));
    }
  }
}

TEST_CASE("supercritical SPCA recursion converges to the bisection fixed point") {
  const SpcaConfig cfg{kRefMu, 0.2, 1.5, 0.1};
  const SpcaTrace tr = spca_recursion(cfg, 400);
  CHECK(tr.converged);
  const double oracle = spca_fixed_point_oracle(cfg);
  CHECK(oracle > 0.1);
  CHECK(tr.q.back() == doctest::Approx(oracle).epsilon(1e-7));
  // The bound tends to one as q grows without limit.
  CHECK(spca_bound_from_q(cfg, 1e6) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("corollary regimes") {
  const CorollaryConstants b = spca_corollary_constants(0.5, 1.0, 0.1);
  CHECK(b.regime == "b");
  CHECK(b.alpha_star == doctest::Approx(0.025));
  CHECK(b.c_star == doctest::Approx(12.0));
  // R² √δ ≥ 1: no guarantee.
  CHECK(spca_corollary_constants(1.0, 1.0, 0.5).regime == "none");
  CHECK(spca_corollary_constants(1.2, 0.9, 0.5).regime == "none");
  // Between the two gates.
  CHECK(spca_corollary_constants(0.8, 1.0, 0.5).regime == "a");
  // ε/4δ = 1/2 ties the minimum.
  const CorollaryConstants tie = spca_corollary_constants(0.5, 0.25, 0.5);
  CHECK(tie.regime == "b");
  CHECK(tie.alpha_star == 0.5);
  CHECK_THROWS_AS(spca_corollary_constants(0.0, 1.0, 0.5), ConfigError);
}

TEST_CASE("dense F map equals E[tanh²] for a Rademacher signal") {
  for (double q : {1e-3, 0.2, 1.0, 4.0, 30.0}) {
    // Oracle: E[tanh(q + √q G)²] by trapezoid in G.
    const int steps = 24000;
    const double h = 24.0 / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double g = -12.0 + i * h;
      const double t = std::tanh(q + std::sqrt(q) * g);
      acc += (i == 0 || i == steps ? 0.5 : 1.0) * t * t * std::exp(-0.5 * g * g);
    }
    acc *= h / std::sqrt(2.0 * M_PI);
    CHECK(pr_f_eps(1.0, q) == doctest::Approx(acc).epsilon(1e-9));
  }
}

TEST_CASE("phase retrieval recursion is trivial without side information") {
  PrConfig cfg{abs_gauss_channel(0.2), 2.0, 1.0, 0.0};
  const PrTrace tr = pr_recursion(cfg, 5);
  for (double q : tr.q) CHECK(q == 0.0);
  CHECK(pr_correlation_bound(cfg, 3) == 0.0);
}

TEST_CASE("phase retrieval threshold consistency at the grid resolution") {
  const OutputChannel ch = abs_gauss_channel(0.1);
  const double dsp = delta_sp(ch).value;
  REQUIRE(std::isfinite(dsp));
  PrConfig below{ch, dsp - 0.02, 1.0, 1e-6};
  PrConfig above{ch, dsp + 0.02, 1.0, 1e-6};
  const PrTrace lo = pr_recursion(below, 600);
  const PrTrace hi = pr_recursion(above, 600);
  const PrConstants c = pr_corollary_constants(below.delta, dsp);
  double sup_lo = 0.0;
  for (double q : lo.q) sup_lo = std::max(sup_lo, q);
  CHECK(sup_lo <= below.alpha_tilde() / c.eta);
  // The transition is continuous, so just above threshold the fixed point is
  // small but far above the side-information floor.
  CHECK(hi.q.back() > 100.0 * sup_lo);
  CHECK(hi.q.back() > 1e-3);
}

TEST_CASE("subcritical phase retrieval bound respects the constant") {
  const OutputChannel ch = abs_gauss_channel(0.3);
  const double dsp = delta_sp(ch).value;
  const double delta = 0.5 * dsp;
  const PrConstants c = pr_corollary_constants(delta, dsp);
  CHECK(c.eta == doctest::Approx(0.25));
  for (double alpha : {1e-4, 1e-3}) {
    PrConfig cfg{ch, delta, 1.0, alpha};
    const PrTrace tr = pr_recursion(cfg, 60);
    for (double qh : tr.qhat) CHECK(std::sqrt(qh) <= c.c_star * std::sqrt(alpha));
  }
  CHECK_THROWS_AS(pr_corollary_constants(dsp * 1.1, dsp), DomainError);
}
