#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "priors_channels/bayes.hpp"
#include "priors_channels/channel.hpp"
#include "priors_channels/prior.hpp"
#include "state_evolution/se.hpp"

using namespace gfomlb;

namespace {

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
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

TEST_CASE("regression recursion with a Gaussian prior and linear channel") {
  // mmse(τ²) = τ²/(1+τ²) for unit variance, so τ²_{t+1} = σ_w² + mmse(τ²_t)/δ.
  // Noise levels stay well above the atom spacing of the discretized prior;
  // below it the 61 atoms become distinguishable and the closed form no longer applies.
  const JointPrior prior = JointPrior::gaussian(61);
  for (double delta : {0.5, 1.0, 2.5}) {
    for (double sw : {0.6, 0.9}) {
      SeOptions opts;
      opts.t_max = 12;
      opts.stop_on_convergence = false;
      const RegressionTrace tr = se_regression_run(prior, linear_gauss_channel(sw), delta, opts);
      REQUIRE(tr.states.size() == 13);
      CHECK(std::isinf(tr.states[0].tau2));
      double tau2 = 1.0 / delta + sw * sw;
      for (int t = 1; t <= 12; ++t) {
        CHECK(tr.states[t].tau2 == doctest::Approx(tau2).epsilon(1e-6));
        const double mmse = tau2 / (1.0 + tau2);
        CHECK(tr.states[t].tilde_tau2 == doctest::Approx(mmse / delta).epsilon(1e-6));
        CHECK(tr.states[t].sigma2 == doctest::Approx((1.0 - mmse) / delta).epsilon(1e-6));
        tau2 = sw * sw + mmse / delta;
      }
    }
  }
}

TEST_CASE("regression trace is monotone and its bound never increases (random priors)") {
  const CounterRng rng(23, 1);
  for (int trial = 0; trial < 12; ++trial) {
    const JointPrior prior = random_scalar_prior(rng, 100 * trial, 2 + trial % 4);
    const double delta = 0.3 + 3.0 * rng.uniform(100 * trial + 50);
    const double sw = 0.05 + rng.uniform(100 * trial + 51);
    SeOptions opts;
    opts.t_max = 15;
    const RegressionTrace tr = se_regression_run(prior, linear_gauss_channel(sw), delta, opts);
    const auto lb = se_lower_bound_mse(tr, prior);
    REQUIRE(lb.size() == tr.states.size());
    CHECK(lb[0] == doctest::Approx(prior.second_moment()(0, 0) - std::pow(prior.mean()(0), 2)));
    for (std::size_t t = 1; t < tr.states.size(); ++t) {
      CHECK(tr.states[t].tau2 <= tr.states[t - 1].tau2 * (1.0 + 1e-12));
      CHECK(lb[t] <= lb[t - 1] + 1e-12);
      CHECK(lb[t] >= 0.0);
      // σ² + τ̃² = E[Θ²]/δ by construction.
      CHECK(tr.states[t].sigma2 + tr.states[t].tilde_tau2 ==
            doctest::Approx(prior.second_moment()(0, 0) / delta).epsilon(1e-12));
    }
  }
}

TEST_CASE("point-mass prior gives perfect knowledge at once") {
  const JointPrior prior = JointPrior::point_mass(Vec::Zero(1));
  SeOptions opts;
  opts.t_max = 5;
  const RegressionTrace tr = se_regression_run(prior, linear_gauss_channel(0.3), 2.0, opts);
  CHECK(tr.states[0].perfect_knowledge);
  CHECK(tr.states[1].tau2 == 0.0);
  for (double v : se_lower_bound_mse(tr, prior)) CHECK(v == 0.0);
  CHECK(tr.converged);
}

TEST_CASE("low-rank recursion with Gaussian priors") {
  // V(Q) = (Q+s)/(1+Q+s) for a unit Gaussian with side SNR s.
  for (double side : {0.0, 0.4}) {
    for (double delta : {0.8, 2.0}) {
      const JointPrior theta = JointPrior::gaussian(61, 1.0, side);
      const JointPrior lambda = JointPrior::gaussian(61);
      SeOptions opts;
      opts.t_max = 8;
      opts.stop_on_convergence = false;
      const LowRankTrace tr = se_lowrank_run(theta, lambda, delta, opts);
      REQUIRE(tr.states.size() == 9);
      double q = 0.0;
      double qhat = 0.0;
      CHECK(tr.states[0].Q(0, 0) == 0.0);
      for (int t = 1; t <= 8; ++t) {
        q = qhat / (1.0 + qhat);
        qhat = (q + side) / (1.0 + q + side) / delta;
        CHECK(tr.states[t].Q(0, 0) == doctest::Approx(q).epsilon(1e-6));
        CHECK(tr.states[t].Qhat(0, 0) == doctest::Approx(qhat).epsilon(1e-6));
      }
      const auto lb = se_lower_bound_mse(tr, theta);
      for (std::size_t t = 0; t < lb.size(); ++t) {
        CHECK(lb[t] == doctest::Approx(1.0 - tr.states[t].v_theta(0, 0)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Bayes coefficient tables satisfy the Nishimori identities") {
  SUBCASE("regression") {
    const JointPrior prior = JointPrior::symmetric_two_point(1.0);
    SeOptions opts;
    opts.t_max = 8;
    opts.stop_on_convergence = false;
    const double delta = 1.7;
    const RegressionTrace tr = se_regression_run(prior, linear_gauss_channel(0.4), delta, opts);
    const AmpSECoeffs c = bayes_amp_coeffs_regression(tr, prior, delta, 6);
    CHECK(c.horizon == 6);
    for (int t = 1; t <= 6; ++t) {
      const double a = c.alphas.at(t)(0, 0);
      // Effective noise of a^t/α_t is the next SE variance.
      CHECK(c.T.get(t, t)(0, 0) / (a * a) == doctest::Approx(tr.states[t].tau2).epsilon(1e-10));
      CHECK(c.Sigma.get(t, t)(0, 0) == doctest::Approx(tr.states[t].sigma2));
    }
  }
  SUBCASE("low rank") {
    const JointPrior theta = JointPrior::three_point(1.5, 0.3, 1.0, 0.2);
    const JointPrior lambda = JointPrior::gaussian(61);
    SeOptions opts;
    opts.t_max = 6;
    opts.stop_on_convergence = false;
    const LowRankTrace tr = se_lowrank_run(theta, lambda, 1.3, opts);
    const AmpSECoeffs c = bayes_amp_coeffs_lowrank(tr, 5);
    for (int t = 1; t <= 5; ++t) {
      CHECK(max_abs(c.alphas.at(t) - c.T.get(t, t)) < 1e-14);
      CHECK(max_abs(c.gammas.at(t) - c.Sigma.get(t, t)) < 1e-14);
    }
  }
}

TEST_CASE("regression coefficients reject informative side information") {
  const JointPrior prior = JointPrior::three_point(1.0, 0.5, 1.0, 1.0);
  SeOptions opts;
  opts.t_max = 4;
  const RegressionTrace tr = se_regression_run(prior, linear_gauss_channel(0.5), 1.0, opts);
  CHECK_THROWS_AS(bayes_amp_coeffs_regression(tr, prior, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(bayes_amp_coeffs_regression(tr, prior, 1.0, 50), ConfigError);
}

TEST_CASE("invalid inputs are rejected") {
  const JointPrior prior = JointPrior::symmetric_two_point(1.0);
  CHECK_THROWS_AS(se_regression_run(prior, linear_gauss_channel(0.5), 0.0), ConfigError);
  CHECK_THROWS_AS(se_regression_run(prior, linear_gauss_channel(0.5), -1.0), ConfigError);
  const JointPrior wide = JointPrior::gaussian(11);
  CHECK_THROWS_AS(se_lowrank_run(prior, wide, std::nan("")), ConfigError);
}

TEST_CASE("trace CSV has a header and one row per state") {
  const JointPrior prior = JointPrior::symmetric_two_point(1.0);
  SeOptions opts;
  opts.t_max = 5;
  opts.stop_on_convergence = false;
  const RegressionTrace tr = se_regression_run(prior, linear_gauss_channel(0.5), 1.5, opts);
  const std::string csv = regression_trace_csv(tr, se_lower_bound_mse(tr, prior));
  CHECK(csv.rfind("t,tau2,sigma2,tilde_tau2,lb_mse\n", 0) == 0);
  CHECK(count_lines(csv) == 7);
  CHECK(csv.find("\n0,inf,") != std::string::npos);

  const LowRankTrace lr =
      se_lowrank_run(JointPrior::gaussian(21), JointPrior::gaussian(21), 1.0, opts);
  const std::string lcsv = lowrank_trace_csv(lr, se_lower_bound_mse(lr, JointPrior::gaussian(21)));
  CHECK(lcsv.rfind("t,Q_11,Qhat_11,lb_mse\n", 0) == 0);
  CHECK(count_lines(lcsv) == static_cast<int>(lr.states.size()) + 1);
}
