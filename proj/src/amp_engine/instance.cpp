#include "amp_engine/instance.hpp"

#include <cmath>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace gfomlb {
namespace {

enum Stream : std::uint64_t {
  kDesign = 1,
  kTheta = 10,   // uses kTheta and kTheta + 1
  kLambda = 20,  // uses kLambda and kLambda + 1
  kChannelNoise = 30,
  kChannelU = 31,
};

void require_size(int n, int p) {
  if (n < 1 || p < 1) throw ConfigError("instance: n and p must be positive");
}

Mat gaussian_design(int n, int p, std::uint64_t seed) {
  CounterRng rng(seed, kDesign);
  Mat x = rng.normal_matrix(n, p);
  x *= 1.0 / std::sqrt(static_cast<double>(n));
  return x;
}

}  // namespace

Instance make_regression_instance(int n, int p, const JointPrior& prior,
                                  const OutputChannel& channel, std::uint64_t seed) {
  require_size(n, p);
  if (prior.dim() != 1) throw ConfigError("regression instance: prior must be scalar");
  Instance inst;
  inst.model = Model::regression;
  inst.seed = seed;
  inst.X = gaussian_design(n, p, seed);
  prior.sample(seed, kTheta, p, inst.theta, inst.v);

  CounterRng noise(seed, kChannelNoise);
  CounterRng pick(seed, kChannelU);
  const auto cumulative = cumulative_weights(channel.u_weights);
  Vec w(n);
  noise.fill_normal(w.data(), static_cast<std::size_t>(n));
  const Vec x = inst.X * inst.theta.col(0);
  inst.y.resize(n);
  inst.u.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double u = channel.u_atoms[CounterRng::pick(cumulative, pick.uniform(i))];
    inst.u(i, 0) = u;
    inst.y(i) = channel.h(x(i), w(i), u);
  }
  inst.lambda.resize(0, 1);
  return inst;
}

Instance make_lowrank_instance(int n, int p, const JointPrior& prior_theta,
                               const JointPrior& prior_lambda, std::uint64_t seed) {
  require_size(n, p);
  if (prior_theta.dim() != prior_lambda.dim()) {
    throw ConfigError("low-rank instance: priors must share dim");
  }
  Instance inst;
  inst.model = Model::lowrank;
  inst.seed = seed;
  inst.X = gaussian_design(n, p, seed);
  prior_theta.sample(seed, kTheta, p, inst.theta, inst.v);
  prior_lambda.sample(seed, kLambda, n, inst.lambda, inst.u);
  inst.X.noalias() += (1.0 / n) * inst.lambda * inst.theta.transpose();
  inst.y = Vec::Zero(n);
  return inst;
}

}  // namespace gfomlb
