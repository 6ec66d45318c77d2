#pragma once

#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

namespace gfomlb {

// S(y; m, var) = E_G p(y | m + sqrt(var) G) and its first two derivatives in m.
struct SmoothedDensity {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Observation law y = h(x, w, u) with w ~ N(0,1) and u drawn from a finite set.
struct OutputChannel {
  std::string name;
  nlohmann::json params = nlohmann::json::object();

  std::function<double(double x, double w, double u)> h;
  // Conditional density p(y | x, u). Empty when the channel is sample-only.
  std::function<double(double y, double x, double u)> density;
  // Closed-form Gaussian smoothing of the density; optional.
  std::function<SmoothedDensity(double y, double m, double var, double u)> smoothed;

  std::vector<double> u_atoms{0.0};
  std::vector<double> u_weights{1.0};

  bool symmetric = false;  // p(y | x) = p(y | -x)

  bool has_density() const { return static_cast<bool>(density); }
};

// Closed form when the channel provides one, Gauss-Hermite in the smoothing
// variable otherwise (inaccurate for densities with kinks in x).
SmoothedDensity smoothed_density(const OutputChannel& channel, double y, double m, double var,
                                 double u);

// Registry: linear_gauss, abs_gauss, uninformative; each takes {"sigma": s}.
OutputChannel make_channel(const nlohmann::json& spec);
std::vector<std::string> registered_channels();

OutputChannel linear_gauss_channel(double sigma);
OutputChannel abs_gauss_channel(double sigma);
OutputChannel uninformative_channel(double sigma);

nlohmann::json channel_to_json(const OutputChannel& channel);

// Spot checks: density normalization (1e-6) on a grid of x and u, and the
// linear growth bound |h(x,w)| <= C(1 + |x| + |w|). Throws ConfigError.
void validate_channel(const OutputChannel& channel);

// Smallest and largest h(x, w, u) over |x| <= 8·x_sd, |w| <= 8 and all u atoms.
std::pair<double, double> observation_range(const OutputChannel& channel, double x_sd);

}  // namespace gfomlb
