#include "priors_channels/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/errors.hpp"
#include "common/quadrature.hpp"

namespace gfomlb {
namespace {

using nlohmann::json;

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double gauss_density(double y, double mean, double var) {
  const double d = y - mean;
  return kInvSqrt2Pi / std::sqrt(var) * std::exp(-0.5 * d * d / var);
}

double require_sigma(const json& spec, const char* name) {
  if (!spec.contains("sigma") || !spec["sigma"].is_number()) {
    throw ConfigError(std::string("channel.sigma: required number for ") + name);
  }
  double s = spec["sigma"].get<double>();
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("channel.sigma: must be positive");
  return s;
}

// E_G φ_s(y - |m + sqrt(v) G|) and m-derivatives. Splitting the x-integral at
// the kink gives two Gaussian products with truncated-normal masses.
SmoothedDensity abs_smoothed(double y, double m, double v, double s) {
  const double s2 = s * s;
  SmoothedDensity out;
  if (v <= 1e-300) {
    const double r = y - std::abs(m);
    const double p = gauss_density(r, 0.0, s2);
    const double sign = m > 0.0 ? 1.0 : (m < 0.0 ? -1.0 : 0.0);
    out.value = p;
    out.d1 = sign * r / s2 * p;
    out.d2 = (r * r / (s2 * s2) - 1.0 / s2) * p;
    return out;
  }
  const double big_v = v + s2;
  const double sw = std::sqrt(v * s2 / big_v);
  const double kappa = s2 / (big_v * sw);
  const double k1 = (m * s2 + y * v) / (big_v * sw);
  const double k2 = (y * v - m * s2) / (big_v * sw);
  const double n1 = gauss_density(y, m, big_v);
  const double n2 = gauss_density(y, -m, big_v);
  const double e1 = (y - m) / big_v;
  const double e2 = -(y + m) / big_v;
  const double cdf1 = normal_cdf(k1), pdf1 = normal_pdf(k1);
  const double cdf2 = normal_cdf(k2), pdf2 = normal_pdf(k2);
  out.value = n1 * cdf1 + n2 * cdf2;
  out.d1 = n1 * (e1 * cdf1 + kappa * pdf1) + n2 * (e2 * cdf2 - kappa * pdf2);
  out.d2 = n1 * ((e1 * e1 - 1.0 / big_v) * cdf1 + 2.0 * e1 * kappa * pdf1 -
                 kappa * kappa * k1 * pdf1) +
           n2 * ((e2 * e2 - 1.0 / big_v) * cdf2 - 2.0 * e2 * kappa * pdf2 -
                 kappa * kappa * k2 * pdf2);
  return out;
}

}  // namespace

SmoothedDensity smoothed_density(const OutputChannel& channel, double y, double m, double var,
                                 double u) {
  if (channel.smoothed) return channel.smoothed(y, m, var, u);
  if (!channel.has_density()) throw ConfigError("channel density required for SE");
  SmoothedDensity out;
  if (var <= 1e-24) {
    const double step = 1e-5 * (1.0 + std::abs(m));
    const double p0 = channel.density(y, m, u);
    const double pp = channel.density(y, m + step, u);
    const double pm = channel.density(y, m - step, u);
    out.value = p0;
    out.d1 = (pp - pm) / (2.0 * step);
    out.d2 = (pp - 2.0 * p0 + pm) / (step * step);
    return out;
  }
  const auto& q = gauss_hermite(kDefaultHermiteOrder);
  const double sd = std::sqrt(var);
  for (int k = 0; k < q.order; ++k) {
    const double g = q.nodes[k];
    const double p = q.weights[k] * channel.density(y, m + sd * g, u);
    out.value += p;
    out.d1 += g * p;
    out.d2 += (g * g - 1.0) * p;
  }
  out.d1 /= sd;
  out.d2 /= var;
  return out;
}

OutputChannel linear_gauss_channel(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("channel.sigma: must be positive");
  OutputChannel c;
  c.name = "linear_gauss";
  c.params = {{"sigma", sigma}};
  c.h = [sigma](double x, double w, double) { return x + sigma * w; };
  c.density = [sigma](double y, double x, double) { return gauss_density(y, x, sigma * sigma); };
  c.smoothed = [sigma](double y, double m, double v, double) {
    const double big_v = v + sigma * sigma;
    const double p = gauss_density(y, m, big_v);
    const double e = (y - m) / big_v;
    return SmoothedDensity{p, e * p, (e * e - 1.0 / big_v) * p};
  };
  c.symmetric = false;
  return c;
}

OutputChannel abs_gauss_channel(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("channel.sigma: must be positive");
  OutputChannel c;
  c.name = "abs_gauss";
  c.params = {{"sigma", sigma}};
  c.h = [sigma](double x, double w, double) { return std::abs(x) + sigma * w; };
  c.density = [sigma](double y, double x, double) {
    return gauss_density(y, std::abs(x), sigma * sigma);
  };
  c.smoothed = [sigma](double y, double m, double v, double) {
    return abs_smoothed(y, m, v, sigma);
  };
  c.symmetric = true;
  return c;
}

OutputChannel uninformative_channel(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("channel.sigma: must be positive");
  OutputChannel c;
  c.name = "uninformative";
  c.params = {{"sigma", sigma}};
  c.h = [sigma](double, double w, double) { return sigma * w; };
  c.density = [sigma](double y, double, double) { return gauss_density(y, 0.0, sigma * sigma); };
  c.smoothed = [sigma](double y, double, double, double) {
    return SmoothedDensity{gauss_density(y, 0.0, sigma * sigma), 0.0, 0.0};
  };
  c.symmetric = true;
  return c;
}

std::vector<std::string> registered_channels() {
  return {"linear_gauss", "abs_gauss", "uninformative"};
}

OutputChannel make_channel(const json& spec) {
  if (!spec.is_object()) throw ConfigError("channel: expected an object");
  if (!spec.contains("name") || !spec["name"].is_string()) {
    throw ConfigError("channel.name: missing or not a string");
  }
  const std::string name = spec["name"].get<std::string>();
  if (name == "linear_gauss") return linear_gauss_channel(require_sigma(spec, "linear_gauss"));
  if (name == "abs_gauss") return abs_gauss_channel(require_sigma(spec, "abs_gauss"));
  if (name == "uninformative") return uninformative_channel(require_sigma(spec, "uninformative"));
  throw ConfigError("channel.name: unknown channel '" + name + "'");
}

json channel_to_json(const OutputChannel& channel) {
  json out = channel.params;
  out["name"] = channel.name;
  return out;
}

std::pair<double, double> observation_range(const OutputChannel& channel, double x_sd) {
  double lo = INFINITY, hi = -INFINITY;
  for (double u : channel.u_atoms) {
    for (int i = -8; i <= 8; ++i) {
      for (int j = -8; j <= 8; j += 4) {
        const double y = channel.h(x_sd * i, static_cast<double>(j), u);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
  }
  if (hi - lo < 1e-6) {
    lo -= 1.0;
    hi += 1.0;
  }
  return {lo, hi};
}

void validate_channel(const OutputChannel& channel) {
  if (!channel.h) throw ConfigError("channel: observation rule missing");
  if (channel.u_atoms.empty() || channel.u_atoms.size() != channel.u_weights.size()) {
    throw ConfigError("channel: u atoms and weights must be nonempty and the same length");
  }
  double growth = 0.0;
  for (double u : channel.u_atoms) {
    for (double x = -20.0; x <= 20.0; x += 2.5) {
      for (double w = -20.0; w <= 20.0; w += 2.5) {
        const double y = channel.h(x, w, u);
        if (!std::isfinite(y)) throw ConfigError("channel: observation rule returned non-finite value");
        growth = std::max(growth, std::abs(y) / (1.0 + std::abs(x) + std::abs(w)));
      }
    }
  }
  if (growth > 1e6) throw ConfigError("channel: observation rule violates the linear growth bound");
  if (!channel.has_density()) return;
  for (double u : channel.u_atoms) {
    for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
      auto [lo, hi] = observation_range(channel, 0.0);
      lo = std::min(lo, x - 1.0) - 10.0;
      hi = std::max(hi, x + 1.0) + 10.0;
      const int n = 20000;
      const double step = (hi - lo) / n;
      double mass = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double wgt = (k == 0 || k == n) ? 0.5 : 1.0;
        mass += wgt * channel.density(lo + k * step, x, u);
      }
      mass *= step;
      if (std::abs(mass - 1.0) > 1e-6) {
        throw ConfigError("channel: density does not integrate to 1 at x = " + std::to_string(x));
      }
    }
  }
}

}  // namespace gfomlb
