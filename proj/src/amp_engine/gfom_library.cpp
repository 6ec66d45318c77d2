#include "amp_engine/gfom_library.hpp"

#include <cmath>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace gfomlb {

Mat soft_threshold(const Mat& x, double level) {
  return x.unaryExpr([level](double z) {
    if (z > level) return z - level;
    if (z < -level) return z + level;
    return 0.0;
  });
}

GfomSpec power_iteration_spec(int t_max, int dim, double level, std::vector<double> scales) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  if (scales.empty()) throw ConfigError("power iteration: scales must be nonempty");
  if (!(level >= 0.0)) throw ConfigError("power iteration: threshold must be >= 0");
  GfomSpec spec;
  spec.name = "power_iter";
  spec.dim = dim;
  spec.F1.push_back([dim](History, const Vec& y, const Mat&) { return Mat(Mat::Zero(y.size(), dim)); });
  spec.F2.push_back([](History, const Mat& v) { return v; });
  spec.G1.push_back(nullptr);
  spec.G2.push_back(nullptr);
  for (int t = 1; t < t_max; ++t) {
    const double c = scales[std::min<std::size_t>(t - 1, scales.size() - 1)];
    spec.G1.push_back([level](History v_hist, const Mat&) { return soft_threshold(v_hist.back(), level); });
    spec.F1.push_back([c](History u_hist, const Vec&, const Mat&) { return Mat(c * u_hist.back()); });
  }
  spec.G_star = [level](History v_hist, const Mat&) { return soft_threshold(v_hist.back(), level); };
  return spec;
}

GfomSpec proximal_gradient_spec(int t_max, double step, double lambda) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  if (!(step > 0.0)) throw ConfigError("proximal gradient: step must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("proximal gradient: lambda must be >= 0");
  const double level = step * lambda;
  GfomSpec spec;
  spec.name = "proximal";
  spec.dim = 1;
  spec.F1.push_back([step](History, const Vec& y, const Mat&) { return Mat(step * y); });
  spec.G1.push_back(nullptr);
  spec.G2.push_back(nullptr);
  spec.F2.push_back(nullptr);
  auto prox = [level](History v_hist, const Mat&) { return soft_threshold(v_hist.back(), level); };
  for (int t = 1; t < t_max; ++t) {
    spec.G1.push_back(prox);
    spec.F1.push_back([step](History u_hist, const Vec& y, const Mat&) {
      return Mat(-step * (u_hist.back() - y));
    });
    spec.F2.push_back(prox);
  }
  spec.G_star = prox;
  return spec;
}

namespace {

Mat clip(const Mat& x, double c) { return x.cwiseMax(-c).cwiseMin(c); }

Mat broadcast(const Vec& y, int dim) { return y.replicate(1, dim); }

}  // namespace

GfomSpec clipped_polynomial_spec(int t_max, std::uint64_t seed, int dim, double c) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  if (!(c > 0.0)) throw ConfigError("clipped polynomial: clip must be positive");
  CounterRng rng(seed, 0);
  std::uint64_t counter = 0;
  auto coef = [&]() { return 2.0 * rng.uniform(counter++) - 1.0; };

  GfomSpec spec;
  spec.name = "custom";
  spec.dim = dim;
  {
    const double c0 = coef(), c1 = coef(), c2 = coef();
    spec.F1.push_back([=](History, const Vec& y, const Mat&) {
      const Mat yb = broadcast(y, dim);
      return clip((c0 + (c1 * yb + 0.25 * c2 * yb.cwiseProduct(yb)).array()).matrix(), c);
    });
    const double d0 = coef();
    spec.F2.push_back([=](History, const Mat& v) { return Mat(d0 * v); });
  }
  spec.G1.push_back(nullptr);
  spec.G2.push_back(nullptr);
  for (int t = 1; t < t_max; ++t) {
    const double e0 = coef(), e1 = coef(), e2 = coef(), e3 = coef();
    spec.G1.push_back([=](History vh, const Mat&) {
      const Mat& last = vh.back();
      Mat out = e1 * last + 0.25 * e2 * last.cwiseProduct(last);
      if (vh.size() >= 2) out += e3 * vh[vh.size() - 2];
      return clip((out.array() + e0).matrix(), c);
    });
    const double h1 = coef(), h2 = coef();
    spec.G2.push_back([=](History uh, const Vec& y, const Mat&) {
      Mat out = h1 * broadcast(y, dim);
      if (!uh.empty()) out += h2 * uh.back();
      return clip(out, c);
    });
    const double c1 = coef(), c2 = coef(), c3 = coef(), c4 = coef();
    spec.F1.push_back([=](History uh, const Vec& y, const Mat&) {
      const Mat& last = uh.back();
      const Mat yb = broadcast(y, dim);
      Mat out = c1 * last + 0.25 * c2 * last.cwiseProduct(last) + c3 * yb;
      if (uh.size() >= 2) out += c4 * uh[uh.size() - 2].cwiseProduct(yb);
      return clip(out, c);
    });
    const double d1 = coef(), d2 = coef();
    spec.F2.push_back([=](History vh, const Mat&) {
      const Mat& last = vh.back();
      return clip(d1 * last + 0.25 * d2 * last.cwiseProduct(last), c);
    });
  }
  spec.G_star = [](History vh, const Mat&) { return vh.back(); };
  return spec;
}

}  // namespace gfomlb
