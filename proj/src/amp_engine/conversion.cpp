#include "amp_engine/conversion.hpp"

#include <memory>

#include "common/errors.hpp"

namespace gfomlb {
namespace {

// Shared by every composite rule: the GFOM and the memory coefficients found
// so far (filled in as the recursion proceeds).
struct ConversionState {
  GfomSpec spec;
  OnsagerCoeffs onsager;
};

template <class Rule>
const Rule* optional_rule(const std::vector<Rule>& rules, int t) {
  if (t < 0 || t >= static_cast<int>(rules.size()) || !rules[t]) return nullptr;
  return &rules[t];
}

template <class Rule>
const Rule& required_rule(const std::vector<Rule>& rules, int t, const char* name) {
  const Rule* r = optional_rule(rules, t);
  if (!r) throw ConfigError(std::string("GFOM rule ") + name + "_" + std::to_string(t) + " missing");
  return *r;
}

// Rebuilds varphi_1..varphi_t and g_1..g_t from a¹..aᵗ.
// g_t itself is skipped unless `last_g` (G1 may stop one index early).
void unroll_v(const ConversionState& st, History a, const Mat& v, std::vector<Mat>& varphi,
              std::vector<Mat>& g, bool last_g = true) {
  const int t = static_cast<int>(a.size());
  varphi.clear();
  g.clear();
  for (int k = 1; k <= t; ++k) {
    Mat next = a[k - 1];
    if (k == 1) {
      if (auto* f2 = optional_rule(st.spec.F2, 0)) next += (*f2)(History(), v);
    } else {
      for (int s = 1; s < k; ++s) next.noalias() += g[s - 1] * st.onsager.xi.get(k - 1, s).transpose();
      if (auto* f2 = optional_rule(st.spec.F2, k - 1)) next += (*f2)(History(varphi), v);
    }
    varphi.push_back(std::move(next));
    if (k == t && !last_g) break;
    g.push_back(required_rule(st.spec.G1, k, "G1")(History(varphi), v));
  }
}

// Rebuilds phi_1..phi_t and f_0..f_t from b¹..bᵗ.
void unroll_u(const ConversionState& st, History b, const Vec& y, const Mat& u,
              std::vector<Mat>& phi, std::vector<Mat>& f) {
  const int t = static_cast<int>(b.size());
  phi.clear();
  f.clear();
  f.push_back(required_rule(st.spec.F1, 0, "F1")(History(), y, u));
  for (int k = 1; k <= t; ++k) {
    Mat next = b[k - 1];
    for (int s = 0; s < k; ++s) next.noalias() += f[s] * st.onsager.zeta.get(k, s).transpose();
    if (auto* g2 = optional_rule(st.spec.G2, k)) next += (*g2)(History(phi), y, u);
    phi.push_back(std::move(next));
    f.push_back(required_rule(st.spec.F1, k, "F1")(History(phi), y, u));
  }
}

}  // namespace

AmpConversion gfom_to_amp(const GfomSpec& spec, const SeModel& model, int t_max,
                          const McOptions& opts) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  auto st = std::make_shared<ConversionState>();
  st->spec = spec;
  st->onsager = OnsagerCoeffs(spec.dim);

  AmpConversion out;
  out.t_max = t_max;
  out.rules.dim = spec.dim;
  for (int t = 0; t < t_max; ++t) {
    FRule f;
    f.eval = [st](History b, const Vec& y, const Mat& u) {
      std::vector<Mat> phi, fs;
      unroll_u(*st, b, y, u, phi, fs);
      return fs.back();
    };
    out.rules.f.push_back(std::move(f));
  }
  for (int t = 1; t < t_max; ++t) {
    GRule g;
    g.eval = [st](History a, const Mat& v) {
      std::vector<Mat> varphi, gs;
      unroll_v(*st, a, v, varphi, gs);
      return gs.back();
    };
    out.rules.g.push_back(std::move(g));
  }

  OnsagerRecursion rec(model, spec.dim, opts);
  rec.start(out.rules.f_at(0));
  for (int t = 1; t < t_max; ++t) {
    rec.advance_g(t, out.rules.g_at(t));
    st->onsager = rec.onsager();
    rec.advance_f(t, out.rules.f_at(t));
    st->onsager = rec.onsager();
  }
  out.onsager = rec.onsager();
  out.se = rec.se();
  out.diagnostics = rec.diagnostics();

  out.varphi = [st](int t, History a, const Mat& v) {
    if (t < 1 || t > static_cast<int>(a.size())) throw ConfigError("varphi: index out of range");
    std::vector<Mat> varphi, gs;
    unroll_v(*st, a.first(t), v, varphi, gs, false);
    return varphi.back();
  };
  out.phi = [st](int t, History b, const Vec& y, const Mat& u) {
    if (t < 1 || t > static_cast<int>(b.size())) throw ConfigError("phi: index out of range");
    std::vector<Mat> phi, fs;
    unroll_u(*st, b.first(t), y, u, phi, fs);
    return phi.back();
  };
  return out;
}

}  // namespace gfomlb
