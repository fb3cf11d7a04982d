#include "lgmcheck/report.hpp"

#include <cmath>
#include <fstream>

#include "lgmcheck/error.hpp"
#include "lgmcheck/io.hpp"

namespace lgmcheck {

using nlohmann::json;

namespace {

// JSON has no NaN/Inf; they are written as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

}  // namespace

json hyper_json(const HyperParams& hp) {
  json j = json::object();
  j["tau_eps"] = num(hp.tau_eps);
  for (const auto& [k, v] : hp.theta2) j[k] = num(v);
  return j;
}

HyperParams hyper_from_json(const json& j) {
  HyperParams hp;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "tau_eps")
        hp.tau_eps = v.get<double>();
      else
        hp.theta2[k] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad hyperparameter record: ") + e.what());
  }
  return hp;
}

json check_json(const CheckReport& c) {
  json j;
  j["s0_obs"] = num(c.s0_obs);
  j["ref_mean"] = num(c.ref_mean);
  j["ref_sd"] = num(c.ref_sd);
  j["p_value"] = num(c.p_value);
  j["method"] = method_name(c.method);
  j["n_ref_samples"] = c.ref_samples ? static_cast<int>(c.ref_samples->size()) : 0;
  j["failed_replicates"] = c.failed_replicates;
  j["theta_eta"] = c.theta_eta ? json(*c.theta_eta) : json(nullptr);
  j["robust"] = c.robust;
  return j;
}

json sensitivity_json(const SensitivityReport& s) {
  json j;
  j["s0"] = num(s.s0);
  j["i0"] = s.i0_available ? num(s.i0) : json(nullptr);
  j["provenance"] = s.provenance;
  json t = json::array();
  for (const auto& name : s.target_order) {
    const auto& ts = s.s_l.at(name);
    t.push_back({{"target", name}, {"raw", num(ts.raw)}, {"sd", num(ts.sd)}, {"scaled", num(ts.scaled)}});
  }
  j["targets"] = t;
  return j;
}

json fit_json(const GaussianLGM& m, const EbResult& eb, const HyperGrid& grid) {
  json j;
  j["hyper"] = hyper_json(eb.mode);
  j["log_marginal"] = num(log_marginal(m, eb.mode));
  j["eb_objective"] = num(eb.objective);
  j["converged"] = eb.converged;
  j["evaluations"] = eb.evaluations;
  const JointPosterior post = conditional_posterior(m, eb.mode);
  j["posterior_mean_w"] = vec_json(post.mean_w());
  j["posterior_mean_beta"] = vec_json(post.mean_beta());
  Vec sd_beta(post.p);
  if (post.p > 0) {
    Mat C = Mat::Zero(post.p + post.n_w, post.p);
    C.topRows(post.p).setIdentity();
    sd_beta = post.target_variance(C).cwiseSqrt();
  }
  j["posterior_sd_beta"] = vec_json(sd_beta);
  j["ridge_used"] = num(post.ridge_used);
  json g = json::array();
  for (size_t k = 0; k < grid.points.size(); ++k)
    g.push_back({{"hyper", hyper_json(grid.points[k])}, {"weight", num(grid.weights[k])}});
  j["grid"] = g;
  j["hessian_fallback"] = grid.hessian_fallback;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_d_scores(const std::string& path, const Vec& d) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << "index,d\n";
  for (Eigen::Index i = 0; i < d.size(); ++i) f << i + 1 << ',' << format_double(d(i)) << '\n';
}

void write_ref_samples(const std::string& path, const Vec& s) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << "s0\n";
  for (Eigen::Index i = 0; i < s.size(); ++i) f << format_double(s(i)) << '\n';
}

void write_matern_scatter(const std::string& path, const std::vector<ScatterRow>& rows) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << "d_obs,d_rep,weight,sigma_eps,sigma_w,rho\n";
  for (const auto& r : rows)
    f << format_double(r.d_obs) << ',' << format_double(r.d_rep) << ',' << format_double(r.weight) << ','
      << format_double(r.hyper.sigma_eps) << ',' << format_double(r.hyper.sigma_w) << ','
      << format_double(r.hyper.rho) << '\n';
}

}  // namespace lgmcheck
