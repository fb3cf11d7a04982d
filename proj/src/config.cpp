#include "lgmcheck/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lgmcheck/error.hpp"
#include "lgmcheck/io.hpp"

namespace lgmcheck {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
void get_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

PriorSpec parse_prior(const std::string& name, const json& j) {
  PriorSpec p;
  const std::string type = j.value("type", "flat");
  if (type == "flat") {
    p.kind = PriorSpec::Kind::Flat;
  } else if (type == "gamma") {
    p.kind = PriorSpec::Kind::GammaPrecision;
    p.shape = j.value("shape", 1.0);
    p.rate = j.value("rate", 5e-5);
    if (!(p.shape > 0) || !(p.rate > 0)) throw Error(ErrorCode::ConfigError, "gamma prior on '" + name + "' needs shape, rate > 0");
  } else if (type == "uniform") {
    p.kind = PriorSpec::Kind::UniformTransformed;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown prior type '" + type + "' for '" + name + "'");
  }
  return p;
}

ComponentSpec parse_component(const json& j) {
  ComponentSpec c;
  get_opt(j, "label", c.label);
  get_opt(j, "kind", c.kind);
  get_opt(j, "group", c.group);
  get_opt(j, "weight", c.weight);
  get_opt(j, "edges", c.edges);
  get_opt(j, "D", c.D);
  get_opt(j, "h", c.h);
  get_opt(j, "n", c.n);
  static const std::set<std::string> kinds{"rw1", "iid", "sar", "custom"};
  if (!kinds.count(c.kind)) throw Error(ErrorCode::ConfigError, "unknown latent kind '" + c.kind + "'");
  return c;
}

SimStudyConfig parse_simstudy(const json& j) {
  SimStudyConfig s;
  get_opt(j, "N_values", s.N_values);
  get_opt(j, "eta_values", s.eta_values);
  get_opt(j, "sigma_w_values", s.sigma_w_values);
  get_opt(j, "sigma_eps", s.sigma_eps);
  get_opt(j, "n_datasets", s.n_datasets);
  get_opt(j, "grid_points", s.grid_points);
  get_opt(j, "prior_shape", s.prior_shape);
  get_opt(j, "prior_rate", s.prior_rate);
  const std::string inf = j.value("inference", "mode");
  if (inf != "mode" && inf != "grid") throw Error(ErrorCode::ConfigError, "simstudy inference must be mode or grid");
  s.use_grid = inf == "grid";
  return s;
}

// Node index per observation and node count for one component.
std::pair<std::vector<int>, int> node_map(const CsvTable& t, const ComponentSpec& c, int N) {
  std::vector<int> idx(N);
  if (c.group.empty()) {
    for (int i = 0; i < N; ++i) idx[i] = i;
    return {idx, c.n > 0 ? c.n : N};
  }
  const auto vals = t.strings(c.group);
  bool integral = true;
  for (const auto& v : vals) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || d != std::floor(d) || d < 1) {
      integral = false;
      break;
    }
  }
  int n = 0;
  if (integral) {
    for (int i = 0; i < N; ++i) {
      idx[i] = static_cast<int>(std::strtod(vals[i].c_str(), nullptr)) - 1;
      n = std::max(n, idx[i] + 1);
    }
  } else {
    std::map<std::string, int> ids;
    for (int i = 0; i < N; ++i) {
      auto it = ids.find(vals[i]);
      if (it == ids.end()) it = ids.emplace(vals[i], static_cast<int>(ids.size())).first;
      idx[i] = it->second;
    }
    n = static_cast<int>(ids.size());
  }
  if (c.n > 0) {
    if (n > c.n) throw Error(ErrorCode::ConfigError, "group column '" + c.group + "' exceeds n");
    n = c.n;
  }
  return {idx, n};
}

double sample_var(const Vec& v) {
  if (v.size() < 2) return 1.0;
  return std::max((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1), 1e-12);
}

}  // namespace

ReferenceMethod parse_reference(const std::string& s) {
  if (s == "analytic") return ReferenceMethod::ANALYTIC_GAUSSIAN;
  if (s == "mc") return ReferenceMethod::MC_REFERENCE;
  if (s == "i0") return ReferenceMethod::I0_APPROX;
  throw Error(ErrorCode::ConfigError, "reference must be analytic, mc or i0");
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  try {
    get_opt(j, "data", c.data);
    get_opt(j, "response", c.response);
    get_opt(j, "covariates", c.covariates);
    get_opt(j, "intercept", c.intercept);
    get_opt(j, "beta_prior_precision", c.beta_prior_precision);
    if (j.contains("latent")) {
      const json& l = j.at("latent");
      if (l.is_array())
        for (const auto& e : l) c.components.push_back(parse_component(e));
      else
        c.components.push_back(parse_component(l));
    }
    if (j.contains("hyper")) {
      for (const auto& [k, v] : j.at("hyper").items()) {
        if (k == "tau_eps") {
          c.init.tau_eps = v.get<double>();
          c.init_tau_given = true;
        } else if (k == "sigma_eps") {
          c.init.tau_eps = 1.0 / (v.get<double>() * v.get<double>());
          c.init_tau_given = true;
        } else {
          c.init.theta2[k] = v.get<double>();
        }
      }
    }
    if (j.contains("priors"))
      for (const auto& [k, v] : j.at("priors").items()) c.priors[k] = parse_prior(k, v);
    get_opt(j, "fixed", c.fixed);
    get_opt(j, "inference", c.inference);
    get_opt(j, "grid_points", c.grid_points);
    get_opt(j, "span_sd", c.span_sd);
    get_opt(j, "reference", c.reference);
    get_opt(j, "n_rep", c.n_rep);
    get_opt(j, "targets", c.targets);
    get_opt(j, "trigger", c.trigger);
    if (j.contains("theta_eta")) {
      if (j.at("theta_eta").is_null())
        c.theta_eta.reset();
      else
        c.theta_eta = j.at("theta_eta").get<double>();
    }
    get_opt(j, "check_component", c.check_component);
    get_opt(j, "seed", c.seed);
    get_opt(j, "threads", c.threads);
    get_opt(j, "out", c.out);
    if (j.contains("matern")) {
      const json& mj = j.at("matern");
      MaternSpec m;
      get_opt(mj, "x", m.x);
      get_opt(mj, "y", m.y);
      get_opt(mj, "nu", m.nu);
      get_opt(mj, "eps", m.eps);
      get_opt(mj, "standardize", m.standardize);
      get_opt(mj, "n_rep", m.n_rep);
      get_opt(mj, "hyper_source", m.hyper_source);
      get_opt(mj, "draws", m.draws);
      get_opt(mj, "forward", m.forward);
      c.matern = m;
    }
    if (j.contains("simstudy")) c.simstudy = parse_simstudy(j.at("simstudy"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad config value: ") + e.what());
  }
  if (c.inference != "mode" && c.inference != "grid" && c.inference != "fixed")
    throw Error(ErrorCode::ConfigError, "inference must be mode, grid or fixed");
  (void)parse_reference(c.reference);
  if (c.grid_points < 1) throw Error(ErrorCode::ConfigError, "grid_points must be >= 1");
  if (c.threads < 1) throw Error(ErrorCode::ConfigError, "threads must be >= 1");
  std::set<std::string> labels;
  for (const auto& comp : c.components)
    if (!labels.insert(comp.label).second) throw Error(ErrorCode::ConfigError, "duplicate component label '" + comp.label + "'");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const fs::path dir = fs::path(path).parent_path();
  return parse_run_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::string resolve_path(const RunConfig& cfg, const std::string& p) {
  if (p.empty()) return p;
  const fs::path q(p);
  if (q.is_absolute()) return p;
  return (fs::path(cfg.base_dir) / q).string();
}

GaussianLGM build_model(const RunConfig& cfg) {
  if (cfg.data.empty()) throw Error(ErrorCode::ConfigError, "no data file given");
  if (cfg.components.empty()) throw Error(ErrorCode::ConfigError, "no latent component given");
  const CsvTable t = read_csv(resolve_path(cfg, cfg.data));
  const Vec y = t.numeric(cfg.response);
  const int N = static_cast<int>(y.size());
  const int p = (cfg.intercept ? 1 : 0) + static_cast<int>(cfg.covariates.size());
  Mat B(N, p);
  int col = 0;
  if (cfg.intercept) B.col(col++).setOnes();
  for (const auto& name : cfg.covariates) B.col(col++) = t.numeric(name);
  Mat Qb = cfg.beta_prior_precision * Mat::Identity(p, p);

  std::vector<LatentStructure> parts;
  std::vector<std::string> labels;
  std::vector<Eigen::Triplet<double>> trip;
  int col0 = 0;
  for (const auto& c : cfg.components) {
    auto [idx, n] = node_map(t, c, N);
    LatentStructure s;
    if (c.kind == "rw1") {
      s = build_rw1(n, 1.0);
    } else if (c.kind == "iid") {
      s = build_iid(n, 1.0);
    } else if (c.kind == "sar") {
      if (c.edges.empty()) throw Error(ErrorCode::ConfigError, "sar component needs an edge list");
      s = build_sar(read_edges(resolve_path(cfg, c.edges)), 0.5, 1.0, n);
    } else {
      s = load_custom(resolve_path(cfg, c.D), resolve_path(cfg, c.h));
      check_nonsingular(s);
    }
    if (s.n_w() != n)
      throw Error(ErrorCode::DimensionMismatch, "component '" + c.label + "' has " + std::to_string(s.n_w()) +
                                                    " nodes but the data map to " + std::to_string(n));
    const Vec wcol = c.weight.empty() ? Vec::Ones(N) : t.numeric(c.weight);
    for (int i = 0; i < N; ++i)
      if (wcol(i) != 0.0) trip.emplace_back(i, col0 + idx[i], wcol(i));
    col0 += n;
    parts.push_back(std::move(s));
    labels.push_back(c.label);
  }
  LatentStructure latent;
  if (parts.size() == 1) {
    latent = std::move(parts[0]);
    latent.blocks[0].label = labels[0];
  } else {
    latent = block_diag(parts, labels);
  }
  SpMat A(N, col0);
  A.setFromTriplets(trip.begin(), trip.end());
  GaussianLGM m = assemble_lgm(y, B, A, Qb, latent, cfg.priors);
  const auto names = m.hyper_names();
  for (const auto& f : cfg.fixed) {
    if (std::find(names.begin(), names.end(), f) == names.end())
      throw Error(ErrorCode::ConfigError, "cannot fix unknown hyperparameter '" + f + "'");
    m.fixed.insert(f);
  }
  for (const auto& [k, v] : cfg.init.theta2)
    if (std::find(names.begin(), names.end(), k) == names.end())
      throw Error(ErrorCode::ConfigError, "unknown hyperparameter '" + k + "'");
  if (!cfg.check_component.empty()) (void)m.latent.block_rows(cfg.check_component);
  return m;
}

HyperParams initial_hyper(const RunConfig& cfg, const GaussianLGM& m) {
  HyperParams hp;
  const double vy = sample_var(m.y);
  hp.tau_eps = cfg.init_tau_given ? cfg.init.tau_eps : 2.0 / vy;
  for (const auto& b : m.latent.blocks) {
    if (!b.sigma_name.empty()) {
      double s = std::sqrt(vy / 2.0);
      if (b.kind == LatentKind::RW1 && m.n_w() == m.n_obs()) {
        const Vec dy = m.y.tail(m.n_obs() - 1) - m.y.head(m.n_obs() - 1);
        s = std::sqrt(sample_var(dy) / 2.0);
      }
      hp.theta2[b.sigma_name] = s;
    }
    if (!b.rho_name.empty()) hp.theta2[b.rho_name] = 0.5;
  }
  for (const auto& [k, v] : cfg.init.theta2) hp.theta2[k] = v;
  return hp;
}

WorkflowConfig workflow_config(const RunConfig& cfg, const GaussianLGM& m) {
  WorkflowConfig w;
  w.init = initial_hyper(cfg, m);
  w.run_eb = cfg.inference != "fixed";
  w.use_grid = cfg.inference == "grid";
  w.grid_points = cfg.grid_points;
  w.span_sd = cfg.span_sd;
  w.reference = parse_reference(cfg.reference);
  w.n_rep = cfg.n_rep;
  w.targets = TargetSelection{cfg.targets, {}};
  w.trigger = cfg.trigger;
  w.theta_eta = cfg.theta_eta;
  w.seed = cfg.seed;
  w.threads = cfg.threads;
  w.block = cfg.check_component;
  return w;
}

}  // namespace lgmcheck
