// lgmcheck command-line front end.
// Exit codes: 0 success, 2 usage/config error, 3 numeric failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lgmcheck/check.hpp"
#include "lgmcheck/config.hpp"
#include "lgmcheck/error.hpp"
#include "lgmcheck/io.hpp"
#include "lgmcheck/matern.hpp"
#include "lgmcheck/report.hpp"
#include "lgmcheck/samplers.hpp"
#include "lgmcheck/simstudy.hpp"

namespace fs = std::filesystem;
using namespace lgmcheck;

namespace {

struct Common {
  std::string config, data, out, reference, fit;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, grid_points;
  std::optional<double> trigger;
};

void add_common(CLI::App* sc, Common& c) {
  sc->add_option("--config", c.config, "JSON run configuration");
  sc->add_option("--data", c.data, "data CSV (overrides the config)");
  sc->add_option("--out", c.out, "output directory");
  sc->add_option("--seed", c.seed, "random seed");
  sc->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  sc->add_option("--reference", c.reference, "reference distribution")
      ->check(CLI::IsMember({"analytic", "mc", "i0"}));
  sc->add_option("--grid-points", c.grid_points, "hyperparameter grid points per dimension")
      ->check(CLI::PositiveNumber);
  sc->add_option("--trigger", c.trigger, "p-value below which sensitivities are computed");
}

RunConfig resolve(const Common& c, bool need_config) {
  RunConfig cfg;
  if (!c.config.empty())
    cfg = load_run_config(c.config);
  else if (need_config)
    throw Error(ErrorCode::ConfigError, "--config is required");
  if (!c.data.empty()) {
    cfg.data = fs::absolute(c.data).string();
  }
  if (!c.out.empty()) cfg.out = c.out;
  else if (!c.config.empty()) cfg.out = resolve_path(cfg, cfg.out);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.reference.empty()) cfg.reference = c.reference;
  if (c.grid_points) {
    cfg.grid_points = *c.grid_points;
    if (cfg.inference == "mode" && *c.grid_points > 1) cfg.inference = "grid";
  }
  if (c.trigger) cfg.trigger = *c.trigger;
  fs::create_directories(cfg.out.empty() ? "." : cfg.out);
  return cfg;
}

std::string out_file(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

int cmd_fit(const Common& c) {
  const RunConfig cfg = resolve(c, true);
  const GaussianLGM m = build_model(cfg);
  const WorkflowConfig wc = workflow_config(cfg, m);
  EbResult eb;
  if (wc.run_eb) {
    eb = empirical_bayes_full(m, wc.init);
  } else {
    eb.mode = wc.init;
    eb.objective = eb_objective(m, eb.mode);
  }
  HyperGrid grid{{eb.mode}, {1.0}, {}, {}, false};
  if (wc.use_grid && wc.grid_points > 1) grid = hyper_grid(m, eb.mode, wc.grid_points, wc.span_sd, wc.threads);
  nlohmann::json j = fit_json(m, eb, grid);
  j["inference"] = cfg.inference;
  write_json(out_file(cfg, "fit.json"), j);
  std::cout << "log_marginal " << j["log_marginal"] << "\n";
  for (const auto& [k, v] : j["hyper"].items()) std::cout << k << " " << v << "\n";
  return 0;
}

int run_check(const Common& c, bool force_sens) {
  const RunConfig cfg = resolve(c, true);
  const std::string fit_path = c.fit.empty() ? out_file(cfg, "fit.json") : c.fit;
  if (!fs::exists(fit_path))
    throw Error(ErrorCode::ConfigError, "fit artifact " + fit_path + " not found; run 'fit' first");
  const nlohmann::json fit = read_json(fit_path);
  if (!fit.contains("hyper")) throw Error(ErrorCode::ParseError, fit_path + " has no 'hyper' record");
  const GaussianLGM m = build_model(cfg);
  WorkflowConfig wc = workflow_config(cfg, m);
  wc.init = hyper_from_json(fit["hyper"]);
  wc.run_eb = false;
  wc.force_sensitivity = force_sens;
  const WorkflowResult r = run_workflow(m, wc);
  if (!force_sens) {
    write_json(out_file(cfg, "check.json"), check_json(r.check));
    if (r.check.ref_samples) write_ref_samples(out_file(cfg, "ref_samples.csv"), *r.check.ref_samples);
  }
  write_d_scores(out_file(cfg, "d_scores.csv"), r.sens.d);
  const bool sens = !r.sens.target_order.empty();
  if (sens) write_json(out_file(cfg, "sensitivity.json"), sensitivity_json(r.sens));
  std::cout << "s0 " << format_double(r.check.s0_obs) << "\n";
  std::cout << "p " << format_double(r.check.p_value) << " (" << method_name(r.check.method) << ")\n";
  if (sens)
    for (const auto& name : r.sens.target_order)
      std::cout << "sensitivity " << name << " " << format_double(r.sens.s_l.at(name).scaled) << "\n";
  return 0;
}

struct MaternOpts {
  std::optional<double> nu, eps;
  std::optional<int> n_rep;
  std::string hyper_source, draws;
  bool forward = false;
};

int cmd_matern(const Common& c, const MaternOpts& o) {
  RunConfig cfg = resolve(c, false);
  MaternSpec spec = cfg.matern.value_or(MaternSpec{});
  if (o.nu) spec.nu = *o.nu;
  if (o.eps) spec.eps = *o.eps;
  if (o.n_rep) spec.n_rep = *o.n_rep;
  if (!o.hyper_source.empty()) spec.hyper_source = o.hyper_source;
  if (!o.draws.empty()) spec.draws = fs::absolute(o.draws).string();
  if (o.forward) spec.forward = true;
  if (cfg.data.empty()) throw Error(ErrorCode::ConfigError, "--data is required");
  const CsvTable t = read_csv(resolve_path(cfg, cfg.data));
  const Vec x = t.numeric(spec.x);
  Vec y = t.numeric(spec.y);
  if (spec.standardize && y.size() > 1) {
    const double sd = std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1));
    y = (y.array() - y.mean()) / sd;
  }
  HyperSource src;
  if (spec.hyper_source == "mode") {
    src.kind = HyperSourceKind::Mode;
  } else if (spec.hyper_source == "grid") {
    src.kind = HyperSourceKind::Grid;
    src.grid_points = cfg.grid_points;
  } else if (spec.hyper_source == "external") {
    src.kind = HyperSourceKind::External;
    const CsvTable d = read_csv(resolve_path(cfg, spec.draws));
    const Vec se = d.numeric("sigma_eps"), sw = d.numeric("sigma_w"), rho = d.numeric("rho");
    for (Eigen::Index i = 0; i < se.size(); ++i) src.draws.push_back({se(i), sw(i), rho(i)});
  } else {
    throw Error(ErrorCode::ConfigError, "hyper source must be mode, grid or external");
  }
  const MaternCheckResult r =
      matern_smoothness_check(y, distance_matrix(x), spec.nu, spec.eps, src, spec.n_rep, cfg.seed, cfg.threads,
                              spec.forward);
  write_matern_scatter(out_file(cfg, "matern_scatter.csv"), r.scatter);
  nlohmann::json j;
  j["nu"] = spec.nu;
  j["p_value"] = r.p_value;
  j["hyper_source"] = spec.hyper_source;
  j["mode"] = {{"sigma_eps", r.mode.hyper.sigma_eps},
               {"sigma_w", r.mode.hyper.sigma_w},
               {"rho", r.mode.hyper.rho},
               {"log_marginal", r.mode.log_marginal}};
  j["hessian_fallback"] = r.hessian_fallback;
  write_json(out_file(cfg, "matern.json"), j);
  std::cout << "p " << format_double(r.p_value) << "\n";
  return 0;
}

struct SimOpts {
  std::string latent = "rw1", edges;
  double eta = 0.0, sigma_w = 1.0, sigma_eps = 1.0, rho = 0.5;
  int n = 200;
};

int cmd_simulate(const Common& c, const SimOpts& o) {
  const RunConfig cfg = resolve(c, false);
  if (o.eta < 0) throw Error(ErrorCode::InvalidArgument, "eta must be >= 0");
  if (!(o.sigma_eps >= 0)) throw Error(ErrorCode::InvalidArgument, "sigma-eps must be >= 0");
  LatentStructure s;
  if (o.latent == "rw1") {
    s = build_rw1(o.n, o.sigma_w);
  } else if (o.latent == "iid") {
    s = build_iid(o.n, o.sigma_w);
  } else {
    if (o.edges.empty()) throw Error(ErrorCode::ConfigError, "--edges is required for sar");
    s = build_sar(read_edges(o.edges), o.rho, o.sigma_w, o.n);
  }
  RngStream rng(cfg.seed, 0);
  const Vec w = simulate_latent(s, {s.h, o.eta}, rng);
  const std::string path = out_file(cfg, "simulate.csv");
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << "index,w,y\n";
  for (Eigen::Index i = 0; i < w.size(); ++i)
    f << i + 1 << ',' << format_double(w(i)) << ',' << format_double(w(i) + o.sigma_eps * rng.normal()) << '\n';
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_simstudy(const Common& c) {
  const RunConfig cfg = resolve(c, true);
  if (!cfg.simstudy) throw Error(ErrorCode::ConfigError, "config has no 'simstudy' section");
  SimStudyConfig s = *cfg.simstudy;
  s.seed = cfg.seed;
  s.threads = cfg.threads;
  const SimStudyResult r = run_sim_study(s);
  write_simstudy_csv(out_file(cfg, "simstudy.csv"), r);
  int failed = 0;
  for (const auto& row : r.rows) failed += row.ok ? 0 : 1;
  for (int N : s.N_values)
    for (double sw : s.sigma_w_values)
      for (double eta : s.eta_values)
        std::cout << "N=" << N << " sigma_w=" << sw << " eta=" << eta << " median_p=" << median_p(r, N, sw, eta)
                  << "\n";
  std::cout << "failed replicates " << failed << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent non-Gaussianity checks for latent Gaussian models"};
  app.require_subcommand(1);
  Common common;
  MaternOpts mo;
  SimOpts so;

  auto* fit = app.add_subcommand("fit", "fit the LGM by empirical Bayes; writes fit.json");
  add_common(fit, common);
  auto* check = app.add_subcommand("check", "latent Gaussianity check; writes check.json, d_scores.csv");
  add_common(check, common);
  check->add_option("--fit", common.fit, "fit artifact (default <out>/fit.json)");
  auto* sens = app.add_subcommand("sens", "sensitivity of linear targets; writes sensitivity.json");
  add_common(sens, common);
  sens->add_option("--fit", common.fit, "fit artifact (default <out>/fit.json)");
  auto* matern = app.add_subcommand("matern", "Matern smoothness check; writes matern_scatter.csv");
  add_common(matern, common);
  matern->add_option("--nu", mo.nu, "smoothness under check");
  matern->add_option("--eps", mo.eps, "finite-difference step in nu");
  matern->add_option("--n-rep", mo.n_rep, "replicates per hyperparameter point")->check(CLI::PositiveNumber);
  matern->add_option("--hyper-source", mo.hyper_source, "mode, grid or external")
      ->check(CLI::IsMember({"mode", "grid", "external"}));
  matern->add_option("--draws", mo.draws, "CSV of external (sigma_eps, sigma_w, rho) draws");
  matern->add_flag("--forward", mo.forward, "forward instead of central difference");
  auto* simulate = app.add_subcommand("simulate", "simulate a latent path and data; writes simulate.csv");
  add_common(simulate, common);
  simulate->add_option("--latent", so.latent, "rw1, iid or sar")->check(CLI::IsMember({"rw1", "iid", "sar"}));
  simulate->add_option("--eta", so.eta, "NIG non-Gaussianity");
  simulate->add_option("--n", so.n, "number of nodes")->check(CLI::PositiveNumber);
  simulate->add_option("--sigma-w", so.sigma_w, "latent scale");
  simulate->add_option("--sigma-eps", so.sigma_eps, "observation noise SD");
  simulate->add_option("--rho", so.rho, "SAR autocorrelation");
  simulate->add_option("--edges", so.edges, "SAR edge list");
  auto* simstudy = app.add_subcommand("simstudy", "factorial simulation study; writes simstudy.csv");
  add_common(simstudy, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*fit) return cmd_fit(common);
    if (*check) return run_check(common, false);
    if (*sens) return run_check(common, true);
    if (*matern) return cmd_matern(common, mo);
    if (*simulate) return cmd_simulate(common, so);
    if (*simstudy) return cmd_simstudy(common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numeric_failure(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
