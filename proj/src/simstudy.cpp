#include "lgmcheck/simstudy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include "lgmcheck/check.hpp"
#include "lgmcheck/error.hpp"
#include "lgmcheck/io.hpp"
#include "lgmcheck/nig.hpp"
#include "lgmcheck/parallel.hpp"
#include "lgmcheck/samplers.hpp"
#include "lgmcheck/special.hpp"

namespace lgmcheck {

namespace {

constexpr int kWarmChunk = 10;

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

Vec simulate_rw1_data(int N, double sigma_w, double sigma_eps, double eta, RngStream& rng) {
  const LatentSimulator sim(build_rw1(N, sigma_w));
  Vec y = sim.draw(eta, rng);
  for (int i = 0; i < N; ++i) y(i) += sigma_eps * rng.normal();
  return y;
}

GaussianLGM rw1_signal_model(const Vec& y, double prior_shape, double prior_rate) {
  const int n = static_cast<int>(y.size());
  PriorSpec pr{PriorSpec::Kind::GammaPrecision, prior_shape, prior_rate};
  return assemble_lgm(y, Mat(n, 0), sparse_identity(n), Mat(0, 0), build_rw1(n, 1.0),
                      {{"tau_eps", pr}, {"sigma_w", pr}});
}

HyperParams rw1_initial_guess(const Vec& y) {
  const Eigen::Index n = y.size();
  const Vec dy = y.tail(n - 1) - y.head(n - 1);
  const double v = std::max((dy.array() - dy.mean()).square().sum() / std::max<Eigen::Index>(1, dy.size() - 1), 1e-12);
  HyperParams hp;
  hp.tau_eps = 2.0 / v;
  hp.theta2["sigma_w"] = std::sqrt(v / 2.0);
  return hp;
}

std::uint64_t sim_stream(int cell, int replicate) {
  return (static_cast<std::uint64_t>(cell) << 32) | static_cast<std::uint32_t>(replicate);
}

SimStudyResult run_sim_study(const SimStudyConfig& cfg) {
  if (cfg.N_values.empty() || cfg.eta_values.empty() || cfg.sigma_w_values.empty())
    throw Error(ErrorCode::ConfigError, "simulation grids must be non-empty");
  if (cfg.n_datasets < 1) throw Error(ErrorCode::ConfigError, "n_datasets must be >= 1");
  for (double e : cfg.eta_values)
    if (!(e >= 0)) throw Error(ErrorCode::ConfigError, "eta values must be >= 0");
  for (double s : cfg.sigma_w_values)
    if (!(s > 0)) throw Error(ErrorCode::ConfigError, "sigma_w values must be > 0");
  for (int N : cfg.N_values)
    if (N < 3) throw Error(ErrorCode::ConfigError, "N must be >= 3");
  if (!(cfg.sigma_eps > 0)) throw Error(ErrorCode::ConfigError, "sigma_eps must be > 0");

  SimStudyResult out;
  const int R = cfg.n_datasets;
  int cell = 0;
  for (int N : cfg.N_values) {
    for (double sw : cfg.sigma_w_values) {
      for (double eta : cfg.eta_values) {
        std::vector<SimStudyRow> rows(R);
        const int n_chunks = (R + kWarmChunk - 1) / kWarmChunk;
        const int this_cell = cell++;
        // replicates in a chunk run in order, each warm-started from the previous mode
        parallel_for(n_chunks, cfg.threads, [&](std::size_t c) {
          std::optional<HyperParams> warm;
          const int lo = static_cast<int>(c) * kWarmChunk, hi = std::min(R, lo + kWarmChunk);
          for (int r = lo; r < hi; ++r) {
            SimStudyRow& row = rows[r];
            row.N = N;
            row.eta = eta;
            row.sigma_w = sw;
            row.replicate = r;
            try {
              RngStream rng(cfg.seed, sim_stream(this_cell, r));
              const Vec y = simulate_rw1_data(N, sw, cfg.sigma_eps, eta, rng);
              const GaussianLGM m = rw1_signal_model(y, cfg.prior_shape, cfg.prior_rate);
              WorkflowConfig wc;
              wc.init = warm ? *warm : rw1_initial_guess(y);
              wc.use_grid = cfg.use_grid;
              wc.grid_points = cfg.grid_points;
              wc.reference = ReferenceMethod::ANALYTIC_GAUSSIAN;
              wc.trigger = -1.0;
              wc.theta_eta.reset();
              const WorkflowResult res = run_workflow(m, wc);
              warm = res.eb.mode;
              row.s0 = res.check.s0_obs;
              row.i0 = res.sens.i0;
              row.p_value = res.check.p_value;
              row.tau_eps_hat = res.eb.mode.tau_eps;
              row.sigma_w_hat = res.eb.mode.theta2.at("sigma_w");
              row.ok = true;
            } catch (const Error& e) {
              row.ok = false;
              row.error = e.what();
              row.p_value = std::nan("");
            }
          }
        });
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
      }
    }
  }
  return out;
}

void write_simstudy_csv(const std::string& path, const SimStudyResult& r) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << "N,eta,sigma_w,replicate,s0,i0,p_value,tau_eps_hat,sigma_w_hat,ok,error\n";
  for (const auto& row : r.rows) {
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    f << row.N << ',' << format_double(row.eta) << ',' << format_double(row.sigma_w) << ',' << row.replicate << ','
      << format_double(row.s0) << ',' << format_double(row.i0) << ',' << format_double(row.p_value) << ','
      << format_double(row.tau_eps_hat) << ',' << format_double(row.sigma_w_hat) << ',' << (row.ok ? 1 : 0) << ','
      << err << '\n';
  }
}

SimStudyResult read_simstudy_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const Vec N = t.numeric("N"), eta = t.numeric("eta"), sw = t.numeric("sigma_w"), rep = t.numeric("replicate"),
            s0 = t.numeric("s0"), i0 = t.numeric("i0"), p = t.numeric("p_value"), te = t.numeric("tau_eps_hat"),
            swh = t.numeric("sigma_w_hat"), ok = t.numeric("ok");
  const auto err = t.strings("error");
  SimStudyResult r;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    SimStudyRow row;
    row.N = static_cast<int>(N(i));
    row.eta = eta(i);
    row.sigma_w = sw(i);
    row.replicate = static_cast<int>(rep(i));
    row.s0 = s0(i);
    row.i0 = i0(i);
    row.p_value = p(i);
    row.tau_eps_hat = te(i);
    row.sigma_w_hat = swh(i);
    row.ok = ok(i) != 0.0;
    row.error = err[i];
    r.rows.push_back(row);
  }
  return r;
}

double median_p(const SimStudyResult& r, int N, double sigma_w, double eta) {
  std::vector<double> p;
  for (const auto& row : r.rows)
    if (row.ok && row.N == N && std::abs(row.sigma_w - sigma_w) < 1e-12 && std::abs(row.eta - eta) < 1e-12)
      p.push_back(row.p_value);
  return median(p);
}

std::vector<DetectabilityPoint> estimate_detectability(const GaussianLGM& m, const HyperParams& hp,
                                                       const LatentStructure& latent,
                                                       const std::vector<double>& eta_grid, int n_rep,
                                                       std::uint64_t seed, int threads) {
  if (n_rep < 1000) throw Error(ErrorCode::InvalidArgument, "detectability needs n_rep >= 1000");
  std::vector<DetectabilityPoint> out;
  for (size_t k = 0; k < eta_grid.size(); ++k) {
    if (!(eta_grid[k] >= 0)) throw Error(ErrorCode::InvalidArgument, "eta must be >= 0");
    const Vec s = s0_replicates(m, hp, latent, eta_grid[k], n_rep, seed, k * static_cast<std::uint64_t>(n_rep), threads);
    if (s.size() < 2) throw Error(ErrorCode::TooFewDraws, "all detectability replicates failed");
    DetectabilityPoint pt;
    pt.eta = eta_grid[k];
    const double n = static_cast<double>(s.size());
    pt.mean = s.mean();
    pt.sd = std::sqrt((s.array() - pt.mean).square().sum() / (n - 1.0));
    pt.ratio = pt.sd > 0 ? pt.mean / pt.sd : 0.0;
    pt.ratio_se = std::sqrt((1.0 + 0.5 * pt.ratio * pt.ratio) / n);
    out.push_back(pt);
  }
  return out;
}

double ks_distance_normal(std::vector<double> z) {
  if (z.size() < 2) throw Error(ErrorCode::TooFewDraws, "KS distance needs at least two values");
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    const double F = norm_cdf(z[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

std::vector<NormalityCell> normality_diagnostic(const std::vector<int>& N_values,
                                                const std::vector<double>& sigma_w_values, double sigma_eps,
                                                int n_rep, std::uint64_t seed, int threads) {
  if (n_rep < 2) throw Error(ErrorCode::TooFewDraws, "normality diagnostic needs at least two replicates");
  std::vector<NormalityCell> out;
  int cell = 0;
  for (int N : N_values) {
    for (double sw : sigma_w_values) {
      NormalityCell c;
      c.N = N;
      c.sigma_w = sw;
      RngStream rng(seed, sim_stream(cell, 0));
      const Vec y = simulate_rw1_data(N, sw, sigma_eps, 0.0, rng);
      const GaussianLGM m = rw1_signal_model(y);
      const HyperParams hp = empirical_bayes(m, rw1_initial_guess(y));
      const JointPosterior post = conditional_posterior(m, hp);
      const PerturbationGeometry g = perturb_geometry(post, post.latent);
      c.i0 = i0_analytic(g);
      if (!(c.i0 > 0)) {
        c.empty = true;
      } else {
        const Vec s = s0_replicates(m, hp, post.latent, 0.0, n_rep, seed, sim_stream(cell, 1), threads);
        if (s.size() < 2) throw Error(ErrorCode::TooFewDraws, "all replicates failed");
        std::vector<double> z(s.size());
        const double scale = 1.0 / std::sqrt(c.i0);
        for (Eigen::Index i = 0; i < s.size(); ++i) z[i] = s(i) * scale;
        c.n_rep = static_cast<int>(z.size());
        c.ks = ks_distance_normal(z);
      }
      out.push_back(c);
      ++cell;
    }
  }
  return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorCode::DimensionMismatch, "spearman needs equal lengths >= 2");
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

}  // namespace lgmcheck
