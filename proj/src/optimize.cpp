#include "lgmcheck/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lgmcheck/error.hpp"
#include "lgmcheck/parallel.hpp"

namespace lgmcheck {

namespace {

double safe_eval(const std::function<double(const Vec&)>& f, const Vec& x, int& count) {
  ++count;
  try {
    double v = f(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return -std::numeric_limits<double>::infinity();
  }
}

OptimResult run_simplex(const std::function<double(const Vec&)>& f, const Vec& x0, double step,
                        const NelderMeadOptions& opt, int& count) {
  const int n = static_cast<int>(x0.size());
  std::vector<Vec> pts(n + 1, x0);
  std::vector<double> val(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1](i) += step;
  for (int i = 0; i <= n; ++i) val[i] = safe_eval(f, pts[i], count);

  std::vector<int> order(n + 1);
  auto diameter = [&]() {
    double d = 0.0;
    for (int i = 1; i <= n; ++i) d = std::max(d, (pts[order[i]] - pts[order[0]]).cwiseAbs().maxCoeff());
    return d;
  };
  OptimResult res;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return val[a] > val[b]; });
    res.diameter = diameter();
    if (res.diameter < opt.tol && std::isfinite(val[order[0]])) {
      res.converged = true;
      break;
    }
    const int worst = order[n], second = order[n - 1], best = order[0];
    Vec centroid = Vec::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[order[i]];
    centroid /= n;
    Vec xr = centroid + (centroid - pts[worst]);
    double fr = safe_eval(f, xr, count);
    if (fr > val[best]) {
      Vec xe = centroid + 2.0 * (centroid - pts[worst]);
      double fe = safe_eval(f, xe, count);
      if (fe > fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr > val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr > val[worst];
    Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid)) : Vec(centroid + 0.5 * (pts[worst] - centroid));
    double fc = safe_eval(f, xc, count);
    if (fc > (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      const int k = order[i];
      pts[k] = pts[best] + 0.5 * (pts[k] - pts[best]);
      val[k] = safe_eval(f, pts[k], count);
    }
  }
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return val[a] > val[b]; });
  res.x = pts[order[0]];
  res.value = val[order[0]];
  res.diameter = diameter();
  res.converged = res.converged || (res.diameter < opt.tol && std::isfinite(res.value));
  return res;
}

}  // namespace

OptimResult nelder_mead_maximize(const std::function<double(const Vec&)>& f, const Vec& x0,
                                 const NelderMeadOptions& opt) {
  int count = 0;
  if (x0.size() == 0) {
    OptimResult r;
    r.x = x0;
    r.value = safe_eval(f, x0, count);
    r.converged = true;
    r.evaluations = count;
    return r;
  }
  OptimResult best = run_simplex(f, x0, opt.initial_step, opt, count);
  double step = opt.initial_step;
  for (int r = 0; r < opt.restarts; ++r) {
    step = std::max(step * 0.2, 10 * opt.tol);
    OptimResult next = run_simplex(f, best.x, step, opt, count);
    const bool moved = (next.x - best.x).cwiseAbs().maxCoeff() >= opt.tol;
    if (next.value >= best.value) best = next;
    if (!moved && best.converged) break;
  }
  best.evaluations = count;
  return best;
}

Mat numerical_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double step) {
  const int n = static_cast<int>(x.size());
  Mat H(n, n);
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    Vec a = x, b = x;
    a(i) += step;
    b(i) -= step;
    H(i, i) = (f(a) - 2 * f0 + f(b)) / (step * step);
    for (int j = 0; j < i; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp(i) += step; pp(j) += step;
      pm(i) += step; pm(j) -= step;
      mp(i) -= step; mp(j) += step;
      mm(i) -= step; mm(j) -= step;
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * step * step);
    }
  }
  return H;
}

RegularGrid regular_grid(const std::function<double(const Vec&)>& f, const Vec& u0, int points_per_dim,
                         double span_sd, int threads) {
  if (points_per_dim < 1 || points_per_dim % 2 == 0)
    throw Error(ErrorCode::InvalidArgument, "points_per_dim must be odd and >= 1");
  RegularGrid g;
  const int d = static_cast<int>(u0.size());
  if (points_per_dim == 1 || d == 0) {
    g.points.push_back(u0);
    g.log_objective.push_back(f(u0));
    g.weights.push_back(1.0);
    g.sd.assign(d, 0.0);
    return g;
  }
  const int half = points_per_dim / 2;
  Vec step(d);
  g.sd.assign(d, 0.0);
  bool ok = true;
  try {
    Mat H = numerical_hessian(f, u0, 5e-3);
    Eigen::LLT<Mat> llt(-H);
    if (!H.allFinite() || llt.info() != Eigen::Success) {
      ok = false;
    } else {
      Mat cov = llt.solve(Mat::Identity(d, d));
      for (int k = 0; k < d; ++k) {
        g.sd[k] = std::sqrt(cov(k, k));
        step(k) = span_sd * g.sd[k] / half;
      }
    }
  } catch (const Error&) {
    ok = false;
  }
  if (!ok) {
    g.hessian_fallback = true;
    step.setConstant(0.3);
  }
  int total = 1;
  for (int k = 0; k < d; ++k) total *= points_per_dim;
  g.points.assign(total, u0);
  for (int idx = 0; idx < total; ++idx) {
    int r = idx;
    for (int k = 0; k < d; ++k) {
      const int j = r % points_per_dim - half;
      r /= points_per_dim;
      g.points[idx](k) = u0(k) + j * step(k);
    }
  }
  g.log_objective.assign(total, -std::numeric_limits<double>::infinity());
  parallel_for(total, threads, [&](std::size_t i) {
    try {
      const double v = f(g.points[i]);
      if (std::isfinite(v)) g.log_objective[i] = v;
    } catch (const Error&) {
    }
  });
  const double mx = *std::max_element(g.log_objective.begin(), g.log_objective.end());
  if (!std::isfinite(mx)) throw Error(ErrorCode::NumericalBreakdown, "no finite objective on the grid");
  g.weights.resize(total);
  double sum = 0.0;
  for (int i = 0; i < total; ++i) sum += (g.weights[i] = std::exp(g.log_objective[i] - mx));
  for (auto& w : g.weights) w /= sum;
  return g;
}

}  // namespace lgmcheck
