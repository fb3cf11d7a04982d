#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lgmcheck/linalg.hpp"

namespace lgmcheck {

enum class LatentKind { RW1, IID, SAR, CUSTOM };

[[nodiscard]] const char* kind_name(LatentKind k);

// One hyperparameter-bound piece of a (possibly block-diagonal) structure.
struct LatentBlock {
  LatentKind kind = LatentKind::CUSTOM;
  std::string label;
  int row0 = 0, col0 = 0;
  int n_noise = 0, n_w = 0;
  SpMat base;              // unit difference (RW1), identity (IID), W (SAR), D (CUSTOM)
  std::string sigma_name;  // empty when no scale is bound
  std::string rho_name;    // SAR only
  double sigma = 1.0;
  double rho = 0.0;
};

class LatentStructure {
 public:
  LatentKind kind = LatentKind::CUSTOM;
  SpMat D;  // n_noise x n_w
  Vec h;
  bool intrinsic = false;
  std::vector<std::string> hyper_names;
  std::vector<LatentBlock> blocks;

  [[nodiscard]] int n_w() const { return static_cast<int>(D.cols()); }
  [[nodiscard]] int n_noise() const { return static_cast<int>(D.rows()); }
  // Dimension of the prior null space (0 for proper structures).
  [[nodiscard]] int nullity() const { return intrinsic ? n_w() - n_noise() : 0; }
  [[nodiscard]] std::map<std::string, double> theta2() const;
  // Same structure with hyperparameters replaced (missing names keep their value).
  [[nodiscard]] LatentStructure rebind(const std::map<std::string, double>& theta2) const;
  // Noise-row range [first, first+count) of the block with this label.
  [[nodiscard]] std::pair<int, int> block_rows(const std::string& label) const;
};

[[nodiscard]] LatentStructure build_rw1(int n, double sigma_w);
[[nodiscard]] LatentStructure build_iid(int n, double sigma);
// Edges are 1-based (node_a, node_b) pairs, undirected; duplicates ignored.
[[nodiscard]] LatentStructure build_sar(const std::vector<std::pair<int, int>>& edges, double rho,
                                        double sigma_w, int n_nodes = 0);
[[nodiscard]] SpMat row_standardized_adjacency(const std::vector<std::pair<int, int>>& edges, int n_nodes = 0);
[[nodiscard]] LatentStructure make_custom(const Mat& D, const Vec& h);
[[nodiscard]] LatentStructure load_custom(const std::string& d_file, const std::string& h_file);
void write_custom(const LatentStructure& s, const std::string& d_file, const std::string& h_file);
// Block-diagonal stack; hyperparameter names are suffixed with "_<label>".
[[nodiscard]] LatentStructure block_diag(const std::vector<LatentStructure>& parts,
                                         const std::vector<std::string>& labels);
// Throws SingularStructure when a non-intrinsic D is not invertible.
void check_nonsingular(const LatentStructure& s);

struct HyperParams {
  double tau_eps = 1.0;
  std::map<std::string, double> theta2;
};

struct PriorSpec {
  enum class Kind { Flat, GammaPrecision, UniformTransformed };
  Kind kind = Kind::Flat;
  double shape = 1.0;
  double rate = 1.0;
};

struct GaussianLGM {
  Vec y;
  Mat B;   // N x p
  SpMat A;  // N x n_w
  Mat beta_prior_precision;
  LatentStructure latent;
  std::map<std::string, PriorSpec> hyper_priors;
  std::set<std::string> fixed;  // hyperparameters held at their initial value

  [[nodiscard]] int n_obs() const { return static_cast<int>(y.size()); }
  [[nodiscard]] int p() const { return static_cast<int>(B.cols()); }
  [[nodiscard]] int n_w() const { return latent.n_w(); }
  [[nodiscard]] std::vector<std::string> hyper_names() const;  // tau_eps first
  [[nodiscard]] std::vector<std::string> free_hyper_names() const;
  [[nodiscard]] HyperParams default_hyper() const;
};

[[nodiscard]] GaussianLGM assemble_lgm(Vec y, Mat B, SpMat A, Mat beta_prior_precision,
                                       LatentStructure latent,
                                       std::map<std::string, PriorSpec> hyper_priors = {});

void validate_hyper(const GaussianLGM& m, const HyperParams& hp);

[[nodiscard]] SpMat sparse_identity(int n);

}  // namespace lgmcheck
