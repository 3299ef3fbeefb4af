#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bcd/posterior.hpp"
#include "bcd/sampler.hpp"

namespace bcd {

/// Directed adjacency pattern with zero diagonal.
struct BinaryGraph {
  Eigen::MatrixXi adj;

  int dim() const { return static_cast<int>(adj.rows()); }
};

/// One evaluation row of a training run.
struct MetricsRecord {
  long step = 0;
  double eshd = 0.0;
  double auroc = 0.0;
  double mse_L = 0.0;
  double kl_true_learned = 0.0;
  double mse_X = 0.0;
};

/// Edge present where |weight| > tau.
BinaryGraph binarize(const WeightedAdjacency& w, double tau);

/// Structural Hamming distance over unordered node pairs: a reversed edge
/// counts 1, each missing or extra edge counts 1.
int shd(const BinaryGraph& g1, const BinaryGraph& g2);

/// Rank-statistic AUROC with ties counted half. Throws when labels are
/// degenerate (all present or all absent).
double auroc_from_scores(const std::vector<double>& scores,
                         const std::vector<int>& labels);

/// Average SHD against g_gt over binarized posterior samples.
double expected_shd(const PosteriorParams& params, const Permutation& perm,
                    const BinaryGraph& g_gt, int n_samples, double tau,
                    Rng& rng);

/// AUROC of per-edge posterior presence frequencies against g_gt, scored on
/// ordered off-diagonal pairs.
double edge_auroc(const PosteriorParams& params, const Permutation& perm,
                  const BinaryGraph& g_gt, int n_samples, double tau, Rng& rng);

/// Mean over posterior samples of the MSE over the d(d-1)/2 below-diagonal
/// entries against the ground-truth edge matrix.
double mse_edge_matrix(const PosteriorParams& params, const EdgeMatrix& l_gt,
                       int n_samples, Rng& rng);

/// Average over posterior samples of KL(true joint || learned joint).
double kl_true_learned(const PosteriorParams& params, const Permutation& perm,
                       const GroundTruthScm& scm, int n_samples, Rng& rng);

}  // namespace bcd
