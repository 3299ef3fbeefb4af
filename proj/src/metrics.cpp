#include "bcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bcd/objective.hpp"

namespace bcd {

BinaryGraph binarize(const WeightedAdjacency& w, double tau) {
  const int d = w.dim();
  BinaryGraph g;
  g.adj = Eigen::MatrixXi::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && std::abs(w.w(i, j)) > tau) g.adj(i, j) = 1;
  return g;
}

int shd(const BinaryGraph& g1, const BinaryGraph& g2) {
  const int d = g1.dim();
  if (g2.dim() != d) throw std::invalid_argument("shd: dimension mismatch");
  int total = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const int a1 = g1.adj(i, j), a2 = g1.adj(j, i);
      const int b1 = g2.adj(i, j), b2 = g2.adj(j, i);
      if (a1 == b1 && a2 == b2) continue;
      if (a1 == b2 && a2 == b1 && a1 != a2) {
        total += 1;  // pure reversal
      } else {
        total += std::abs(a1 - b1) + std::abs(a2 - b2);
      }
    }
  }
  return total;
}

double auroc_from_scores(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("auroc_from_scores: bad inputs");
  const std::size_t n = scores.size();
  const long n_pos = std::count(labels.begin(), labels.end(), 1);
  const long n_neg = static_cast<long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auroc_from_scores: degenerate label set");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over ties, then the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k)
      if (labels[idx[k]] == 1) rank_sum_pos += midrank;
    i = j + 1;
  }
  const double n_pos_d = static_cast<double>(n_pos);
  return (rank_sum_pos - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

double expected_shd(const PosteriorParams& params, const Permutation& perm,
                    const BinaryGraph& g_gt, int n_samples, double tau,
                    Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("expected_shd: n_samples must be >= 1");
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const PosteriorSample sample = sample_posterior(params, rng);
    const WeightedAdjacency w = assemble_weighted_adjacency(perm, sample.edges);
    total += shd(binarize(w, tau), g_gt);
  }
  return total / n_samples;
}

double edge_auroc(const PosteriorParams& params, const Permutation& perm,
                  const BinaryGraph& g_gt, int n_samples, double tau,
                  Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("edge_auroc: n_samples must be >= 1");
  const int d = g_gt.dim();
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(d, d);
  for (int s = 0; s < n_samples; ++s) {
    const PosteriorSample sample = sample_posterior(params, rng);
    const WeightedAdjacency w = assemble_weighted_adjacency(perm, sample.edges);
    const BinaryGraph g = binarize(w, tau);
    freq += g.adj.cast<double>();
  }
  freq /= n_samples;

  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(static_cast<std::size_t>(d) * (d - 1));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      scores.push_back(freq(i, j));
      labels.push_back(g_gt.adj(i, j));
    }
  }
  return auroc_from_scores(scores, labels);
}

double mse_edge_matrix(const PosteriorParams& params, const EdgeMatrix& l_gt,
                       int n_samples, Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("mse_edge_matrix: n_samples must be >= 1");
  const int d = l_gt.dim();
  const double n_entries = d * (d - 1) / 2.0;
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const PosteriorSample sample = sample_posterior(params, rng);
    double sq = 0.0;
    for (int i = 1; i < d; ++i)
      for (int j = 0; j < i; ++j) {
        const double diff = sample.edges.m(i, j) - l_gt.m(i, j);
        sq += diff * diff;
      }
    total += sq / n_entries;
  }
  return total / n_samples;
}

double kl_true_learned(const PosteriorParams& params, const Permutation& perm,
                       const GroundTruthScm& scm, int n_samples, Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("kl_true_learned: n_samples must be >= 1");
  const GaussianJoint true_joint =
      observational_joint(scm.adjacency(), scm.noise_scale);
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const PosteriorSample sample = sample_posterior(params, rng);
    const WeightedAdjacency w = assemble_weighted_adjacency(perm, sample.edges);
    const GaussianJoint learned = observational_joint(w, sample.noise_scale);
    total += gaussian_kl(true_joint, learned);
  }
  return total / n_samples;
}

}  // namespace bcd
