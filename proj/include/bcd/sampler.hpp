#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bcd/graph.hpp"
#include "bcd/rng.hpp"

namespace bcd {

/// How an intervention value is chosen for a clamped node.
struct ValueDraw {
  enum class Mode { Fixed, Uniform };
  Mode mode = Mode::Fixed;
  double value = 0.0;  // Fixed
  double lo = 0.0;     // Uniform
  double hi = 0.0;

  static ValueDraw fixed(double v) { return {Mode::Fixed, v, 0.0, 0.0}; }
  static ValueDraw uniform(double lo, double hi) {
    return {Mode::Uniform, 0.0, lo, hi};
  }
};

/// A do-intervention: which nodes are clamped and how their values are drawn.
struct InterventionSpec {
  std::vector<int> targets;  // sorted ascending, unique
  ValueDraw value;

  static InterventionSpec none() { return {}; }
  static InterventionSpec make(std::vector<int> targets, ValueDraw value);
};

/// Observations plus per-sample intervention labels. `latents` is kept for
/// evaluation only and is never visible to unsupervised training losses.
struct Dataset {
  Eigen::MatrixXd x;        // n x D
  Eigen::MatrixXi mask;     // n x d, 1 where the node was intervened
  Eigen::MatrixXd values;   // n x d, meaningful only where mask = 1
  Eigen::MatrixXd latents;  // n x d, evaluation only

  long rows() const { return x.rows(); }
  int latent_dim() const { return static_cast<int>(mask.cols()); }
  int obs_dim() const { return static_cast<int>(x.cols()); }
};

/// Mean and covariance of a Gaussian over the d latent variables.
struct GaussianJoint {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

enum class NodeMode { Single, Multi };

/// Zero out column j of w for every j in targets; other entries unchanged.
WeightedAdjacency mutate_for_intervention(const WeightedAdjacency& w,
                                          const std::vector<int>& targets);

/// One latent draw from z = W~^T z + eps in topological order. Intervened
/// nodes are clamped exactly to their drawn value, with no added noise.
///
/// Draw order: d standard normals (node index order, including intervened
/// nodes, whose draws go unused), then one uniform per target in ascending
/// target order when the value mode is Uniform.
Eigen::VectorXd ancestral_sample(const WeightedAdjacency& w, double sigma,
                                 const InterventionSpec& spec, Rng& rng);

/// Closed-form observational joint: mean 0, cov = (I-W)^-T sigma^2 I (I-W)^-1.
GaussianJoint observational_joint(const WeightedAdjacency& w, double sigma);

/// Plain matrix product z * proj.
Eigen::MatrixXd project(const Eigen::MatrixXd& z, const Eigen::MatrixXd& proj);

/// Ground truth synthesis: ER edge matrix, identity permutation, projection
/// entries iid Uniform(-1, 1) redrawn until full row rank.
GroundTruthScm make_ground_truth_scm(int d, int obs_dim, double edges_per_node,
                                     double sigma, Rng& rng);

/// n_obs observational rows followed by n_int interventional rows generated
/// in `sets` blocks of n_int/sets samples. Single mode picks one target node
/// per block; multi mode picks x ~ Uniform{2..d} distinct nodes per block.
/// Fixed values are reused; uniform values are redrawn per sample and target.
///
/// The observational block is drawn from its own forked generator, so it is
/// identical across calls that share a parent seed but differ in n_int.
Dataset generate_dataset(const GroundTruthScm& scm, long n_obs, long n_int,
                         NodeMode node_mode, const ValueDraw& value, int sets,
                         Rng& rng);

}  // namespace bcd
