#pragma once

#include <Eigen/Dense>

#include "bcd/objective.hpp"
#include "bcd/posterior.hpp"

namespace bcd {

/// Flat layout of all learnable coordinates:
/// [loc (m) | log_scale (m) | log_noise (1) | decoder row-major (d*D)].
struct ParamLayout {
  int n_free = 0;
  int d = 0;
  int obs_dim = 0;

  int size() const { return 2 * n_free + 1 + d * obs_dim; }
  bool operator==(const ParamLayout&) const = default;
};

struct ParamVector {
  ParamLayout layout;
  Eigen::VectorXd v;

  static ParamVector zeros(const ParamLayout& layout);
};

ParamVector pack_params(const PosteriorParams& params);
/// Writes the learnable coordinates; mask and fixed entries are untouched.
void unpack_params(const ParamVector& pv, PosteriorParams* params);

/// All stochastic draws of one step, frozen so the loss is a deterministic
/// function of the parameters.
struct FrozenDraws {
  Eigen::VectorXd eta;  // posterior draw, one per free entry
  Eigen::MatrixXd eps;  // latent noise, n x d
};

/// Draw order matches forward(): eta first, then eps row-major.
FrozenDraws draw_frozen(const PosteriorParams& params, long n_rows, Rng& rng);

/// Precomputed ground-truth joint for the supervised KL term.
struct SupervisionContext {
  GaussianJoint true_joint;
  Eigen::MatrixXd true_cov_inv;
  double kl_weight = 1.0;

  static SupervisionContext make(const GroundTruthScm& scm,
                                 double kl_weight = 1.0);
};

/// Loss of one batch under frozen draws. sup == nullptr means unsupervised.
LossBreakdown eval_loss(const PosteriorParams& params, const Permutation& perm,
                        const Eigen::MatrixXd& x,
                        const Eigen::MatrixXi& label_mask,
                        const Eigen::MatrixXd& label_values,
                        const FrozenDraws& frozen,
                        const SupervisionContext* sup);

struct StepEval {
  LossBreakdown loss;
  ParamVector grad;
};

/// Loss and its exact gradient in one pass. The latent rollout is affine in
/// the edge weights, z = (I - W~)^-T c, so the chain rule is closed form.
StepEval eval_loss_and_grad(const PosteriorParams& params,
                            const Permutation& perm, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXi& label_mask,
                            const Eigen::MatrixXd& label_values,
                            const FrozenDraws& frozen,
                            const SupervisionContext* sup);

ParamVector grad_total_loss(const PosteriorParams& params,
                            const Permutation& perm, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXi& label_mask,
                            const Eigen::MatrixXd& label_values,
                            const FrozenDraws& frozen,
                            const SupervisionContext* sup);

struct GradReport {
  ParamVector analytic;
  ParamVector numeric;
  double max_rel_err = 0.0;  // max_k |a-n| / max(1e-8, |a|+|n|)
};

/// Central finite differences per coordinate with the same frozen draws.
GradReport check_gradients(const PosteriorParams& params,
                           const Permutation& perm, const Eigen::MatrixXd& x,
                           const Eigen::MatrixXi& label_mask,
                           const Eigen::MatrixXd& label_values,
                           const FrozenDraws& frozen,
                           const SupervisionContext* sup, double h);

/// Adaptive-moment optimizer state.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;

  static AdamState zeros(const ParamLayout& layout);
};

/// One update with beta1 = 0.9, beta2 = 0.999, eps = 1e-8, bias correction.
void optimizer_step(ParamVector* params, const ParamVector& grad, double lr,
                    AdamState* state);

}  // namespace bcd
