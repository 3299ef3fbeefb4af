#pragma once

#include <Eigen/Dense>

#include "bcd/posterior.hpp"
#include "bcd/sampler.hpp"

namespace bcd {

struct LossBreakdown {
  double mse_x = 0.0;
  double kl_joint = 0.0;  // zero when supervision is off
  double total = 0.0;
};

/// Mean over all n*D entries of the squared difference.
double mse_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat);

/// Closed-form KL(q || p) between multivariate Gaussians:
/// 0.5 [tr(Sp^-1 Sq) + (mp-mq)^T Sp^-1 (mp-mq) - d + ln det Sp - ln det Sq].
double gaussian_kl(const GaussianJoint& q, const GaussianJoint& p);

/// KL between the observational joints of the sampled model and the ground
/// truth, posterior first. The kl_true_learned metric uses the reverse order.
double supervised_kl(const PosteriorSample& sample, const Permutation& perm,
                     const GroundTruthScm& scm);

/// total = mse_x + kl_weight * kl_joint; kl_joint forced to 0 when
/// supervision is off.
LossBreakdown total_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat,
                         bool supervised, double kl_joint,
                         double kl_weight = 1.0);

}  // namespace bcd
