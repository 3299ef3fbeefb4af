#include "bcd/objective.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace bcd {

double mse_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  return (x_hat - x).squaredNorm() /
         static_cast<double>(x.rows() * x.cols());
}

double gaussian_kl(const GaussianJoint& q, const GaussianJoint& p) {
  const int d = q.dim();
  if (p.dim() != d || q.cov.rows() != d || p.cov.rows() != d)
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  const Eigen::LLT<Eigen::MatrixXd> llt_q(q.cov);
  const Eigen::LLT<Eigen::MatrixXd> llt_p(p.cov);
  if (llt_q.info() != Eigen::Success || llt_p.info() != Eigen::Success)
    throw std::invalid_argument("gaussian_kl: covariance not positive definite");

  const double trace = llt_p.solve(q.cov).trace();
  const Eigen::VectorXd diff = p.mean - q.mean;
  const double quad = diff.dot(llt_p.solve(diff));
  const double log_det_q =
      2.0 * llt_q.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_det_p =
      2.0 * llt_p.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * (trace + quad - d + log_det_p - log_det_q);
}

double supervised_kl(const PosteriorSample& sample, const Permutation& perm,
                     const GroundTruthScm& scm) {
  const WeightedAdjacency w_hat =
      assemble_weighted_adjacency(perm, sample.edges);
  const GaussianJoint q = observational_joint(w_hat, sample.noise_scale);
  const GaussianJoint p =
      observational_joint(scm.adjacency(), scm.noise_scale);
  return gaussian_kl(q, p);
}

LossBreakdown total_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat,
                         bool supervised, double kl_joint, double kl_weight) {
  LossBreakdown loss;
  loss.mse_x = mse_loss(x, x_hat);
  loss.kl_joint = supervised ? kl_joint : 0.0;
  loss.total = loss.mse_x + kl_weight * loss.kl_joint;
  return loss;
}

}  // namespace bcd
