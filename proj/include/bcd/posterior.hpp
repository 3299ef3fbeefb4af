#pragma once

#include <Eigen/Dense>

#include "bcd/graph.hpp"
#include "bcd/rng.hpp"
#include "bcd/sampler.hpp"

namespace bcd {

/// Variational parameters: factorized Gaussian over the free edge entries,
/// point estimate of the log noise scale, and the linear decoder.
struct PosteriorParams {
  Eigen::VectorXd loc;        // one per free entry, mask order
  Eigen::VectorXd log_scale;  // same length
  double log_noise = 0.0;
  Eigen::MatrixXd decoder;    // d x D, no bias
  EdgeMask mask;
  EdgeMatrix fixed_edges;     // values of non-learnable entries

  PosteriorParams() : fixed_edges(1) {}
  int latent_dim() const { return fixed_edges.dim(); }
  int obs_dim() const { return static_cast<int>(decoder.cols()); }
};

/// One reparameterized draw. `eta` is the standard-normal vector used, kept
/// so gradients can be taken with the same draw.
struct PosteriorSample {
  EdgeMatrix edges;
  double noise_scale = 0.0;
  Eigen::VectorXd eta;

  PosteriorSample() : edges(1) {}
};

/// loc ~ N(0, 0.1^2) per free entry, log_scale = log(0.1),
/// log_noise = log(0.1), decoder entries ~ N(0, 1/d).
/// Draw order: loc entries in mask order, then decoder row-major.
PosteriorParams init_posterior(const EdgeMask& mask, const EdgeMatrix& fixed,
                               int d, int obs_dim, Rng& rng);

/// theta = loc + exp(log_scale) * eta with eta ~ N(0, I).
PosteriorSample sample_posterior(const PosteriorParams& params, Rng& rng);

/// Deterministic core of sample_posterior for a given eta.
PosteriorSample posterior_sample_from_eta(const PosteriorParams& params,
                                          const Eigen::VectorXd& eta);

/// X_hat = z * decoder.
Eigen::MatrixXd decode(const Eigen::MatrixXd& z, const PosteriorParams& params);

/// Latent rollout for a batch given frozen standard-normal draws `eps`
/// (n x d). Row r solves z = W~^T z + c where W~ zeroes the columns of row
/// r's targets, c has the labeled value at intervened nodes and sigma*eps
/// elsewhere. Equals ancestral sampling with the same draws.
Eigen::MatrixXd rollout_latents(const WeightedAdjacency& w_hat, double sigma,
                                const Eigen::MatrixXi& label_mask,
                                const Eigen::MatrixXd& label_values,
                                const Eigen::MatrixXd& eps);

struct ForwardResult {
  Eigen::MatrixXd z_hat;  // n x d
  Eigen::MatrixXd x_hat;  // n x D
  PosteriorSample sample;
};

/// One posterior sample shared across the batch, latent rollout honoring each
/// row's intervention label, then decode.
/// Draw order: eta (free entries), then eps row-major (d normals per row).
ForwardResult forward(const PosteriorParams& params, const Permutation& perm,
                      const Eigen::MatrixXi& label_mask,
                      const Eigen::MatrixXd& label_values, Rng& rng);

}  // namespace bcd
