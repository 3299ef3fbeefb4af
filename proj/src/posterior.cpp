#include "bcd/posterior.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace bcd {

PosteriorParams init_posterior(const EdgeMask& mask, const EdgeMatrix& fixed,
                               int d, int obs_dim, Rng& rng) {
  mask.validate();
  if (mask.d != d || fixed.dim() != d)
    throw std::invalid_argument("init_posterior: dimension mismatch");
  PosteriorParams params;
  params.mask = mask;
  params.fixed_edges = fixed;
  const auto m = static_cast<Eigen::Index>(mask.size());
  params.loc.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) params.loc[k] = 0.1 * rng.normal();
  params.log_scale = Eigen::VectorXd::Constant(m, std::log(0.1));
  params.log_noise = std::log(0.1);
  params.decoder.resize(d, obs_dim);
  const double decoder_std = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < obs_dim; ++j)
      params.decoder(i, j) = decoder_std * rng.normal();
  return params;
}

PosteriorSample posterior_sample_from_eta(const PosteriorParams& params,
                                          const Eigen::VectorXd& eta) {
  if (eta.size() != params.loc.size())
    throw std::invalid_argument("posterior_sample_from_eta: eta length mismatch");
  PosteriorSample sample;
  const Eigen::VectorXd theta =
      params.loc.array() + params.log_scale.array().exp() * eta.array();
  sample.edges = unpack_free_entries(theta, params.mask, params.fixed_edges);
  sample.noise_scale = std::exp(params.log_noise);
  sample.eta = eta;
  return sample;
}

PosteriorSample sample_posterior(const PosteriorParams& params, Rng& rng) {
  Eigen::VectorXd eta(params.loc.size());
  for (Eigen::Index k = 0; k < eta.size(); ++k) eta[k] = rng.normal();
  return posterior_sample_from_eta(params, eta);
}

Eigen::MatrixXd decode(const Eigen::MatrixXd& z, const PosteriorParams& params) {
  if (z.cols() != params.decoder.rows())
    throw std::invalid_argument("decode: dimension mismatch");
  return z * params.decoder;
}

Eigen::MatrixXd rollout_latents(const WeightedAdjacency& w_hat, double sigma,
                                const Eigen::MatrixXi& label_mask,
                                const Eigen::MatrixXd& label_values,
                                const Eigen::MatrixXd& eps) {
  const int d = w_hat.dim();
  const long n = label_mask.rows();
  if (label_values.rows() != n || eps.rows() != n || label_mask.cols() != d ||
      label_values.cols() != d || eps.cols() != d)
    throw std::invalid_argument("rollout_latents: shape mismatch");
  if (!validate_dag(w_hat))
    throw std::invalid_argument("rollout_latents: cyclic graph");

  // Group rows by target set; rows in a group share (I - W~^T)^-1.
  std::map<std::vector<int>, std::vector<long>> groups;
  for (long r = 0; r < n; ++r) {
    std::vector<int> targets;
    for (int j = 0; j < d; ++j)
      if (label_mask(r, j) != 0) targets.push_back(j);
    groups[std::move(targets)].push_back(r);
  }

  Eigen::MatrixXd z(n, d);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  for (const auto& [targets, rows] : groups) {
    const WeightedAdjacency mutated = mutate_for_intervention(w_hat, targets);
    const Eigen::MatrixXd b_inv =
        (identity - mutated.w.transpose()).inverse();
    const auto n_g = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd c(d, n_g);
    for (Eigen::Index k = 0; k < n_g; ++k) {
      const long r = rows[static_cast<std::size_t>(k)];
      for (int i = 0; i < d; ++i)
        c(i, k) = label_mask(r, i) != 0 ? label_values(r, i)
                                        : sigma * eps(r, i);
    }
    const Eigen::MatrixXd z_cols = b_inv * c;
    for (Eigen::Index k = 0; k < n_g; ++k)
      z.row(rows[static_cast<std::size_t>(k)]) = z_cols.col(k);
  }
  return z;
}

ForwardResult forward(const PosteriorParams& params, const Permutation& perm,
                      const Eigen::MatrixXi& label_mask,
                      const Eigen::MatrixXd& label_values, Rng& rng) {
  const long n = label_mask.rows();
  if (n < 1) throw std::invalid_argument("forward: need at least one row");
  ForwardResult out;
  out.sample = sample_posterior(params, rng);
  const WeightedAdjacency w_hat =
      assemble_weighted_adjacency(perm, out.sample.edges);
  const int d = w_hat.dim();
  Eigen::MatrixXd eps(n, d);
  for (long r = 0; r < n; ++r)
    for (int i = 0; i < d; ++i) eps(r, i) = rng.normal();
  out.z_hat = rollout_latents(w_hat, out.sample.noise_scale, label_mask,
                              label_values, eps);
  out.x_hat = decode(out.z_hat, params);
  return out;
}

}  // namespace bcd
