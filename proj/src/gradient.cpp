#include "bcd/gradient.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace bcd {

ParamVector ParamVector::zeros(const ParamLayout& layout) {
  return {layout, Eigen::VectorXd::Zero(layout.size())};
}

ParamVector pack_params(const PosteriorParams& params) {
  ParamLayout layout{static_cast<int>(params.mask.size()), params.latent_dim(),
                     params.obs_dim()};
  ParamVector pv = ParamVector::zeros(layout);
  const int m = layout.n_free;
  pv.v.segment(0, m) = params.loc;
  pv.v.segment(m, m) = params.log_scale;
  pv.v[2 * m] = params.log_noise;
  for (int i = 0; i < layout.d; ++i)
    for (int j = 0; j < layout.obs_dim; ++j)
      pv.v[2 * m + 1 + i * layout.obs_dim + j] = params.decoder(i, j);
  return pv;
}

void unpack_params(const ParamVector& pv, PosteriorParams* params) {
  const ParamLayout& layout = pv.layout;
  if (layout.n_free != static_cast<int>(params->mask.size()) ||
      layout.d != params->latent_dim() || layout.obs_dim != params->obs_dim())
    throw std::invalid_argument("unpack_params: layout mismatch");
  const int m = layout.n_free;
  params->loc = pv.v.segment(0, m);
  params->log_scale = pv.v.segment(m, m);
  params->log_noise = pv.v[2 * m];
  for (int i = 0; i < layout.d; ++i)
    for (int j = 0; j < layout.obs_dim; ++j)
      params->decoder(i, j) = pv.v[2 * m + 1 + i * layout.obs_dim + j];
}

FrozenDraws draw_frozen(const PosteriorParams& params, long n_rows, Rng& rng) {
  FrozenDraws frozen;
  frozen.eta.resize(params.loc.size());
  for (Eigen::Index k = 0; k < frozen.eta.size(); ++k)
    frozen.eta[k] = rng.normal();
  const int d = params.latent_dim();
  frozen.eps.resize(n_rows, d);
  for (long r = 0; r < n_rows; ++r)
    for (int i = 0; i < d; ++i) frozen.eps(r, i) = rng.normal();
  return frozen;
}

SupervisionContext SupervisionContext::make(const GroundTruthScm& scm,
                                            double kl_weight) {
  SupervisionContext sup;
  sup.true_joint = observational_joint(scm.adjacency(), scm.noise_scale);
  const int d = sup.true_joint.dim();
  sup.true_cov_inv = Eigen::LLT<Eigen::MatrixXd>(sup.true_joint.cov)
                         .solve(Eigen::MatrixXd::Identity(d, d));
  sup.kl_weight = kl_weight;
  return sup;
}

namespace {

struct EvalWork {
  LossBreakdown loss;
  ParamVector grad;
};

// One pass through the pipeline. The value path is identical whether or not
// the gradient is requested, so finite differences of eval_loss check
// exactly the function whose gradient eval_loss_and_grad reports.
EvalWork evaluate(const PosteriorParams& params, const Permutation& perm,
                  const Eigen::MatrixXd& x, const Eigen::MatrixXi& label_mask,
                  const Eigen::MatrixXd& label_values,
                  const FrozenDraws& frozen, const SupervisionContext* sup,
                  bool want_grad) {
  const int d = params.latent_dim();
  const int obs_dim = params.obs_dim();
  const long n = x.rows();
  if (n < 1) throw std::invalid_argument("evaluate: empty batch");
  if (x.cols() != obs_dim || label_mask.rows() != n || frozen.eps.rows() != n)
    throw std::invalid_argument("evaluate: shape mismatch");

  const PosteriorSample sample = posterior_sample_from_eta(params, frozen.eta);
  const double sigma = sample.noise_scale;
  const WeightedAdjacency w_hat =
      assemble_weighted_adjacency(perm, sample.edges);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  std::map<std::vector<int>, std::vector<long>> groups;
  for (long r = 0; r < n; ++r) {
    std::vector<int> targets;
    for (int j = 0; j < d; ++j)
      if (label_mask(r, j) != 0) targets.push_back(j);
    groups[std::move(targets)].push_back(r);
  }

  // Forward: z rows by group, then decode.
  Eigen::MatrixXd z(n, d);
  std::map<std::vector<int>, Eigen::MatrixXd> group_b_inv;
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
                                        : sigma * frozen.eps(r, i);
    }
    const Eigen::MatrixXd z_cols = b_inv * c;
    for (Eigen::Index k = 0; k < n_g; ++k)
      z.row(rows[static_cast<std::size_t>(k)]) = z_cols.col(k);
    if (want_grad) group_b_inv.emplace(targets, b_inv);
  }

  const Eigen::MatrixXd x_hat = z * params.decoder;

  double kl = 0.0;
  GaussianJoint q;
  if (sup != nullptr) {
    q = observational_joint(w_hat, sigma);
    kl = gaussian_kl(q, sup->true_joint);
  }

  EvalWork work;
  work.loss = total_loss(x, x_hat, sup != nullptr, kl,
                         sup != nullptr ? sup->kl_weight : 1.0);
  if (!want_grad) return work;

  // Backward. MSE path: with G_x = d(mse)/d(x_hat),
  //   d(mse)/d(decoder) = z^T G_x,
  //   g_r = d(mse)/d(z_r) = (G_x decoder^T)_r,
  //   u_r = (I - W~)^-1 g_r,
  //   d(mse)/d(W~) += z_r u_r^T  (target columns zeroed),
  //   d(mse)/d(sigma) += sum over non-clamped coords of u_r[i] eps(r, i).
  const double denom = static_cast<double>(n) * obs_dim;
  const Eigen::MatrixXd g_x = (2.0 / denom) * (x_hat - x);
  const Eigen::MatrixXd g_decoder = z.transpose() * g_x;
  const Eigen::MatrixXd g_z = g_x * params.decoder.transpose();

  Eigen::MatrixXd g_w = Eigen::MatrixXd::Zero(d, d);
  double g_sigma = 0.0;
  for (const auto& [targets, rows] : groups) {
    const Eigen::MatrixXd& b_inv = group_b_inv.at(targets);
    const auto n_g = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd z_cols(d, n_g), g_cols(d, n_g), eps_cols(d, n_g);
    for (Eigen::Index k = 0; k < n_g; ++k) {
      const long r = rows[static_cast<std::size_t>(k)];
      z_cols.col(k) = z.row(r);
      g_cols.col(k) = g_z.row(r);
      eps_cols.col(k) = frozen.eps.row(r);
    }
    const Eigen::MatrixXd u_cols = b_inv.transpose() * g_cols;
    Eigen::MatrixXd g_w_group = z_cols * u_cols.transpose();
    Eigen::MatrixXd sigma_terms =
        (u_cols.array() * eps_cols.array()).matrix();
    for (int t : targets) {
      g_w_group.col(t).setZero();
      sigma_terms.row(t).setZero();  // clamped values carry no noise gradient
    }
    g_w += g_w_group;
    g_sigma += sigma_terms.sum();
  }

  // Supervised KL path. With A = I - W_hat and Sq = sigma^2 A^-T A^-1:
  //   d(kl)/d(Sq)    = G = 0.5 (Sp^-1 - Sq^-1)
  //   d(kl)/d(W_hat) = 2 sigma^2 A^-T A^-1 G A^-T
  //   d(kl)/d(sigma) = 2 sigma tr(G A^-T A^-1)
  if (sup != nullptr) {
    const Eigen::MatrixXd a = identity - w_hat.w;
    const Eigen::MatrixXd a_inv = a.inverse();
    const Eigen::MatrixXd sq_inv =
        Eigen::LLT<Eigen::MatrixXd>(q.cov).solve(identity);
    const Eigen::MatrixXd g_cov = 0.5 * (sup->true_cov_inv - sq_inv);
    const Eigen::MatrixXd k_mat = q.cov / (sigma * sigma);
    const Eigen::MatrixXd g_w_kl =
        2.0 * sigma * sigma *
        (a_inv.transpose() * (a_inv * (g_cov * a_inv.transpose())));
    g_w += sup->kl_weight * g_w_kl;
    g_sigma += sup->kl_weight * 2.0 * sigma * (g_cov * k_mat).trace();
  }

  // Map d/d(W_hat) back through W = (P L P^T)^T, then theta -> (loc, scale).
  const Eigen::MatrixXd p_mat = perm.matrix();
  const Eigen::MatrixXd g_l = p_mat.transpose() * g_w.transpose() * p_mat;

  const int m = static_cast<int>(params.mask.size());
  ParamLayout layout{m, d, obs_dim};
  work.grad = ParamVector::zeros(layout);
  for (int k = 0; k < m; ++k) {
    const auto& [i, j] = params.mask.positions[static_cast<std::size_t>(k)];
    const double g_theta = g_l(i, j);
    work.grad.v[k] = g_theta;
    work.grad.v[m + k] =
        g_theta * frozen.eta[k] * std::exp(params.log_scale[k]);
  }
  work.grad.v[2 * m] = g_sigma * sigma;  // d(sigma)/d(log_noise) = sigma
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < obs_dim; ++j)
      work.grad.v[2 * m + 1 + i * obs_dim + j] = g_decoder(i, j);
  return work;
}

}  // namespace

LossBreakdown eval_loss(const PosteriorParams& params, const Permutation& perm,
                        const Eigen::MatrixXd& x,
                        const Eigen::MatrixXi& label_mask,
                        const Eigen::MatrixXd& label_values,
                        const FrozenDraws& frozen,
                        const SupervisionContext* sup) {
  return evaluate(params, perm, x, label_mask, label_values, frozen, sup,
                  /*want_grad=*/false)
      .loss;
}

StepEval eval_loss_and_grad(const PosteriorParams& params,
                            const Permutation& perm, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXi& label_mask,
                            const Eigen::MatrixXd& label_values,
                            const FrozenDraws& frozen,
                            const SupervisionContext* sup) {
  EvalWork work = evaluate(params, perm, x, label_mask, label_values, frozen,
                           sup, /*want_grad=*/true);
  return {work.loss, std::move(work.grad)};
}

ParamVector grad_total_loss(const PosteriorParams& params,
                            const Permutation& perm, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXi& label_mask,
                            const Eigen::MatrixXd& label_values,
                            const FrozenDraws& frozen,
                            const SupervisionContext* sup) {
  return eval_loss_and_grad(params, perm, x, label_mask, label_values, frozen,
                            sup)
      .grad;
}

GradReport check_gradients(const PosteriorParams& params,
                           const Permutation& perm, const Eigen::MatrixXd& x,
                           const Eigen::MatrixXi& label_mask,
                           const Eigen::MatrixXd& label_values,
                           const FrozenDraws& frozen,
                           const SupervisionContext* sup, double h) {
  if (h < 1e-7 || h > 1e-3)
    throw std::invalid_argument("check_gradients: h must be in [1e-7, 1e-3]");
  GradReport report;
  report.analytic = eval_loss_and_grad(params, perm, x, label_mask,
                                       label_values, frozen, sup)
                        .grad;
  report.numeric = ParamVector::zeros(report.analytic.layout);

  ParamVector pv = pack_params(params);
  PosteriorParams probe = params;
  for (int k = 0; k < pv.layout.size(); ++k) {
    const double saved = pv.v[k];
    pv.v[k] = saved + h;
    unpack_params(pv, &probe);
    const double f_plus =
        eval_loss(probe, perm, x, label_mask, label_values, frozen, sup).total;
    pv.v[k] = saved - h;
    unpack_params(pv, &probe);
    const double f_minus =
        eval_loss(probe, perm, x, label_mask, label_values, frozen, sup).total;
    pv.v[k] = saved;
    report.numeric.v[k] = (f_plus - f_minus) / (2.0 * h);
  }

  double max_rel = 0.0;
  for (int k = 0; k < pv.layout.size(); ++k) {
    const double a = report.analytic.v[k];
    const double b = report.numeric.v[k];
    const double rel =
        std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
    max_rel = std::max(max_rel, rel);
  }
  report.max_rel_err = max_rel;
  return report;
}

AdamState AdamState::zeros(const ParamLayout& layout) {
  AdamState state;
  state.m = Eigen::VectorXd::Zero(layout.size());
  state.v = Eigen::VectorXd::Zero(layout.size());
  state.t = 0;
  return state;
}

void optimizer_step(ParamVector* params, const ParamVector& grad, double lr,
                    AdamState* state) {
  if (lr <= 0.0) throw std::invalid_argument("optimizer_step: lr must be > 0");
  if (!(params->layout == grad.layout))
    throw std::invalid_argument("optimizer_step: layout mismatch");
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  state->t += 1;
  state->m = beta1 * state->m + (1.0 - beta1) * grad.v;
  state->v =
      (beta2 * state->v.array() + (1.0 - beta2) * grad.v.array().square())
          .matrix();
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(state->t));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(state->t));
  params->v.array() -= lr * (state->m.array() / bias1) /
                       ((state->v.array() / bias2).sqrt() + eps);
}

}  // namespace bcd
