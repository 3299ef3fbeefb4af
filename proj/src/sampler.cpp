#include "bcd/sampler.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <stdexcept>

namespace bcd {

InterventionSpec InterventionSpec::make(std::vector<int> targets,
                                        ValueDraw value) {
  std::sort(targets.begin(), targets.end());
  if (std::adjacent_find(targets.begin(), targets.end()) != targets.end())
    throw std::invalid_argument("InterventionSpec: duplicate target");
  if (value.mode == ValueDraw::Mode::Uniform && !(value.lo < value.hi))
    throw std::invalid_argument("InterventionSpec: need lo < hi");
  InterventionSpec spec;
  spec.targets = std::move(targets);
  spec.value = value;
  return spec;
}

WeightedAdjacency mutate_for_intervention(const WeightedAdjacency& w,
                                          const std::vector<int>& targets) {
  const int d = w.dim();
  WeightedAdjacency out = w;
  for (int j : targets) {
    if (j < 0 || j >= d)
      throw std::invalid_argument("mutate_for_intervention: target out of range");
    out.w.col(j).setZero();
  }
  return out;
}

Eigen::VectorXd ancestral_sample(const WeightedAdjacency& w, double sigma,
                                 const InterventionSpec& spec, Rng& rng) {
  const int d = w.dim();
  if (sigma <= 0.0)
    throw std::invalid_argument("ancestral_sample: sigma must be > 0");
  const WeightedAdjacency mutated = mutate_for_intervention(w, spec.targets);
  const auto order = topological_order(mutated.w);
  if (!order) throw std::invalid_argument("ancestral_sample: cyclic graph");

  Eigen::VectorXd eps(d);
  for (int i = 0; i < d; ++i) eps[i] = sigma * rng.normal();

  std::vector<char> clamped(d, 0);
  Eigen::VectorXd clamp_value = Eigen::VectorXd::Zero(d);
  for (int t : spec.targets) {
    clamped[t] = 1;
    clamp_value[t] = spec.value.mode == ValueDraw::Mode::Fixed
                         ? spec.value.value
                         : rng.uniform(spec.value.lo, spec.value.hi);
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  for (int i : *order) {
    if (clamped[i]) {
      z[i] = clamp_value[i];
      continue;
    }
    double acc = eps[i];
    for (int j = 0; j < d; ++j) acc += mutated.w(j, i) * z[j];
    z[i] = acc;
  }
  return z;
}

GaussianJoint observational_joint(const WeightedAdjacency& w, double sigma) {
  const int d = w.dim();
  if (sigma <= 0.0)
    throw std::invalid_argument("observational_joint: sigma must be > 0");
  if (!validate_dag(w))
    throw std::invalid_argument("observational_joint: cyclic graph");

  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) - w.w;
  const Eigen::MatrixXd a_inv = a.inverse();
  GaussianJoint joint;
  joint.mean = Eigen::VectorXd::Zero(d);
  joint.cov = sigma * sigma * (a_inv.transpose() * a_inv);
  joint.cov = 0.5 * (joint.cov + joint.cov.transpose().eval());  // exact symmetry
  if (Eigen::LLT<Eigen::MatrixXd>(joint.cov).info() != Eigen::Success)
    throw std::logic_error("observational_joint: covariance not positive definite");
  return joint;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& z, const Eigen::MatrixXd& proj) {
  if (z.cols() != proj.rows())
    throw std::invalid_argument("project: inner dimensions disagree");
  return z * proj;
}

GroundTruthScm make_ground_truth_scm(int d, int obs_dim, double edges_per_node,
                                     double sigma, Rng& rng) {
  if (obs_dim < d)
    throw std::invalid_argument("make_ground_truth_scm: need obs_dim >= d");
  if (sigma <= 0.0)
    throw std::invalid_argument("make_ground_truth_scm: sigma must be > 0");
  GroundTruthScm scm;
  scm.latent_dim = d;
  scm.obs_dim = obs_dim;
  scm.perm = Permutation::identity(d);
  scm.edges = sample_er_dag(d, edges_per_node, rng);
  scm.noise_scale = sigma;

  // Projection must not destroy latent information: redraw until full row rank.
  while (true) {
    Eigen::MatrixXd proj(d, obs_dim);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < obs_dim; ++j) proj(i, j) = rng.uniform(-1.0, 1.0);
    if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(proj).rank() == d) {
      scm.projection = proj;
      break;
    }
  }
  return scm;
}

namespace {

std::vector<int> draw_targets(NodeMode node_mode, int d, Rng& rng) {
  if (node_mode == NodeMode::Single) return {rng.uniform_int(0, d - 1)};
  // Multi: x ~ Uniform{2..d}, then x distinct nodes (partial Fisher-Yates).
  const int x = rng.uniform_int(2, d);
  std::vector<int> pool(d);
  for (int i = 0; i < d; ++i) pool[i] = i;
  for (int k = 0; k < x; ++k)
    std::swap(pool[k], pool[rng.uniform_int(k, d - 1)]);
  std::vector<int> targets(pool.begin(), pool.begin() + x);
  std::sort(targets.begin(), targets.end());
  return targets;
}

}  // namespace

Dataset generate_dataset(const GroundTruthScm& scm, long n_obs, long n_int,
                         NodeMode node_mode, const ValueDraw& value, int sets,
                         Rng& rng) {
  const int d = scm.latent_dim;
  if (n_obs < 0 || n_int < 0)
    throw std::invalid_argument("generate_dataset: negative sample count");
  if (n_obs + n_int == 0)
    throw std::invalid_argument("generate_dataset: empty dataset");
  if (n_int > 0) {
    if (sets < 1) throw std::invalid_argument("generate_dataset: sets must be >= 1");
    if (n_int % sets != 0)
      throw std::invalid_argument("generate_dataset: n_int not divisible by sets");
    if (node_mode == NodeMode::Multi && d < 2)
      throw std::invalid_argument("generate_dataset: multi mode needs d >= 2");
  }

  Rng obs_rng = rng.fork();
  Rng int_rng = rng.fork();

  const long n = n_obs + n_int;
  Dataset ds;
  ds.mask = Eigen::MatrixXi::Zero(n, d);
  ds.values = Eigen::MatrixXd::Zero(n, d);
  ds.latents.resize(n, d);

  const WeightedAdjacency w = scm.adjacency();
  const InterventionSpec observational = InterventionSpec::none();
  for (long r = 0; r < n_obs; ++r)
    ds.latents.row(r) =
        ancestral_sample(w, scm.noise_scale, observational, obs_rng);

  if (n_int > 0) {
    const long block = n_int / sets;
    long r = n_obs;
    for (int b = 0; b < sets; ++b) {
      const InterventionSpec spec =
          InterventionSpec::make(draw_targets(node_mode, d, int_rng), value);
      for (long k = 0; k < block; ++k, ++r) {
        ds.latents.row(r) =
            ancestral_sample(w, scm.noise_scale, spec, int_rng);
        for (int t : spec.targets) {
          ds.mask(r, t) = 1;
          ds.values(r, t) = ds.latents(r, t);  // clamped exactly
        }
      }
    }
  }

  ds.x = project(ds.latents, scm.projection);
  return ds;
}

}  // namespace bcd
