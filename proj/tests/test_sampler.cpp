#include <doctest.h>

#include <cmath>

#include "bcd/sampler.hpp"

using namespace bcd;

namespace {

WeightedAdjacency chain2(double w) {
  WeightedAdjacency adj;
  adj.w = Eigen::MatrixXd::Zero(2, 2);
  adj.w(0, 1) = w;
  return adj;
}

GroundTruthScm small_scm(std::uint64_t seed, int d = 6, int obs_dim = 10,
                         double er = 2.0) {
  Rng rng(seed);
  return make_ground_truth_scm(d, obs_dim, er, 0.1, rng);
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("mutate: empty target set is the identity") {
  Rng rng(2);
  const GroundTruthScm scm = small_scm(2);
  const WeightedAdjacency w = scm.adjacency();
  const WeightedAdjacency mutated = mutate_for_intervention(w, {});
  CHECK(mutated.w == w.w);
}

TEST_CASE("mutate: removing the only edge zeroes the matrix") {
  const WeightedAdjacency mutated = mutate_for_intervention(chain2(0.8), {1});
  CHECK(mutated.w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mutate: exactly the target columns change") {
  const GroundTruthScm scm = small_scm(5);
  const WeightedAdjacency w = scm.adjacency();
  const WeightedAdjacency mutated = mutate_for_intervention(w, {2, 4});
  for (int j = 0; j < 6; ++j) {
    for (int i = 0; i < 6; ++i) {
      if (j == 2 || j == 4)
        CHECK(mutated.w(i, j) == 0.0);
      else
        CHECK(mutated.w(i, j) == w.w(i, j));
    }
  }
}

TEST_CASE("mutate: out-of-range target throws") {
  CHECK_THROWS_AS(mutate_for_intervention(chain2(1.0), {2}),
                  std::invalid_argument);
}

TEST_CASE("ancestral: root-only graph reproduces the noise variance") {
  WeightedAdjacency w;
  w.w = Eigen::MatrixXd::Zero(3, 3);
  const double sigma = 0.4;
  Rng rng(9);
  const int n = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(3);
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd z =
        ancestral_sample(w, sigma, InterventionSpec::none(), rng);
    sum += z;
    sum_sq += z.cwiseProduct(z);
  }
  for (int i = 0; i < 3; ++i) {
    const double var = sum_sq[i] / n - std::pow(sum[i] / n, 2);
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.02));
  }
}

TEST_CASE("ancestral: intervened node is clamped exactly") {
  const GroundTruthScm scm = small_scm(13);
  const WeightedAdjacency w = scm.adjacency();
  Rng rng(4);
  const InterventionSpec spec =
      InterventionSpec::make({3}, ValueDraw::fixed(100.0));
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd z = ancestral_sample(w, 0.1, spec, rng);
    CHECK(z[3] == 100.0);
  }
}

TEST_CASE("ancestral: chain sample equals the linear solve for the same draw") {
  const WeightedAdjacency w = chain2(1.0);
  const double sigma = 0.1;
  const std::uint64_t seed = 77;

  Rng rng_a(seed);
  const Eigen::VectorXd z =
      ancestral_sample(w, sigma, InterventionSpec::none(), rng_a);

  Rng rng_b(seed);  // replay the same eps draws
  Eigen::VectorXd eps(2);
  eps[0] = sigma * rng_b.normal();
  eps[1] = sigma * rng_b.normal();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2) - w.w;
  const Eigen::VectorXd expected = a.transpose().inverse() * eps;
  CHECK((z - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("joint: no edges gives sigma^2 I") {
  WeightedAdjacency w;
  w.w = Eigen::MatrixXd::Zero(4, 4);
  const GaussianJoint joint = observational_joint(w, 0.3);
  CHECK(joint.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK((joint.cov - 0.09 * Eigen::MatrixXd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("joint: 2-node chain closed form") {
  const double w_val = 0.7, sigma = 0.1;
  const GaussianJoint joint = observational_joint(chain2(w_val), sigma);
  Eigen::MatrixXd expected(2, 2);
  expected << 1.0, w_val, w_val, 1.0 + w_val * w_val;
  expected *= sigma * sigma;
  CHECK((joint.cov - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("joint: empirical covariance of ancestral samples converges") {
  const GroundTruthScm scm = small_scm(21, 4, 4, 1.0);
  const WeightedAdjacency w = scm.adjacency();
  const double sigma = 0.2;
  const GaussianJoint joint = observational_joint(w, sigma);
  Rng rng(8);
  const int n = 100000;
  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(4, 4);
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd z =
        ancestral_sample(w, sigma, InterventionSpec::none(), rng);
    second_moment += z * z.transpose();
  }
  second_moment /= n;
  const double rel =
      (second_moment - joint.cov).norm() / joint.cov.norm();
  CHECK(rel < 0.03);
}

TEST_CASE("project: identity and scalar expansion") {
  Eigen::MatrixXd z(1, 1);
  z << 2.0;
  Eigen::MatrixXd proj(1, 2);
  proj << 3.0, -1.0;
  const Eigen::MatrixXd x = project(z, proj);
  CHECK(x(0, 0) == 6.0);
  CHECK(x(0, 1) == -2.0);

  Eigen::MatrixXd z2 = Eigen::MatrixXd::Random(5, 3);
  CHECK(project(z2, Eigen::MatrixXd::Identity(3, 3)) == z2);
}

TEST_CASE("project: matches the naive triple loop") {
  Rng rng(6);
  Eigen::MatrixXd z(5, 6), proj(6, 10);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j) z(i, j) = rng.normal();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 10; ++j) proj(i, j) = rng.normal();
  const Eigen::MatrixXd x = project(z, proj);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 10; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 6; ++k) acc += z(i, k) * proj(k, j);
      CHECK(x(i, j) == doctest::Approx(acc).epsilon(1e-12));
    }
  CHECK_THROWS_AS(project(z, Eigen::MatrixXd::Zero(5, 5)),
                  std::invalid_argument);
}

TEST_CASE("scm synthesis: projection has full row rank") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GroundTruthScm scm = small_scm(seed);
    CHECK(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(scm.projection).rank() ==
          scm.latent_dim);
    CHECK(validate_dag(scm.adjacency()));
  }
}

TEST_CASE("dataset: observational-only rows carry all-zero masks") {
  const GroundTruthScm scm = small_scm(3);
  Rng rng(14);
  const Dataset ds = generate_dataset(scm, 600, 0, NodeMode::Single,
                                      ValueDraw::fixed(100.0), 20, rng);
  CHECK(ds.rows() == 600);
  CHECK(ds.mask.cwiseAbs().maxCoeff() == 0);
  CHECK(ds.x == project(ds.latents, scm.projection));
}

TEST_CASE("dataset: divisibility contract") {
  const GroundTruthScm scm = small_scm(3);
  Rng rng(15);
  // 900 splits into 20 sets of 45; 850 does not split into 20.
  CHECK_NOTHROW(generate_dataset(scm, 0, 900, NodeMode::Single,
                                 ValueDraw::fixed(100.0), 20, rng));
  CHECK_THROWS_AS(generate_dataset(scm, 0, 850, NodeMode::Single,
                                   ValueDraw::fixed(100.0), 20, rng),
                  std::invalid_argument);
}

TEST_CASE("dataset: empty request throws") {
  const GroundTruthScm scm = small_scm(3);
  Rng rng(16);
  CHECK_THROWS_AS(generate_dataset(scm, 0, 0, NodeMode::Single,
                                   ValueDraw::fixed(1.0), 20, rng),
                  std::invalid_argument);
}

TEST_CASE("dataset: multi mode intervenes on 2..d nodes per row") {
  const GroundTruthScm scm = small_scm(4);
  Rng rng(17);
  const Dataset ds = generate_dataset(scm, 0, 400, NodeMode::Multi,
                                      ValueDraw::uniform(-10.0, 10.0), 20, rng);
  for (long r = 0; r < ds.rows(); ++r) {
    const int count = ds.mask.row(r).sum();
    CHECK(count >= 2);
    CHECK(count <= 6);
  }
}

TEST_CASE("dataset: clamping invariant holds for every labeled entry") {
  const GroundTruthScm scm = small_scm(5);
  Rng rng(18);
  const Dataset ds = generate_dataset(scm, 100, 400, NodeMode::Multi,
                                      ValueDraw::uniform(-10.0, 10.0), 20, rng);
  for (long r = 0; r < ds.rows(); ++r)
    for (int j = 0; j < 6; ++j)
      if (ds.mask(r, j) != 0) CHECK(ds.latents(r, j) == ds.values(r, j));
}

TEST_CASE("dataset: intervened values decorrelate from former parents") {
  // do(k) with uniform values: the block value is independent of k's
  // parents, so the sample correlation vanishes up to Monte Carlo noise.
  const GroundTruthScm scm = small_scm(6);
  const WeightedAdjacency w = scm.adjacency();
  int child = -1, parent = -1;
  for (int j = 0; j < 6 && child < 0; ++j)
    for (int i = 0; i < 6 && child < 0; ++i)
      if (w.w(i, j) != 0.0) {
        child = j;
        parent = i;
      }
  REQUIRE(child >= 0);

  Rng rng(19);
  const int n = 10000;
  Eigen::VectorXd a(n), b(n);
  const InterventionSpec spec =
      InterventionSpec::make({child}, ValueDraw::uniform(-5.0, 5.0));
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd z = ancestral_sample(w, 0.1, spec, rng);
    a[t] = z[child];
    b[t] = z[parent];
  }
  const auto centered_a = (a.array() - a.mean()).matrix();
  const auto centered_b = (b.array() - b.mean()).matrix();
  const double r =
      centered_a.dot(centered_b) / (centered_a.norm() * centered_b.norm());
  CHECK(std::abs(r) < 0.05);
}

TEST_CASE("dataset: identical seed gives a bitwise-identical dataset") {
  const GroundTruthScm scm = small_scm(7);
  Rng rng_a(900), rng_b(900);
  const Dataset a = generate_dataset(scm, 50, 100, NodeMode::Multi,
                                     ValueDraw::uniform(-10.0, 10.0), 20, rng_a);
  const Dataset b = generate_dataset(scm, 50, 100, NodeMode::Multi,
                                     ValueDraw::uniform(-10.0, 10.0), 20, rng_b);
  CHECK(a.x == b.x);
  CHECK(a.mask == b.mask);
  CHECK(a.values == b.values);
  CHECK(a.latents == b.latents);
}

TEST_CASE("dataset: observational block is shared across budgets") {
  const GroundTruthScm scm = small_scm(8);
  Rng rng_a(901), rng_b(901);
  const Dataset small = generate_dataset(scm, 300, 300, NodeMode::Multi,
                                         ValueDraw::uniform(-10.0, 10.0), 20,
                                         rng_a);
  const Dataset large = generate_dataset(scm, 300, 3300, NodeMode::Multi,
                                         ValueDraw::uniform(-10.0, 10.0), 20,
                                         rng_b);
  CHECK(small.latents.topRows(300) == large.latents.topRows(300));
  CHECK(small.x.topRows(300) == large.x.topRows(300));
}

}  // TEST_SUITE
