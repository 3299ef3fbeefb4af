#include "bcd/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bcd {

EdgeMatrix::EdgeMatrix(int d) {
  if (d < 1) throw std::invalid_argument("EdgeMatrix: d must be >= 1");
  m = Eigen::MatrixXd::Zero(d, d);
}

EdgeMatrix EdgeMatrix::from_matrix(const Eigen::MatrixXd& mat) {
  if (mat.rows() != mat.cols() || mat.rows() < 1)
    throw std::invalid_argument("EdgeMatrix: matrix must be square, d >= 1");
  for (Eigen::Index i = 0; i < mat.rows(); ++i)
    for (Eigen::Index j = i; j < mat.cols(); ++j)
      if (mat(i, j) != 0.0)
        throw std::invalid_argument(
            "EdgeMatrix: entries on or above the diagonal must be zero");
  EdgeMatrix out(static_cast<int>(mat.rows()));
  out.m = mat;
  return out;
}

Permutation Permutation::identity(int d) {
  Permutation p;
  p.order.resize(d);
  for (int i = 0; i < d; ++i) p.order[i] = i;
  return p;
}

bool Permutation::valid() const {
  const int d = dim();
  std::vector<bool> seen(d, false);
  for (int v : order) {
    if (v < 0 || v >= d || seen[v]) return false;
    seen[v] = true;
  }
  return d >= 1;
}

Eigen::MatrixXd Permutation::matrix() const {
  const int d = dim();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) p(i, order[i]) = 1.0;
  return p;
}

WeightedAdjacency GroundTruthScm::adjacency() const {
  return assemble_weighted_adjacency(perm, edges);
}

EdgeMatrix sample_er_dag(int d, double edges_per_node, Rng& rng) {
  if (d < 1) throw std::invalid_argument("sample_er_dag: d must be >= 1");
  if (edges_per_node <= 0.0)
    throw std::invalid_argument("sample_er_dag: edges_per_node must be > 0");
  EdgeMatrix l(d);
  if (d == 1) return l;  // no below-diagonal positions

  const double n_positions = d * (d - 1) / 2.0;
  const double p = edges_per_node * d / n_positions;
  if (p > 1.0)
    throw std::invalid_argument("sample_er_dag: density implies p > 1");

  for (int i = 1; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      if (rng.uniform() < p) {
        const double magnitude = rng.uniform(0.5, 2.0);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        l.m(i, j) = sign * magnitude;
      }
    }
  }
  return l;
}

WeightedAdjacency assemble_weighted_adjacency(const Permutation& perm,
                                              const EdgeMatrix& l) {
  if (!perm.valid()) throw std::invalid_argument("assemble: invalid permutation");
  if (perm.dim() != l.dim())
    throw std::invalid_argument("assemble: dimension mismatch");
  const Eigen::MatrixXd p = perm.matrix();
  WeightedAdjacency out;
  out.w = (p * l.m * p.transpose()).transpose();
  return out;
}

std::optional<std::vector<int>> topological_order(const Eigen::MatrixXd& w) {
  const int d = static_cast<int>(w.rows());
  std::vector<int> in_degree(d, 0);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      if (i != j && w(i, j) != 0.0) ++in_degree[j];

  std::vector<int> ready;
  for (int j = 0; j < d; ++j)
    if (in_degree[j] == 0) ready.push_back(j);

  std::vector<int> order;
  order.reserve(d);
  while (!ready.empty()) {
    const int i = ready.back();
    ready.pop_back();
    order.push_back(i);
    for (int j = 0; j < d; ++j) {
      if (j != i && w(i, j) != 0.0 && --in_degree[j] == 0) ready.push_back(j);
    }
  }
  if (static_cast<int>(order.size()) != d) return std::nullopt;
  return order;
}

bool validate_dag(const WeightedAdjacency& w) {
  if (w.w.rows() != w.w.cols())
    throw std::invalid_argument("validate_dag: matrix must be square");
  return topological_order(w.w).has_value();
}

EdgeMask EdgeMask::full(int d) {
  EdgeMask mask;
  mask.d = d;
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < i; ++j) mask.positions.emplace_back(i, j);
  return mask;
}

EdgeMask EdgeMask::single_edge(int d) {
  if (d < 2) throw std::invalid_argument("EdgeMask::single_edge: d must be >= 2");
  EdgeMask mask;
  mask.d = d;
  mask.positions.emplace_back(d - 1, d - 2);
  return mask;
}

EdgeMask EdgeMask::none(int d) {
  EdgeMask mask;
  mask.d = d;
  return mask;
}

void EdgeMask::validate() const {
  if (d < 1) throw std::invalid_argument("EdgeMask: d must be >= 1");
  for (const auto& [i, j] : positions)
    if (i <= j || i >= d || j < 0)
      throw std::invalid_argument("EdgeMask: position (" + std::to_string(i) +
                                  "," + std::to_string(j) +
                                  ") is not strictly below the diagonal");
}

Eigen::VectorXd pack_free_entries(const EdgeMatrix& l, const EdgeMask& mask) {
  mask.validate();
  if (mask.d != l.dim())
    throw std::invalid_argument("pack_free_entries: dimension mismatch");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t k = 0; k < mask.size(); ++k)
    theta[static_cast<Eigen::Index>(k)] =
        l.m(mask.positions[k].first, mask.positions[k].second);
  return theta;
}

EdgeMatrix unpack_free_entries(const Eigen::VectorXd& theta,
                               const EdgeMask& mask, const EdgeMatrix& fixed) {
  mask.validate();
  if (mask.d != fixed.dim())
    throw std::invalid_argument("unpack_free_entries: dimension mismatch");
  if (static_cast<std::size_t>(theta.size()) != mask.size())
    throw std::invalid_argument("unpack_free_entries: theta length != mask size");
  EdgeMatrix out = fixed;
  for (std::size_t k = 0; k < mask.size(); ++k)
    out.m(mask.positions[k].first, mask.positions[k].second) =
        theta[static_cast<Eigen::Index>(k)];
  return out;
}

}  // namespace bcd
