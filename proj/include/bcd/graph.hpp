#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "bcd/rng.hpp"

namespace bcd {

/// Strictly lower triangular edge-weight matrix. Entries on or above the
/// diagonal are exactly zero.
struct EdgeMatrix {
  Eigen::MatrixXd m;

  explicit EdgeMatrix(int d);
  /// Validates strict lower triangularity.
  static EdgeMatrix from_matrix(const Eigen::MatrixXd& mat);

  int dim() const { return static_cast<int>(m.rows()); }
};

/// Node ordering as a permutation of {0,...,d-1}. The matrix form P has
/// P(i, order[i]) = 1.
struct Permutation {
  std::vector<int> order;

  static Permutation identity(int d);
  int dim() const { return static_cast<int>(order.size()); }
  bool valid() const;
  Eigen::MatrixXd matrix() const;
};

/// Weighted adjacency: w(i, j) is the weight of edge i -> j.
struct WeightedAdjacency {
  Eigen::MatrixXd w;

  int dim() const { return static_cast<int>(w.rows()); }
};

/// Which below-diagonal entries of an edge matrix are learnable.
struct EdgeMask {
  int d = 0;
  std::vector<std::pair<int, int>> positions;  // (row, col), row > col

  /// All d(d-1)/2 below-diagonal positions, row-major order.
  static EdgeMask full(int d);
  /// Only the last edge position (d-1, d-2).
  static EdgeMask single_edge(int d);
  /// Empty mask: nothing learnable.
  static EdgeMask none(int d);

  std::size_t size() const { return positions.size(); }
  void validate() const;
};

/// The generative model: latent SCM plus the linear map to observed space.
struct GroundTruthScm {
  int latent_dim = 0;
  int obs_dim = 0;
  Permutation perm;
  EdgeMatrix edges;            // strictly lower triangular ground truth
  double noise_scale = 0.1;    // shared noise standard deviation
  Eigen::MatrixXd projection;  // latent_dim x obs_dim

  GroundTruthScm() : edges(1) {}
  WeightedAdjacency adjacency() const;
};

/// Erdos-Renyi strictly-lower-triangular draw. Each of the d(d-1)/2
/// below-diagonal positions holds an edge independently with probability
/// p = edges_per_node * d / (d(d-1)/2); present edges get a weight uniform
/// over [-2,-0.5] U [0.5,2].
///
/// Draw order: positions row-major (i = 1..d-1, j = 0..i-1); one uniform for
/// presence, then magnitude and sign uniforms when present.
EdgeMatrix sample_er_dag(int d, double edges_per_node, Rng& rng);

/// W = (P L P^T)^T. Acyclic by construction for any valid inputs.
WeightedAdjacency assemble_weighted_adjacency(const Permutation& perm,
                                              const EdgeMatrix& l);

/// Topological order of the nonzero pattern, or nullopt if cyclic.
std::optional<std::vector<int>> topological_order(const Eigen::MatrixXd& w);

/// True iff the nonzero pattern of w has no directed cycle (Kahn).
bool validate_dag(const WeightedAdjacency& w);

/// Free entries of l at mask positions, in mask order.
Eigen::VectorXd pack_free_entries(const EdgeMatrix& l, const EdgeMask& mask);

/// Inverse of pack: positions in the mask take theta, everything else is
/// copied from fixed.
EdgeMatrix unpack_free_entries(const Eigen::VectorXd& theta,
                               const EdgeMask& mask, const EdgeMatrix& fixed);

}  // namespace bcd
