// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "circform/errors.hpp"

namespace circform {

/// Undirected neighbor graph with an ordered edge list. Vertices are
/// 1-based; each edge stores its (tail, head) orientation, which fixes the
/// sign convention of the incidence matrix.
struct FormationGraph {
  int vertex_count = 0;
  std::vector<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Throws ValidationError unless the graph is well formed: positive vertex
/// count, indices in [1, vertex_count], no self loops, no duplicate edge in
/// either orientation.
void validate(const FormationGraph& graph);

using IncidenceMatrix = Eigen::MatrixXi;
using ConsensusMatrix = Eigen::MatrixXi;

/// Vertex-by-edge incidence matrix B: column k carries +1 at the tail of
/// edge k and -1 at its head.
IncidenceMatrix incidence_matrix(const FormationGraph& graph);

/// -B^T B in exact integer arithmetic. Hurwitz exactly when the graph has
/// no cycles.
ConsensusMatrix consensus_matrix(const FormationGraph& graph);

/// True when the graph has no cycle (edges treated as undirected).
bool is_acyclic(const FormationGraph& graph);

/// True when every vertex is reachable from vertex 1.
bool is_connected(const FormationGraph& graph);

/// Number of incident edges of the busiest vertex.
int max_degree(const FormationGraph& graph);

/// Degree of one vertex (1-based).
int degree(const FormationGraph& graph, int vertex);

/// Indices (0-based) of the edges incident to a vertex, in edge order.
std::vector<int> incident_edges(const FormationGraph& graph, int vertex);

struct HurwitzReport {
  Eigen::VectorXd eigenvalues;  // ascending
  double max_real_eigenvalue = 0.0;
  bool is_hurwitz = false;
};

/// Symmetric eigensolve; Hurwitz iff the largest eigenvalue lies strictly
/// below -tolerance. Throws if the input is not symmetric or the solver
/// fails to converge.
HurwitzReport verify_hurwitz(const Eigen::MatrixXd& matrix,
                             double tolerance = 1e-9);
HurwitzReport verify_hurwitz(const ConsensusMatrix& matrix,
                             double tolerance = 1e-9);

}  // namespace circform
