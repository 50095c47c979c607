// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/formation_graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <set>
#include <string>

namespace circform {

void validate(const FormationGraph& graph) {
  if (graph.vertex_count <= 0) {
    throw ValidationError("graph: vertex_count must be positive, got " +
                          std::to_string(graph.vertex_count));
  }
  std::set<std::pair<int, int>> seen;
  for (int k = 0; k < graph.edge_count(); ++k) {
    const auto [tail, head] = graph.edges[k];
    if (tail < 1 || tail > graph.vertex_count || head < 1 ||
        head > graph.vertex_count) {
      throw ValidationError("graph: edge " + std::to_string(k + 1) + " (" +
                            std::to_string(tail) + "," + std::to_string(head) +
                            ") has a vertex outside [1," +
                            std::to_string(graph.vertex_count) + "]");
    }
    if (tail == head) {
      throw ValidationError("graph: edge " + std::to_string(k + 1) +
                            " is a self loop at vertex " +
                            std::to_string(tail));
    }
    const auto key = std::minmax(tail, head);
    if (!seen.insert(key).second) {
      throw ValidationError("graph: duplicate edge (" + std::to_string(tail) +
                            "," + std::to_string(head) + ")");
    }
  }
}

IncidenceMatrix incidence_matrix(const FormationGraph& graph) {
  validate(graph);
  IncidenceMatrix b = IncidenceMatrix::Zero(graph.vertex_count,
                                            graph.edge_count());
  for (int k = 0; k < graph.edge_count(); ++k) {
    b(graph.edges[k].first - 1, k) = 1;
    b(graph.edges[k].second - 1, k) = -1;
  }
  return b;
}

ConsensusMatrix consensus_matrix(const FormationGraph& graph) {
  const IncidenceMatrix b = incidence_matrix(graph);
  return -(b.transpose() * b);
}

namespace {

// Depth-first walk over the undirected adjacency; reports a cycle when a
// visited vertex is reached through an edge other than the entry edge.
struct GraphWalk {
  bool acyclic = true;
  int reached_from_first = 0;

  explicit GraphWalk(const FormationGraph& graph) {
    const int n = graph.vertex_count;
    std::vector<std::vector<std::pair<int, int>>> adj(n + 1);  // (nbr, edge)
    for (int k = 0; k < graph.edge_count(); ++k) {
      const auto [tail, head] = graph.edges[k];
      adj[tail].emplace_back(head, k);
      adj[head].emplace_back(tail, k);
    }
    std::vector<bool> visited(n + 1, false);
    std::vector<std::pair<int, int>> stack;  // (vertex, entry edge)
    for (int root = 1; root <= n; ++root) {
      if (visited[root]) continue;
      int in_component = 0;
      stack.push_back({root, -1});
      visited[root] = true;
      while (!stack.empty()) {
        const auto [v, entry_edge] = stack.back();
        stack.pop_back();
        ++in_component;
        for (const auto& [w, edge] : adj[v]) {
          if (edge == entry_edge) continue;
          if (visited[w]) {
            acyclic = false;
            continue;
          }
          visited[w] = true;
          stack.push_back({w, edge});
        }
      }
      if (root == 1) reached_from_first = in_component;
    }
  }
};

}  // namespace

bool is_acyclic(const FormationGraph& graph) {
  validate(graph);
  return GraphWalk(graph).acyclic;
}

bool is_connected(const FormationGraph& graph) {
  validate(graph);
  return GraphWalk(graph).reached_from_first == graph.vertex_count;
}

int degree(const FormationGraph& graph, int vertex) {
  int d = 0;
  for (const auto& [tail, head] : graph.edges) {
    if (tail == vertex || head == vertex) ++d;
  }
  return d;
}

int max_degree(const FormationGraph& graph) {
  int best = 0;
  for (int v = 1; v <= graph.vertex_count; ++v) {
    best = std::max(best, degree(graph, v));
  }
  return best;
}

std::vector<int> incident_edges(const FormationGraph& graph, int vertex) {
  std::vector<int> out;
  for (int k = 0; k < graph.edge_count(); ++k) {
    if (graph.edges[k].first == vertex || graph.edges[k].second == vertex) {
      out.push_back(k);
    }
  }
  return out;
}

HurwitzReport verify_hurwitz(const Eigen::MatrixXd& matrix, double tolerance) {
  if (matrix.rows() != matrix.cols()) {
    throw ValidationError("verify_hurwitz: matrix must be square");
  }
  if (matrix.size() > 0) {
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if (asym > 1e-12 * scale) {
      throw ValidationError("verify_hurwitz: matrix is not symmetric");
    }
  }
  HurwitzReport report;
  if (matrix.size() == 0) {
    // Empty edge set: vacuously Hurwitz.
    report.eigenvalues = Eigen::VectorXd(0);
    report.max_real_eigenvalue = -std::numeric_limits<double>::infinity();
    report.is_hurwitz = true;
    return report;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("verify_hurwitz: eigensolver did not converge");
  }
  report.eigenvalues = solver.eigenvalues();
  report.max_real_eigenvalue = report.eigenvalues.maxCoeff();
  report.is_hurwitz = report.max_real_eigenvalue < -tolerance;
  return report;
}

HurwitzReport verify_hurwitz(const ConsensusMatrix& matrix, double tolerance) {
  return verify_hurwitz(Eigen::MatrixXd(matrix.cast<double>()), tolerance);
}

}  // namespace circform
