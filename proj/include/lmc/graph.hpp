#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <vector>

#include "lmc/types.hpp"

namespace lmc {

// How the directed k-NN relation is turned into an undirected edge set.
// union: keep (i,j) if either i->j or j->i is a k-NN edge (default; preserves
// connectivity at low k). mutual: keep only if both directions are, which can
// isolate nodes.
enum class Symmetrize { union_, mutual };

struct GraphEdge {
    int j;
    double w;
};

// Undirected weighted k-NN graph over correspondences in 4D (x,y,u,v) space.
// Edge weight w_ij = exp(-d_ij^2 / sigma^2); no self-edges; neighbor lists
// sorted by index.
struct CoherenceGraph {
    int n = 0;
    std::vector<std::vector<GraphEdge>> edges;
    Eigen::VectorXd degree;  // d_i = sum_j w_ij
    int k = 0;
    double sigma = 0.0;
    Symmetrize symmetrize = Symmetrize::union_;

    std::vector<int> isolated_nodes() const;
    // FNV-1a over (n, k, sigma, sorted edge triples); used to key basis caches.
    std::uint64_t hash() const;
};

enum class LaplacianKind { plain, normalized };

struct LaplacianMatrix {
    LaplacianKind kind = LaplacianKind::plain;
    Eigen::SparseMatrix<double> matrix;  // symmetric n x n

    int n() const { return static_cast<int>(matrix.rows()); }
};

// Exact brute-force k-NN (ties broken toward the lower node index), then
// symmetrization and Gaussian weighting. Requires N >= 2, k < N, sigma > 0.
CoherenceGraph build_graph(const CorrespondenceSet& set, int k, double sigma,
                           Symmetrize symmetrize = Symmetrize::union_);

// plain: L = D - A. normalized: D^{-1/2} (D - A) D^{-1/2}, with zero
// rows/columns for isolated nodes.
LaplacianMatrix laplacian(const CoherenceGraph& g, LaplacianKind kind);

// Debug dump: {"n":, "k":, "sigma":, "edges": [[i, j, w], ...]} with each
// undirected edge emitted once as i < j, sorted by (i, j).
std::string graph_to_json(const CoherenceGraph& g);

}  // namespace lmc
