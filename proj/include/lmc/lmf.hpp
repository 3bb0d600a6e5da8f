#pragma once

#include <utility>
#include <vector>

#include "lmc/graph.hpp"
#include "lmc/spectral.hpp"
#include "lmc/types.hpp"

namespace lmc {

// Defaults follow the standalone motion-fitting configuration: k=8 neighbors,
// sigma=0.1, eta=10, epsilon=0.025, k_e=128 eigenpairs, plain Laplacian.
// The plain Laplacian makes a globally constant motion field exactly
// residual-free; the normalized variant (used by the learned layers) is
// available through laplacian_kind.
struct LmfConfig {
    int k = 8;
    double sigma = 0.1;
    double eta = 10.0;
    double epsilon = 0.025;
    int k_e = 128;
    LaplacianKind laplacian_kind = LaplacianKind::plain;
    Symmetrize symmetrize = Symmetrize::union_;
    EigsOptions eigs;

    void validate() const;
};

// Full pipeline: k-NN graph -> Laplacian -> k_e smallest eigenpairs ->
// motions -> smoothed motions -> threshold residual norms at epsilon.
// k_e > N is clamped to N with a warning recorded in the result.
PruneResult lmf_prune(const CorrespondenceSet& set, const LmfConfig& cfg);

// Left-closed bins over [0, max residual]; the final bin includes the max.
std::vector<std::pair<double, int>> residual_histogram(const PruneResult& result, int bins);

}  // namespace lmc
