#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>

#include "lmc/graph.hpp"

namespace lmc {

// The k_e algebraically smallest eigenpairs of a graph Laplacian.
// eigenvalues ascending, eigenvectors column-orthonormal, sign-fixed so the
// largest-magnitude entry of each column is positive.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;   // k_e, ascending
    Eigen::MatrixXd eigenvectors;  // n x k_e
    LaplacianKind source_kind = LaplacianKind::plain;

    int n() const { return static_cast<int>(eigenvectors.rows()); }
    int k_e() const { return static_cast<int>(eigenvectors.cols()); }
};

struct SmootherConfig {
    double eta = 10.0;  // smoothness strength, >= 0
};

struct EigsOptions {
    // n <= dense_cutoff uses a full dense symmetric eigensolve; above it a
    // thick-restart Lanczos with explicit Rayleigh-Ritz runs on the sparse
    // matrix (no shifts, no inner solves).
    int dense_cutoff = 512;
    double tol = 1e-9;      // accept when ||L u - lambda u||_2 <= tol * max(1, |lambda|)
    int max_restarts = 400;
    int subspace = 0;       // Krylov/restart basis size; 0 picks a default from k_e
    // Graphs with many weakly attached nodes (e.g. heavy outlier fractions)
    // produce wide near-degenerate eigenvalue clusters that single-vector
    // Lanczos cannot split. When restarts stop making progress and
    // n <= dense_fallback, the solver switches to the exact dense path and
    // notes it on stderr; set 0 to disable and fail with the achieved
    // residual instead.
    int dense_fallback = 4096;
};

SpectralBasis eigendecompose(const LaplacianMatrix& L, int k_e, const EigsOptions& opts = {});

// s = U diag(1/(1 + eta*lambda_i)) U^T signal, computed as two skinny
// products; the n x n smoother matrix is never formed. signal is n x c.
Eigen::MatrixXd apply_smoother(const SpectralBasis& basis, const SmootherConfig& cfg,
                               const Eigen::MatrixXd& signal);

// d loss / d eta for loss gradient `upstream` w.r.t. the smoother output:
// <upstream, U diag(-lambda_i/(1+eta*lambda_i)^2) U^T signal>.
double smoother_grad_eta(const SpectralBasis& basis, const SmootherConfig& cfg,
                         const Eigen::MatrixXd& signal, const Eigen::MatrixXd& upstream);

// Adjoint w.r.t. the input signal; the smoother is symmetric so this is the
// smoother itself applied to `upstream`.
Eigen::MatrixXd smoother_grad_signal(const SpectralBasis& basis, const SmootherConfig& cfg,
                                     const Eigen::MatrixXd& upstream);

// Binary basis cache keyed by the graph hash. load returns nullopt when the
// file is missing, malformed, or was written for a different graph.
void save_basis(const std::string& path, const SpectralBasis& basis, std::uint64_t graph_hash);
std::optional<SpectralBasis> load_basis(const std::string& path, std::uint64_t expected_hash);

}  // namespace lmc
