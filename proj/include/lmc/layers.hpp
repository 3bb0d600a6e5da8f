#pragma once

#include <Eigen/Core>
#include <vector>

#include "lmc/graph.hpp"
#include "lmc/rng.hpp"
#include "lmc/spectral.hpp"
#include "lmc/types.hpp"

namespace lmc {

// N x d features of N correspondences.
using FeatureMatrix = Eigen::MatrixXd;

struct LinearMap {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return weight * x + bias; }
    // Applied row-wise to an N x in feature matrix.
    FeatureMatrix apply_rows(const FeatureMatrix& f) const;

    static LinearMap identity(int dim);
    // Uniform in [-1/sqrt(in), 1/sqrt(in)], deterministic given the rng state.
    static LinearMap random(int out, int in, Rng& rng);
    static LinearMap zeros_like(const LinearMap& other);
};

// MLP = LinearMaps with ReLU between them (none after the last).
using Mlp = std::vector<LinearMap>;

Eigen::VectorXd mlp_apply(const Mlp& mlp, const Eigen::VectorXd& x);

// Per-channel standardization across the N rows of one scene:
// (f - mean) / sqrt(var + 1e-5), population variance. Requires N >= 2.
FeatureMatrix context_norm(const FeatureMatrix& f);

// Residual after spectral smoothing: f - U diag(1/(1+eta*lambda)) U^T f.
// Small for rows living in the smooth (low-frequency) part of the graph.
FeatureMatrix cr_residual_forward(const FeatureMatrix& f, const SpectralBasis& basis, double eta);

struct CrGrads {
    FeatureMatrix grad_f;
    double grad_eta = 0.0;
};

CrGrads cr_residual_backward(const FeatureMatrix& upstream, const FeatureMatrix& f,
                             const SpectralBasis& basis, double eta);

// out_i = channelwise max over neighbors j of MLP(f_i - f_j). Nodes without
// neighbors produce a zero row (and a warning on stderr).
FeatureMatrix lc_forward(const FeatureMatrix& f, const CoherenceGraph& g, const Mlp& mlp);

struct LcGrads {
    FeatureMatrix grad_f;
    std::vector<LinearMap> grad_mlp;  // same shapes as the forward MLP
};

// Max-pool subgradient: flow only through the argmax neighbor per channel,
// ties broken toward the lowest neighbor index.
LcGrads lc_backward(const FeatureMatrix& upstream, const FeatureMatrix& f,
                    const CoherenceGraph& g, const Mlp& mlp);

// Convenience compositions of the primitives above.
FeatureMatrix cr_layer(const FeatureMatrix& f, const SpectralBasis& basis, double eta);
FeatureMatrix lc_layer(const FeatureMatrix& f, const CoherenceGraph& g,
                       const LinearMap& bottleneck, const Mlp& mlp, const LinearMap& lift);

// ----------------------------------------------------------------------------
// Fitting the smoothness strength on labeled scenes.

struct EtaFitConfig {
    int k = 8;
    double sigma = 0.1;
    int k_e = 128;  // clamped to N per scene
    LaplacianKind laplacian_kind = LaplacianKind::plain;
    Symmetrize symmetrize = Symmetrize::union_;
    EigsOptions eigs;
    double epsilon = 0.025;  // hinge margin for outliers is 2*epsilon
};

// Differentiable surrogate objective over eta, averaged over scenes:
//   mean_{labeled inliers} ||q_i||^2 + mean_{labeled outliers} hinge(||q_i||)^2
// with q = R(eta) m - m and hinge(r) = max(0, 2*epsilon - r). Pushes inlier
// residuals down and outlier residuals past the margin. Graphs and
// eigenbases are precomputed once; loss/gradient evaluations only cost the
// truncated smoother products.
class EtaObjective {
public:
    EtaObjective(const std::vector<CorrespondenceSet>& scenes, const EtaFitConfig& cfg = {});

    double loss(double eta) const;
    double grad_eta(double eta) const;
    int scene_count() const { return static_cast<int>(scenes_.size()); }

private:
    struct Scene {
        SpectralBasis basis;
        MotionField motions;
        std::vector<int> labels;
    };
    std::vector<Scene> scenes_;
    double margin_;
};

struct FitEtaResult {
    double eta_final = 0.0;
    std::vector<double> loss_curve;  // loss at each step, before that step's update
    std::vector<double> eta_curve;   // eta at each step, before the update
    std::vector<double> grad_curve;  // d loss / d log(eta) at each step
    bool aborted = false;            // non-finite loss hit; state is the last finite one
};

// Gradient descent on log(eta) (keeps eta positive). steps=0 returns
// init_eta with empty curves.
FitEtaResult fit_eta(const std::vector<CorrespondenceSet>& scenes, double init_eta, int steps,
                     double lr, const EtaFitConfig& cfg = {});

}  // namespace lmc
