#include "lmc/lmf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lmc {

void LmfConfig::validate() const {
    if (k < 1) throw std::invalid_argument("LmfConfig: k must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("LmfConfig: sigma must be positive");
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw std::invalid_argument("LmfConfig: eta must be finite and >= 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("LmfConfig: epsilon must be positive");
    if (k_e < 1) throw std::invalid_argument("LmfConfig: k_e must be positive");
}

PruneResult lmf_prune(const CorrespondenceSet& set, const LmfConfig& cfg) {
    cfg.validate();
    const int n = set.size();

    PruneResult result;
    int k_e = cfg.k_e;
    if (k_e > n) {
        result.warnings.push_back("k_e=" + std::to_string(cfg.k_e) + " clamped to N=" +
                                  std::to_string(n));
        k_e = n;
    }

    const CoherenceGraph g = build_graph(set, cfg.k, cfg.sigma, cfg.symmetrize);
    const LaplacianMatrix L = laplacian(g, cfg.laplacian_kind);
    const SpectralBasis basis = eigendecompose(L, k_e, cfg.eigs);

    const MotionField m = compute_motions(set);
    const Eigen::MatrixXd s = apply_smoother(basis, SmootherConfig{cfg.eta}, m);

    result.smoothed = s;
    result.residual_norms = (s - m).rowwise().norm();
    result.inlier.resize(n);
    for (int i = 0; i < n; ++i) result.inlier[i] = result.residual_norms[i] <= cfg.epsilon ? 1 : 0;
    return result;
}

std::vector<std::pair<double, int>> residual_histogram(const PruneResult& result, int bins) {
    if (bins < 1) throw std::invalid_argument("residual_histogram: bins must be >= 1");
    const int n = static_cast<int>(result.residual_norms.size());
    const double max_res = n > 0 ? result.residual_norms.maxCoeff() : 0.0;
    const double width = max_res / bins;

    std::vector<std::pair<double, int>> hist(bins);
    for (int b = 0; b < bins; ++b) hist[b] = {width * b, 0};
    for (int i = 0; i < n; ++i) {
        int b = width > 0.0 ? static_cast<int>(result.residual_norms[i] / width) : 0;
        if (b >= bins) b = bins - 1;  // the max lands in the last bin
        ++hist[b].second;
    }
    return hist;
}

}  // namespace lmc
