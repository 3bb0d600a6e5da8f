#pragma once

#include <Eigen/Dense>
#include <queue>
#include <vector>

#include "lmc/graph.hpp"
#include "lmc/rng.hpp"
#include "lmc/spectral.hpp"
#include "lmc/synth.hpp"
#include "lmc/types.hpp"

namespace lmc::test {

inline SceneSpec scene_spec(int n, double ratio, FieldKind kind, double noise,
                            std::uint64_t seed, int regions = 2) {
    SceneSpec s;
    s.n_points = n;
    s.outlier_ratio = ratio;
    s.field_kind = kind;
    s.regions = regions;
    s.noise_std = noise;
    s.seed = seed;
    return s;
}

// Default benchmark family: translation field with a little target noise.
inline CorrespondenceSet bench_scene(int n, double ratio, std::uint64_t seed,
                                     double noise = 0.005) {
    return generate_scene(scene_spec(n, ratio, FieldKind::translation, noise, seed));
}

// Correspondences drawn uniformly in [-0.95, 0.95]^4; no structure, used
// where only shapes and generic numerics matter.
inline CorrespondenceSet random_set(int n, Rng& rng) {
    CorrespondenceSet set;
    set.items.reserve(n);
    for (int i = 0; i < n; ++i) {
        Correspondence c;
        c.x = rng.next_in(-0.95, 0.95);
        c.y = rng.next_in(-0.95, 0.95);
        c.u = rng.next_in(-0.95, 0.95);
        c.v = rng.next_in(-0.95, 0.95);
        set.items.push_back(c);
    }
    return set;
}

inline bool connected(const CoherenceGraph& g) {
    if (g.n == 0) return true;
    std::vector<char> seen(g.n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int i = q.front();
        q.pop();
        for (const auto& e : g.edges[i])
            if (!seen[e.j]) {
                seen[e.j] = 1;
                ++reached;
                q.push(e.j);
            }
    }
    return reached == g.n;
}

inline Eigen::MatrixXd dense_of(const LaplacianMatrix& L) { return Eigen::MatrixXd(L.matrix); }

// Direct solve of (I + eta L) s = signal; the reference the truncated
// smoother must reproduce at k_e = n.
inline Eigen::MatrixXd solve_oracle(const LaplacianMatrix& L, double eta,
                                    const Eigen::MatrixXd& signal) {
    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(L.n(), L.n()) + eta * dense_of(L);
    return A.ldlt().solve(signal);
}

// ||v - m||_F^2 + eta tr(v^T L v), the quantity the smoother minimizes.
inline double smoothing_objective(const Eigen::MatrixXd& v, const Eigen::MatrixXd& m,
                                  const LaplacianMatrix& L, double eta) {
    const double fit = (v - m).squaredNorm();
    return fit + eta * (v.transpose() * (L.matrix * v)).trace();
}

inline SpectralBasis truncate_basis(const SpectralBasis& basis, int k) {
    SpectralBasis out;
    out.eigenvalues = basis.eigenvalues.head(k);
    out.eigenvectors = basis.eigenvectors.leftCols(k);
    out.source_kind = basis.source_kind;
    return out;
}

}  // namespace lmc::test
