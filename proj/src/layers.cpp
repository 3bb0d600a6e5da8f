#include "lmc/layers.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

namespace lmc {

FeatureMatrix LinearMap::apply_rows(const FeatureMatrix& f) const {
    if (f.cols() != weight.cols())
        throw std::invalid_argument("LinearMap: input dim " + std::to_string(f.cols()) +
                                    " != weight cols " + std::to_string(weight.cols()));
    return (f * weight.transpose()).rowwise() + bias.transpose();
}

LinearMap LinearMap::identity(int dim) {
    return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
}

LinearMap LinearMap::random(int out, int in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    LinearMap map{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    // row-major fill so the draw order is part of the format
    for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c) map.weight(r, c) = rng.next_in(-bound, bound);
    for (int r = 0; r < out; ++r) map.bias[r] = rng.next_in(-bound, bound);
    return map;
}

LinearMap LinearMap::zeros_like(const LinearMap& other) {
    return {Eigen::MatrixXd::Zero(other.weight.rows(), other.weight.cols()),
            Eigen::VectorXd::Zero(other.bias.size())};
}

Eigen::VectorXd mlp_apply(const Mlp& mlp, const Eigen::VectorXd& x) {
    if (mlp.empty()) throw std::invalid_argument("mlp_apply: empty MLP");
    Eigen::VectorXd a = mlp.front().apply(x);
    for (std::size_t l = 1; l < mlp.size(); ++l) a = mlp[l].apply(a.cwiseMax(0.0));
    return a;
}

FeatureMatrix context_norm(const FeatureMatrix& f) {
    const auto n = f.rows();
    if (n < 2) throw std::invalid_argument("context_norm: need N >= 2 rows");
    FeatureMatrix out(n, f.cols());
    for (int c = 0; c < f.cols(); ++c) {
        const double mean = f.col(c).mean();
        const double var = (f.col(c).array() - mean).square().sum() / static_cast<double>(n);
        out.col(c) = (f.col(c).array() - mean) / std::sqrt(var + 1e-5);
    }
    return out;
}

FeatureMatrix cr_residual_forward(const FeatureMatrix& f, const SpectralBasis& basis,
                                  double eta) {
    return f - apply_smoother(basis, SmootherConfig{eta}, f);
}

CrGrads cr_residual_backward(const FeatureMatrix& upstream, const FeatureMatrix& f,
                             const SpectralBasis& basis, double eta) {
    CrGrads grads;
    // adjoint of I - R is itself (R symmetric)
    grads.grad_f = upstream - apply_smoother(basis, SmootherConfig{eta}, upstream);
    grads.grad_eta = -smoother_grad_eta(basis, SmootherConfig{eta}, f, upstream);
    return grads;
}

namespace {

// Per-layer activations of one MLP evaluation: inputs[l] is what layer l
// consumed (post-ReLU for l > 0), pre[l] its affine output.
struct MlpTrace {
    std::vector<Eigen::VectorXd> inputs;
    std::vector<Eigen::VectorXd> pre;
};

Eigen::VectorXd mlp_forward_trace(const Mlp& mlp, const Eigen::VectorXd& x, MlpTrace& trace) {
    trace.inputs.resize(mlp.size());
    trace.pre.resize(mlp.size());
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < mlp.size(); ++l) {
        if (l > 0) a = a.cwiseMax(0.0);
        trace.inputs[l] = a;
        a = mlp[l].apply(a);
        trace.pre[l] = a;
    }
    return a;
}

// Backprop `g` (gradient w.r.t. the MLP output) through the traced
// evaluation; accumulates parameter gradients and returns the gradient
// w.r.t. the MLP input.
Eigen::VectorXd mlp_backward_trace(const Mlp& mlp, const MlpTrace& trace, Eigen::VectorXd g,
                                   std::vector<LinearMap>& grad_mlp) {
    for (int l = static_cast<int>(mlp.size()) - 1; l >= 0; --l) {
        grad_mlp[l].weight.noalias() += g * trace.inputs[l].transpose();
        grad_mlp[l].bias += g;
        g = mlp[l].weight.transpose() * g;
        if (l > 0) g = g.cwiseProduct((trace.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return g;
}

void check_lc_shapes(const FeatureMatrix& f, const CoherenceGraph& g, const Mlp& mlp) {
    if (mlp.empty()) throw std::invalid_argument("lc layer: empty MLP");
    if (f.rows() != g.n)
        throw std::invalid_argument("lc layer: feature rows " + std::to_string(f.rows()) +
                                    " != graph nodes " + std::to_string(g.n));
    if (mlp.front().weight.cols() != f.cols())
        throw std::invalid_argument("lc layer: MLP input dim " +
                                    std::to_string(mlp.front().weight.cols()) +
                                    " != feature dim " + std::to_string(f.cols()));
}

}  // namespace

FeatureMatrix lc_forward(const FeatureMatrix& f, const CoherenceGraph& g, const Mlp& mlp) {
    check_lc_shapes(f, g, mlp);
    const int out_dim = static_cast<int>(mlp.back().weight.rows());
    FeatureMatrix out = FeatureMatrix::Zero(g.n, out_dim);
    int isolated = 0;
    for (int i = 0; i < g.n; ++i) {
        if (g.edges[i].empty()) {
            ++isolated;
            continue;  // zero row
        }
        bool first = true;
        Eigen::VectorXd acc;
        for (const auto& e : g.edges[i]) {
            const Eigen::VectorXd y = mlp_apply(mlp, (f.row(i) - f.row(e.j)).transpose());
            if (first) {
                acc = y;
                first = false;
            } else {
                acc = acc.cwiseMax(y);
            }
        }
        out.row(i) = acc.transpose();
    }
    if (isolated > 0)
        std::cerr << "lc_forward: " << isolated << " node(s) without neighbors, output zeroed\n";
    return out;
}

LcGrads lc_backward(const FeatureMatrix& upstream, const FeatureMatrix& f,
                    const CoherenceGraph& g, const Mlp& mlp) {
    check_lc_shapes(f, g, mlp);
    const int out_dim = static_cast<int>(mlp.back().weight.rows());
    if (upstream.rows() != g.n || upstream.cols() != out_dim)
        throw std::invalid_argument("lc_backward: upstream shape mismatch");

    LcGrads grads;
    grads.grad_f = FeatureMatrix::Zero(f.rows(), f.cols());
    grads.grad_mlp.reserve(mlp.size());
    for (const auto& map : mlp) grads.grad_mlp.push_back(LinearMap::zeros_like(map));

    std::vector<MlpTrace> traces;
    std::vector<Eigen::VectorXd> outputs;
    for (int i = 0; i < g.n; ++i) {
        const int deg = static_cast<int>(g.edges[i].size());
        if (deg == 0) continue;

        traces.assign(deg, {});
        outputs.assign(deg, {});
        for (int t = 0; t < deg; ++t)
            outputs[t] =
                mlp_forward_trace(mlp, (f.row(i) - f.row(g.edges[i][t].j)).transpose(), traces[t]);

        // argmax per channel; neighbor lists are sorted by index, and the
        // strict comparison keeps the first (lowest-index) winner on ties
        for (int t = 0; t < deg; ++t) {
            Eigen::VectorXd routed = Eigen::VectorXd::Zero(out_dim);
            bool any = false;
            for (int c = 0; c < out_dim; ++c) {
                int arg = 0;
                double best = outputs[0][c];
                for (int s = 1; s < deg; ++s)
                    if (outputs[s][c] > best) {
                        best = outputs[s][c];
                        arg = s;
                    }
                if (arg == t && upstream(i, c) != 0.0) {
                    routed[c] = upstream(i, c);
                    any = true;
                }
            }
            if (!any) continue;
            const Eigen::VectorXd gz = mlp_backward_trace(mlp, traces[t], routed, grads.grad_mlp);
            grads.grad_f.row(i) += gz.transpose();
            grads.grad_f.row(g.edges[i][t].j) -= gz.transpose();
        }
    }
    return grads;
}

FeatureMatrix cr_layer(const FeatureMatrix& f, const SpectralBasis& basis, double eta) {
    return context_norm(cr_residual_forward(f, basis, eta));
}

FeatureMatrix lc_layer(const FeatureMatrix& f, const CoherenceGraph& g,
                       const LinearMap& bottleneck, const Mlp& mlp, const LinearMap& lift) {
    return lift.apply_rows(lc_forward(bottleneck.apply_rows(f), g, mlp));
}

// ----------------------------------------------------------------------------

EtaObjective::EtaObjective(const std::vector<CorrespondenceSet>& scenes, const EtaFitConfig& cfg)
    : margin_(2.0 * cfg.epsilon) {
    if (scenes.empty()) throw std::invalid_argument("EtaObjective: need at least one scene");
    scenes_.reserve(scenes.size());
    for (const auto& set : scenes) {
        if (!set.has_labels())
            throw std::invalid_argument("EtaObjective: every scene needs ground-truth labels");
        Scene sc;
        const CoherenceGraph g = build_graph(set, cfg.k, cfg.sigma, cfg.symmetrize);
        const LaplacianMatrix L = laplacian(g, cfg.laplacian_kind);
        sc.basis = eigendecompose(L, std::min(cfg.k_e, set.size()), cfg.eigs);
        sc.motions = compute_motions(set);
        sc.labels = set.labels;
        scenes_.push_back(std::move(sc));
    }
}

double EtaObjective::loss(double eta) const {
    double total = 0.0;
    for (const auto& sc : scenes_) {
        const Eigen::MatrixXd q =
            apply_smoother(sc.basis, SmootherConfig{eta}, sc.motions) - sc.motions;
        const Eigen::VectorXd rho = q.rowwise().norm();
        double in_sum = 0.0, out_sum = 0.0;
        int n_in = 0, n_out = 0;
        for (int i = 0; i < rho.size(); ++i) {
            if (sc.labels[i] == 1) {
                in_sum += rho[i] * rho[i];
                ++n_in;
            } else {
                const double h = std::max(0.0, margin_ - rho[i]);
                out_sum += h * h;
                ++n_out;
            }
        }
        double scene_loss = 0.0;
        if (n_in > 0) scene_loss += in_sum / n_in;
        if (n_out > 0) scene_loss += out_sum / n_out;
        total += scene_loss;
    }
    return total / scene_count();
}

double EtaObjective::grad_eta(double eta) const {
    double total = 0.0;
    for (const auto& sc : scenes_) {
        const Eigen::MatrixXd q =
            apply_smoother(sc.basis, SmootherConfig{eta}, sc.motions) - sc.motions;
        const Eigen::VectorXd rho = q.rowwise().norm();
        int n_in = 0, n_out = 0;
        for (int lbl : sc.labels) (lbl == 1 ? n_in : n_out)++;

        // gradient of the loss w.r.t. q, row by row
        Eigen::MatrixXd gq = Eigen::MatrixXd::Zero(q.rows(), 2);
        for (int i = 0; i < rho.size(); ++i) {
            if (sc.labels[i] == 1) {
                gq.row(i) = 2.0 * q.row(i) / n_in;
            } else if (rho[i] < margin_ && rho[i] > 1e-300) {
                gq.row(i) = -2.0 * (margin_ - rho[i]) / rho[i] * q.row(i) / n_out;
            }
        }
        // dq/deta = dR/deta * m, so reuse the smoother's eta derivative
        total += smoother_grad_eta(sc.basis, SmootherConfig{eta}, sc.motions, gq);
    }
    return total / scene_count();
}

FitEtaResult fit_eta(const std::vector<CorrespondenceSet>& scenes, double init_eta, int steps,
                     double lr, const EtaFitConfig& cfg) {
    if (!(init_eta > 0.0)) throw std::invalid_argument("fit_eta: init_eta must be positive");
    if (steps < 0) throw std::invalid_argument("fit_eta: steps must be >= 0");
    if (!(lr > 0.0)) throw std::invalid_argument("fit_eta: lr must be positive");

    const EtaObjective objective(scenes, cfg);
    FitEtaResult result;
    if (steps == 0) {  // avoid the exp(log(.)) round trip
        result.eta_final = init_eta;
        return result;
    }
    double theta = std::log(init_eta);

    for (int step = 0; step < steps; ++step) {
        const double eta = std::exp(theta);
        const double loss = std::isfinite(eta) ? objective.loss(eta)
                                               : std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(loss)) {
            result.aborted = true;
            break;
        }
        const double grad_theta = objective.grad_eta(eta) * eta;  // d/d log(eta)
        result.loss_curve.push_back(loss);
        result.eta_curve.push_back(eta);
        result.grad_curve.push_back(grad_theta);
        theta -= lr * grad_theta;
    }
    result.eta_final = result.aborted && !result.eta_curve.empty()
                           ? result.eta_curve.back()
                           : std::exp(theta);
    if (result.aborted && result.eta_curve.empty()) result.eta_final = init_eta;
    return result;
}

}  // namespace lmc
