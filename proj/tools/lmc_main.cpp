// Command-line driver: synthetic scene generation, motion-fit pruning,
// metric evaluation, parameter sweeps, and a gradient self-check.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lmc/eval.hpp"
#include "lmc/graph.hpp"
#include "lmc/io.hpp"
#include "lmc/layers.hpp"
#include "lmc/lmf.hpp"
#include "lmc/rng.hpp"
#include "lmc/spectral.hpp"
#include "lmc/synth.hpp"

namespace {

using namespace lmc;

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

// Accepts prune output (CSV "index,residual,inlier" / JSONL with "inlier"),
// correspondence files with a label column, or one bare 0/1 per line.
std::vector<int> read_labels(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw std::runtime_error("cannot open " + path);
    std::string first;
    std::getline(probe, first);
    probe.close();
    if (!first.empty() && first.back() == '\r') first.pop_back();

    if (first.rfind("index,residual,inlier", 0) == 0) {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);  // header
        std::vector<int> labels;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto last = line.find_last_of(',');
            labels.push_back(std::stoi(line.substr(last + 1)));
        }
        return labels;
    }
    if (first.rfind("x,y,u,v", 0) == 0) {
        const auto set = load_correspondences(path, FileFormat::csv, LoadOptions{false});
        if (!set.has_labels()) throw std::runtime_error(path + ": no label column");
        return set.labels;
    }
    if (!first.empty() && first.front() == '{') {
        if (first.find("\"inlier\"") != std::string::npos) {
            std::ifstream in(path);
            std::string line;
            std::vector<int> labels;
            while (std::getline(in, line)) {
                const auto pos = line.find("\"inlier\":");
                if (pos == std::string::npos) continue;
                labels.push_back(std::stoi(line.substr(pos + 9)));
            }
            return labels;
        }
        const auto set = load_correspondences(path, FileFormat::jsonl, LoadOptions{false});
        if (!set.has_labels()) throw std::runtime_error(path + ": no labels");
        return set.labels;
    }
    // bare labels, one per line
    std::ifstream in(path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        labels.push_back(std::stoi(line));
    }
    if (labels.empty()) throw std::runtime_error(path + ": no labels found");
    return labels;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

struct GradCheckRow {
    std::string op;
    double max_rel_err;
    double tol;
};

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

// Central-difference probe of every backward operator on seeded random
// instances; 5 instances per op, worst relative error reported.
std::vector<GradCheckRow> run_gradcheck() {
    std::vector<GradCheckRow> rows;
    Rng rng(20240601);

    auto random_matrix = [&rng](int r, int c) {
        Eigen::MatrixXd m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = rng.next_in(-1.0, 1.0);
        return m;
    };

    const int n = 30, d = 4, instances = 5;
    for (LaplacianKind kind : {LaplacianKind::plain, LaplacianKind::normalized}) {
        const std::string kname = kind == LaplacianKind::plain ? "plain" : "normalized";
        double worst_eta = 0.0, worst_sig = 0.0, worst_crf = 0.0, worst_cre = 0.0;
        for (int inst = 0; inst < instances; ++inst) {
            SceneSpec spec;
            spec.n_points = n;
            spec.outlier_ratio = 0.3;
            spec.noise_std = 0.01;
            spec.seed = 100 + inst;
            const auto scene = generate_scene(spec);
            const auto g = build_graph(scene, 5, 0.1);
            const auto basis = eigendecompose(laplacian(g, kind), n);
            const double eta = 10.0;
            const Eigen::MatrixXd f = random_matrix(n, d);
            const Eigen::MatrixXd up = random_matrix(n, d);
            const Eigen::MatrixXd dir = random_matrix(n, d);

            const double h_eta = 1e-4 * std::max(1.0, eta);
            auto loss_s = [&](double e) {
                return (up.array() * apply_smoother(basis, SmootherConfig{e}, f).array()).sum();
            };
            const double fd_eta = (loss_s(eta + h_eta) - loss_s(eta - h_eta)) / (2 * h_eta);
            worst_eta = std::max(
                worst_eta, rel_err(smoother_grad_eta(basis, SmootherConfig{eta}, f, up), fd_eta));

            const double h = 1e-5;
            auto loss_sig = [&](const Eigen::MatrixXd& x) {
                return (up.array() * apply_smoother(basis, SmootherConfig{eta}, x).array()).sum();
            };
            const double fd_sig = (loss_sig(f + h * dir) - loss_sig(f - h * dir)) / (2 * h);
            const double an_sig =
                (smoother_grad_signal(basis, SmootherConfig{eta}, up).array() * dir.array())
                    .sum();
            worst_sig = std::max(worst_sig, rel_err(an_sig, fd_sig));

            auto loss_cr = [&](const Eigen::MatrixXd& x, double e) {
                return (up.array() * cr_residual_forward(x, basis, e).array()).sum();
            };
            const auto cr = cr_residual_backward(up, f, basis, eta);
            const double fd_crf = (loss_cr(f + h * dir, eta) - loss_cr(f - h * dir, eta)) / (2 * h);
            worst_crf = std::max(worst_crf, rel_err((cr.grad_f.array() * dir.array()).sum(), fd_crf));
            const double fd_cre = (loss_cr(f, eta + h_eta) - loss_cr(f, eta - h_eta)) / (2 * h_eta);
            worst_cre = std::max(worst_cre, rel_err(cr.grad_eta, fd_cre));
        }
        rows.push_back({"smoother_grad_eta[" + kname + "]", worst_eta, 1e-4});
        rows.push_back({"smoother_grad_signal[" + kname + "]", worst_sig, 1e-4});
        rows.push_back({"cr_residual_backward/grad_f[" + kname + "]", worst_crf, 1e-4});
        rows.push_back({"cr_residual_backward/grad_eta[" + kname + "]", worst_cre, 1e-4});
    }

    double worst_lcf = 0.0, worst_lcm = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        SceneSpec spec;
        spec.n_points = 20;
        spec.outlier_ratio = 0.3;
        spec.noise_std = 0.01;
        spec.seed = 300 + inst;
        const auto scene = generate_scene(spec);
        const auto g = build_graph(scene, 4, 0.1);
        Rng wrng(777 + inst);
        Mlp mlp{LinearMap::random(6, d, wrng), LinearMap::random(3, 6, wrng)};
        const Eigen::MatrixXd f = random_matrix(20, d);
        const Eigen::MatrixXd up = random_matrix(20, 3);
        const Eigen::MatrixXd dir = random_matrix(20, d);

        auto loss_lc = [&](const Eigen::MatrixXd& x, const Mlp& m) {
            return (up.array() * lc_forward(x, g, m).array()).sum();
        };
        const auto lg = lc_backward(up, f, g, mlp);
        const double h = 1e-6;
        const double fd_f = (loss_lc(f + h * dir, mlp) - loss_lc(f - h * dir, mlp)) / (2 * h);
        worst_lcf = std::max(worst_lcf, rel_err((lg.grad_f.array() * dir.array()).sum(), fd_f));

        Mlp dir_mlp{LinearMap::random(6, d, wrng), LinearMap::random(3, 6, wrng)};
        Mlp plus = mlp, minus = mlp;
        for (std::size_t l = 0; l < mlp.size(); ++l) {
            plus[l].weight += h * dir_mlp[l].weight;
            plus[l].bias += h * dir_mlp[l].bias;
            minus[l].weight -= h * dir_mlp[l].weight;
            minus[l].bias -= h * dir_mlp[l].bias;
        }
        const double fd_m = (loss_lc(f, plus) - loss_lc(f, minus)) / (2 * h);
        double an_m = 0.0;
        for (std::size_t l = 0; l < mlp.size(); ++l)
            an_m += (lg.grad_mlp[l].weight.array() * dir_mlp[l].weight.array()).sum() +
                    lg.grad_mlp[l].bias.dot(dir_mlp[l].bias);
        worst_lcm = std::max(worst_lcm, rel_err(an_m, fd_m));
    }
    rows.push_back({"lc_backward/grad_f", worst_lcf, 1e-3});
    rows.push_back({"lc_backward/grad_mlp", worst_lcm, 1e-3});
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplacian motion coherence toolkit"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic scene");
    SceneSpec spec;
    std::string field = "translation", out_path, out_format = "csv";
    spec.n_points = 500;
    synth_cmd->add_option("--n", spec.n_points, "Number of correspondences");
    synth_cmd->add_option("--outlier-ratio", spec.outlier_ratio, "Outlier fraction in [0,1)");
    synth_cmd->add_option("--field", field,
                          "translation|rotation_scale|affine|piecewise_affine");
    synth_cmd->add_option("--regions", spec.regions, "Voronoi regions (piecewise_affine)");
    synth_cmd->add_option("--noise", spec.noise_std, "Gaussian noise std on inlier targets");
    synth_cmd->add_option("--seed", spec.seed, "RNG seed");
    synth_cmd->add_option("--out", out_path, "Output path")->required();
    synth_cmd->add_option("--format", out_format, "csv|jsonl");

    // --- prune ---
    auto* prune_cmd = app.add_subcommand("prune", "Run the motion-fit pruner on a file");
    std::string in_path, in_format = "csv", prune_out, prune_out_format = "csv";
    std::string lap_kind = "plain", symmetrize = "union";
    LmfConfig cfg;
    bool no_range_check = false;
    int hist_bins = 0;
    prune_cmd->add_option("--input", in_path, "Correspondence file")->required();
    prune_cmd->add_option("--format", in_format, "csv|jsonl");
    prune_cmd->add_option("--k", cfg.k, "Neighbors per node");
    prune_cmd->add_option("--sigma", cfg.sigma, "Gaussian kernel bandwidth");
    prune_cmd->add_option("--eta", cfg.eta, "Smoothness strength");
    prune_cmd->add_option("--epsilon", cfg.epsilon, "Inlier threshold on residual norm");
    prune_cmd->add_option("--ke", cfg.k_e, "Eigenpairs kept (clamped to N)");
    prune_cmd->add_option("--laplacian", lap_kind, "plain|normalized");
    prune_cmd->add_option("--symmetrize", symmetrize, "union|mutual");
    prune_cmd->add_flag("--no-normalize-check", no_range_check,
                        "Skip the [-1,1] coordinate range check");
    prune_cmd->add_option("--out", prune_out, "Write index,residual,inlier here");
    prune_cmd->add_option("--out-format", prune_out_format, "csv|jsonl");
    prune_cmd->add_option("--histogram", hist_bins, "Print a residual histogram with this many bins");

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
    std::string pred_path, truth_path;
    eval_cmd->add_option("--pred", pred_path, "Predicted labels")->required();
    eval_cmd->add_option("--truth", truth_path, "Ground-truth labels")->required();

    // --- sweep ---
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over seeded scenes");
    std::string vary = "outlier_ratio", values_csv, seeds_csv = "0,1,2,3,4", sweep_out,
                gnuplot_out, sweep_field = "translation";
    int sweep_n = 500;
    double sweep_noise = 0.005, sweep_ratio = 0.5;
    int sweep_regions = 2;
    LmfConfig sweep_cfg;
    sweep_cmd->add_option("--vary", vary, "outlier_ratio|eta|epsilon|k_e");
    sweep_cmd->add_option("--values", values_csv, "Comma-separated values")->required();
    sweep_cmd->add_option("--seeds", seeds_csv, "Comma-separated scene seeds");
    sweep_cmd->add_option("--n", sweep_n, "Scene size");
    sweep_cmd->add_option("--field", sweep_field, "Scene field kind");
    sweep_cmd->add_option("--regions", sweep_regions, "Voronoi regions (piecewise_affine)");
    sweep_cmd->add_option("--noise", sweep_noise, "Scene noise std");
    sweep_cmd->add_option("--outlier-ratio", sweep_ratio, "Base outlier ratio");
    sweep_cmd->add_option("--k", sweep_cfg.k, "Neighbors per node");
    sweep_cmd->add_option("--sigma", sweep_cfg.sigma, "Kernel bandwidth");
    sweep_cmd->add_option("--eta", sweep_cfg.eta, "Smoothness strength");
    sweep_cmd->add_option("--epsilon", sweep_cfg.epsilon, "Inlier threshold");
    sweep_cmd->add_option("--ke", sweep_cfg.k_e, "Eigenpairs kept");
    sweep_cmd->add_option("--out", sweep_out, "CSV output path (default stdout)");
    sweep_cmd->add_option("--gnuplot", gnuplot_out, "Also write a gnuplot data file");

    // --- gradcheck ---
    auto* grad_cmd = app.add_subcommand("gradcheck",
                                        "Verify analytic gradients against finite differences");

    // --- graph-export ---
    auto* graph_cmd = app.add_subcommand("graph-export", "Dump the k-NN graph as JSON");
    std::string gin_path, gin_format = "csv", gout_path;
    int gk = 8;
    double gsigma = 0.1;
    std::string gsym = "union";
    graph_cmd->add_option("--input", gin_path, "Correspondence file")->required();
    graph_cmd->add_option("--format", gin_format, "csv|jsonl");
    graph_cmd->add_option("--k", gk, "Neighbors per node");
    graph_cmd->add_option("--sigma", gsigma, "Kernel bandwidth");
    graph_cmd->add_option("--symmetrize", gsym, "union|mutual");
    graph_cmd->add_option("--out", gout_path, "Output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) {
            spec.field_kind = field_from_name(field);
            const auto scene = generate_scene(spec);
            save_correspondences(out_path, scene, format_from_name(out_format));
            std::cout << "wrote " << scene.size() << " correspondences ("
                      << std::count(scene.labels.begin(), scene.labels.end(), 0)
                      << " outliers) to " << out_path << "\n";
        } else if (*prune_cmd) {
            cfg.laplacian_kind =
                lap_kind == "normalized" ? LaplacianKind::normalized : LaplacianKind::plain;
            cfg.symmetrize = symmetrize == "mutual" ? Symmetrize::mutual : Symmetrize::union_;
            const auto set = load_correspondences(in_path, format_from_name(in_format),
                                                  LoadOptions{!no_range_check});
            const auto result = lmf_prune(set, cfg);
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
            const int inliers =
                static_cast<int>(std::count(result.inlier.begin(), result.inlier.end(), 1));
            std::cout << "N=" << set.size() << " inliers=" << inliers
                      << " mean_residual=" << result.residual_norms.mean() << "\n";
            if (hist_bins > 0) {
                for (const auto& [edge, count] : residual_histogram(result, hist_bins))
                    std::cout << format_double(edge) << "\t" << count << "\n";
            }
            if (!prune_out.empty())
                save_prune_result(prune_out, result, format_from_name(prune_out_format));
        } else if (*eval_cmd) {
            const auto pred = read_labels(pred_path);
            const auto truth = read_labels(truth_path);
            const auto m = score(pred, truth);
            std::cout << "precision=" << m.precision << " recall=" << m.recall << " f1=" << m.f1
                      << " tp=" << m.tp << " fp=" << m.fp << " tn=" << m.tn << " fn=" << m.fn
                      << "\n";
        } else if (*sweep_cmd) {
            std::vector<SceneSpec> specs;
            for (double s : parse_list(seeds_csv)) {
                SceneSpec sp;
                sp.n_points = sweep_n;
                sp.outlier_ratio = sweep_ratio;
                sp.field_kind = field_from_name(sweep_field);
                sp.regions = sweep_regions;
                sp.noise_std = sweep_noise;
                sp.seed = static_cast<std::uint64_t>(s);
                specs.push_back(sp);
            }
            const auto rows =
                sweep(specs, sweep_cfg, sweep_variable_from_name(vary), parse_list(values_csv));
            const std::string csv = sweep_to_csv(rows);
            if (sweep_out.empty())
                std::cout << csv;
            else
                write_text(sweep_out, csv);
            if (!gnuplot_out.empty()) write_text(gnuplot_out, sweep_to_gnuplot(rows));
        } else if (*grad_cmd) {
            bool ok = true;
            std::printf("%-40s %14s %10s  %s\n", "op", "max_rel_err", "tol", "status");
            for (const auto& row : run_gradcheck()) {
                const bool pass = row.max_rel_err < row.tol;
                ok = ok && pass;
                std::printf("%-40s %14.3e %10.0e  %s\n", row.op.c_str(), row.max_rel_err,
                            row.tol, pass ? "pass" : "FAIL");
            }
            return ok ? 0 : 1;
        } else if (*graph_cmd) {
            const auto set = load_correspondences(gin_path, format_from_name(gin_format),
                                                  LoadOptions{false});
            const auto g = build_graph(set, gk, gsigma,
                                       gsym == "mutual" ? Symmetrize::mutual : Symmetrize::union_);
            const std::string json = graph_to_json(g);
            if (gout_path.empty())
                std::cout << json << "\n";
            else
                write_text(gout_path, json);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
