#include "lmc/eval.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lmc/io.hpp"

namespace lmc {

MetricsReport score(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("score: predicted has " + std::to_string(predicted.size()) +
                                    " entries, truth has " + std::to_string(truth.size()));
    MetricsReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == 1)
            (truth[i] == 1 ? r.tp : r.fp)++;
        else
            (truth[i] == 1 ? r.fn : r.tn)++;
    }
    r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
    r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
    r.f1 = r.precision + r.recall > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

SweepVariable sweep_variable_from_name(const std::string& name) {
    if (name == "outlier_ratio") return SweepVariable::outlier_ratio;
    if (name == "eta") return SweepVariable::eta;
    if (name == "epsilon") return SweepVariable::epsilon;
    if (name == "k_e") return SweepVariable::k_e;
    throw std::invalid_argument("unknown sweep variable '" + name + "'");
}

std::vector<SweepRow> sweep(const std::vector<SceneSpec>& specs, const LmfConfig& cfg,
                            SweepVariable vary, const std::vector<double>& values) {
    if (specs.empty()) throw std::invalid_argument("sweep: need at least one scene spec");
    if (values.empty()) throw std::invalid_argument("sweep: need at least one value");

    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double value : values) {
        SweepRow row;
        row.value = value;
        for (const auto& base_spec : specs) {
            SceneSpec spec = base_spec;
            LmfConfig run_cfg = cfg;
            switch (vary) {
                case SweepVariable::outlier_ratio: spec.outlier_ratio = value; break;
                case SweepVariable::eta: run_cfg.eta = value; break;
                case SweepVariable::epsilon: run_cfg.epsilon = value; break;
                case SweepVariable::k_e: run_cfg.k_e = static_cast<int>(std::lround(value)); break;
            }
            try {
                const CorrespondenceSet scene = generate_scene(spec);
                const PruneResult pruned = lmf_prune(scene, run_cfg);
                const MetricsReport m = score(pruned.inlier, scene.labels);
                row.precision += m.precision;
                row.recall += m.recall;
                row.f1 += m.f1;
            } catch (const std::exception& e) {
                throw std::runtime_error("sweep: value=" + format_double(value) +
                                         " seed=" + std::to_string(spec.seed) + ": " + e.what());
            }
        }
        const double count = static_cast<double>(specs.size());
        row.precision /= count;
        row.recall /= count;
        row.f1 /= count;
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "value,precision,recall,f1\n";
    for (const auto& r : rows)
        out << format_double(r.value) << ',' << format_double(r.precision) << ','
            << format_double(r.recall) << ',' << format_double(r.f1) << '\n';
    return out.str();
}

std::string sweep_to_gnuplot(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "# value precision recall f1\n";
    for (const auto& r : rows)
        out << format_double(r.value) << ' ' << format_double(r.precision) << ' '
            << format_double(r.recall) << ' ' << format_double(r.f1) << '\n';
    return out.str();
}

}  // namespace lmc
