#pragma once

#include <string>
#include <vector>

#include "lmc/lmf.hpp"
#include "lmc/synth.hpp"

namespace lmc {

// Binary classification counts plus derived metrics; 0/0 ratios are defined
// as 0 so tables stay NaN-free (the counts allow recomputation).
struct MetricsReport {
    int tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;

    int n() const { return tp + fp + tn + fn; }
};

MetricsReport score(const std::vector<int>& predicted, const std::vector<int>& truth);

enum class SweepVariable { outlier_ratio, eta, epsilon, k_e };

SweepVariable sweep_variable_from_name(const std::string& name);

// One swept value: metrics are unweighted arithmetic means over the scenes.
struct SweepRow {
    double value = 0.0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// For each value, overrides the varied parameter (outlier_ratio on the scene
// specs, the others on the pruner config), runs the pruner on every scene,
// and averages the scores. Deterministic given the specs' seeds.
std::vector<SweepRow> sweep(const std::vector<SceneSpec>& specs, const LmfConfig& cfg,
                            SweepVariable vary, const std::vector<double>& values);

// CSV: header value,precision,recall,f1. The gnuplot variant is the same
// data space-separated with a '#' header.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_gnuplot(const std::vector<SweepRow>& rows);

}  // namespace lmc
