#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace lmc {

// A putative match between two images: source keypoint (x, y), target
// keypoint (u, v), both in normalized coordinates.
struct Correspondence {
    double x = 0.0;
    double y = 0.0;
    double u = 0.0;
    double v = 0.0;
};

// Ordered set of correspondences with optional ground-truth labels (0/1) and
// optional per-row feature vectors. Row order is significant: index i refers
// to row i in every derived structure (motions, graph nodes, residuals).
struct CorrespondenceSet {
    std::vector<Correspondence> items;
    std::vector<int> labels;    // empty, or one 0/1 entry per row
    Eigen::MatrixXd features;   // 0x0, or N x d0

    int size() const { return static_cast<int>(items.size()); }
    bool has_labels() const { return !labels.empty(); }
    bool has_features() const { return features.size() > 0; }

    // Throws std::invalid_argument on any structural violation; the range
    // check ([-1,1] coordinates) is optional because it only applies to the
    // standard ingestion path.
    void validate(bool check_range = false) const;
};

// Row i = (u_i - x_i, v_i - y_i).
using MotionField = Eigen::MatrixX2d;

MotionField compute_motions(const CorrespondenceSet& set);

// Output of the pruner: per-row residual norm ||s_i - m_i||_2, the binary
// inlier decision at the threshold used for the run, and the smoothed field.
struct PruneResult {
    Eigen::VectorXd residual_norms;
    std::vector<int> inlier;
    Eigen::MatrixX2d smoothed;
    std::vector<std::string> warnings;
};

}  // namespace lmc
