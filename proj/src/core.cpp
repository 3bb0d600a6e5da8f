#include "lmc/types.hpp"

#include <cmath>
#include <stdexcept>

namespace lmc {

void CorrespondenceSet::validate(bool check_range) const {
    if (items.empty()) throw std::invalid_argument("correspondence set is empty");
    const int n = size();
    if (!labels.empty() && static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("labels size " + std::to_string(labels.size()) +
                                    " does not match N=" + std::to_string(n));
    if (features.size() > 0 && features.rows() != n)
        throw std::invalid_argument("feature rows " + std::to_string(features.rows()) +
                                    " do not match N=" + std::to_string(n));
    for (int i = 0; i < n; ++i) {
        const auto& c = items[i];
        const double coords[4] = {c.x, c.y, c.u, c.v};
        for (double t : coords) {
            if (!std::isfinite(t))
                throw std::invalid_argument("non-finite coordinate at row " + std::to_string(i));
            if (check_range && (t < -1.0 || t > 1.0))
                throw std::invalid_argument("coordinate " + std::to_string(t) + " at row " +
                                            std::to_string(i) + " outside [-1,1]");
        }
    }
    for (int v : labels)
        if (v != 0 && v != 1) throw std::invalid_argument("labels must be 0/1");
}

MotionField compute_motions(const CorrespondenceSet& set) {
    MotionField m(set.size(), 2);
    for (int i = 0; i < set.size(); ++i) {
        m(i, 0) = set.items[i].u - set.items[i].x;
        m(i, 1) = set.items[i].v - set.items[i].y;
    }
    return m;
}

}  // namespace lmc
