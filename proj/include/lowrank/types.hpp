#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace lowrank {

// Column-major throughout; columns are the sampling unit everywhere.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index  = Eigen::Index;

/// Ordered multiset of row indices in [0, dim), sampled with replacement.
struct IndexList {
    std::vector<Index> entries;
    Index dim = 0;

    Index size() const { return static_cast<Index>(entries.size()); }
    Index operator[](Index j) const { return entries[static_cast<size_t>(j)]; }
};

/// Zero-filled rescaled view of a partially observed vector: the sum
/// (dim/m) * sum_s x(omega_s) e_{omega_s}, duplicates accumulating with
/// multiplicity. Unbiased for the full vector under uniform resampling.
struct RescaledSketchVector {
    Vector values;
    IndexList source;
};

} // namespace lowrank
