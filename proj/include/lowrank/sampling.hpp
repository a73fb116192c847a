#pragma once

#include <stdexcept>
#include <unordered_map>

#include "lowrank/rng.hpp"
#include "lowrank/types.hpp"

namespace lowrank {

/// Draws m indices i.i.d. uniform on [0, d), with replacement.
inline IndexList draw_indices(Index d, Index m, Rng& rng) {
    if (d < 1) throw std::invalid_argument("draw_indices: dimension must be positive");
    if (m < 1) throw std::invalid_argument("draw_indices: sample count must be positive");
    IndexList omega;
    omega.dim = d;
    omega.entries.resize(static_cast<size_t>(m));
    for (auto& e : omega.entries) e = static_cast<Index>(uniform_below(rng, static_cast<uint64_t>(d)));
    return omega;
}

/// x restricted to omega: output(j) = x(omega(j)), duplicates repeated.
inline Vector subsample_vector(const Vector& x, const IndexList& omega) {
    if (omega.dim != x.size()) throw std::invalid_argument("subsample_vector: dimension mismatch");
    Vector out(omega.size());
    for (Index j = 0; j < omega.size(); ++j) out(j) = x(omega[j]);
    return out;
}

/// Row-subsampled matrix: row j of the output is row omega(j) of U.
inline Matrix subsample_basis(const Eigen::Ref<const Matrix>& U, const IndexList& omega) {
    if (omega.dim != U.rows()) throw std::invalid_argument("subsample_basis: dimension mismatch");
    Matrix out(omega.size(), U.cols());
    for (Index j = 0; j < omega.size(); ++j) out.row(j) = U.row(omega[j]);
    return out;
}

/// Zero-fill rescale of the sampled values: (d/m) * sum_s x(omega_s) e_{omega_s}.
/// x_omega is aligned with omega, i.e. x_omega(s) = x(omega(s)).
inline RescaledSketchVector zero_fill_rescale(const Vector& x_omega, const IndexList& omega) {
    if (x_omega.size() != omega.size())
        throw std::invalid_argument("zero_fill_rescale: values not aligned with index list");
    if (omega.size() < 1) throw std::invalid_argument("zero_fill_rescale: empty index list");
    RescaledSketchVector out;
    out.values = Vector::Zero(omega.dim);
    const double scale = static_cast<double>(omega.dim) / static_cast<double>(omega.size());
    for (Index s = 0; s < omega.size(); ++s) out.values(omega[s]) += scale * x_omega(s);
    out.source = omega;
    return out;
}

/// Map-based variant: values must cover every index that occurs in omega.
inline RescaledSketchVector zero_fill_rescale(const std::unordered_map<Index, double>& values,
                                              const IndexList& omega, Index d) {
    if (omega.dim != d) throw std::invalid_argument("zero_fill_rescale: index list dimension mismatch");
    Vector x_omega(omega.size());
    for (Index s = 0; s < omega.size(); ++s) {
        auto it = values.find(omega[s]);
        if (it == values.end())
            throw std::invalid_argument("zero_fill_rescale: missing value for sampled index");
        x_omega(s) = it->second;
    }
    return zero_fill_rescale(x_omega, omega);
}

} // namespace lowrank
