#pragma once

#include "evograph/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <functional>
#include <vector>

namespace evograph {

/// Euclidean projection onto {x >= 0, sum(x) = radius} by sort-and-threshold:
/// sort descending, take the largest j with v_(j) - (sum_{i<=j} v_(i) - radius)/j > 0,
/// subtract that threshold and clamp at zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
project_simplex(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar radius = 1) {
    using Scalar = typename Derived::Scalar;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (!v.allFinite()) throw Error(Errc::NonFiniteInput, "project_simplex input must be finite");
    const Eigen::Index n = v.size();
    if (n == 0) return Vector();
    if (radius <= 0) return Vector::Zero(n);

    const Vector x = v;
    std::vector<Scalar> sorted(x.data(), x.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());

    Scalar cumulative = 0, threshold = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumulative += sorted[static_cast<std::size_t>(j)];
        const Scalar t = (cumulative - radius) / static_cast<Scalar>(j + 1);
        if (sorted[static_cast<std::size_t>(j)] - t > 0) threshold = t;
    }
    return (x.array() - threshold).cwiseMax(Scalar(0)).matrix();
}

}  // namespace evograph
