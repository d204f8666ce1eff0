#pragma once

#include "evograph/error.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace evograph {

template <typename Scalar>
using MergeTensorT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using MergeTensor = MergeTensorT<double>;

/// Minimum-cost perfect assignment (Hungarian method, O(n^3)).
/// Returns assignment[row] = column.
template <typename Scalar>
std::vector<Eigen::Index> solve_assignment(const MergeTensorT<Scalar>& cost) {
    const Eigen::Index n = cost.rows();
    if (cost.cols() != n) throw Error(Errc::ShapeMismatch, "assignment cost matrix must be square");
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    // 1-based potentials; column 0 is the virtual start.
    std::vector<Scalar> u(n + 1, 0), v(n + 1, 0);
    std::vector<Eigen::Index> match(n + 1, 0), way(n + 1, 0);
    for (Eigen::Index i = 1; i <= n; ++i) {
        match[0] = i;
        Eigen::Index j0 = 0;
        std::vector<Scalar> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const Eigen::Index i0 = match[j0];
            Scalar delta = inf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const Scalar cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const Eigen::Index j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Eigen::Index> assignment(n, 0);
    for (Eigen::Index j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

template <typename Scalar>
struct AlignResult {
    MergeTensorT<Scalar> aligned;
    std::vector<Eigen::Index> permutation;  // aligned.row(i) = W_b.row(permutation[i])
};

/// Row permutation of `w_b` minimizing the Frobenius distance to `w_a`.
/// The identity wins ties.
template <typename Scalar>
AlignResult<Scalar> align(const MergeTensorT<Scalar>& w_b, const MergeTensorT<Scalar>& w_a) {
    if (w_a.rows() != w_b.rows() || w_a.cols() != w_b.cols())
        throw Error(Errc::ShapeMismatch, "align requires tensors of identical shape");
    const Eigen::Index n = w_a.rows();
    MergeTensorT<Scalar> cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = (w_a.row(i) - w_b.row(j)).squaredNorm();

    AlignResult<Scalar> result;
    result.permutation = solve_assignment(cost);
    Scalar assigned = 0, identity = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        assigned += cost(i, result.permutation[i]);
        identity += cost(i, i);
    }
    if (!(assigned < identity))
        for (Eigen::Index i = 0; i < n; ++i) result.permutation[i] = i;
    result.aligned.resize(n, w_b.cols());
    for (Eigen::Index i = 0; i < n; ++i) result.aligned.row(i) = w_b.row(result.permutation[i]);
    return result;
}

/// Draws lambda ~ Beta(alpha, alpha) as X / (X + Y) with X, Y ~ Gamma(alpha, 1).
template <typename Scalar, typename Rng>
Scalar sample_beta(Scalar alpha, Rng& rng) {
    std::gamma_distribution<Scalar> gamma(alpha, Scalar(1));
    const Scalar x = gamma(rng), y = gamma(rng);
    return x + y > 0 ? x / (x + y) : Scalar(0.5);
}

template <typename Scalar>
struct MergeResult {
    MergeTensorT<Scalar> tensor;
    Scalar lambda = 0;
    std::vector<Eigen::Index> permutation;
};

/// lambda * W_a + (1 - lambda) * Align(W_b) for a given lambda.
template <typename Scalar>
MergeResult<Scalar> weight_merge_with_lambda(const MergeTensorT<Scalar>& w_a, const MergeTensorT<Scalar>& w_b,
                                             Scalar lambda) {
    auto aligned = align(w_b, w_a);
    return {lambda * w_a + (Scalar(1) - lambda) * aligned.aligned, lambda, std::move(aligned.permutation)};
}

template <typename Scalar>
MergeResult<Scalar> weight_merge(const MergeTensorT<Scalar>& w_a, const MergeTensorT<Scalar>& w_b, Scalar alpha,
                                 std::uint64_t seed) {
    if (!(alpha > 0)) throw Error(Errc::InvalidConfig, "Beta concentration must be positive");
    if (w_a.rows() != w_b.rows() || w_a.cols() != w_b.cols())
        throw Error(Errc::ShapeMismatch, "weight_merge requires tensors of identical shape");
    std::mt19937_64 rng(seed);
    return weight_merge_with_lambda(w_a, w_b, sample_beta(alpha, rng));
}

}  // namespace evograph
