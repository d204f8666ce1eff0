#pragma once

#include "evograph/simplex.hpp"

#include <Eigen/Core>

#include <optional>

namespace evograph {

inline constexpr double kDefaultBanditEta = 0.05;

/// Scalarization weights on the probability simplex. `pinned` marks
/// components frozen by a human policy; their values never move.
template <typename Scalar>
struct BanditStateT {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

    Vector w;
    Scalar eta = Scalar(kDefaultBanditEta);
    std::optional<Mask> pinned;

    static BanditStateT uniform(Eigen::Index n, Scalar eta = Scalar(kDefaultBanditEta)) {
        return {Vector::Constant(n, Scalar(1) / static_cast<Scalar>(n)), eta, std::nullopt};
    }
};

using BanditState = BanditStateT<double>;

/// One projected-gradient step:
///   w' = Proj(w + eta * (r - w.F) * F)
/// with pinned components restored and the free mass projected onto the
/// complementary sub-simplex.
template <typename Scalar, typename Derived>
BanditStateT<Scalar> bandit_update(const BanditStateT<Scalar>& state, const Eigen::MatrixBase<Derived>& fitness,
                                   Scalar reward) {
    using Vector = typename BanditStateT<Scalar>::Vector;
    const Vector f = fitness.template cast<Scalar>();
    if (f.size() != state.w.size()) throw Error(Errc::DimensionMismatch, "fitness and weight lengths differ");

    const Scalar error = reward - state.w.dot(f);
    const Vector step = state.w + state.eta * error * f;

    BanditStateT<Scalar> next = state;
    if (step == state.w) return next;
    if (!state.pinned || !state.pinned->any()) {
        next.w = project_simplex(step);
        return next;
    }

    const auto& mask = *state.pinned;
    Scalar pinned_mass = 0;
    Eigen::Index free_count = 0;
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
        if (mask[i]) pinned_mass += state.w[i];
        else ++free_count;
    }
    Vector free_part(free_count);
    for (Eigen::Index i = 0, k = 0; i < mask.size(); ++i)
        if (!mask[i]) free_part[k++] = step[i];
    const Vector projected = project_simplex(free_part, std::max(Scalar(0), Scalar(1) - pinned_mass));
    for (Eigen::Index i = 0, k = 0; i < mask.size(); ++i)
        next.w[i] = mask[i] ? state.w[i] : projected[k++];
    return next;
}

}  // namespace evograph
