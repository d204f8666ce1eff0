#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evograph {

inline constexpr int kFitnessSize = 6;

template <typename Scalar>
using FitnessVectorT = Eigen::Matrix<Scalar, kFitnessSize, 1>;
/// Components in fixed order: U, 1 - P_norm, S, B, D, C.
using FitnessVector = FitnessVectorT<double>;
using WeightVector = FitnessVectorT<double>;

enum FitnessComponent : int { kU = 0, kLatency = 1, kS = 2, kB = 3, kD = 4, kC = 5 };

inline constexpr std::array<std::string_view, kFitnessSize> kFitnessNames = {"U", "P", "S", "B", "D", "C"};

struct RawMetrics {
    double U = 0.0;  // task success rate
    double P = 1.0;  // p95 latency, ms
    double S = 0.0;  // static security score
    double B = 0.0;  // business KPI delta
    double D = 0.0;  // doc freshness
    double C = 0.0;  // build reproducibility

    bool valid() const noexcept;
    friend bool operator==(const RawMetrics&, const RawMetrics&) = default;
};

struct NormalizationBounds {
    double p_min = 100.0;
    double p_max = 500.0;
};

double normalize_latency(double p_ms, const NormalizationBounds& bounds);
FitnessVector fitness_vector(const RawMetrics& raw, const NormalizationBounds& bounds);

/// Whitespace split with ASCII case folding.
std::vector<std::string> tokenize(std::string_view text);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// ROUGE-L F-measure; 0 when either side is empty.
double rouge_l(std::span<const std::string> reference, std::span<const std::string> candidate);

/// Cosine similarity; 0 when either vector is zero.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

inline constexpr double kDefaultFreshnessBlend = 0.5;

double freshness(std::span<const std::string> reference_tokens, std::span<const std::string> candidate_tokens,
                 const Eigen::VectorXd& reference_embedding, const Eigen::VectorXd& candidate_embedding,
                 double blend = kDefaultFreshnessBlend);

/// Fraction of rebuild hashes equal to the modal hash. Throws EmptyInput.
double reproducibility(std::span<const std::string> hashes);

/// True when w is non-negative and sums to one within `tol`.
template <typename Derived>
bool on_simplex(const Eigen::MatrixBase<Derived>& w, typename Derived::Scalar tol = 1e-9) {
    return (w.array() >= -tol).all() && std::abs(w.sum() - 1) <= tol;
}

/// w . F; throws WeightsOffSimplex when w is not a probability vector.
double aggregate_utility(const FitnessVector& fitness, const WeightVector& w);

double discounted_return(std::span<const double> utilities, double gamma);

}  // namespace evograph
