#include "evograph/metrics.hpp"

#include "evograph/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace evograph {

bool RawMetrics::valid() const noexcept {
    const auto unit = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
    return unit(U) && std::isfinite(P) && P > 0.0 && unit(S) && unit(B) && unit(D) && unit(C);
}

double normalize_latency(double p_ms, const NormalizationBounds& bounds) {
    return std::clamp((p_ms - bounds.p_min) / (bounds.p_max - bounds.p_min), 0.0, 1.0);
}

FitnessVector fitness_vector(const RawMetrics& raw, const NormalizationBounds& bounds) {
    FitnessVector f;
    f << raw.U, 1.0 - normalize_latency(raw.P, bounds), raw.S, raw.B, raw.D, raw.C;
    return f;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(std::span<const std::string> reference, std::span<const std::string> candidate) {
    if (reference.empty() || candidate.empty()) return 0.0;
    const auto lcs = static_cast<double>(lcs_length(reference, candidate));
    if (lcs == 0.0) return 0.0;
    const double precision = lcs / static_cast<double>(candidate.size());
    const double recall = lcs / static_cast<double>(reference.size());
    return 2.0 * precision * recall / (precision + recall);
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "cosine of vectors with different lengths");
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

double freshness(std::span<const std::string> reference_tokens, std::span<const std::string> candidate_tokens,
                 const Eigen::VectorXd& reference_embedding, const Eigen::VectorXd& candidate_embedding,
                 double blend) {
    const double r = rouge_l(reference_tokens, candidate_tokens);
    const double c = std::max(0.0, cosine(reference_embedding, candidate_embedding));
    return std::clamp(blend * r + (1.0 - blend) * c, 0.0, 1.0);
}

double reproducibility(std::span<const std::string> hashes) {
    if (hashes.empty()) throw Error(Errc::EmptyInput, "reproducibility needs at least one build hash");
    std::map<std::string_view, std::size_t> counts;
    for (const auto& h : hashes) ++counts[h];
    // std::map iterates in lexicographic order, so the first maximum is the
    // smallest modal hash.
    std::size_t modal = 0;
    for (const auto& [h, n] : counts) modal = std::max(modal, n);
    return static_cast<double>(modal) / static_cast<double>(hashes.size());
}

double aggregate_utility(const FitnessVector& fitness, const WeightVector& w) {
    if (!w.allFinite() || !on_simplex(w)) throw Error(Errc::WeightsOffSimplex, "weights must be a probability vector");
    return w.dot(fitness);
}

double discounted_return(std::span<const double> utilities, double gamma) {
    double total = 0.0, discount = 1.0;
    for (double u : utilities) {
        total += discount * u;
        discount *= gamma;
    }
    return total;
}

}  // namespace evograph
