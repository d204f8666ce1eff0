#pragma once

#include "evograph/error.hpp"
#include "evograph/graph.hpp"
#include "evograph/metrics.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evograph {

/// Strict Pareto dominance for maximization: a >= b everywhere and a > b somewhere.
template <typename DA, typename DB>
bool dominates(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    return (a.array() >= b.array()).all() && (a.array() > b.array()).any();
}

/// Layered non-dominated sorting; rank 0 is the first front. Output order
/// matches input order.
template <typename Vec>
std::vector<int> pareto_ranks(std::span<const Vec> points) {
    const std::size_t n = points.size();
    std::vector<int> rank(n, 0);
    if (n == 0) return rank;
    const auto dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw Error(Errc::DimensionMismatch, "fitness vectors differ in length");

    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<int> domination_count(n, 0);
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated_by[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(points[j], points[i])) {
                dominated_by[j].push_back(i);
                ++domination_count[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (domination_count[i] == 0) front.push_back(i);

    int current = 0;
    while (!front.empty()) {
        std::vector<std::size_t> next;
        for (auto i : front) {
            rank[i] = current;
            for (auto j : dominated_by[i])
                if (--domination_count[j] == 0) next.push_back(j);
        }
        front = std::move(next);
        ++current;
    }
    return rank;
}

/// Mean Euclidean distance from `candidate` to its k nearest `points`
/// (all of them when fewer than k). Throws EmptyArchive on no points.
template <typename Vec>
double knn_novelty(const Vec& candidate, std::span<const Vec> points, std::size_t k) {
    if (points.empty()) throw Error(Errc::EmptyArchive, "novelty against an empty point set");
    std::vector<double> dist;
    dist.reserve(points.size());
    for (const auto& p : points) dist.push_back((p - candidate).norm());
    const std::size_t take = std::min(std::max<std::size_t>(k, 1), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += dist[i];
    return sum / static_cast<double>(take);
}

struct SelectionParams {
    double alpha_sel = 4.0;  // rank pressure
    double beta_nov = 0.1;   // novelty weight
};

inline double inverse_rank(int rank) noexcept { return 1.0 / (1.0 + rank); }

/// softmax(alpha_sel * inv_rank + beta_nov * novelty), max-subtracted.
std::vector<double> selection_probabilities(std::span<const int> ranks, std::span<const double> novelties,
                                            const SelectionParams& params);

struct ArchiveEntry {
    FitnessVector fitness;
    BehaviorDescriptor descriptor;
    std::string graph_id;
};

inline constexpr std::size_t kDefaultArchiveCapacity = 256;
inline constexpr std::size_t kDefaultNoveltyNeighbors = 15;
inline constexpr double kDefaultColdStartNovelty = 1.0;

/// Archive of mutually non-dominated candidates with behavior descriptors.
class QdArchive {
public:
    explicit QdArchive(std::size_t capacity = kDefaultArchiveCapacity, std::size_t k = kDefaultNoveltyNeighbors,
                       double cold_start_novelty = kDefaultColdStartNovelty)
        : capacity_(capacity), k_(k), cold_start_(cold_start_novelty) {}

    const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t k() const noexcept { return k_; }
    double cold_start_novelty() const noexcept { return cold_start_; }

    /// k-NN novelty against the archive; the cold-start value when empty.
    double novelty(const BehaviorDescriptor& candidate) const;

    /// Inserts unless dominated by (or identical to) an existing entry; evicts
    /// entries the newcomer dominates and, over capacity, the least novel one.
    /// Returns whether the entry was kept.
    bool insert(ArchiveEntry entry);

private:
    std::size_t capacity_;
    std::size_t k_;
    double cold_start_;
    std::vector<ArchiveEntry> entries_;
};

double novelty(const BehaviorDescriptor& candidate, const QdArchive& archive);

struct PoolMember {
    FitnessVector fitness;
    BehaviorDescriptor descriptor;
    std::string id;
};

struct SelectionResult {
    std::vector<std::size_t> survivors;  // pool indices, ascending
    QdArchive archive;
    std::vector<int> ranks;
    std::vector<double> novelties;
    std::vector<double> probabilities;
};

/// Samples n survivors without replacement (renormalizing after each draw)
/// and folds the whole pool into a copy of the archive.
SelectionResult select_qd(std::span<const PoolMember> pool, std::size_t n, const SelectionParams& params,
                          const QdArchive& archive, std::uint64_t seed);

/// Sequential weighted sampling without replacement; used by select_qd.
std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t n,
                                                    std::uint64_t seed);

}  // namespace evograph
