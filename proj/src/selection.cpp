#include "evograph/selection.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace evograph {

std::vector<double> selection_probabilities(std::span<const int> ranks, std::span<const double> novelties,
                                            const SelectionParams& params) {
    if (ranks.size() != novelties.size())
        throw Error(Errc::LengthMismatch,
                    fmt::format("{} ranks but {} novelty scores", ranks.size(), novelties.size()));
    std::vector<double> logits(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i)
        logits[i] = params.alpha_sel * inverse_rank(ranks[i]) + params.beta_nov * novelties[i];
    if (logits.empty()) return logits;
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (auto& l : logits) total += (l = std::exp(l - top));
    for (auto& l : logits) l /= total;
    return logits;
}

double QdArchive::novelty(const BehaviorDescriptor& candidate) const {
    if (entries_.empty()) return cold_start_;
    std::vector<BehaviorDescriptor> points;
    points.reserve(entries_.size());
    for (const auto& e : entries_) points.push_back(e.descriptor);
    return knn_novelty(candidate, std::span<const BehaviorDescriptor>(points), k_);
}

double novelty(const BehaviorDescriptor& candidate, const QdArchive& archive) { return archive.novelty(candidate); }

bool QdArchive::insert(ArchiveEntry entry) {
    for (const auto& e : entries_) {
        if (dominates(e.fitness, entry.fitness)) return false;
        if (e.fitness == entry.fitness && e.descriptor == entry.descriptor) return false;
    }
    std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(entry.fitness, e.fitness); });
    entries_.push_back(std::move(entry));

    if (entries_.size() > capacity_) {
        // Novelty of each entry relative to the rest of the archive.
        std::vector<BehaviorDescriptor> others;
        others.reserve(entries_.size() - 1);
        std::size_t victim = 0;
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            others.clear();
            for (std::size_t j = 0; j < entries_.size(); ++j)
                if (j != i) others.push_back(entries_[j].descriptor);
            const double nov = others.empty()
                                   ? cold_start_
                                   : knn_novelty(entries_[i].descriptor, std::span<const BehaviorDescriptor>(others), k_);
            if (nov < lowest) {
                lowest = nov;
                victim = i;
            }
        }
        const bool kept = victim != entries_.size() - 1;
        entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
        return kept;
    }
    return true;
}

std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t n,
                                                    std::uint64_t seed) {
    if (n > weights.size())
        throw Error(Errc::PoolTooSmall, fmt::format("cannot draw {} from {} candidates", n, weights.size()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> remaining(weights.begin(), weights.end());
    std::vector<std::size_t> picked;
    picked.reserve(n);
    for (std::size_t draw = 0; draw < n; ++draw) {
        const double total = std::accumulate(remaining.begin(), remaining.end(), 0.0);
        std::size_t choice = remaining.size();
        if (total > 0.0) {
            double target = unit(rng) * total;
            for (std::size_t i = 0; i < remaining.size(); ++i) {
                if (remaining[i] <= 0.0) continue;
                choice = i;
                target -= remaining[i];
                if (target < 0.0) break;
            }
        } else {
            // All remaining mass underflowed; fall back to the first unpicked.
            for (std::size_t i = 0; i < remaining.size() && choice == remaining.size(); ++i)
                if (std::find(picked.begin(), picked.end(), i) == picked.end()) choice = i;
        }
        picked.push_back(choice);
        remaining[choice] = 0.0;
    }
    return picked;
}

SelectionResult select_qd(std::span<const PoolMember> pool, std::size_t n, const SelectionParams& params,
                          const QdArchive& archive, std::uint64_t seed) {
    if (pool.size() < n)
        throw Error(Errc::PoolTooSmall, fmt::format("pool of {} cannot supply {} survivors", pool.size(), n));

    SelectionResult result{{}, archive, {}, {}, {}};
    std::vector<FitnessVector> fitness;
    fitness.reserve(pool.size());
    for (const auto& m : pool) fitness.push_back(m.fitness);
    result.ranks = pareto_ranks(std::span<const FitnessVector>(fitness));
    result.novelties.reserve(pool.size());
    for (const auto& m : pool) result.novelties.push_back(archive.novelty(m.descriptor));
    result.probabilities = selection_probabilities(result.ranks, result.novelties, params);

    if (pool.size() == n) {
        result.survivors.resize(n);
        std::iota(result.survivors.begin(), result.survivors.end(), std::size_t{0});
    } else {
        result.survivors = sample_without_replacement(result.probabilities, n, seed);
        std::sort(result.survivors.begin(), result.survivors.end());
    }

    for (const auto& m : pool) result.archive.insert(ArchiveEntry{m.fitness, m.descriptor, m.id});
    return result;
}

}  // namespace evograph
