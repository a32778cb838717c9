#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

#include "ersvm/core.hpp"

namespace ersvm {

// Normalized Gaussian kernel exp(-gamma^2 * ||x - x2||^2).
double gauss_kernel(std::span<const double> x, std::span<const double> x2, double gamma);

enum class CacheMode { FullMatrix, RowLru };

// Serves rows of the kernel matrix. FullMatrix precomputes the whole n x n
// matrix once; RowLru computes rows on demand and keeps the most recently
// used ones up to a row budget (at least 2, so a 2D update can hold both of
// its rows). Both modes compute entries through the same code path, so a
// training run is bitwise independent of the mode.
class KernelCache {
public:
    KernelCache(const TrainingSet& data, double gamma, CacheMode mode,
                std::size_t budget_rows = 1024);

    // FullMatrix rows stay valid forever; a RowLru row stays valid until two
    // further distinct rows have been requested.
    std::span<const double> row(std::size_t i);

    // Single entry; reads cached storage when present, otherwise one direct
    // kernel evaluation (no row is materialized).
    double entry(std::size_t i, std::size_t j);

    std::size_t size() const { return n_; }
    double gamma() const { return gamma_; }
    CacheMode mode() const { return mode_; }

    // atomic so a FullMatrix cache stays shareable across training sessions
    struct Stats {
        std::atomic<std::uint64_t> hits{0};
        std::atomic<std::uint64_t> misses{0};
    };
    const Stats& stats() const { return stats_; }

    static CacheMode default_mode(std::size_t n) {
        return n <= 8000 ? CacheMode::FullMatrix : CacheMode::RowLru;
    }

private:
    void compute_row(std::size_t i, double* out) const;

    const TrainingSet* data_;
    double gamma_;
    double g2_;
    CacheMode mode_;
    std::size_t n_;
    std::size_t budget_;
    Stats stats_;

    std::vector<double> full_; // FullMatrix storage

    using LruEntry = std::pair<std::size_t, std::vector<double>>;
    std::list<LruEntry> lru_;
    std::unordered_map<std::size_t, std::list<LruEntry>::iterator> lookup_;
};

// Exact Euclidean k-nearest-neighbor lists, self excluded, each sorted by
// ascending squared distance with ties broken by the lower index.
class KnnIndex {
public:
    KnnIndex() = default;

    std::size_t per_point() const { return m_; }
    std::span<const std::uint32_t> neighbors(std::size_t i) const {
        return {flat_.data() + i * m_, m_};
    }

    friend KnnIndex build_knn(const TrainingSet& data, std::size_t n_neighbors);

private:
    std::size_t m_ = 0;
    std::vector<std::uint32_t> flat_;
};

KnnIndex build_knn(const TrainingSet& data, std::size_t n_neighbors);

} // namespace ersvm
