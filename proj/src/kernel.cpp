#include "ersvm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ersvm/simd.hpp"

namespace ersvm {

double gauss_kernel(std::span<const double> x, std::span<const double> x2, double gamma) {
    if (x.size() != x2.size()) throw std::invalid_argument("kernel arguments differ in dimension");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    double d2 = simd::squared_dist(x.data(), x2.data(), x.size());
    return std::exp(-(gamma * gamma) * d2);
}

KernelCache::KernelCache(const TrainingSet& data, double gamma, CacheMode mode,
                         std::size_t budget_rows)
    : data_(&data),
      gamma_(gamma),
      g2_(gamma * gamma),
      mode_(mode),
      n_(data.size()),
      budget_(std::max<std::size_t>(2, budget_rows)) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (mode_ == CacheMode::FullMatrix) {
        full_.resize(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i) compute_row(i, full_.data() + i * n_);
    }
}

void KernelCache::compute_row(std::size_t i, double* out) const {
    const double* xi = data_->point(i);
    const std::size_t d = data_->dim();
    for (std::size_t j = 0; j < n_; ++j)
        out[j] = std::exp(-g2_ * simd::squared_dist(xi, data_->point(j), d));
}

std::span<const double> KernelCache::row(std::size_t i) {
    if (i >= n_) throw std::out_of_range("kernel row index out of range");
    if (mode_ == CacheMode::FullMatrix) {
        stats_.hits.fetch_add(1, std::memory_order_relaxed);
        return {full_.data() + i * n_, n_};
    }
    auto it = lookup_.find(i);
    if (it != lookup_.end()) {
        stats_.hits.fetch_add(1, std::memory_order_relaxed);
        lru_.splice(lru_.begin(), lru_, it->second);
        return {lru_.front().second.data(), n_};
    }
    stats_.misses.fetch_add(1, std::memory_order_relaxed);
    lru_.emplace_front(i, std::vector<double>(n_));
    compute_row(i, lru_.front().second.data());
    lookup_[i] = lru_.begin();
    while (lru_.size() > budget_) {
        lookup_.erase(lru_.back().first);
        lru_.pop_back();
    }
    return {lru_.front().second.data(), n_};
}

double KernelCache::entry(std::size_t i, std::size_t j) {
    if (i >= n_ || j >= n_) throw std::out_of_range("kernel entry index out of range");
    if (mode_ == CacheMode::FullMatrix) return full_[i * n_ + j];
    if (auto it = lookup_.find(i); it != lookup_.end()) return it->second->second[j];
    if (auto it = lookup_.find(j); it != lookup_.end()) return it->second->second[i];
    return std::exp(-g2_ * simd::squared_dist(data_->point(i), data_->point(j), data_->dim()));
}

KnnIndex build_knn(const TrainingSet& data, std::size_t n_neighbors) {
    if (n_neighbors < 1) throw std::invalid_argument("neighbor count must be at least 1");
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    KnnIndex index;
    index.m_ = std::min(n_neighbors, n - 1);
    index.flat_.resize(n * index.m_);

    std::vector<std::pair<double, std::uint32_t>> cand(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = data.point(i);
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cand[w++] = {simd::squared_dist(xi, data.point(j), d), static_cast<std::uint32_t>(j)};
        }
        std::partial_sort(cand.begin(), cand.begin() + index.m_, cand.end());
        for (std::size_t k = 0; k < index.m_; ++k) index.flat_[i * index.m_ + k] = cand[k].second;
    }
    return index;
}

} // namespace ersvm
