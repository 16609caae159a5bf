#pragma once

#include "ccurate/error.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <ranges>
#include <utility>
#include <vector>

namespace ccurate {

/// Uniform reservoir sample (Algorithm R) over a stream of unknown length.
/// Same seed and same input order give the same sample.
template <class T>
class ReservoirSampler {
public:
    ReservoirSampler(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
        if (capacity_ == 0) {
            throw ConfigError("sample size must be at least 1");
        }
        reservoir_.reserve(capacity_);
    }

    void offer(T item) {
        if (seen_ < capacity_) {
            reservoir_.push_back(std::move(item));
        } else {
            std::uniform_int_distribution<std::uint64_t> pick(0, seen_);
            const auto j = pick(rng_);
            if (j < capacity_) {
                reservoir_[static_cast<std::size_t>(j)] = std::move(item);
            }
        }
        ++seen_;
    }

    std::size_t seen() const noexcept { return seen_; }
    const std::vector<T>& sample() const& noexcept { return reservoir_; }
    std::vector<T> take() && { return std::move(reservoir_); }

private:
    std::size_t capacity_;
    std::mt19937_64 rng_;
    std::vector<T> reservoir_;
    std::size_t seen_ = 0;
};

/// min(n, |collection|) items drawn uniformly without replacement.
template <std::ranges::input_range R>
std::vector<std::ranges::range_value_t<R>> sample_representative(R&& collection, std::size_t n, std::uint64_t seed) {
    ReservoirSampler<std::ranges::range_value_t<R>> sampler(n, seed);
    for (auto&& item : collection) {
        sampler.offer(item);
    }
    return std::move(sampler).take();
}

} // namespace ccurate
