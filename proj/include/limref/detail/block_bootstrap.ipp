#pragma once

#include <algorithm>
#include <random>

namespace limref {

template <typename Rng>
std::vector<double> moving_block_bootstrap(std::span<const double> values, std::size_t block, Rng& rng) {
    const std::size_t n = values.size();
    if (n == 0) {
        return {};
    }
    block = std::clamp<std::size_t>(block, 1, n);
    const std::size_t n_blocks = n / block + 2;
    std::uniform_int_distribution<std::size_t> start_dist(0, n - block);
    std::vector<double> pool;
    pool.reserve(n_blocks * block);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t start = start_dist(rng);
        pool.insert(pool.end(), values.begin() + static_cast<std::ptrdiff_t>(start),
                    values.begin() + static_cast<std::ptrdiff_t>(start + block));
    }
    // Random phase so replicates do not always begin on a block boundary.
    std::uniform_int_distribution<std::size_t> offset_dist(0, block - 1);
    const std::size_t offset = offset_dist(rng);
    return {pool.begin() + static_cast<std::ptrdiff_t>(offset),
            pool.begin() + static_cast<std::ptrdiff_t>(offset + n)};
}

} // namespace limref
