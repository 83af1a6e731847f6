#pragma once

#include "limref/data_core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace limref {

struct DtwConfig {
    std::optional<std::size_t> band_radius; // Sakoe-Chiba radius in steps
    bool normalize_before = true;           // divide each series by its mean first
};

// Classic DTW: squared pointwise cost, symmetric unit steps. Linear memory.
double dtw_distance(std::span<const double> a, std::span<const double> b, const DtwConfig& cfg = {});
double dtw_distance(const DailySeries& a, const DailySeries& b, const DtwConfig& cfg = {});

struct Neighbor {
    MeterId meter_id;
    double distance = 0.0;
};

// The n_filt meters closest to `origin` (origin itself excluded), ordered by
// distance then meter id.
std::vector<Neighbor> select_nearest(const SeriesPanel& panel, const MeterId& origin, std::size_t n_filt,
                                     const DtwConfig& cfg = {}, std::size_t jobs = 1);

// --- decomposition bootstrap -------------------------------------------------

inline constexpr std::size_t kSeasonalPeriod = 7;
inline constexpr std::size_t kBlockLength = 14;

struct BoxCox {
    double lambda = 1.0;
    double shift = 0.0; // added before transforming when the series has values <= 0

    double forward(double y) const;
    double inverse(double z) const;
};

// Picks lambda on {0, 0.1, ..., 1} by profile log-likelihood.
BoxCox fit_box_cox(std::span<const double> values);

struct Decomposition {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> remainder;
};

// Additive decomposition with a centered moving-average trend (period 7) and
// position-in-week seasonal means re-centred to sum to zero. The first/last
// three trend values copy the nearest defined value.
Decomposition decompose_additive(std::span<const double> values);

// Moving-block bootstrap of `values` with the given block length.
template <typename Rng>
std::vector<double> moving_block_bootstrap(std::span<const double> values, std::size_t block, Rng& rng);

// n_synthetic replicates of `parent` (Box-Cox, decomposition, block bootstrap
// of the remainder, recomposition). Deterministic given seed.
std::vector<std::vector<double>> bootstrap_series(std::span<const double> parent, std::size_t n_synthetic,
                                                  std::uint64_t seed);

// --- neighbourhood -----------------------------------------------------------

struct Provenance {
    bool original = true;
    MeterId parent_meter_id;
    std::size_t replicate_index = 0; // meaningful only for bootstrap members
};

struct NeighborhoodMember {
    DailySeries series;        // replicates carry the parent's scale and calendar
    const TemperatureSeries* temperature = nullptr; // parent's record, owned by the panel
    Provenance provenance;
    double parent_distance = 0.0;
};

struct Neighborhood {
    MeterId origin_meter_id;
    std::vector<NeighborhoodMember> members; // originals first, then replicates grouped by parent

    std::size_t original_count() const;
};

Neighborhood build_neighborhood(const SeriesPanel& panel, const MeterId& origin, std::size_t n_filt,
                                std::size_t n_synthetic, std::uint64_t global_seed, const DtwConfig& cfg = {},
                                std::size_t jobs = 1);

// Debug dump: meter_id,provenance,replicate,day_index,value
void write_neighborhood_csv(std::ostream& out, const Neighborhood& neighborhood);

} // namespace limref

#include "limref/detail/block_bootstrap.ipp"
