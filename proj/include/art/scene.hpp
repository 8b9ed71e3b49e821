#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "art/tensor.hpp"

namespace art::data {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// One observation window. Positions are meters; `observed` is [M, T_h, 2],
/// `future` (when present) is [M, T_f, 2] with the same agent order.
struct Scene {
    std::vector<std::int64_t> agent_ids;
    Tensor observed;
    std::optional<Tensor> future;
    double frame_interval = 0.4;

    std::size_t agents() const { return observed.size(0); }
    std::size_t observed_len() const { return observed.size(1); }
    std::size_t future_len() const { return future ? future->size(1) : 0; }

    Vec2 observed_at(std::size_t agent, std::size_t t) const;
    Vec2 future_at(std::size_t agent, std::size_t t) const;

    /// Throws DataError unless M >= 1, positions are finite and shapes agree.
    void validate() const;
};

struct NormalizationState {
    Vec2 centroid;
};

/// Sliding windows over an ETH/UCY-style `frame_id agent_id x y` file.
/// Only agents present in every frame of a window are kept; empty windows
/// are dropped. Frames are the file's distinct frame ids in ascending order.
std::vector<Scene> load_ethucy_text(const std::filesystem::path& path, std::size_t observed_len,
                                    std::size_t future_len, std::size_t stride = 1,
                                    double frame_interval = 0.4);

/// Translates every position by minus the mean last-observed position.
std::pair<Scene, NormalizationState> normalize(const Scene& scene);
Scene denormalize(const Scene& scene, const NormalizationState& state);

/// Adds the centroid back onto a tensor whose last axis holds (x, y).
Tensor denormalize_positions(const Tensor& positions, const NormalizationState& state);

enum class SyntheticKind { constant_velocity, crossing, group };

SyntheticKind parse_synthetic_kind(const std::string& name);
std::string to_string(SyntheticKind kind);

/// Straight-line track p0 + v * t for t = 0 .. steps-1, as [steps, 2].
Tensor constant_velocity_track(Vec2 p0, Vec2 v, std::size_t steps);

/// Synthetic scene generator.
///  - constant_velocity: independent straight lines with random start and velocity.
///  - crossing: agents (2q, 2q+1) pass within 0.5 m of each other at a random
///    step inside the observed window; positions carry jitter truncated at
///    two standard deviations (sigma = 0.05 m). An odd last agent walks alone.
///  - group: one shared velocity plus independent jitter (sigma = 0.05 m).
Scene generate_synthetic(SyntheticKind kind, std::size_t m, std::size_t t_h, std::size_t t_f,
                         std::uint64_t seed);

/// Distance between agents i and j, minimized over the observed steps.
double min_observed_distance(const Scene& scene, std::size_t i, std::size_t j);
std::size_t closest_observed_step(const Scene& scene, std::size_t i, std::size_t j);

}  // namespace art::data
