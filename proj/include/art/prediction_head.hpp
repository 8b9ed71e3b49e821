#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "art/parameters.hpp"
#include "art/scene.hpp"

// K parallel trajectory decoders, best-of-K loss and displacement metrics.

namespace art::head {

struct HeadMlp {
    Tensor w1, b1;  // [2d, 2d]
    Tensor w2, b2;  // [2d, 2d]
    Tensor w3, b3;  // [2d, 2*T_f]
};

struct HeadParams {
    std::vector<HeadMlp> heads;
    std::size_t t_f = 0;
};

HeadParams init_params(ParameterSet& params, std::size_t d, std::size_t k, std::size_t t_f, Rng& rng);

struct PredictionSet {
    Tensor candidates;                   // [M, K, T_f, 2]
    std::vector<std::size_t> best_index; // per agent; filled by assign_best_index()

    std::size_t agents() const { return candidates.size(0); }
    std::size_t k() const { return candidates.size(1); }
    std::size_t horizon() const { return candidates.size(2); }
};

/// Each head maps [h0 || hL] to T_f per-step displacements, accumulated from
/// the last observed position.
PredictionSet decode(const Tensor& h0, const Tensor& h_final, const Tensor& last_observed, const HeadParams& params);

enum class MinScope { per_step, per_trajectory };

MinScope parse_min_scope(const std::string& name);
std::string to_string(MinScope scope);

/// per_step: (1 / (M T_f)) sum_i sum_t min_k ||p_it - p^_ikt||.
/// per_trajectory: (1 / M) sum_i min_k mean_t ||p_it - p^_ikt||.
/// The gradient reaches only the winning head (lowest k on ties).
Tensor best_of_k_loss(const Tensor& candidates, const Tensor& future, MinScope scope = MinScope::per_step);

/// Sets best_index to the head with the smallest mean displacement per agent.
void assign_best_index(PredictionSet& predictions, const Tensor& future);

struct SceneMetrics {
    std::size_t scene_id = 0;
    double min_ade = 0.0;
    double min_fde = 0.0;
    std::size_t k = 0;
    std::size_t agents = 0;
};

struct MetricReport {
    double min_ade = 0.0;  // agent-weighted over all scenes
    double min_fde = 0.0;
    std::size_t k_used = 0;
    std::vector<SceneMetrics> per_scene;

    /// Appends a scene and refreshes the agent-weighted aggregate.
    void add(const SceneMetrics& scene);
    /// `scene_id,min_ade,min_fde,k,M` rows with header, aggregate row last.
    std::string to_csv() const;
};

/// minADE / minFDE for one scene; the minimum over heads is taken separately
/// for each metric.
SceneMetrics min_ade_fde(const Tensor& candidates, const Tensor& future, std::size_t scene_id = 0);

/// Single-candidate extrapolation of the last observed step's velocity.
/// With one observed frame the agent is held in place.
PredictionSet constant_velocity_baseline(const data::Scene& scene, std::size_t t_f);

}  // namespace art::head
