#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "art/parameters.hpp"
#include "art/tensor.hpp"

// Temporal-aware relation graph: per-pair attention over the observation
// window, aggregated into pairwise relation features and squashed into a
// dense edge-weight matrix.

namespace art::targ {

enum class Weighting { temporal_attention, cosine, random, uniform };

Weighting parse_weighting(const std::string& name);
std::string to_string(Weighting w);

struct TargConfig {
    std::size_t d = 64;
    std::size_t heads = 4;
    Weighting weighting = Weighting::temporal_attention;

    std::size_t head_dim() const { return d / heads; }
    /// Throws ConfigError unless d is a positive multiple of heads.
    void validate() const;
};

struct TargParams {
    Tensor w_in;   // [2, d]
    Tensor w_q;    // [d, d], head h owns columns [h*d_h, (h+1)*d_h)
    Tensor w_k;    // [d, d]
    Tensor w_v;    // [d, d]
    Tensor w_out;  // [d, d], applied to head-concatenated relations
    Tensor a;      // [2d, 1]
    Tensor b;      // [1]
};

TargParams init_params(ParameterSet& params, const TargConfig& config, Rng& rng);

/// [M, T_h, d] embedded observations.
struct TemporalNodeFeatures {
    Tensor h;
};

/// Per-pair temporal attention and the value projections it weights.
struct TimeAttention {
    Tensor alpha;   // [M, M, T_h, H]: alpha[i, j, t, h], softmax over t
    Tensor values;  // [M, T_h, d]
};

struct RelationGraph {
    Tensor relations;  // [M, M, d]
    Tensor weights;    // [M, M], zero diagonal
    std::optional<Tensor> per_time_scores;  // [H, M, M, T_h], kept for visualization only
};

/// Sinusoidal table [steps, d]: sin at even channels, cos at odd channels.
Tensor positional_encoding(std::size_t steps, std::size_t d);

TemporalNodeFeatures embed(const Tensor& observed, const TargParams& params);

TimeAttention time_resolved_attention(const TemporalNodeFeatures& features, const TargParams& params,
                                      const TargConfig& config);

/// R_ij = W_out [sum_t alpha_ij^h(t) V_j^h(t)]_h, heads concatenated in index order.
Tensor aggregate_relations(const Tensor& alpha, const Tensor& values, const TargParams& params,
                           const TargConfig& config);

/// w_ij = sigmoid(a . [R_ij || R_ji] + b) for i != j; w_ii = 0.
Tensor edge_weights(const Tensor& relations, const TargParams& params);

/// Non-learned replacements for the edge weights. Constants (no gradient).
///  cosine  - (cos(mean_t H_i, mean_t H_j) + 1) / 2
///  random  - iid uniform(0, 1) per ordered pair
///  uniform - 1 / (M - 1)
Tensor ablation_weights(Weighting strategy, const TemporalNodeFeatures& features, std::uint64_t seed);

/// Runs the whole construction. `seed` only feeds the random ablation.
RelationGraph build_relation_graph(const TemporalNodeFeatures& features, const TargParams& params,
                                   const TargConfig& config, bool keep_scores, std::uint64_t seed = 0);

/// [M, M, T_h, H] -> [H, M, M, T_h].
Tensor scores_by_head(const Tensor& alpha);

}  // namespace art::targ
