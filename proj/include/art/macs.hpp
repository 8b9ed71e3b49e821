#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "art/model.hpp"

// Analytic multiply-accumulate counts for one forward pass. A MAC is one
// multiply followed by one add; softmax, GELU, sums and sorting are not MACs.

namespace art::harness {

/// B rows through a d_in x d_out linear map.
std::uint64_t linear_macs(std::uint64_t batch, std::uint64_t d_in, std::uint64_t d_out);

struct MacBreakdown {
    std::uint64_t embed = 0;             // input projection
    std::uint64_t targ_projections = 0;  // Q, K, V per agent and step
    std::uint64_t targ_attention = 0;    // same-time logits and value weighting, all pairs
    std::uint64_t targ_output = 0;       // relation output projection
    std::uint64_t edge_scoring = 0;      // learned edge weights
    std::uint64_t rt_projections = 0;    // node Q, K, V and edge key / value maps
    std::uint64_t rt_attention_self = 0;
    std::uint64_t rt_attention_neighbor = 0;
    std::uint64_t rt_attention_neighbor_dense = 0;  // what the neighbor term costs without pruning
    std::uint64_t rt_ffn = 0;
    std::uint64_t rt_edge_update = 0;
    std::uint64_t heads = 0;
    std::uint64_t aip_compare_ops = 0;  // sort comparisons plus threshold tests; not MACs

    std::uint64_t total() const;
    /// (name, value) rows in a fixed order: the summed terms, `total`, then
    /// the dense reference and compare-op rows, which are not summed.
    std::vector<std::pair<std::string, std::uint64_t>> rows() const;
};

/// Counts for a scene of `agents` agents whose pruned graph keeps
/// `kept_edges` = sum_i k*_i neighbor edges in total.
MacBreakdown count_macs(const ModelConfig& config, std::size_t agents, std::uint64_t kept_edges);

/// Trainable scalar count implied by the config.
std::uint64_t count_parameters(const ModelConfig& config);

}  // namespace art::harness
