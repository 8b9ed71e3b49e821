#pragma once

#include <cstddef>
#include <vector>

#include "art/tensor.hpp"

// Adaptive interaction pruning: per-agent top-p filtering of a dense edge
// weight matrix, followed by renormalization of the retained weights.

namespace art::aip {

struct PrunedGraph {
    std::size_t m = 0;
    Tensor weights;  // [M, M] renormalized; zero for pruned edges and the diagonal
    std::vector<std::vector<std::size_t>> kept;  // per agent, descending weight order
    std::vector<std::size_t> k_star;

    double mean_k_star() const;
    bool keeps(std::size_t i, std::size_t j) const;
};

/// For each agent i: rank neighbors j != i by weight (descending, ties by
/// ascending index), keep the shortest prefix whose cumulative share of the
/// row total reaches p, zero the rest and rescale the kept weights to sum to 1.
///
/// An all-zero row keeps every neighbor at 1/(M-1). M = 1 gives an empty
/// graph. Throws ContractError for p outside (0, 1] or negative weights.
PrunedGraph prune(const Tensor& weights, double p);

/// Brute-force re-derivation of prune() used as a test oracle: neighbors are
/// picked one at a time by linear argmax scans and every cumulative sum is
/// recomputed from scratch. Shares no code with prune().
PrunedGraph prune_oracle(const Tensor& weights, double p);

/// Every neighbor kept with row-normalized weights (pruning disabled).
PrunedGraph dense_graph(const Tensor& weights);

}  // namespace art::aip
