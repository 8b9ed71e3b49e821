#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "art/aip.hpp"
#include "art/parameters.hpp"
#include "art/targ.hpp"

// Edge-aware relational transformer over the pruned interaction graph.
//
// Edges are stored sparsely: for every agent i, the self edge (i, i) followed
// by the kept neighbors of i in the pruned graph's order. Pruned edges have
// no storage at all, so they cannot influence anything downstream.

namespace art::rt {

/// How the per-agent initial node feature is reduced from [T_h, d].
///  mean    - plain average over time
///  learned - per-channel learned weights over time, initialised to 1/T_h
enum class NodePooling { mean, learned };

NodePooling parse_pooling(const std::string& name);
std::string to_string(NodePooling pooling);

struct LayerParams {
    Tensor w_q, w_k, w_v;      // node projections [d, d]
    Tensor w_ek, w_ev;         // edge key / value projections [d, d]
    Tensor ffn_w1, ffn_b1;     // [d, 4d], [4d]
    Tensor ffn_w2, ffn_b2;     // [4d, d], [d]
    Tensor edge_w1, edge_b1;   // [4d, d], [d]
    Tensor edge_w2, edge_b2;   // [d, d], [d]
};

struct RtParams {
    std::vector<LayerParams> layers;
    std::optional<Tensor> pool;  // [T_h, d] when pooling is learned
};

RtParams init_params(ParameterSet& params, std::size_t d, std::size_t layers, NodePooling pooling,
                     std::size_t t_h, Rng& rng);

struct EdgeIndex {
    std::size_t m = 0;
    std::vector<std::ptrdiff_t> src;      // query agent i
    std::vector<std::ptrdiff_t> dst;      // key / value agent j
    std::vector<std::ptrdiff_t> reverse;  // edge (j, i), or -1 when it has no storage
    std::vector<std::size_t> offsets;     // edges of agent i are [offsets[i], offsets[i+1])

    std::size_t count() const { return src.size(); }
    std::ptrdiff_t find(std::size_t i, std::size_t j) const;
};

EdgeIndex build_edges(const aip::PrunedGraph& pruned);

struct RtState {
    Tensor node_features;  // [M, d]
    Tensor edge_features;  // [E, d], aligned with `edges`
    EdgeIndex edges;
    std::size_t layer_index = 0;
    std::optional<Tensor> attention;  // [E, heads] of the most recent layer
};

/// h_i = pooled H[i, :, :]; e_ij = R_ij for the self edge and kept edges.
/// Only kept relations are read.
RtState init_state(const targ::TemporalNodeFeatures& temporal, const Tensor& relations,
                   const aip::PrunedGraph& pruned, const RtParams& params);

/// One layer: edge-modulated attention over {i} and the kept neighbors of i,
/// residual FFN node update, then residual MLP edge update that reads the
/// freshly updated node features.
RtState rt_layer(const RtState& state, const LayerParams& params, std::size_t heads);

/// Applies every layer of `params` in order.
RtState encode(const RtState& state, const RtParams& params, std::size_t heads);

/// Scatters edge features into [M, M, d] with zeros for edges without storage.
Tensor dense_edge_features(const RtState& state);

}  // namespace art::rt
