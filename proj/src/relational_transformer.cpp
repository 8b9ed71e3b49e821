#include "art/relational_transformer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "art/errors.hpp"
#include "art/ops.hpp"
#include "art/rng.hpp"

namespace art::rt {

NodePooling parse_pooling(const std::string& name) {
    if (name == "mean") return NodePooling::mean;
    if (name == "learned") return NodePooling::learned;
    throw ConfigError("unknown node pooling `" + name + "` (expected mean | learned)");
}

std::string to_string(NodePooling pooling) { return pooling == NodePooling::mean ? "mean" : "learned"; }

RtParams init_params(ParameterSet& params, std::size_t d, std::size_t layers, NodePooling pooling,
                     std::size_t t_h, Rng& rng) {
    if (layers == 0) throw ConfigError("model.layers must be >= 1");
    RtParams out;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string prefix = "rt." + std::to_string(l) + ".";
        LayerParams p;
        p.w_q = params.add(prefix + "w_q", glorot(d, d, rng));
        p.w_k = params.add(prefix + "w_k", glorot(d, d, rng));
        p.w_v = params.add(prefix + "w_v", glorot(d, d, rng));
        p.w_ek = params.add(prefix + "w_ek", glorot(d, d, rng));
        p.w_ev = params.add(prefix + "w_ev", glorot(d, d, rng));
        p.ffn_w1 = params.add(prefix + "ffn_w1", glorot(d, 4 * d, rng));
        p.ffn_b1 = params.add(prefix + "ffn_b1", Tensor(Shape{4 * d}, 0.0));
        p.ffn_w2 = params.add(prefix + "ffn_w2", glorot(4 * d, d, rng));
        p.ffn_b2 = params.add(prefix + "ffn_b2", Tensor(Shape{d}, 0.0));
        p.edge_w1 = params.add(prefix + "edge_w1", glorot(4 * d, d, rng));
        p.edge_b1 = params.add(prefix + "edge_b1", Tensor(Shape{d}, 0.0));
        p.edge_w2 = params.add(prefix + "edge_w2", glorot(d, d, rng));
        p.edge_b2 = params.add(prefix + "edge_b2", Tensor(Shape{d}, 0.0));
        out.layers.push_back(std::move(p));
    }
    if (pooling == NodePooling::learned) {
        out.pool = params.add("rt.pool", Tensor(Shape{t_h, d}, 1.0 / static_cast<double>(t_h)));
    }
    return out;
}

std::ptrdiff_t EdgeIndex::find(std::size_t i, std::size_t j) const {
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
        if (static_cast<std::size_t>(dst[e]) == j) return static_cast<std::ptrdiff_t>(e);
    }
    return -1;
}

EdgeIndex build_edges(const aip::PrunedGraph& pruned) {
    EdgeIndex idx;
    idx.m = pruned.m;
    idx.offsets.push_back(0);
    for (std::size_t i = 0; i < pruned.m; ++i) {
        idx.src.push_back(static_cast<std::ptrdiff_t>(i));
        idx.dst.push_back(static_cast<std::ptrdiff_t>(i));
        for (auto j : pruned.kept[i]) {
            idx.src.push_back(static_cast<std::ptrdiff_t>(i));
            idx.dst.push_back(static_cast<std::ptrdiff_t>(j));
        }
        idx.offsets.push_back(idx.src.size());
    }
    idx.reverse.resize(idx.count());
    for (std::size_t e = 0; e < idx.count(); ++e) {
        idx.reverse[e] = idx.find(static_cast<std::size_t>(idx.dst[e]), static_cast<std::size_t>(idx.src[e]));
    }
    return idx;
}

RtState init_state(const targ::TemporalNodeFeatures& temporal, const Tensor& relations,
                   const aip::PrunedGraph& pruned, const RtParams& params) {
    const Tensor& h = temporal.h;
    const std::size_t m = h.size(0);
    const std::size_t d = h.size(2);
    if (relations.dim() != 3 || relations.size(0) != m || relations.size(1) != m || relations.size(2) != d ||
        pruned.m != m) {
        throw ShapeError("init_state: features " + shape_str(h.shape()) + ", relations " +
                         shape_str(relations.shape()) + ", pruned graph of " + std::to_string(pruned.m) + " agents");
    }
    RtState state;
    state.edges = build_edges(pruned);
    if (params.pool) {
        if (params.pool->size(0) != h.size(1)) {
            throw ShapeError("init_state: pooling weights " + shape_str(params.pool->shape()) + " vs features " +
                             shape_str(h.shape()));
        }
        state.node_features = sum_axis(mul(h, *params.pool), 1);
    } else {
        state.node_features = mean_axis(h, 1);
    }

    std::vector<std::ptrdiff_t> rows(state.edges.count());
    for (std::size_t e = 0; e < rows.size(); ++e) {
        rows[e] = state.edges.src[e] * static_cast<std::ptrdiff_t>(m) + state.edges.dst[e];
    }
    state.edge_features = gather_rows(reshape(relations, {m * m, d}), rows);
    return state;
}

RtState rt_layer(const RtState& state, const LayerParams& params, std::size_t heads) {
    const Tensor& h = state.node_features;
    const Tensor& e = state.edge_features;
    const EdgeIndex& edges = state.edges;
    const std::size_t m = h.size(0);
    const std::size_t d = h.size(1);
    if (heads == 0 || d % heads != 0) throw ShapeError("rt_layer: d not divisible by heads");
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d / heads));

    Tensor q = matmul(h, params.w_q);
    Tensor k = matmul(h, params.w_k);
    Tensor v = matmul(h, params.w_v);
    Tensor edge_k = matmul(e, params.w_ek);
    Tensor edge_v = matmul(e, params.w_ev);

    Tensor keys = add(gather_rows(k, edges.dst), edge_k);
    Tensor vals = add(gather_rows(v, edges.dst), edge_v);
    Tensor logits = scale(head_dot(gather_rows(q, edges.src), keys, heads), inv_sqrt_dh);
    Tensor attention = segment_softmax(logits, edges.offsets);

    std::vector<std::size_t> targets(edges.src.begin(), edges.src.end());
    Tensor aggregated = index_add_rows(head_weight(attention, vals, heads), targets, m);
    Tensor ffn = linear(gelu(linear(aggregated, params.ffn_w1, params.ffn_b1)), params.ffn_w2, params.ffn_b2);
    Tensor h_next = add(h, ffn);

    const std::array<Tensor, 4> edge_inputs{gather_rows(h_next, edges.src), gather_rows(h_next, edges.dst), e,
                                            gather_rows(e, edges.reverse)};
    Tensor edge_update =
        linear(gelu(linear(concat(edge_inputs, 1), params.edge_w1, params.edge_b1)), params.edge_w2, params.edge_b2);

    RtState next;
    next.node_features = h_next;
    next.edge_features = add(e, edge_update);
    next.edges = edges;
    next.layer_index = state.layer_index + 1;
    next.attention = attention;
    return next;
}

RtState encode(const RtState& state, const RtParams& params, std::size_t heads) {
    if (params.layers.empty()) throw ContractError("encode: at least one layer required");
    RtState current = state;
    for (const auto& layer : params.layers) current = rt_layer(current, layer, heads);
    return current;
}

Tensor dense_edge_features(const RtState& state) {
    const std::size_t m = state.edges.m;
    const std::size_t d = state.edge_features.size(1);
    Tensor out(Shape{m, m, d}, 0.0);
    auto dst = out.mutable_data();
    auto src = state.edge_features.data();
    for (std::size_t e = 0; e < state.edges.count(); ++e) {
        const auto i = static_cast<std::size_t>(state.edges.src[e]);
        const auto j = static_cast<std::size_t>(state.edges.dst[e]);
        std::copy_n(src.data() + e * d, d, dst.data() + (i * m + j) * d);
    }
    return out;
}

}  // namespace art::rt
