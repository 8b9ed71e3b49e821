#include "art/macs.hpp"

namespace art::harness {

std::uint64_t linear_macs(std::uint64_t batch, std::uint64_t d_in, std::uint64_t d_out) {
    return batch * d_in * d_out;
}

std::uint64_t MacBreakdown::total() const {
    return embed + targ_projections + targ_attention + targ_output + edge_scoring + rt_projections +
           rt_attention_self + rt_attention_neighbor + rt_ffn + rt_edge_update + heads;
}

std::vector<std::pair<std::string, std::uint64_t>> MacBreakdown::rows() const {
    return {{"embed", embed},
            {"targ_projections", targ_projections},
            {"targ_attention", targ_attention},
            {"targ_output", targ_output},
            {"edge_scoring", edge_scoring},
            {"rt_projections", rt_projections},
            {"rt_attention_self", rt_attention_self},
            {"rt_attention_neighbor", rt_attention_neighbor},
            {"rt_ffn", rt_ffn},
            {"rt_edge_update", rt_edge_update},
            {"heads", heads},
            {"total", total()},
            {"rt_attention_neighbor_dense", rt_attention_neighbor_dense},
            {"aip_compare_ops_non_mac", aip_compare_ops}};
}

MacBreakdown count_macs(const ModelConfig& c, std::size_t agents, std::uint64_t kept_edges) {
    const std::uint64_t m = agents, t = c.t_h, d = c.d, f = c.t_f;
    const std::uint64_t pairs = m * m;
    const std::uint64_t edges = m + kept_edges;  // self edge per agent plus kept neighbors

    MacBreakdown b;
    b.embed = linear_macs(m * t, 2, d);
    b.targ_projections = 3 * linear_macs(m * t, d, d);
    b.targ_attention = 2 * pairs * t * d;
    b.targ_output = linear_macs(pairs, d, d);
    if (c.weighting == targ::Weighting::temporal_attention) b.edge_scoring = linear_macs(pairs, 2 * d, 1);

    for (std::size_t l = 0; l < c.layers; ++l) {
        b.rt_projections += 3 * linear_macs(m, d, d) + 2 * linear_macs(edges, d, d);
        b.rt_attention_self += 2 * m * d;
        b.rt_attention_neighbor += 2 * kept_edges * d;
        b.rt_attention_neighbor_dense += 2 * m * (m > 0 ? m - 1 : 0) * d;
        b.rt_ffn += linear_macs(m, d, 4 * d) + linear_macs(m, 4 * d, d);
        b.rt_edge_update += linear_macs(edges, 4 * d, d) + linear_macs(edges, d, d);
    }

    b.heads = c.k * (2 * linear_macs(m, 2 * d, 2 * d) + linear_macs(m, 2 * d, 2 * f));

    if (c.aip && m > 1) {
        // Worst-case merge-sort comparisons per row, then one ratio test per kept neighbor.
        std::uint64_t n = m - 1, log2n = 0;
        while ((std::uint64_t{1} << log2n) < n) ++log2n;
        b.aip_compare_ops = m * n * log2n + kept_edges;
    }
    return b;
}

std::uint64_t count_parameters(const ModelConfig& c) {
    const std::uint64_t d = c.d, f = c.t_f;
    std::uint64_t n = 2 * d + 4 * d * d + 2 * d + 1;  // targ
    n += c.layers * (18 * d * d + 7 * d);
    if (c.pooling == rt::NodePooling::learned) n += c.t_h * d;
    n += c.k * (2 * (4 * d * d + 2 * d) + 2 * d * 2 * f + 2 * f);
    return n;
}

}  // namespace art::harness
