#include "art/targ.hpp"

#include <array>
#include <cmath>

#include "art/errors.hpp"
#include "art/ops.hpp"
#include "art/rng.hpp"

namespace art::targ {

Weighting parse_weighting(const std::string& name) {
    if (name == "temporal_attention") return Weighting::temporal_attention;
    if (name == "cosine") return Weighting::cosine;
    if (name == "random") return Weighting::random;
    if (name == "uniform") return Weighting::uniform;
    throw ConfigError("unknown weighting `" + name + "` (expected temporal_attention | cosine | random | uniform)");
}

std::string to_string(Weighting w) {
    switch (w) {
        case Weighting::temporal_attention: return "temporal_attention";
        case Weighting::cosine: return "cosine";
        case Weighting::random: return "random";
        case Weighting::uniform: return "uniform";
    }
    return "unknown";
}

void TargConfig::validate() const {
    if (d == 0 || heads == 0 || d % heads != 0) {
        throw ConfigError("model.d (" + std::to_string(d) + ") must be a positive multiple of model.heads (" +
                          std::to_string(heads) + ")");
    }
}

TargParams init_params(ParameterSet& params, const TargConfig& config, Rng& rng) {
    config.validate();
    const std::size_t d = config.d;
    TargParams p;
    p.w_in = params.add("targ.w_in", glorot(2, d, rng));
    p.w_q = params.add("targ.w_q", glorot(d, d, rng));
    p.w_k = params.add("targ.w_k", glorot(d, d, rng));
    p.w_v = params.add("targ.w_v", glorot(d, d, rng));
    p.w_out = params.add("targ.w_out", glorot(d, d, rng));
    p.a = params.add("targ.a", glorot(2 * d, 1, rng));
    p.b = params.add("targ.b", Tensor(Shape{1}, 0.0));
    return p;
}

Tensor positional_encoding(std::size_t steps, std::size_t d) {
    std::vector<double> pe(steps * d);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t c = 0; c < d; c += 2) {
            const double angle = static_cast<double>(t) / std::pow(10000.0, static_cast<double>(c) / static_cast<double>(d));
            pe[t * d + c] = std::sin(angle);
            if (c + 1 < d) pe[t * d + c + 1] = std::cos(angle);
        }
    }
    return Tensor(Shape{steps, d}, std::move(pe));
}

TemporalNodeFeatures embed(const Tensor& observed, const TargParams& params) {
    if (observed.dim() != 3 || observed.size(2) != 2) {
        throw ShapeError("embed: observed must be [M, T_h, 2], got " + shape_str(observed.shape()));
    }
    const std::size_t d = params.w_in.size(1);
    Tensor projected = matmul(observed, params.w_in);
    return {add(projected, positional_encoding(observed.size(1), d))};
}

namespace {

// Row indices into a [M*T, d] view for every (i, j, t), i-major.
std::pair<std::vector<std::ptrdiff_t>, std::vector<std::ptrdiff_t>> pair_time_rows(std::size_t m, std::size_t steps) {
    std::vector<std::ptrdiff_t> query_rows;
    std::vector<std::ptrdiff_t> key_rows;
    query_rows.reserve(m * m * steps);
    key_rows.reserve(m * m * steps);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t t = 0; t < steps; ++t) {
                query_rows.push_back(static_cast<std::ptrdiff_t>(i * steps + t));
                key_rows.push_back(static_cast<std::ptrdiff_t>(j * steps + t));
            }
        }
    }
    return {std::move(query_rows), std::move(key_rows)};
}

}  // namespace

TimeAttention time_resolved_attention(const TemporalNodeFeatures& features, const TargParams& params,
                                      const TargConfig& config) {
    const Tensor& h = features.h;
    const std::size_t m = h.size(0);
    const std::size_t steps = h.size(1);
    const std::size_t d = h.size(2);
    const std::size_t heads = config.heads;

    Tensor q = reshape(matmul(h, params.w_q), {m * steps, d});
    Tensor k = reshape(matmul(h, params.w_k), {m * steps, d});
    Tensor v = matmul(h, params.w_v);

    // Same-time products only: logit(i, j, t) = Q_i(t) . K_j(t) / sqrt(d_h).
    auto [query_rows, key_rows] = pair_time_rows(m, steps);
    Tensor logits = head_dot(gather_rows(q, query_rows), gather_rows(k, key_rows), heads);
    logits = scale(logits, 1.0 / std::sqrt(static_cast<double>(config.head_dim())));
    Tensor alpha = softmax(reshape(logits, {m, m, steps, heads}), 2);
    return {alpha, v};
}

Tensor aggregate_relations(const Tensor& alpha, const Tensor& values, const TargParams& params,
                           const TargConfig& config) {
    const std::size_t m = alpha.size(0);
    const std::size_t steps = alpha.size(2);
    const std::size_t heads = alpha.size(3);
    const std::size_t d = values.size(2);
    if (alpha.size(1) != m || heads != config.heads || values.size(0) != m || values.size(1) != steps) {
        throw ShapeError("aggregate_relations: alpha " + shape_str(alpha.shape()) + " vs values " +
                         shape_str(values.shape()));
    }
    std::vector<std::ptrdiff_t> value_rows;
    value_rows.reserve(m * m * steps);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t t = 0; t < steps; ++t) value_rows.push_back(static_cast<std::ptrdiff_t>(j * steps + t));
        }
    }
    Tensor v_pairs = gather_rows(reshape(values, {m * steps, d}), value_rows);
    Tensor weighted = head_weight(reshape(alpha, {m * m * steps, heads}), v_pairs, heads);
    Tensor per_head = sum_axis(reshape(weighted, {m, m, steps, d}), 2);
    return matmul(per_head, params.w_out);
}

namespace {

Tensor off_diagonal_mask(std::size_t m) {
    Tensor mask(Shape{m, m}, 1.0);
    auto v = mask.mutable_data();
    for (std::size_t i = 0; i < m; ++i) v[i * m + i] = 0.0;
    return mask;
}

}  // namespace

Tensor edge_weights(const Tensor& relations, const TargParams& params) {
    if (relations.dim() != 3 || relations.size(0) != relations.size(1)) {
        throw ShapeError("edge_weights: relations must be [M, M, d], got " + shape_str(relations.shape()));
    }
    const std::size_t m = relations.size(0);
    const std::array<std::size_t, 3> swap{1, 0, 2};
    const std::array<Tensor, 2> halves{relations, permute(relations, swap)};
    Tensor logits = add(matmul(concat(halves, 2), params.a), params.b);
    return mul(sigmoid(reshape(logits, {m, m})), off_diagonal_mask(m));
}

Tensor ablation_weights(Weighting strategy, const TemporalNodeFeatures& features, std::uint64_t seed) {
    const std::size_t m = features.h.size(0);
    std::vector<double> w(m * m, 0.0);
    switch (strategy) {
        case Weighting::temporal_attention:
            throw ContractError("ablation_weights: temporal_attention is the learned path, not an ablation");
        case Weighting::uniform:
            if (m > 1) {
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < m; ++j) {
                        if (i != j) w[i * m + j] = 1.0 / static_cast<double>(m - 1);
                    }
                }
            }
            break;
        case Weighting::random: {
            Rng rng(seed);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    if (i != j) w[i * m + j] = rng.uniform();
                }
            }
            break;
        }
        case Weighting::cosine: {
            NoGradGuard no_grad;
            Tensor pooled = mean_axis(features.h, 1);  // [M, d]
            const std::size_t d = pooled.size(1);
            auto pd = pooled.data();
            std::vector<double> norms(m, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t c = 0; c < d; ++c) norms[i] += pd[i * d + c] * pd[i * d + c];
                norms[i] = std::sqrt(norms[i]);
            }
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    if (i == j) continue;
                    double dot = 0.0;
                    for (std::size_t c = 0; c < d; ++c) dot += pd[i * d + c] * pd[j * d + c];
                    const double denom = norms[i] * norms[j];
                    const double cosine = denom > 0.0 ? dot / denom : 0.0;
                    w[i * m + j] = (cosine + 1.0) / 2.0;
                }
            }
            break;
        }
    }
    return Tensor(Shape{m, m}, std::move(w));
}

RelationGraph build_relation_graph(const TemporalNodeFeatures& features, const TargParams& params,
                                   const TargConfig& config, bool keep_scores, std::uint64_t seed) {
    TimeAttention attention = time_resolved_attention(features, params, config);
    RelationGraph graph;
    graph.relations = aggregate_relations(attention.alpha, attention.values, params, config);
    if (config.weighting == Weighting::temporal_attention) {
        graph.weights = edge_weights(graph.relations, params);
    } else {
        graph.weights = ablation_weights(config.weighting, features, seed);
    }
    if (keep_scores) graph.per_time_scores = scores_by_head(attention.alpha.detach());
    return graph;
}

Tensor scores_by_head(const Tensor& alpha) {
    const std::array<std::size_t, 4> order{3, 0, 1, 2};
    return permute(alpha, order);
}

}  // namespace art::targ
