#pragma once

// Shared helpers for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "art/aip.hpp"
#include "art/model.hpp"
#include "art/ops.hpp"
#include "art/prediction_head.hpp"
#include "art/relational_transformer.hpp"
#include "art/rng.hpp"
#include "art/targ.hpp"

namespace art::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = false) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor(shape, std::move(v), grad);
}

/// Worst relative error between backward() and central differences over the
/// given leaves. Each leaf is checked at up to `coords` coordinates, always
/// including the one with the largest analytic gradient; the error of a leaf
/// is max |a - n| / max(max |n|, 1e-8) over its checked coordinates.
inline double gradient_probe(const std::function<Tensor()>& loss, std::vector<Tensor> leaves, Rng& rng,
                             std::size_t coords = static_cast<std::size_t>(-1), double eps = 1e-6) {
    for (auto& l : leaves) l.zero_grad();
    loss().backward();
    double worst = 0.0;
    for (auto& leaf : leaves) {
        const std::size_t n = leaf.numel();
        std::vector<double> analytic(n, 0.0);
        if (leaf.has_grad()) std::copy(leaf.grad().begin(), leaf.grad().end(), analytic.begin());

        std::vector<std::size_t> pick;
        if (coords >= n) {
            for (std::size_t i = 0; i < n; ++i) pick.push_back(i);
        } else {
            std::size_t largest = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (std::abs(analytic[i]) > std::abs(analytic[largest])) largest = i;
            }
            pick.push_back(largest);
            while (pick.size() < coords) pick.push_back(rng.below(n));
        }

        NoGradGuard no_grad;
        auto values = leaf.mutable_data();
        double diff = 0.0, scale = 0.0;
        for (auto i : pick) {
            const double original = values[i];
            values[i] = original + eps;
            const double up = loss().item();
            values[i] = original - eps;
            const double down = loss().item();
            values[i] = original;
            const double numeric = (up - down) / (2.0 * eps);
            diff = std::max(diff, std::abs(analytic[i] - numeric));
            scale = std::max(scale, std::abs(numeric));
        }
        worst = std::max(worst, diff / std::max(scale, 1e-8));
    }
    return worst;
}

/// Scalar read-out sum(x * r) with a fixed random r, so every output entry
/// gets its own gradient.
inline Tensor project(const Tensor& x, Rng& rng) { return sum(mul(x, random_tensor(x.shape(), rng))); }

inline std::vector<Tensor> all_parameters(const ParameterSet& params) {
    std::vector<Tensor> out;
    for (const auto& p : params) out.push_back(p.tensor);
    return out;
}

/// Temporal relation graph: embedding through edge weights, plus the input positions.
inline double targ_gradient_probe(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t m = 2 + rng.below(3), t = 2 + rng.below(4);
    targ::TargConfig config{8, 2, targ::Weighting::temporal_attention};
    ParameterSet params;
    const auto p = targ::init_params(params, config, rng);
    Tensor observed = random_tensor({m, t, 2}, rng, -2.0, 2.0, true);
    const Tensor r_rel = random_tensor({m, m, config.d}, rng);
    const Tensor r_w = random_tensor({m, m}, rng);
    auto loss = [&] {
        const auto feats = targ::embed(observed, p);
        const auto g = targ::build_relation_graph(feats, p, config, false);
        return add(sum(mul(g.relations, r_rel)), sum(mul(g.weights, r_w)));
    };
    auto leaves = all_parameters(params);
    leaves.push_back(observed);
    return gradient_probe(loss, leaves, rng);
}

/// One or two relational transformer layers over a randomly pruned graph.
inline double rt_gradient_probe(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t m = 2 + rng.below(4), t = 3, d = 8, layers = 1 + rng.below(2);
    const auto pooling = rng.below(2) ? rt::NodePooling::learned : rt::NodePooling::mean;
    ParameterSet params;
    const auto p = rt::init_params(params, d, layers, pooling, t, rng);
    Tensor h = random_tensor({m, t, d}, rng, -1.0, 1.0, true);
    Tensor rel = random_tensor({m, m, d}, rng, -1.0, 1.0, true);
    const auto pruned = aip::prune(random_tensor({m, m}, rng, 0.0, 1.0), rng.uniform(0.3, 1.0));
    Rng read(seed ^ 0xabcdef);
    const Tensor r_node = random_tensor({m, d}, read);
    const std::size_t edges = rt::build_edges(pruned).count();
    const Tensor r_edge = random_tensor({edges, d}, read);
    auto loss = [&] {
        const auto s0 = rt::init_state({h}, rel, pruned, p);
        const auto s = rt::encode(s0, p, 2);
        return add(sum(mul(s.node_features, r_node)), sum(mul(s.edge_features, r_edge)));
    };
    auto leaves = all_parameters(params);
    leaves.push_back(h);
    leaves.push_back(rel);
    return gradient_probe(loss, leaves, rng);
}

/// K decoding heads followed by the best-of-K loss.
inline double head_gradient_probe(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t m = 1 + rng.below(4), d = 4, k = 1 + rng.below(3), t_f = 1 + rng.below(4);
    ParameterSet params;
    const auto p = head::init_params(params, d, k, t_f, rng);
    Tensor h0 = random_tensor({m, d}, rng, -1.0, 1.0, true);
    Tensor hl = random_tensor({m, d}, rng, -1.0, 1.0, true);
    Tensor last = random_tensor({m, 2}, rng, -1.0, 1.0, true);
    const Tensor future = random_tensor({m, t_f, 2}, rng, -3.0, 3.0);
    const auto scope = rng.below(2) ? head::MinScope::per_trajectory : head::MinScope::per_step;
    auto loss = [&] { return head::best_of_k_loss(head::decode(h0, hl, last, p).candidates, future, scope); };
    auto leaves = all_parameters(params);
    leaves.push_back(h0);
    leaves.push_back(hl);
    leaves.push_back(last);
    return gradient_probe(loss, leaves, rng);
}

/// Whole model on a synthetic scene, a few coordinates per parameter tensor.
inline double model_gradient_probe(std::uint64_t seed) {
    Rng rng(seed);
    ModelConfig c;
    c.d = 8;
    c.heads = 2;
    c.k = 2;
    c.t_h = 4;
    c.t_f = 3;
    c.p = rng.uniform(0.5, 1.0);
    c.pooling = rng.below(2) ? rt::NodePooling::learned : rt::NodePooling::mean;
    c.seed = seed;
    const ArtModel model(c);
    const auto kind = static_cast<data::SyntheticKind>(rng.below(3));
    const auto scene = data::generate_synthetic(kind, 2 + rng.below(3), c.t_h, c.t_f, seed);
    auto loss = [&] { return model.loss(scene); };
    return gradient_probe(loss, all_parameters(model.parameters()), rng, 6);
}

}  // namespace art::testing
