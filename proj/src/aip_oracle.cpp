#include <string>

#include "art/aip.hpp"
#include "art/errors.hpp"

// Deliberately naive: O(M^3) per row, no sorting, sums rebuilt from scratch.

namespace art::aip {

PrunedGraph prune_oracle(const Tensor& weights, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw ContractError("prune_oracle: p must be in (0, 1], got " + std::to_string(p));
    if (weights.dim() != 2 || weights.size(0) != weights.size(1)) {
        throw ShapeError("prune_oracle: expected square weights, got " + shape_str(weights.shape()));
    }
    const std::size_t m = weights.size(0);
    auto w = [&](std::size_t i, std::size_t j) { return weights[i * m + j]; };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j && !(w(i, j) >= 0.0)) throw ContractError("prune_oracle: negative or NaN weight");
        }
    }

    PrunedGraph g;
    g.m = m;
    g.weights = Tensor(Shape{m, m}, 0.0);
    g.kept.assign(m, {});
    g.k_star.assign(m, 0);
    if (m < 2) return g;
    auto out = g.weights.mutable_data();

    for (std::size_t i = 0; i < m; ++i) {
        // Full selection sequence: repeatedly take the largest unpicked weight,
        // scanning indices upward so the first maximum (lowest index) wins.
        std::vector<std::size_t> picked;
        std::vector<bool> used(m, false);
        used[i] = true;
        for (std::size_t round = 0; round + 1 < m; ++round) {
            std::size_t best = m;
            for (std::size_t j = 0; j < m; ++j) {
                if (used[j]) continue;
                if (best == m || w(i, j) > w(i, best)) best = j;
            }
            used[best] = true;
            picked.push_back(best);
        }

        auto prefix_sum = [&](std::size_t k) {
            double s = 0.0;
            for (std::size_t q = 0; q < k; ++q) s += w(i, picked[q]);
            return s;
        };
        const double total = prefix_sum(m - 1);

        if (total == 0.0) {
            for (std::size_t j = 0; j < m; ++j) {
                if (j == i) continue;
                out[i * m + j] = 1.0 / static_cast<double>(m - 1);
            }
            g.kept[i] = picked;
            g.k_star[i] = m - 1;
            continue;
        }

        std::size_t k = 1;
        while (k < m - 1 && !(prefix_sum(k) / total >= p)) ++k;
        g.kept[i].assign(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(k));
        g.k_star[i] = k;

        double mass = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            bool in = false;
            for (std::size_t q = 0; q < k; ++q) in = in || picked[q] == j;
            if (in) mass += w(i, j);
        }
        const double inv = 1.0 / mass;
        for (std::size_t q = 0; q < k; ++q) out[i * m + picked[q]] = w(i, picked[q]) * inv;
    }
    return g;
}

}  // namespace art::aip
