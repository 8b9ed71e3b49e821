#include "art/aip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "art/errors.hpp"

namespace art::aip {

double PrunedGraph::mean_k_star() const {
    if (k_star.empty()) return 0.0;
    double total = 0.0;
    for (auto k : k_star) total += static_cast<double>(k);
    return total / static_cast<double>(k_star.size());
}

bool PrunedGraph::keeps(std::size_t i, std::size_t j) const {
    return std::find(kept[i].begin(), kept[i].end(), j) != kept[i].end();
}

namespace {

std::size_t checked_size(const Tensor& weights, const char* op) {
    if (weights.dim() != 2 || weights.size(0) != weights.size(1)) {
        throw ShapeError(std::string(op) + ": expected square [M, M] weights, got " + shape_str(weights.shape()));
    }
    const std::size_t m = weights.size(0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double w = weights[i * m + j];
            if (i != j && !(w >= 0.0)) {
                throw ContractError(std::string(op) + ": weight (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") is negative or NaN");
            }
        }
    }
    return m;
}

void check_threshold(double p, const char* op) {
    if (!(p > 0.0 && p <= 1.0)) throw ContractError(std::string(op) + ": p must be in (0, 1], got " + std::to_string(p));
}

PrunedGraph empty_graph(std::size_t m) {
    PrunedGraph g;
    g.m = m;
    g.weights = Tensor(Shape{m, m}, 0.0);
    g.kept.assign(m, {});
    g.k_star.assign(m, 0);
    return g;
}

}  // namespace

PrunedGraph prune(const Tensor& weights, double p) {
    check_threshold(p, "prune");
    const std::size_t m = checked_size(weights, "prune");
    PrunedGraph g = empty_graph(m);
    if (m < 2) return g;

    auto out = g.weights.mutable_data();
    std::vector<std::size_t> order;
    std::vector<double> cumulative;
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = weights.data().data() + i * m;
        order.clear();
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) order.push_back(j);
        }
        std::stable_sort(order.begin(), order.end(), [row](std::size_t a, std::size_t b) { return row[a] > row[b]; });

        cumulative.assign(order.size(), 0.0);
        double running = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) cumulative[k] = running += row[order[k]];
        const double total = cumulative.back();

        if (total == 0.0) {
            const double uniform = 1.0 / static_cast<double>(m - 1);
            g.kept[i].assign(order.begin(), order.end());
            g.k_star[i] = m - 1;
            for (auto j : order) out[i * m + j] = uniform;
            continue;
        }

        std::size_t k_star = order.size();
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (cumulative[k] / total >= p) {
                k_star = k + 1;
                break;
            }
        }
        g.kept[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_star));
        g.k_star[i] = k_star;

        std::vector<bool> keep(m, false);
        for (auto j : g.kept[i]) keep[j] = true;
        double kept_mass = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (keep[j]) kept_mass += row[j];
        }
        const double inv = 1.0 / kept_mass;
        for (std::size_t j = 0; j < m; ++j) {
            if (keep[j]) out[i * m + j] = row[j] * inv;
        }
    }
    return g;
}

PrunedGraph dense_graph(const Tensor& weights) {
    const std::size_t m = checked_size(weights, "dense_graph");
    PrunedGraph g = empty_graph(m);
    if (m < 2) return g;
    auto out = g.weights.mutable_data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = weights.data().data() + i * m;
        std::vector<std::size_t> order;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) order.push_back(j);
        }
        std::stable_sort(order.begin(), order.end(), [row](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        g.kept[i] = order;
        g.k_star[i] = m - 1;
        double mass = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) mass += row[j];
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            out[i * m + j] = mass > 0.0 ? row[j] * (1.0 / mass) : 1.0 / static_cast<double>(m - 1);
        }
    }
    return g;
}

}  // namespace art::aip
