#include "art/prediction_head.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "art/errors.hpp"
#include "art/ops.hpp"
#include "art/rng.hpp"

namespace art::head {

HeadParams init_params(ParameterSet& params, std::size_t d, std::size_t k, std::size_t t_f, Rng& rng) {
    if (k == 0) throw ConfigError("model.k must be >= 1");
    if (t_f == 0) throw ConfigError("data.t_f must be >= 1");
    HeadParams out;
    out.t_f = t_f;
    const std::size_t width = 2 * d;
    for (std::size_t h = 0; h < k; ++h) {
        const std::string prefix = "head." + std::to_string(h) + ".";
        HeadMlp mlp;
        mlp.w1 = params.add(prefix + "w1", glorot(width, width, rng));
        mlp.b1 = params.add(prefix + "b1", Tensor(Shape{width}, 0.0));
        mlp.w2 = params.add(prefix + "w2", glorot(width, width, rng));
        mlp.b2 = params.add(prefix + "b2", Tensor(Shape{width}, 0.0));
        mlp.w3 = params.add(prefix + "w3", glorot(width, 2 * t_f, rng));
        mlp.b3 = params.add(prefix + "b3", Tensor(Shape{2 * t_f}, 0.0));
        out.heads.push_back(std::move(mlp));
    }
    return out;
}

namespace {

// Repeats x [M, ...] along a new axis 1 of size k: [M, k, ...].
Tensor repeat_axis1(const Tensor& x, std::size_t k) {
    const std::size_t m = x.size(0);
    const std::size_t block = m ? x.numel() / m : 0;
    Shape shape = x.shape();
    shape.insert(shape.begin() + 1, k);
    std::vector<std::ptrdiff_t> rows(m * k);
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = static_cast<std::ptrdiff_t>(r / k);
    return reshape(gather_rows(reshape(x, {m, block}), rows), std::move(shape));
}

void check_pair(const Tensor& candidates, const Tensor& future, const char* op) {
    const bool ok = candidates.dim() == 4 && future.dim() == 3 && candidates.size(0) == future.size(0) &&
                    candidates.size(2) == future.size(1) && candidates.size(3) == 2 && future.size(2) == 2 &&
                    candidates.size(1) >= 1;
    if (!ok) {
        throw ContractError(std::string(op) + ": candidates " + shape_str(candidates.shape()) +
                            " do not match future " + shape_str(future.shape()));
    }
}

}  // namespace

PredictionSet decode(const Tensor& h0, const Tensor& h_final, const Tensor& last_observed, const HeadParams& params) {
    const std::size_t m = h0.size(0);
    if (h_final.shape() != h0.shape() || last_observed.shape() != Shape{m, 2}) {
        throw ShapeError("decode: h0 " + shape_str(h0.shape()) + ", hL " + shape_str(h_final.shape()) +
                         ", last observed " + shape_str(last_observed.shape()));
    }
    const std::size_t t_f = params.t_f;
    const std::array<Tensor, 2> joined{h0, h_final};
    Tensor x = concat(joined, 1);

    std::vector<Tensor> per_head;
    per_head.reserve(params.heads.size());
    for (const auto& mlp : params.heads) {
        Tensor hidden = gelu(linear(x, mlp.w1, mlp.b1));
        hidden = gelu(linear(hidden, mlp.w2, mlp.b2));
        per_head.push_back(reshape(linear(hidden, mlp.w3, mlp.b3), {m, 1, t_f, 2}));
    }
    Tensor displacements = concat(per_head, 1);
    Tensor origin = repeat_axis1(repeat_axis1(last_observed, t_f), params.heads.size());  // [M, K, T_f, 2]
    PredictionSet out;
    out.candidates = add(cumsum(displacements, 2), origin);
    return out;
}

MinScope parse_min_scope(const std::string& name) {
    if (name == "per_step") return MinScope::per_step;
    if (name == "per_trajectory") return MinScope::per_trajectory;
    throw ConfigError("unknown loss.min_scope `" + name + "` (expected per_step | per_trajectory)");
}

std::string to_string(MinScope scope) { return scope == MinScope::per_step ? "per_step" : "per_trajectory"; }

Tensor best_of_k_loss(const Tensor& candidates, const Tensor& future, MinScope scope) {
    check_pair(candidates, future, "best_of_k_loss");
    Tensor target = repeat_axis1(future, candidates.size(1));
    Tensor distance = norm_last(sub(candidates, target));  // [M, K, T_f]
    if (scope == MinScope::per_step) return mean(min_axis(distance, 1));
    return mean(min_axis(mean_axis(distance, 2), 1));
}

void assign_best_index(PredictionSet& predictions, const Tensor& future) {
    check_pair(predictions.candidates, future, "assign_best_index");
    const std::size_t m = predictions.agents();
    const std::size_t k = predictions.k();
    const std::size_t t_f = predictions.horizon();
    auto c = predictions.candidates.data();
    auto f = future.data();
    predictions.best_index.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < k; ++h) {
            double total = 0.0;
            for (std::size_t t = 0; t < t_f; ++t) {
                const std::size_t ci = ((i * k + h) * t_f + t) * 2;
                const std::size_t fi = (i * t_f + t) * 2;
                total += std::hypot(c[ci] - f[fi], c[ci + 1] - f[fi + 1]);
            }
            if (total < best) {
                best = total;
                predictions.best_index[i] = h;
            }
        }
    }
}

void MetricReport::add(const SceneMetrics& scene) {
    std::size_t agents_before = 0;
    for (const auto& s : per_scene) agents_before += s.agents;
    const double total = static_cast<double>(agents_before + scene.agents);
    min_ade = (min_ade * static_cast<double>(agents_before) + scene.min_ade * static_cast<double>(scene.agents)) / total;
    min_fde = (min_fde * static_cast<double>(agents_before) + scene.min_fde * static_cast<double>(scene.agents)) / total;
    k_used = scene.k;
    per_scene.push_back(scene);
}

std::string MetricReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "scene_id,min_ade,min_fde,k,M\n";
    std::size_t agents = 0;
    for (const auto& s : per_scene) {
        os << s.scene_id << ',' << s.min_ade << ',' << s.min_fde << ',' << s.k << ',' << s.agents << '\n';
        agents += s.agents;
    }
    os << "all," << min_ade << ',' << min_fde << ',' << k_used << ',' << agents << '\n';
    return os.str();
}

SceneMetrics min_ade_fde(const Tensor& candidates, const Tensor& future, std::size_t scene_id) {
    check_pair(candidates, future, "min_ade_fde");
    const std::size_t m = candidates.size(0);
    const std::size_t k = candidates.size(1);
    const std::size_t t_f = candidates.size(2);
    auto c = candidates.data();
    auto f = future.data();
    SceneMetrics out;
    out.scene_id = scene_id;
    out.k = k;
    out.agents = m;
    double ade_sum = 0.0;
    double fde_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double best_ade = std::numeric_limits<double>::infinity();
        double best_fde = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < k; ++h) {
            double total = 0.0;
            double last = 0.0;
            for (std::size_t t = 0; t < t_f; ++t) {
                const std::size_t ci = ((i * k + h) * t_f + t) * 2;
                const std::size_t fi = (i * t_f + t) * 2;
                last = std::hypot(c[ci] - f[fi], c[ci + 1] - f[fi + 1]);
                total += last;
            }
            best_ade = std::min(best_ade, total / static_cast<double>(t_f));
            best_fde = std::min(best_fde, last);
        }
        ade_sum += best_ade;
        fde_sum += best_fde;
    }
    out.min_ade = ade_sum / static_cast<double>(m);
    out.min_fde = fde_sum / static_cast<double>(m);
    return out;
}

PredictionSet constant_velocity_baseline(const data::Scene& scene, std::size_t t_f) {
    const std::size_t m = scene.agents();
    const std::size_t t_h = scene.observed_len();
    std::vector<double> out(m * t_f * 2);
    for (std::size_t i = 0; i < m; ++i) {
        const data::Vec2 last = scene.observed_at(i, t_h - 1);
        data::Vec2 v;
        if (t_h >= 2) {
            const data::Vec2 prev = scene.observed_at(i, t_h - 2);
            v = {last.x - prev.x, last.y - prev.y};
        }
        for (std::size_t t = 0; t < t_f; ++t) {
            const double s = static_cast<double>(t + 1);
            out[(i * t_f + t) * 2] = last.x + v.x * s;
            out[(i * t_f + t) * 2 + 1] = last.y + v.y * s;
        }
    }
    PredictionSet p;
    p.candidates = Tensor(Shape{m, 1, t_f, 2}, std::move(out));
    return p;
}

}  // namespace art::head
