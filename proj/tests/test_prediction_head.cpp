#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "art/errors.hpp"
#include "support.hpp"

using namespace art;
using namespace art::head;
using namespace art::testing;

namespace {

void zero(Tensor t) {
    for (auto& x : t.mutable_data()) x = 0.0;
}

// Brute force: every head, every step, no shared accumulation.
std::pair<double, double> brute_ade_fde(const Tensor& c, const Tensor& f) {
    const std::size_t m = c.size(0), k = c.size(1), t_f = c.size(2);
    auto dist = [&](std::size_t i, std::size_t h, std::size_t t) {
        const double dx = c[((i * k + h) * t_f + t) * 2] - f[(i * t_f + t) * 2];
        const double dy = c[((i * k + h) * t_f + t) * 2 + 1] - f[(i * t_f + t) * 2 + 1];
        return std::sqrt(dx * dx + dy * dy);
    };
    double ade = 0.0, fde = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double a = std::numeric_limits<double>::infinity(), b = a;
        for (std::size_t h = 0; h < k; ++h) {
            double s = 0.0;
            for (std::size_t t = 0; t < t_f; ++t) s += dist(i, h, t);
            a = std::min(a, s / static_cast<double>(t_f));
            b = std::min(b, dist(i, h, t_f - 1));
        }
        ade += a;
        fde += b;
    }
    return {ade / static_cast<double>(m), fde / static_cast<double>(m)};
}

}  // namespace

TEST_CASE("decode shapes and accumulation from the last observed position") {
    Rng rng(1);
    ParameterSet params;
    auto p = init_params(params, 4, 3, 5, rng);
    CHECK(p.heads.size() == 3);
    const Tensor h0 = random_tensor({2, 4}, rng), hl = random_tensor({2, 4}, rng);
    const Tensor last(Shape{2, 2}, {1.0, -2.0, 3.0, 4.0});
    const auto out = decode(h0, hl, last, p);
    CHECK(out.candidates.shape() == Shape{2, 3, 5, 2});

    // With zero final weights and bias = per-step displacement, the track is a straight line.
    for (auto& mlp : p.heads) {
        zero(mlp.w3);
        for (std::size_t t = 0; t < 5; ++t) {
            mlp.b3.mutable_data()[2 * t] = 0.5;
            mlp.b3.mutable_data()[2 * t + 1] = -1.0;
        }
    }
    const auto lin = decode(h0, hl, last, p);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t h = 0; h < 3; ++h) {
            for (std::size_t t = 0; t < 5; ++t) {
                const std::size_t c = ((i * 3 + h) * 5 + t) * 2;
                CHECK(lin.candidates[c] == doctest::Approx(last[2 * i] + 0.5 * static_cast<double>(t + 1)));
                CHECK(lin.candidates[c + 1] == doctest::Approx(last[2 * i + 1] - static_cast<double>(t + 1)));
            }
        }
    }
    CHECK_THROWS_AS((void)decode(h0, random_tensor({2, 3}, rng), last, p), ShapeError);
}

TEST_CASE("best-of-K loss by hand") {
    // One agent, two heads, two steps. Head 0 is off by (3,4) at step 0; head 1 by 1 at step 1.
    const Tensor future(Shape{1, 2, 2}, {0.0, 0.0, 0.0, 0.0});
    const Tensor cand(Shape{1, 2, 2, 2}, {3.0, 4.0, 0.0, 0.0,  //
                                          0.0, 0.0, 1.0, 0.0});
    // per_step: min(5, 0) + min(0, 1) = 0 over 2 steps.
    CHECK(best_of_k_loss(cand, future, MinScope::per_step).item() == 0.0);
    // per_trajectory: min(2.5, 0.5) = 0.5.
    CHECK(best_of_k_loss(cand, future, MinScope::per_trajectory).item() == 0.5);
    CHECK(parse_min_scope("per_trajectory") == MinScope::per_trajectory);
    CHECK(to_string(MinScope::per_step) == "per_step");
    CHECK_THROWS_AS((void)parse_min_scope("best"), ConfigError);
}

TEST_CASE("loss gradient reaches only the winning head") {
    const Tensor future(Shape{1, 2, 2}, 0.0);
    Tensor cand(Shape{1, 3, 2, 2}, {2.0, 0.0, 2.0, 0.0,  //
                                    1.0, 0.0, 1.0, 0.0,  //
                                    1.0, 0.0, 1.0, 0.0},
                true);
    best_of_k_loss(cand, future, MinScope::per_trajectory).backward();
    const auto g = cand.grad();
    for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] == 0.0);
    CHECK(g[4] == 0.5);  // head 1 wins the tie with head 2
    for (std::size_t i = 8; i < 12; ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("loss and metrics reject mismatched shapes") {
    const Tensor cand(Shape{2, 3, 4, 2}, 0.0);
    CHECK_THROWS_AS((void)best_of_k_loss(cand, Tensor(Shape{2, 5, 2}, 0.0)), ContractError);
    CHECK_THROWS_AS((void)min_ade_fde(cand, Tensor(Shape{3, 4, 2}, 0.0)), ContractError);
}

TEST_CASE("minADE and minFDE match brute force and minimize independently") {
    Rng rng(2);
    for (int n = 0; n < 200; ++n) {
        const std::size_t m = 1 + rng.below(5), k = 1 + rng.below(6), t_f = 1 + rng.below(8);
        const Tensor c = random_tensor({m, k, t_f, 2}, rng, -4, 4);
        const Tensor f = random_tensor({m, t_f, 2}, rng, -4, 4);
        const auto got = min_ade_fde(c, f, 7);
        const auto [ade, fde] = brute_ade_fde(c, f);
        CHECK(std::abs(got.min_ade - ade) <= 1e-12);
        CHECK(std::abs(got.min_fde - fde) <= 1e-12);
        CHECK(got.scene_id == 7);
        CHECK(got.agents == m);
        CHECK(got.k == k);
    }
    // Head 0 has the better average, head 1 the better endpoint.
    const Tensor f(Shape{1, 2, 2}, 0.0);
    const Tensor c(Shape{1, 2, 2, 2}, {0.0, 0.0, 2.0, 0.0,  //
                                       3.0, 0.0, 1.0, 0.0});
    const auto s = min_ade_fde(c, f);
    CHECK(s.min_ade == 1.0);
    CHECK(s.min_fde == 1.0);
}

TEST_CASE("best index picks the smallest mean displacement") {
    PredictionSet p;
    p.candidates = Tensor(Shape{1, 3, 1, 2}, {2.0, 0.0, 1.0, 0.0, 1.0, 0.0});
    assign_best_index(p, Tensor(Shape{1, 1, 2}, 0.0));
    CHECK(p.best_index == std::vector<std::size_t>{1});
}

TEST_CASE("metric report aggregates by agent count and ends with the aggregate row") {
    MetricReport r;
    r.add({0, 1.0, 2.0, 20, 1});
    r.add({1, 4.0, 8.0, 20, 3});
    CHECK(r.min_ade == 3.25);
    CHECK(r.min_fde == 6.5);
    CHECK(r.to_csv() == "scene_id,min_ade,min_fde,k,M\n0,1,2,20,1\n1,4,8,20,3\nall,3.25,6.5,20,4\n");
}

TEST_CASE("constant velocity baseline") {
    data::Scene s;
    s.agent_ids = {0, 1};
    s.observed = Tensor(Shape{2, 2, 2}, {0.0, 0.0, 1.0, 2.0,  //
                                         5.0, 5.0, 5.0, 4.0});
    const auto p = constant_velocity_baseline(s, 3);
    CHECK(p.candidates.shape() == Shape{2, 1, 3, 2});
    CHECK(p.candidates[4] == 4.0);
    CHECK(p.candidates[5] == 8.0);
    CHECK(p.candidates[11] == 1.0);

    data::Scene one;
    one.agent_ids = {0};
    one.observed = Tensor(Shape{1, 1, 2}, {2.0, -1.0});
    const auto held = constant_velocity_baseline(one, 4);
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(held.candidates[2 * t] == 2.0);
        CHECK(held.candidates[2 * t + 1] == -1.0);
    }
}

TEST_CASE("baseline is exact on constant velocity scenes") {
    const auto s = data::generate_synthetic(data::SyntheticKind::constant_velocity, 4, 8, 12, 3);
    const auto m = min_ade_fde(constant_velocity_baseline(s, 12).candidates, *s.future);
    CHECK(m.min_ade <= 1e-12);
    CHECK(m.min_fde <= 1e-12);
}

TEST_CASE("model predictions translate with the scene") {
    ModelConfig c;
    c.d = 16;
    c.heads = 2;
    c.k = 3;
    c.seed = 4;
    const ArtModel model(c);
    Rng rng(4);
    for (int n = 0; n < 10; ++n) {
        const auto s = data::generate_synthetic(static_cast<data::SyntheticKind>(rng.below(3)), 2 + rng.below(4), 8,
                                                12, rng.next());
        data::Scene moved = s;
        moved.observed = s.observed.clone();
        const double dx = rng.uniform(-50, 50), dy = rng.uniform(-50, 50);
        for (std::size_t i = 0; i < moved.observed.numel(); i += 2) {
            moved.observed.mutable_data()[i] += dx;
            moved.observed.mutable_data()[i + 1] += dy;
        }
        const NoGradGuard guard;
        const auto a = model.forward(s).predictions.candidates;
        const auto b = model.forward(moved).predictions.candidates;
        for (std::size_t i = 0; i < a.numel(); i += 2) {
            CHECK(std::abs(b[i] - a[i] - dx) <= 1e-9);
            CHECK(std::abs(b[i + 1] - a[i + 1] - dy) <= 1e-9);
        }
    }
}

TEST_CASE("gradients agree with central differences") {
    for (std::uint64_t s = 0; s < 20; ++s) CHECK(head_gradient_probe(s) <= 1e-4);
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(model_gradient_probe(s) <= 1e-4);
}
