#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "art/errors.hpp"
#include "support.hpp"

using namespace art;
using namespace art::data;

namespace {

std::filesystem::path fixture(const std::string& name, const std::string& text) {
    const auto dir = std::filesystem::temp_directory_path() / "art_data_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << text;
    return path;
}

// Two agents over frames 0, 10, ..., 90; agent 3 only appears in frames 0..40.
std::string ten_frames() {
    std::string text = "# frame agent x y\n";
    for (int f = 0; f < 10; ++f) {
        text += std::to_string(f * 10) + " 1 " + std::to_string(0.5 * f) + " 0.0\n";
        text += std::to_string(f * 10) + ".0 2.0 1.0 " + std::to_string(-0.25 * f) + "\n";
        if (f < 5) text += std::to_string(f * 10) + " 3 5.0 5.0\n";
    }
    return text;
}

}  // namespace

TEST_CASE("loader slides windows and keeps agents present throughout") {
    const auto path = fixture("ten.txt", ten_frames());
    const auto scenes = load_ethucy_text(path, 3, 2, 1);
    REQUIRE(scenes.size() == 6);  // 10 frames, window 5, stride 1
    CHECK(scenes[0].agents() == 3);
    CHECK(scenes[1].agents() == 2);  // agent 3 leaves after frame 40
    CHECK(scenes[0].agent_ids == std::vector<std::int64_t>{1, 2, 3});
    CHECK(scenes[2].observed_at(0, 0).x == 1.0);
    CHECK(scenes[2].future_at(1, 1).y == doctest::Approx(-1.5));
    CHECK(load_ethucy_text(path, 3, 2, 2).size() == 3);
}

TEST_CASE("loader reports the line of a malformed record") {
    const auto path = fixture("bad.txt", "0 1 0 0\n10 1 0.5 x\n");
    try {
        (void)load_ethucy_text(path, 1, 1);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 2);
    }
    CHECK_THROWS_AS((void)load_ethucy_text(fixture("extra.txt", "0 1 0 0 9\n"), 1, 1), ParseError);
    CHECK_THROWS_AS((void)load_ethucy_text(fixture("dup.txt", "0 1 0 0\n0 1 1 1\n"), 1, 1), ParseError);
    CHECK_THROWS_AS((void)load_ethucy_text("/nonexistent/file.txt", 1, 1), DataError);
}

TEST_CASE("a file shorter than one window yields no scenes") {
    CHECK(load_ethucy_text(fixture("short.txt", "0 1 0 0\n10 1 1 0\n"), 2, 2).empty());
}

TEST_CASE("normalization round-trips and centers the last observed step") {
    Rng rng(3);
    for (int n = 0; n < 50; ++n) {
        Scene s = generate_synthetic(static_cast<SyntheticKind>(rng.below(3)), 2 + rng.below(6), 8, 12, rng.next());
        const auto [local, state] = normalize(s);
        double cx = 0, cy = 0;
        for (std::size_t a = 0; a < s.agents(); ++a) {
            cx += local.observed_at(a, 7).x;
            cy += local.observed_at(a, 7).y;
        }
        CHECK(std::abs(cx) < 1e-9);
        CHECK(std::abs(cy) < 1e-9);
        const Scene back = denormalize(local, state);
        for (std::size_t i = 0; i < s.observed.numel(); ++i) CHECK(std::abs(back.observed[i] - s.observed[i]) < 1e-12);
        for (std::size_t i = 0; i < s.future->numel(); ++i) CHECK(std::abs((*back.future)[i] - (*s.future)[i]) < 1e-12);
    }
}

TEST_CASE("synthetic generation is deterministic per seed") {
    for (auto kind : {SyntheticKind::constant_velocity, SyntheticKind::crossing, SyntheticKind::group}) {
        const Scene a = generate_synthetic(kind, 5, 8, 12, 42);
        const Scene b = generate_synthetic(kind, 5, 8, 12, 42);
        const Scene c = generate_synthetic(kind, 5, 8, 12, 43);
        CHECK(std::equal(a.observed.data().begin(), a.observed.data().end(), b.observed.data().begin()));
        CHECK_FALSE(std::equal(a.observed.data().begin(), a.observed.data().end(), c.observed.data().begin()));
    }
}

TEST_CASE("constant_velocity scenes are exactly linear") {
    const Scene s = generate_synthetic(SyntheticKind::constant_velocity, 3, 8, 12, 7);
    for (std::size_t a = 0; a < 3; ++a) {
        const double vx = s.observed_at(a, 1).x - s.observed_at(a, 0).x;
        CHECK(s.future_at(a, 11).x == doctest::Approx(s.observed_at(a, 0).x + 19 * vx).epsilon(1e-12));
    }
}

TEST_CASE("crossing pairs come within 0.5 m inside the observed window") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Scene s = generate_synthetic(SyntheticKind::crossing, 4, 8, 12, seed);
        CHECK(min_observed_distance(s, 0, 1) < 0.5);
        CHECK(min_observed_distance(s, 2, 3) < 0.5);
        const std::size_t t = closest_observed_step(s, 0, 1);
        CHECK(t < 8);
    }
}

TEST_CASE("constant_velocity_track by hand") {
    const Tensor t = constant_velocity_track({1.0, 2.0}, {0.5, -1.0}, 3);
    CHECK(t.shape() == Shape{3, 2});
    CHECK(t[4] == 2.0);
    CHECK(t[5] == 0.0);
}

TEST_CASE("scene validation and kind parsing") {
    Scene s;
    s.observed = Tensor(Shape{1, 2, 2}, {0, 0, std::nan(""), 0});
    s.agent_ids = {0};
    CHECK_THROWS_AS(s.validate(), DataError);
    CHECK_THROWS_AS((void)parse_synthetic_kind("zigzag"), ConfigError);
    CHECK(to_string(parse_synthetic_kind("group")) == "group");
}

TEST_CASE("crossing needs a pair of agents") {
    CHECK_THROWS(generate_synthetic(SyntheticKind::crossing, 1, 8, 12, 0));
    CHECK(generate_synthetic(SyntheticKind::group, 1, 8, 12, 0).agents() == 1);
}
