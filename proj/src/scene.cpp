#include "art/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "art/errors.hpp"
#include "art/ops.hpp"
#include "art/rng.hpp"

namespace art::data {

namespace {

Vec2 read_point(const Tensor& t, std::size_t agent, std::size_t step) {
    const std::size_t steps = t.size(1);
    const std::size_t base = (agent * steps + step) * 2;
    return {t[base], t[base + 1]};
}

Tensor shifted(const Tensor& positions, Vec2 delta) {
    Tensor out = positions.detach();
    auto v = out.mutable_data();
    for (std::size_t i = 0; i < v.size(); i += 2) {
        v[i] += delta.x;
        v[i + 1] += delta.y;
    }
    return out;
}

double truncated_jitter(Rng& rng, double sigma, double bound) {
    for (;;) {
        const double v = sigma * rng.normal();
        if (std::abs(v) <= bound) return v;
    }
}

Vec2 heading(double angle, double speed) { return {speed * std::cos(angle), speed * std::sin(angle)}; }

}  // namespace

Vec2 Scene::observed_at(std::size_t agent, std::size_t t) const { return read_point(observed, agent, t); }

Vec2 Scene::future_at(std::size_t agent, std::size_t t) const {
    if (!future) throw ContractError("scene has no future trajectory");
    return read_point(*future, agent, t);
}

void Scene::validate() const {
    if (observed.dim() != 3 || observed.size(2) != 2 || observed.size(0) == 0 || observed.size(1) == 0) {
        throw DataError("scene: observed must be [M>=1, T_h>=1, 2], got " + shape_str(observed.shape()));
    }
    if (agent_ids.size() != observed.size(0)) throw DataError("scene: agent id count does not match observed");
    if (future) {
        if (future->dim() != 3 || future->size(0) != observed.size(0) || future->size(2) != 2) {
            throw DataError("scene: future shape " + shape_str(future->shape()) + " does not match observed " +
                            shape_str(observed.shape()));
        }
        for (double v : future->data()) {
            if (!std::isfinite(v)) throw DataError("scene: non-finite future position");
        }
    }
    for (double v : observed.data()) {
        if (!std::isfinite(v)) throw DataError("scene: non-finite observed position");
    }
}

std::vector<Scene> load_ethucy_text(const std::filesystem::path& path, std::size_t observed_len,
                                    std::size_t future_len, std::size_t stride, double frame_interval) {
    if (observed_len == 0) throw ConfigError("load_ethucy_text: observed_len must be >= 1");
    if (stride == 0) throw ConfigError("load_ethucy_text: stride must be >= 1");
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    // frame -> agent -> position
    std::map<std::int64_t, std::map<std::int64_t, Vec2>> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        double frame = 0, agent = 0, x = 0, y = 0;
        if (!(fields >> frame >> agent >> x >> y)) throw ParseError(line_no, "expected `frame_id agent_id x y`");
        std::string extra;
        if (fields >> extra) throw ParseError(line_no, "unexpected trailing field `" + extra + "`");
        if (!std::isfinite(frame) || !std::isfinite(agent) || !std::isfinite(x) || !std::isfinite(y)) {
            throw ParseError(line_no, "non-finite value");
        }
        const auto frame_id = static_cast<std::int64_t>(std::llround(frame));
        const auto agent_id = static_cast<std::int64_t>(std::llround(agent));
        if (!frames[frame_id].emplace(agent_id, Vec2{x, y}).second) {
            throw ParseError(line_no, "duplicate record for agent " + std::to_string(agent_id) + " in frame " +
                                          std::to_string(frame_id));
        }
    }

    std::vector<const std::map<std::int64_t, Vec2>*> ordered;
    for (const auto& [id, agents] : frames) ordered.push_back(&agents);

    const std::size_t window = observed_len + future_len;
    std::vector<Scene> scenes;
    for (std::size_t start = 0; start + window <= ordered.size(); start += stride) {
        std::vector<std::int64_t> complete;
        for (const auto& [agent_id, pos] : *ordered[start]) {
            bool everywhere = true;
            for (std::size_t f = start + 1; f < start + window && everywhere; ++f) {
                everywhere = ordered[f]->count(agent_id) > 0;
            }
            if (everywhere) complete.push_back(agent_id);
        }
        if (complete.empty()) continue;

        const std::size_t m = complete.size();
        std::vector<double> obs(m * observed_len * 2);
        std::vector<double> fut(m * future_len * 2);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t t = 0; t < window; ++t) {
                const Vec2 p = ordered[start + t]->at(complete[a]);
                double* dst = t < observed_len ? &obs[(a * observed_len + t) * 2]
                                               : &fut[(a * future_len + t - observed_len) * 2];
                dst[0] = p.x;
                dst[1] = p.y;
            }
        }
        Scene scene;
        scene.agent_ids = complete;
        scene.observed = Tensor(Shape{m, observed_len, 2}, std::move(obs));
        if (future_len > 0) scene.future = Tensor(Shape{m, future_len, 2}, std::move(fut));
        scene.frame_interval = frame_interval;
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

std::pair<Scene, NormalizationState> normalize(const Scene& scene) {
    const std::size_t m = scene.agents();
    const std::size_t last = scene.observed_len() - 1;
    Vec2 c;
    for (std::size_t a = 0; a < m; ++a) {
        const Vec2 p = scene.observed_at(a, last);
        c.x += p.x;
        c.y += p.y;
    }
    c.x /= static_cast<double>(m);
    c.y /= static_cast<double>(m);

    Scene out = scene;
    out.observed = shifted(scene.observed, {-c.x, -c.y});
    if (scene.future) out.future = shifted(*scene.future, {-c.x, -c.y});
    return {std::move(out), NormalizationState{c}};
}

Scene denormalize(const Scene& scene, const NormalizationState& state) {
    Scene out = scene;
    out.observed = shifted(scene.observed, state.centroid);
    if (scene.future) out.future = shifted(*scene.future, state.centroid);
    return out;
}

Tensor denormalize_positions(const Tensor& positions, const NormalizationState& state) {
    if (positions.dim() == 0 || positions.shape().back() != 2) {
        throw ShapeError("denormalize_positions: last axis must be 2, got " + shape_str(positions.shape()));
    }
    return add(positions, Tensor(Shape{2}, {state.centroid.x, state.centroid.y}));
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
    if (name == "constant_velocity") return SyntheticKind::constant_velocity;
    if (name == "crossing") return SyntheticKind::crossing;
    if (name == "group") return SyntheticKind::group;
    throw ConfigError("unknown synthetic kind `" + name + "` (expected constant_velocity | crossing | group)");
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::constant_velocity: return "constant_velocity";
        case SyntheticKind::crossing: return "crossing";
        case SyntheticKind::group: return "group";
    }
    return "unknown";
}

Tensor constant_velocity_track(Vec2 p0, Vec2 v, std::size_t steps) {
    std::vector<double> values(steps * 2);
    for (std::size_t t = 0; t < steps; ++t) {
        values[t * 2] = p0.x + v.x * static_cast<double>(t);
        values[t * 2 + 1] = p0.y + v.y * static_cast<double>(t);
    }
    return Tensor(Shape{steps, 2}, std::move(values));
}

Scene generate_synthetic(SyntheticKind kind, std::size_t m, std::size_t t_h, std::size_t t_f, std::uint64_t seed) {
    if (m == 0) throw ConfigError("generate_synthetic: m must be >= 1");
    if (kind == SyntheticKind::crossing && m < 2) throw ConfigError("generate_synthetic: crossing needs m >= 2");
    if (t_h == 0) throw ConfigError("generate_synthetic: t_h must be >= 1");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double sigma = 0.05;
    Rng rng(seed);
    const std::size_t steps = t_h + t_f;
    std::vector<double> track(m * steps * 2);
    auto put = [&](std::size_t a, std::size_t t, Vec2 p) {
        track[(a * steps + t) * 2] = p.x;
        track[(a * steps + t) * 2 + 1] = p.y;
    };

    switch (kind) {
        case SyntheticKind::constant_velocity:
            for (std::size_t a = 0; a < m; ++a) {
                const Vec2 p0{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
                const Vec2 v = heading(rng.uniform(0.0, two_pi), rng.uniform(0.2, 0.6));
                for (std::size_t t = 0; t < steps; ++t) {
                    const double s = static_cast<double>(t);
                    put(a, t, {p0.x + v.x * s, p0.y + v.y * s});
                }
            }
            break;

        case SyntheticKind::crossing: {
            // Offset at the meeting step is at most 0.15 m and each coordinate's
            // jitter at most 0.1 m, so the pair gap there stays below 0.44 m.
            const std::size_t lo = t_h >= 3 ? 1 : 0;
            const std::size_t hi = t_h >= 3 ? t_h - 2 : t_h - 1;
            for (std::size_t a = 0; a + 1 < m; a += 2) {
                const Vec2 meet{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
                const double t_meet = static_cast<double>(lo + rng.below(hi - lo + 1));
                const double angle_a = rng.uniform(0.0, two_pi);
                const double turn = rng.uniform(std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0);
                const double angle_b = angle_a + (rng.uniform() < 0.5 ? turn : -turn);
                const Vec2 va = heading(angle_a, rng.uniform(0.3, 0.6));
                const Vec2 vb = heading(angle_b, rng.uniform(0.3, 0.6));
                const Vec2 gap = heading(rng.uniform(0.0, two_pi), rng.uniform(0.0, 0.15));
                for (std::size_t t = 0; t < steps; ++t) {
                    const double s = static_cast<double>(t) - t_meet;
                    put(a, t,
                        {meet.x + va.x * s + truncated_jitter(rng, sigma, 2 * sigma),
                         meet.y + va.y * s + truncated_jitter(rng, sigma, 2 * sigma)});
                    put(a + 1, t,
                        {meet.x + gap.x + vb.x * s + truncated_jitter(rng, sigma, 2 * sigma),
                         meet.y + gap.y + vb.y * s + truncated_jitter(rng, sigma, 2 * sigma)});
                }
            }
            if (m % 2 == 1) {
                const std::size_t a = m - 1;
                const Vec2 p0{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
                const Vec2 v = heading(rng.uniform(0.0, two_pi), rng.uniform(0.2, 0.6));
                for (std::size_t t = 0; t < steps; ++t) {
                    const double s = static_cast<double>(t);
                    put(a, t,
                        {p0.x + v.x * s + truncated_jitter(rng, sigma, 2 * sigma),
                         p0.y + v.y * s + truncated_jitter(rng, sigma, 2 * sigma)});
                }
            }
            break;
        }

        case SyntheticKind::group: {
            const Vec2 center{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
            const Vec2 v = heading(rng.uniform(0.0, two_pi), rng.uniform(0.2, 0.6));
            for (std::size_t a = 0; a < m; ++a) {
                const Vec2 p0{center.x + rng.uniform(-1.5, 1.5), center.y + rng.uniform(-1.5, 1.5)};
                for (std::size_t t = 0; t < steps; ++t) {
                    const double s = static_cast<double>(t);
                    put(a, t, {p0.x + v.x * s + sigma * rng.normal(), p0.y + v.y * s + sigma * rng.normal()});
                }
            }
            break;
        }
    }

    std::vector<double> obs(m * t_h * 2);
    std::vector<double> fut(m * t_f * 2);
    for (std::size_t a = 0; a < m; ++a) {
        std::copy_n(&track[a * steps * 2], t_h * 2, &obs[a * t_h * 2]);
        std::copy_n(&track[(a * steps + t_h) * 2], t_f * 2, &fut[a * t_f * 2]);
    }
    Scene scene;
    scene.agent_ids.resize(m);
    for (std::size_t a = 0; a < m; ++a) scene.agent_ids[a] = static_cast<std::int64_t>(a);
    scene.observed = Tensor(Shape{m, t_h, 2}, std::move(obs));
    if (t_f > 0) scene.future = Tensor(Shape{m, t_f, 2}, std::move(fut));
    return scene;
}

double min_observed_distance(const Scene& scene, std::size_t i, std::size_t j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < scene.observed_len(); ++t) {
        const Vec2 a = scene.observed_at(i, t);
        const Vec2 b = scene.observed_at(j, t);
        best = std::min(best, std::hypot(a.x - b.x, a.y - b.y));
    }
    return best;
}

std::size_t closest_observed_step(const Scene& scene, std::size_t i, std::size_t j) {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < scene.observed_len(); ++t) {
        const Vec2 a = scene.observed_at(i, t);
        const Vec2 b = scene.observed_at(j, t);
        const double d = std::hypot(a.x - b.x, a.y - b.y);
        if (d < best) {
            best = d;
            arg = t;
        }
    }
    return arg;
}

}  // namespace art::data
