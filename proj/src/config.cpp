#include "art/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "art/errors.hpp"

namespace art::harness {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t to_size(const std::string& key, const std::string& value) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got `" + value + "`");
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": expected a number, got `" + value + "`");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key + ": expected true or false, got `" + value + "`");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class F>
F wrap_parse(const std::string& key, F (*parse)(const std::string&), const std::string& value) {
    try {
        return parse(value);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

}  // namespace

LrSchedule parse_schedule(const std::string& name) {
    if (name == "constant") return LrSchedule::constant;
    if (name == "cosine") return LrSchedule::cosine;
    throw ConfigError("unknown learning-rate schedule `" + name + "` (expected constant | cosine)");
}

std::string to_string(LrSchedule schedule) { return schedule == LrSchedule::cosine ? "cosine" : "constant"; }

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "model.d") model.d = to_size(key, value);
    else if (key == "model.heads") model.heads = to_size(key, value);
    else if (key == "model.layers") model.layers = to_size(key, value);
    else if (key == "model.k") model.k = to_size(key, value);
    else if (key == "model.p") model.p = to_double(key, value);
    else if (key == "model.aip") model.aip = to_bool(key, value);
    else if (key == "model.weighting") model.weighting = wrap_parse(key, targ::parse_weighting, value);
    else if (key == "model.pooling") model.pooling = wrap_parse(key, rt::parse_pooling, value);
    else if (key == "loss.min_scope") model.min_scope = wrap_parse(key, head::parse_min_scope, value);
    else if (key == "data.source") data.source = value;
    else if (key == "data.holdout") data.holdout = value;
    else if (key == "data.t_h") data.t_h = to_size(key, value);
    else if (key == "data.t_f") data.t_f = to_size(key, value);
    else if (key == "data.stride") data.stride = to_size(key, value);
    else if (key == "data.frame_interval") data.frame_interval = to_double(key, value);
    else if (key == "data.agents") data.agents = to_size(key, value);
    else if (key == "data.train_scenes") data.train_scenes = to_size(key, value);
    else if (key == "data.val_scenes") data.val_scenes = to_size(key, value);
    else if (key == "train.epochs") train.epochs = to_size(key, value);
    else if (key == "train.batch_scenes") train.batch_scenes = to_size(key, value);
    else if (key == "train.learning_rate") train.learning_rate = to_double(key, value);
    else if (key == "train.lr_schedule") train.schedule = wrap_parse(key, parse_schedule, value);
    else if (key == "train.seed") train.seed = to_size(key, value);
    else if (key == "sweep.p_values") sweep_p = to_list(key, value);
    else if (key == "sweep.retrain") sweep_retrain = to_bool(key, value);
    else if (key == "output.dir") output_dir = value;
    else throw ConfigError("unknown config key `" + key + "`");
    model.t_h = data.t_h;
    model.t_f = data.t_f;
    model.seed = train.seed;
}

void RunConfig::validate() const {
    model.validate();
    if (data.stride == 0) throw ConfigError("data.stride must be >= 1");
    if (!(data.frame_interval > 0.0)) throw ConfigError("data.frame_interval must be > 0");
    if (train.batch_scenes == 0) throw ConfigError("train.batch_scenes must be >= 1");
    if (!(train.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
    if (data.source.rfind("synthetic:", 0) == 0) {
        data::parse_synthetic_kind(data.source.substr(10));
        if (data.agents == 0) throw ConfigError("data.agents must be >= 1");
    }
    for (double p : sweep_p) {
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sweep.p_values: " + fmt(p) + " is outside (0, 1]");
    }
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "model.d = " << model.d << '\n'
        << "model.heads = " << model.heads << '\n'
        << "model.layers = " << model.layers << '\n'
        << "model.k = " << model.k << '\n'
        << "model.p = " << fmt(model.p) << '\n'
        << "model.aip = " << (model.aip ? "true" : "false") << '\n'
        << "model.weighting = " << targ::to_string(model.weighting) << '\n'
        << "model.pooling = " << rt::to_string(model.pooling) << '\n'
        << "loss.min_scope = " << head::to_string(model.min_scope) << '\n'
        << "data.source = " << data.source << '\n'
        << "data.holdout = " << data.holdout << '\n'
        << "data.t_h = " << data.t_h << '\n'
        << "data.t_f = " << data.t_f << '\n'
        << "data.stride = " << data.stride << '\n'
        << "data.frame_interval = " << fmt(data.frame_interval) << '\n'
        << "data.agents = " << data.agents << '\n'
        << "data.train_scenes = " << data.train_scenes << '\n'
        << "data.val_scenes = " << data.val_scenes << '\n'
        << "train.epochs = " << train.epochs << '\n'
        << "train.batch_scenes = " << train.batch_scenes << '\n'
        << "train.learning_rate = " << fmt(train.learning_rate) << '\n'
        << "train.lr_schedule = " << to_string(train.schedule) << '\n'
        << "train.seed = " << train.seed << '\n';
    out << "sweep.p_values = ";
    for (std::size_t i = 0; i < sweep_p.size(); ++i) out << (i ? "," : "") << fmt(sweep_p[i]);
    out << '\n'
        << "sweep.retrain = " << (sweep_retrain ? "true" : "false") << '\n'
        << "output.dir = " << output_dir.string() << '\n';
    return out.str();
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(number) + ": expected `key = value`");
        }
        base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override `" + assignment + "` is not key=value");
    config.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace art::harness
