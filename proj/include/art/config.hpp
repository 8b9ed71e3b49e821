#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "art/model.hpp"

// Flat `key = value` run configuration with dotted keys. Every key has a
// default, so an empty file is a valid configuration.

namespace art::harness {

enum class LrSchedule { constant, cosine };

struct DataConfig {
    std::string source = "synthetic:constant_velocity";  // synthetic:<kind>, or an ETH/UCY file or directory
    std::string holdout;  // file held out for validation when `source` is a directory
    std::size_t t_h = 8;
    std::size_t t_f = 12;
    std::size_t stride = 1;
    double frame_interval = 0.4;
    std::size_t agents = 4;          // synthetic scenes only
    std::size_t train_scenes = 200;  // synthetic scenes only
    std::size_t val_scenes = 50;     // synthetic scenes only
};

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_scenes = 8;
    double learning_rate = 1e-3;
    LrSchedule schedule = LrSchedule::cosine;
    std::uint64_t seed = 0;
};

struct RunConfig {
    ModelConfig model;  // model.seed mirrors train.seed
    DataConfig data;
    TrainConfig train;
    std::vector<double> sweep_p{0.5, 0.65, 0.75, 0.85, 0.95, 1.0};
    bool sweep_retrain = false;
    std::filesystem::path output_dir = "out";

    /// Sets one key from its text value. Throws ConfigError on an unknown key
    /// or an unparsable value.
    void set(const std::string& key, const std::string& value);

    /// Throws ConfigError when the combination is unusable.
    void validate() const;

    /// One `key = value` line per key, in a fixed order.
    std::string to_text() const;
};

/// Parses config text. Blank lines and lines starting with `#` are skipped.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);

/// Applies a `key=value` override.
void apply_override(RunConfig& config, const std::string& assignment);

LrSchedule parse_schedule(const std::string& name);
std::string to_string(LrSchedule schedule);

}  // namespace art::harness
