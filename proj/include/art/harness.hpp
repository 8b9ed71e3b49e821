#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "art/checkpoint.hpp"
#include "art/config.hpp"
#include "art/macs.hpp"
#include "art/model.hpp"

// Training, evaluation, sweeps and figure data behind the command line.

namespace art::harness {

struct Splits {
    std::vector<data::Scene> train;
    std::vector<data::Scene> val;
};

/// Split streams for synthetic generation.
enum class SplitTag : std::uint64_t { train = 1, val = 2, test = 3 };

std::vector<data::Scene> synthetic_scenes(data::SyntheticKind kind, std::size_t agents, std::size_t t_h,
                                          std::size_t t_f, std::size_t count, std::uint64_t seed, SplitTag split);

/// Synthetic: fresh seed stream per split. ETH/UCY directory: the `holdout`
/// file (default: first file by name) is validation, the rest train. A single
/// ETH/UCY file is split chronologically, the last fifth of windows for
/// validation. Throws DataError when the source cannot be read.
Splits load_splits(const DataConfig& data, std::uint64_t seed);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_min_ade = 0.0;
    double val_min_fde = 0.0;
};

double learning_rate_at(const TrainConfig& train, std::size_t epoch);

/// Mini-batch Adam on the best-of-K loss. Per-scene gradients accumulate in
/// scene-index order inside a batch, so a seed fixes the result bit for bit.
/// `on_epoch` runs after every epoch.
std::vector<EpochRecord> train_model(ArtModel& model, const Splits& splits, const TrainConfig& train,
                                     const std::function<void(const EpochRecord&)>& on_epoch = {});

std::string loss_csv(const std::vector<EpochRecord>& history);

struct EvalResult {
    head::MetricReport report;
    double mean_k_star = 0.0;  // agent-weighted
};

EvalResult evaluate(const ArtModel& model, const std::vector<data::Scene>& scenes, const ForwardOptions& options = {});
head::MetricReport evaluate_baseline(const std::vector<data::Scene>& scenes, std::size_t t_f);

/// Builds the model from `config` and loads the checkpoint's parameters.
/// Throws IncompatibilityError listing every differing structural field.
ArtModel load_model(const RunConfig& config, const std::filesystem::path& checkpoint);

struct SweepRow {
    double p = 0.0;
    double min_ade = 0.0;
    double min_fde = 0.0;
    double mean_k_star = 0.0;
};

/// One row per p. Inference mode evaluates `model` at each p; use
/// sweep_retrain() to train a fresh model per p instead.
std::vector<SweepRow> sweep_inference(const ArtModel& model, const std::vector<data::Scene>& scenes,
                                      const std::vector<double>& p_values);
std::vector<SweepRow> sweep_retrain(const RunConfig& config, const Splits& splits);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_svg(const std::vector<SweepRow>& rows);

struct AttentionTrace {
    std::size_t heads = 0;
    std::size_t steps = 0;
    std::vector<double> alpha;     // [heads, steps]
    std::vector<double> mean;      // [steps], averaged over heads
    std::vector<double> distance;  // [steps], |p_i(t) - p_j(t)|
};

/// Per-head alpha_ij(t) over the observed window. Throws std::out_of_range
/// for an agent index outside the scene.
AttentionTrace attention_trace(const ArtModel& model, const data::Scene& scene, std::size_t i, std::size_t j);
std::string attention_csv(const AttentionTrace& trace);
std::string attention_svg(const AttentionTrace& trace, std::size_t i, std::size_t j);

struct MacReport {
    MacBreakdown analytic;            // at the measured mean kept-edge count
    double mean_k_star = 0.0;
    std::uint64_t measured_total = 0;  // runtime tally, summed over the probe scenes
    std::uint64_t analytic_total = 0;  // analytic count at each scene's k*, summed
    std::uint64_t neighbor_attention_total = 0;        // RT neighbor attention over the probe
    std::uint64_t neighbor_attention_dense_total = 0;  // the same without pruning
    std::uint64_t parameters = 0;
    std::uint64_t parameters_expected = 0;
    std::size_t scenes = 0;
    std::size_t agents = 0;
};

/// Runs `scenes` synthetic scenes of `agents` agents through an initialized
/// model to measure k* and the runtime MAC tally.
MacReport measure_macs(const ModelConfig& config, std::size_t agents, std::size_t scenes, data::SyntheticKind kind);
std::string macs_csv(const MacReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);

// Command entry points. Each writes its files under config.output_dir.
void cmd_train(const RunConfig& config);
void cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, bool baseline);
void cmd_sweep_p(const RunConfig& config, const std::filesystem::path& checkpoint);
void cmd_macs(const RunConfig& config);
void cmd_viz_attention(const RunConfig& config, const std::filesystem::path& checkpoint, std::size_t scene_index,
                       std::size_t i, std::size_t j);

}  // namespace art::harness
