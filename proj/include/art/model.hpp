#pragma once

#include <cstdint>
#include <optional>

#include "art/aip.hpp"
#include "art/parameters.hpp"
#include "art/prediction_head.hpp"
#include "art/relational_transformer.hpp"
#include "art/scene.hpp"
#include "art/targ.hpp"

namespace art {

struct ModelConfig {
    std::size_t d = 64;
    std::size_t heads = 4;
    std::size_t layers = 1;
    std::size_t k = 20;
    std::size_t t_h = 8;
    std::size_t t_f = 12;
    double p = 0.75;
    bool aip = true;
    targ::Weighting weighting = targ::Weighting::temporal_attention;
    head::MinScope min_scope = head::MinScope::per_step;
    rt::NodePooling pooling = rt::NodePooling::mean;
    std::uint64_t seed = 0;

    targ::TargConfig targ() const { return {d, heads, weighting}; }
    /// Throws ConfigError on an unusable combination.
    void validate() const;
};

struct ForwardOptions {
    std::optional<double> p;         // overrides ModelConfig::p
    std::optional<bool> aip;         // overrides ModelConfig::aip
    bool keep_scores = false;        // retain per-time attention for plotting
    std::uint64_t ablation_seed = 0; // random-weighting ablation only
};

struct ForwardResult {
    head::PredictionSet predictions;  // scene frame
    data::NormalizationState normalization;
    targ::TemporalNodeFeatures temporal;
    targ::RelationGraph graph;
    aip::PrunedGraph pruned;
    rt::RtState initial;
    rt::RtState encoded;
};

/// The full predictor: embedding, relation graph, pruning, relational
/// transformer and K decoding heads. forward() is const and safe to call
/// concurrently from several threads.
class ArtModel {
public:
    explicit ArtModel(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    ParameterSet& parameters() { return params_; }
    const ParameterSet& parameters() const { return params_; }

    const targ::TargParams& targ_params() const { return targ_; }
    const rt::RtParams& rt_params() const { return rt_; }
    const head::HeadParams& head_params() const { return head_; }

    ForwardResult forward(const data::Scene& scene, const ForwardOptions& options = {}) const;

    /// Best-of-K loss of forward(scene) against scene.future.
    Tensor loss(const data::Scene& scene, const ForwardOptions& options = {}) const;

private:
    ModelConfig config_;
    ParameterSet params_;
    targ::TargParams targ_;
    rt::RtParams rt_;
    head::HeadParams head_;
};

}  // namespace art
