#include "art/model.hpp"

#include "art/errors.hpp"
#include "art/ops.hpp"
#include "art/rng.hpp"

namespace art {

void ModelConfig::validate() const {
    targ().validate();
    if (layers == 0) throw ConfigError("model.layers must be >= 1");
    if (k == 0) throw ConfigError("model.k must be >= 1");
    if (t_h == 0) throw ConfigError("data.t_h must be >= 1");
    if (t_f == 0) throw ConfigError("data.t_f must be >= 1");
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("model.p must be in (0, 1]");
}

ArtModel::ArtModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    Rng rng(mix_seed(config_.seed, 0x4d4f44454cULL));
    targ_ = targ::init_params(params_, config_.targ(), rng);
    rt_ = rt::init_params(params_, config_.d, config_.layers, config_.pooling, config_.t_h, rng);
    head_ = head::init_params(params_, config_.d, config_.k, config_.t_f, rng);
}

ForwardResult ArtModel::forward(const data::Scene& scene, const ForwardOptions& options) const {
    scene.validate();
    if (scene.observed_len() != config_.t_h) {
        throw ShapeError("forward: scene has " + std::to_string(scene.observed_len()) +
                         " observed steps, model expects " + std::to_string(config_.t_h));
    }
    const std::size_t m = scene.agents();

    ForwardResult out;
    auto [local, norm] = data::normalize(scene);
    out.normalization = norm;

    const targ::TargConfig tc = config_.targ();
    out.temporal = targ::embed(local.observed, targ_);
    out.graph = targ::build_relation_graph(out.temporal, targ_, tc, options.keep_scores, options.ablation_seed);

    // Pruning is a hard selection; it sees values only.
    const Tensor weights = out.graph.weights.detach();
    const bool use_aip = options.aip.value_or(config_.aip);
    out.pruned = use_aip ? aip::prune(weights, options.p.value_or(config_.p)) : aip::dense_graph(weights);

    out.initial = rt::init_state(out.temporal, out.graph.relations, out.pruned, rt_);
    out.encoded = rt::encode(out.initial, rt_, config_.heads);

    Tensor last = reshape(slice(local.observed, 1, config_.t_h - 1, 1), {m, 2});
    head::PredictionSet local_pred =
        head::decode(out.initial.node_features, out.encoded.node_features, last, head_);
    out.predictions.candidates = data::denormalize_positions(local_pred.candidates, norm);
    if (scene.future && scene.future_len() == config_.t_f) {
        head::assign_best_index(out.predictions, *scene.future);
    }
    return out;
}

Tensor ArtModel::loss(const data::Scene& scene, const ForwardOptions& options) const {
    if (!scene.future) throw ContractError("loss: scene has no future trajectory");
    ForwardResult result = forward(scene, options);
    return head::best_of_k_loss(result.predictions.candidates, *scene.future, config_.min_scope);
}

}  // namespace art
