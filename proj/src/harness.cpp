#include "art/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "art/errors.hpp"
#include "art/ops.hpp"
#include "art/optimizer.hpp"
#include "art/rng.hpp"
#include "art/svg.hpp"

namespace art::harness {

namespace {

constexpr std::uint64_t kShuffleTag = 0x5348;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

bool is_synthetic(const DataConfig& data) { return data.source.rfind("synthetic:", 0) == 0; }

std::vector<data::Scene> load_files(const std::vector<std::filesystem::path>& files, const DataConfig& data) {
    std::vector<data::Scene> out;
    for (const auto& f : files) {
        auto scenes = data::load_ethucy_text(f, data.t_h, data.t_f, data.stride, data.frame_interval);
        out.insert(out.end(), std::make_move_iterator(scenes.begin()), std::make_move_iterator(scenes.end()));
    }
    return out;
}

}  // namespace

std::vector<data::Scene> synthetic_scenes(data::SyntheticKind kind, std::size_t agents, std::size_t t_h,
                                          std::size_t t_f, std::size_t count, std::uint64_t seed, SplitTag split) {
    const std::uint64_t stream = mix_seed(seed, static_cast<std::uint64_t>(split));
    std::vector<data::Scene> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(data::generate_synthetic(kind, agents, t_h, t_f, mix_seed(stream, i)));
    return out;
}

Splits load_splits(const DataConfig& data, std::uint64_t seed) {
    Splits s;
    if (is_synthetic(data)) {
        const auto kind = data::parse_synthetic_kind(data.source.substr(10));
        s.train = synthetic_scenes(kind, data.agents, data.t_h, data.t_f, data.train_scenes, seed, SplitTag::train);
        s.val = synthetic_scenes(kind, data.agents, data.t_h, data.t_f, data.val_scenes, seed, SplitTag::val);
        return s;
    }

    const std::filesystem::path source(data.source);
    std::error_code ec;
    if (std::filesystem::is_directory(source, ec)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(source, ec)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        if (ec) throw DataError("cannot list data directory " + source.string());
        std::sort(files.begin(), files.end());
        if (files.size() < 2) throw DataError("leave-one-file-out needs at least two files in " + source.string());
        auto held = files.begin();
        if (!data.holdout.empty()) {
            held = std::find_if(files.begin(), files.end(),
                                [&](const auto& p) { return p.filename() == data.holdout; });
            if (held == files.end()) throw DataError("holdout file " + data.holdout + " not found in " + source.string());
        }
        const std::vector<std::filesystem::path> val_files{*held};
        files.erase(held);
        s.train = load_files(files, data);
        s.val = load_files(val_files, data);
    } else {
        if (!std::filesystem::is_regular_file(source, ec)) throw DataError("cannot read data source " + source.string());
        auto all = load_files({source}, data);
        const std::size_t n_val = all.size() / 5;
        s.val.assign(all.end() - static_cast<std::ptrdiff_t>(n_val), all.end());
        all.resize(all.size() - n_val);
        s.train = std::move(all);
    }
    if (s.train.empty()) throw DataError("no training windows in " + source.string());
    return s;
}

double learning_rate_at(const TrainConfig& train, std::size_t epoch) {
    if (train.schedule == LrSchedule::constant || train.epochs == 0) return train.learning_rate;
    const double progress = static_cast<double>(epoch) / static_cast<double>(train.epochs);
    return train.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<EpochRecord> train_model(ArtModel& model, const Splits& splits, const TrainConfig& train,
                                     const std::function<void(const EpochRecord&)>& on_epoch) {
    Adam optimizer(model.parameters(), train.learning_rate);
    Rng shuffle(mix_seed(train.seed, kShuffleTag));
    std::vector<std::size_t> order(splits.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<EpochRecord> history;
    for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
        optimizer.set_learning_rate(learning_rate_at(train, epoch));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += train.batch_scenes) {
            const std::size_t n = std::min(train.batch_scenes, order.size() - start);
            model.parameters().zero_grad();
            for (std::size_t q = 0; q < n; ++q) {
                Tensor loss = model.loss(splits.train[order[start + q]]);
                total += loss.item();
                scale(loss, 1.0 / static_cast<double>(n)).backward();
            }
            optimizer.step();
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = order.empty() ? 0.0 : total / static_cast<double>(order.size());
        if (!splits.val.empty()) {
            const auto r = evaluate(model, splits.val).report;
            rec.val_min_ade = r.min_ade;
            rec.val_min_fde = r.min_fde;
        }
        history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return history;
}

std::string loss_csv(const std::vector<EpochRecord>& history) {
    std::string out = "epoch,train_loss,val_minADE,val_minFDE\n";
    for (const auto& r : history) {
        out += std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.val_min_ade) + "," +
               fmt(r.val_min_fde) + "\n";
    }
    return out;
}

EvalResult evaluate(const ArtModel& model, const std::vector<data::Scene>& scenes, const ForwardOptions& options) {
    NoGradGuard no_grad;
    EvalResult out;
    double k_sum = 0.0;
    std::size_t agents = 0;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        if (!scenes[s].future) throw DataError("scene " + std::to_string(s) + " has no future to evaluate against");
        const ForwardResult r = model.forward(scenes[s], options);
        out.report.add(head::min_ade_fde(r.predictions.candidates, *scenes[s].future, s));
        for (auto k : r.pruned.k_star) k_sum += static_cast<double>(k);
        agents += r.pruned.k_star.size();
    }
    out.mean_k_star = agents ? k_sum / static_cast<double>(agents) : 0.0;
    return out;
}

head::MetricReport evaluate_baseline(const std::vector<data::Scene>& scenes, std::size_t t_f) {
    head::MetricReport report;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        if (!scenes[s].future) throw DataError("scene " + std::to_string(s) + " has no future to evaluate against");
        const auto pred = head::constant_velocity_baseline(scenes[s], t_f);
        report.add(head::min_ade_fde(pred.candidates, *scenes[s].future, s));
    }
    return report;
}

ArtModel load_model(const RunConfig& config, const std::filesystem::path& checkpoint) {
    const Checkpoint ck = read_checkpoint(checkpoint);
    const auto mismatches = structural_mismatches(ck.config.model, config.model);
    if (!mismatches.empty()) {
        std::string msg = "checkpoint " + checkpoint.string() + " is incompatible with the config:";
        for (const auto& m : mismatches) msg += "\n  " + m;
        throw IncompatibilityError(msg);
    }
    ArtModel model(config.model);
    load_parameters(ck, model.parameters());
    return model;
}

std::vector<SweepRow> sweep_inference(const ArtModel& model, const std::vector<data::Scene>& scenes,
                                      const std::vector<double>& p_values) {
    if (p_values.empty()) throw ConfigError("sweep: the p list is empty");
    std::vector<SweepRow> rows;
    for (double p : p_values) {
        ForwardOptions opt;
        opt.p = p;
        opt.aip = true;
        const EvalResult r = evaluate(model, scenes, opt);
        rows.push_back({p, r.report.min_ade, r.report.min_fde, r.mean_k_star});
    }
    return rows;
}

std::vector<SweepRow> sweep_retrain(const RunConfig& config, const Splits& splits) {
    if (config.sweep_p.empty()) throw ConfigError("sweep: the p list is empty");
    std::vector<SweepRow> rows;
    for (double p : config.sweep_p) {
        ModelConfig mc = config.model;
        mc.p = p;
        mc.aip = true;
        ArtModel model(mc);
        train_model(model, splits, config.train);
        const EvalResult r = evaluate(model, splits.val);
        rows.push_back({p, r.report.min_ade, r.report.min_fde, r.mean_k_star});
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "p,minADE,minFDE,mean_k_star\n";
    for (const auto& r : rows) {
        out += fmt(r.p) + "," + fmt(r.min_ade) + "," + fmt(r.min_fde) + "," + fmt(r.mean_k_star) + "\n";
    }
    return out;
}

std::string sweep_svg(const std::vector<SweepRow>& rows) {
    Series ade{"minADE", {}, {}}, fde{"minFDE", {}, {}};
    for (const auto& r : rows) {
        ade.x.push_back(r.p);
        ade.y.push_back(r.min_ade);
        fde.x.push_back(r.p);
        fde.y.push_back(r.min_fde);
    }
    return line_chart_svg("Error vs top-p threshold", "p", "error (m)", {ade, fde});
}

AttentionTrace attention_trace(const ArtModel& model, const data::Scene& scene, std::size_t i, std::size_t j) {
    const std::size_t m = scene.agents();
    if (i >= m || j >= m) {
        throw std::out_of_range("agent pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") out of range for a scene of " + std::to_string(m) + " agents");
    }
    NoGradGuard no_grad;
    ForwardOptions opt;
    opt.keep_scores = true;
    const ForwardResult r = model.forward(scene, opt);
    const Tensor& scores = *r.graph.per_time_scores;  // [H, M, M, T]
    AttentionTrace tr;
    tr.heads = scores.size(0);
    tr.steps = scores.size(3);
    tr.alpha.resize(tr.heads * tr.steps);
    tr.mean.assign(tr.steps, 0.0);
    for (std::size_t h = 0; h < tr.heads; ++h) {
        for (std::size_t t = 0; t < tr.steps; ++t) {
            const double a = scores[((h * m + i) * m + j) * tr.steps + t];
            tr.alpha[h * tr.steps + t] = a;
            tr.mean[t] += a / static_cast<double>(tr.heads);
        }
    }
    for (std::size_t t = 0; t < tr.steps; ++t) {
        const auto a = scene.observed_at(i, t), b = scene.observed_at(j, t);
        tr.distance.push_back(std::hypot(a.x - b.x, a.y - b.y));
    }
    return tr;
}

std::string attention_csv(const AttentionTrace& tr) {
    std::string out = "head,t,alpha,distance\n";
    for (std::size_t h = 0; h < tr.heads; ++h) {
        for (std::size_t t = 0; t < tr.steps; ++t) {
            out += std::to_string(h) + "," + std::to_string(t) + "," + fmt(tr.alpha[h * tr.steps + t]) + "," +
                   fmt(tr.distance[t]) + "\n";
        }
    }
    for (std::size_t t = 0; t < tr.steps; ++t) {
        out += "mean," + std::to_string(t) + "," + fmt(tr.mean[t]) + "," + fmt(tr.distance[t]) + "\n";
    }
    return out;
}

std::string attention_svg(const AttentionTrace& tr, std::size_t i, std::size_t j) {
    std::vector<Series> series;
    std::vector<double> steps(tr.steps);
    for (std::size_t t = 0; t < tr.steps; ++t) steps[t] = static_cast<double>(t);
    for (std::size_t h = 0; h < tr.heads; ++h) {
        series.push_back({"head " + std::to_string(h), steps,
                          std::vector<double>(tr.alpha.begin() + static_cast<std::ptrdiff_t>(h * tr.steps),
                                              tr.alpha.begin() + static_cast<std::ptrdiff_t>((h + 1) * tr.steps))});
    }
    series.push_back({"mean", steps, tr.mean});
    // Distance is rescaled onto the attention range so both share one axis.
    double dmax = 0.0;
    for (double d : tr.distance) dmax = std::max(dmax, d);
    double amax = 0.0;
    for (double a : tr.alpha) amax = std::max(amax, a);
    std::vector<double> scaled;
    for (double d : tr.distance) scaled.push_back(dmax > 0.0 ? d / dmax * amax : 0.0);
    series.push_back({"distance (scaled)", steps, scaled});
    return line_chart_svg("alpha(" + std::to_string(i) + ", " + std::to_string(j) + ") over the observed window",
                          "observed step", "alpha", series);
}

MacReport measure_macs(const ModelConfig& config, std::size_t agents, std::size_t scenes, data::SyntheticKind kind) {
    ArtModel model(config);
    const auto probe = synthetic_scenes(kind, agents, config.t_h, config.t_f, scenes, config.seed, SplitTag::test);
    MacReport rep;
    rep.scenes = scenes;
    rep.agents = agents;
    rep.parameters = model.parameters().scalar_count();
    rep.parameters_expected = count_parameters(config);

    NoGradGuard no_grad;
    std::uint64_t kept_total = 0;
    for (const auto& scene : probe) {
        reset_mac_tally();
        const ForwardResult r = model.forward(scene);
        rep.measured_total += mac_tally();
        std::uint64_t kept = 0;
        for (auto k : r.pruned.k_star) kept += k;
        kept_total += kept;
        const MacBreakdown b = count_macs(config, agents, kept);
        rep.analytic_total += b.total();
        rep.neighbor_attention_total += b.rt_attention_neighbor;
        rep.neighbor_attention_dense_total += b.rt_attention_neighbor_dense;
    }
    rep.mean_k_star = scenes && agents ? static_cast<double>(kept_total) / static_cast<double>(scenes * agents) : 0.0;
    const auto mean_kept =
        static_cast<std::uint64_t>(std::llround(rep.mean_k_star * static_cast<double>(agents)));
    rep.analytic = count_macs(config, agents, mean_kept);
    return rep;
}

std::string macs_csv(const MacReport& rep) {
    std::string out = "item,value\n";
    for (const auto& [name, v] : rep.analytic.rows()) out += name + "," + std::to_string(v) + "\n";
    out += "agents," + std::to_string(rep.agents) + "\n";
    out += "mean_k_star," + fmt(rep.mean_k_star) + "\n";
    const double dense = static_cast<double>(rep.neighbor_attention_dense_total);
    out += "rt_attention_neighbor_ratio," +
           fmt(dense > 0.0 ? static_cast<double>(rep.neighbor_attention_total) / dense : 0.0) + "\n";
    out += "measured_total_over_probe," + std::to_string(rep.measured_total) + "\n";
    out += "analytic_total_over_probe," + std::to_string(rep.analytic_total) + "\n";
    out += "parameters," + std::to_string(rep.parameters) + "\n";
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

void cmd_train(const RunConfig& config) {
    config.validate();
    const Splits splits = load_splits(config.data, config.train.seed);
    std::filesystem::create_directories(config.output_dir);
    const auto ckpt = config.output_dir / "checkpoint.artc";
    const auto csv = config.output_dir / "loss.csv";

    ArtModel model(config.model);
    std::vector<EpochRecord> history;
    save_checkpoint(ckpt, config, model.parameters());
    write_text(csv, loss_csv(history));
    train_model(model, splits, config.train, [&](const EpochRecord& rec) {
        history.push_back(rec);
        save_checkpoint(ckpt, config, model.parameters());
        write_text(csv, loss_csv(history));
        std::printf("epoch %zu  loss %.5f  val minADE %.4f  minFDE %.4f\n", rec.epoch, rec.train_loss, rec.val_min_ade,
                    rec.val_min_fde);
        std::fflush(stdout);
    });
    std::printf("wrote %s and %s\n", ckpt.string().c_str(), csv.string().c_str());
}

void cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, bool baseline) {
    config.validate();
    const Splits splits = load_splits(config.data, config.train.seed);
    head::MetricReport report;
    std::filesystem::path out;
    if (baseline) {
        report = evaluate_baseline(splits.val, config.data.t_f);
        out = config.output_dir / "metrics_baseline.csv";
    } else {
        const ArtModel model = load_model(config, checkpoint);
        report = evaluate(model, splits.val).report;
        out = config.output_dir / "metrics.csv";
    }
    write_text(out, report.to_csv());
    std::printf("minADE %.4f  minFDE %.4f  (k=%zu, %zu scenes) -> %s\n", report.min_ade, report.min_fde,
                report.k_used, report.per_scene.size(), out.string().c_str());
}

void cmd_sweep_p(const RunConfig& config, const std::filesystem::path& checkpoint) {
    config.validate();
    if (config.sweep_p.empty()) throw ConfigError("sweep.p_values is empty");
    const Splits splits = load_splits(config.data, config.train.seed);
    std::vector<SweepRow> rows;
    if (config.sweep_retrain) {
        rows = sweep_retrain(config, splits);
    } else {
        const ArtModel model = load_model(config, checkpoint);
        rows = sweep_inference(model, splits.val, config.sweep_p);
    }
    write_text(config.output_dir / "sweep_p.csv", sweep_csv(rows));
    write_text(config.output_dir / "sweep_p.svg", sweep_svg(rows));
    std::fputs(sweep_csv(rows).c_str(), stdout);
}

void cmd_macs(const RunConfig& config) {
    config.validate();
    const auto kind = is_synthetic(config.data) ? data::parse_synthetic_kind(config.data.source.substr(10))
                                                : data::SyntheticKind::crossing;
    const MacReport rep = measure_macs(config.model, config.data.agents, 20, kind);
    const std::string csv = macs_csv(rep);
    write_text(config.output_dir / "macs.csv", csv);
    std::fputs(csv.c_str(), stdout);
}

void cmd_viz_attention(const RunConfig& config, const std::filesystem::path& checkpoint, std::size_t scene_index,
                       std::size_t i, std::size_t j) {
    config.validate();
    const Splits splits = load_splits(config.data, config.train.seed);
    if (scene_index >= splits.val.size()) {
        throw std::out_of_range("scene " + std::to_string(scene_index) + " out of range (" +
                                std::to_string(splits.val.size()) + " validation scenes)");
    }
    const bool trained = std::filesystem::exists(checkpoint);
    if (!trained) std::fprintf(stderr, "no checkpoint at %s; using the initialized model\n", checkpoint.string().c_str());
    const ArtModel model = trained ? load_model(config, checkpoint) : ArtModel(config.model);
    const AttentionTrace tr = attention_trace(model, splits.val[scene_index], i, j);
    const std::string stem =
        "attention_" + std::to_string(scene_index) + "_" + std::to_string(i) + "_" + std::to_string(j);
    write_text(config.output_dir / (stem + ".csv"), attention_csv(tr));
    write_text(config.output_dir / (stem + ".svg"), attention_svg(tr, i, j));
    std::printf("wrote %s.{csv,svg}\n", (config.output_dir / stem).string().c_str());
}

}  // namespace art::harness
