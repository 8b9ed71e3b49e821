// art: train, evaluate and inspect the trajectory predictor.

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "art/errors.hpp"
#include "art/harness.hpp"

using namespace art;

int main(int argc, char** argv) {
    CLI::App app{"Trajectory prediction with temporal relation graphs and adaptive pruning"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string checkpoint;
    bool baseline = false;
    std::size_t scene = 0, agent_i = 0, agent_j = 1;
    std::string p_list;
    std::vector<std::size_t> pair;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file");
        cmd->add_option("--set", overrides, "override key=value (repeatable)")->take_all();
    };
    auto with_checkpoint = [&](CLI::App* cmd) {
        cmd->add_option("--checkpoint", checkpoint, "checkpoint file (default <output.dir>/checkpoint.artc)");
    };

    auto* train = app.add_subcommand("train", "train a model, writing a checkpoint and loss.csv");
    common(train);
    auto* eval = app.add_subcommand("eval", "minADE / minFDE on the validation split");
    common(eval);
    with_checkpoint(eval);
    eval->add_flag("--baseline", baseline, "evaluate the constant-velocity baseline instead of a model");
    auto* sweep = app.add_subcommand("sweep-p", "metrics and mean k* across top-p thresholds");
    common(sweep);
    with_checkpoint(sweep);
    sweep->add_option("--p", p_list, "comma-separated p values (overrides sweep.p_values)");
    sweep->add_flag("--retrain", "train a fresh model per p instead of varying p at inference");
    auto* macs = app.add_subcommand("macs", "analytic and measured multiply-accumulate counts");
    common(macs);
    auto* viz = app.add_subcommand("viz-attention", "per-step attention of one agent pair");
    common(viz);
    with_checkpoint(viz);
    viz->add_option("--scene", scene, "validation scene index");
    viz->add_option("--pair", pair, "agent indices i j (default 0 1)")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        harness::RunConfig config = config_path.empty() ? harness::RunConfig{} : harness::load_config(config_path);
        for (const auto& o : overrides) harness::apply_override(config, o);
        if (sweep->count("--p")) config.set("sweep.p_values", p_list);
        if (sweep->count("--retrain")) config.sweep_retrain = true;
        const auto ckpt = checkpoint.empty() ? config.output_dir / "checkpoint.artc" : std::filesystem::path(checkpoint);

        if (*train) {
            harness::cmd_train(config);
        } else if (*eval) {
            harness::cmd_eval(config, ckpt, baseline);
        } else if (*sweep) {
            harness::cmd_sweep_p(config, ckpt);
        } else if (*macs) {
            harness::cmd_macs(config);
        } else if (*viz) {
            if (pair.size() == 2) {
                agent_i = pair[0];
                agent_j = pair[1];
            }
            harness::cmd_viz_attention(config, ckpt, scene, agent_i, agent_j);
        }
    } catch (const IncompatibilityError& e) {
        std::fprintf(stderr, "incompatible: %s\n", e.what());
        return 3;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "index error: %s\n", e.what());
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
