// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#include "projcomp/checkpoint.hpp"
#include "projcomp/data.hpp"
#include "projcomp/flops.hpp"
#include "projcomp/hard_pruning.hpp"
#include "projcomp/kernels/kernels.hpp"

namespace projcomp {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string side_path(const std::string& output, const char* suffix) { return output + suffix; }

void write_loss_csv(const std::string& path, const std::vector<double>& losses, std::uint64_t first_step) {
    std::string text = "step,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        text += std::to_string(first_step + i) + "," + fmt(losses[i]) + "\n";
    }
    write_text_atomic(path, text);
}

std::vector<TokenId> load_corpus(const std::string& path) {
    if (path.empty()) {
        throw ConfigError("a corpus file is required (--corpus)");
    }
    return tokenize(read_file_bytes(path));
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) {
        throw ConfigError(std::string("missing required ") + flag);
    }
}

void write_resolved(const ExperimentConfig& c) {
    write_json_file(side_path(c.output, ".config.json"), to_json(c));
}

TrainReport train_and_save(LanguageModel& model, const ExperimentConfig& c,
                           std::optional<TrainState> resume_state,
                           const std::function<Checkpoint()>& snapshot, std::ostream& out) {
    TokenStream stream(load_corpus(c.corpus), c.train.seq_len, c.train.seed);
    const std::uint64_t first = resume_state ? resume_state->step + 1 : 1;
    Trainer trainer = resume_state ? Trainer(model, stream, c.train, std::move(*resume_state))
                                   : Trainer(model, stream, c.train);
    const std::uint64_t every = std::max<std::uint64_t>(1, c.train.steps / 10);
    TrainReport report = trainer.run([&](std::uint64_t step, double loss) {
        if (step % every == 0 || step == c.train.steps) {
            out << "step " << step << " loss " << fmt(loss) << "\n";
        }
    });
    Checkpoint ckpt = snapshot();
    ckpt.train_config = c.train;
    ckpt.train_state = trainer.state();
    save_checkpoint(ckpt, c.output);
    write_loss_csv(side_path(c.output, ".losses.csv"), report.losses, first);
    write_json_file(side_path(c.output, ".report.json"), to_json(report));
    out << "last-" << c.train.loss_window << " mean loss " << fmt(report.last_window_mean) << "\n";
    return report;
}

void cmd_pretrain(const ExperimentConfig& c, std::ostream& out) {
    require(c.output, "--out");
    DenseModel model(c.model, init_weights(c.model, c.init_seed));
    out << "pretraining " << count_params(c.model) << " parameters for " << c.train.steps
        << " steps\n";
    train_and_save(model, c, std::nullopt,
                   [&] { return make_checkpoint(model.config(), model.weights()); }, out);
}

void cmd_compress(const ExperimentConfig& c, std::ostream& out) {
    require(c.input, "--input");
    require(c.output, "--out");
    const Checkpoint src = load_checkpoint(c.input);
    const TransformerWeights base = dense_weights(src);
    const CompressionPlan plan =
        plan_from_model(base, src.config, c.compression_level, c.importance, c.importance_seed);
    if (c.method == CompressionMethod::pc) {
        const ProjectedModel pm = attach_projections(base, plan, c.with_residual);
        save_checkpoint(make_checkpoint(pm), c.output);
    } else {
        auto [cfg, weights] = hard_prune(base, plan);
        save_checkpoint(make_checkpoint(cfg, weights), c.output);
    }
    write_json_file(side_path(c.output, ".plan.json"), to_json(plan));
    out << to_string(c.method) << ": d_model " << plan.source_config.d_model << " -> "
        << plan.target_config.d_model << ", d_ff " << plan.source_config.d_ff << " -> "
        << plan.target_config.d_ff << ", " << count_params(plan.target_config)
        << " parameters after compression\n";
}

void cmd_train(const ExperimentConfig& c, std::ostream& out) {
    require(c.input, "--input");
    require(c.output, "--out");
    const Checkpoint src = load_checkpoint(c.input);
    std::optional<TrainState> state;
    if (c.resume) {
        if (!src.train_state || !src.train_config) {
            throw ConfigError("--resume: " + c.input + " holds no training state");
        }
        TrainConfig stored = *src.train_config;
        stored.steps = c.train.steps;
        if (!(stored == c.train)) {
            throw ConfigError("--resume: training config differs from the one stored in " + c.input);
        }
        state = *src.train_state;
    }
    if (src.kind == CheckpointKind::projected) {
        ProjectedModel model = projected_model(src);
        train_and_save(model, c, std::move(state), [&] { return make_checkpoint(model); }, out);
    } else {
        TransformerWeights w = dense_weights(src);
        w.set_requires_grad(src.config, true);
        DenseModel model(src.config, std::move(w));
        train_and_save(model, c, std::move(state),
                       [&] { return make_checkpoint(model.config(), model.weights()); }, out);
    }
}

void cmd_eval(const ExperimentConfig& c, std::ostream& out) {
    require(c.input, "--input");
    const Checkpoint src = load_checkpoint(c.input);
    TokenStream stream(load_corpus(c.corpus), c.train.seq_len, c.train.seed);
    double loss = 0.0;
    if (src.kind == CheckpointKind::projected) {
        ProjectedModel model = projected_model(src);
        loss = evaluate(model, stream, c.eval_batches, c.train.batch_size);
    } else {
        DenseModel model(src.config, dense_weights(src));
        loss = evaluate(model, stream, c.eval_batches, c.train.batch_size);
    }
    out << "eval loss " << fmt(loss) << "\n";
    if (!c.output.empty()) {
        write_json_file(c.output, Json{{"input", c.input}, {"loss", loss},
                                       {"batches", c.eval_batches},
                                       {"batch_size", c.train.batch_size},
                                       {"seq_len", c.train.seq_len}, {"seed", c.train.seed}});
    }
}

void cmd_export(const ExperimentConfig& c, std::ostream& out) {
    require(c.input, "--input");
    require(c.output, "--out");
    const ProjectedModel model = projected_model(load_checkpoint(c.input));
    auto [cfg, weights] = export_compressed(model);
    save_checkpoint(make_checkpoint(cfg, weights), c.output);
    out << "exported " << count_params(cfg) << " parameters\n";
}

void cmd_compare(const ExperimentConfig& c, std::ostream& out) {
    require(c.input, "--input");
    require(c.output, "--out");
    const Checkpoint src = load_checkpoint(c.input);
    const TransformerWeights base = dense_weights(src);
    const CompressionPlan plan =
        plan_from_model(base, src.config, c.compression_level, c.importance, c.importance_seed);
    const ComparisonReport r =
        compare_pipelines(base, plan, load_corpus(c.corpus), c.train, c.with_residual);
    std::string csv = "step,pc_loss,hpr_loss\n";
    for (std::size_t i = 0; i < r.pc.losses.size(); ++i) {
        csv += std::to_string(i + 1) + "," + fmt(r.pc.losses[i]) + "," + fmt(r.hpr.losses[i]) + "\n";
    }
    write_text_atomic(side_path(c.output, ".losses.csv"), csv);
    write_json_file(side_path(c.output, ".comparison.json"), to_json(r));
    write_json_file(side_path(c.output, ".plan.json"), to_json(plan));
    out << "pc  last-" << c.train.loss_window << " " << fmt(r.pc.last_window_mean) << "\n"
        << "hpr last-" << c.train.loss_window << " " << fmt(r.hpr.last_window_mean) << "\n"
        << "margin (pc - hpr) " << fmt(r.margin) << "\n";
}

void cmd_flops(const ExperimentConfig& c, std::ostream& out) {
    require(c.output, "--out");
    ModelConfig config = c.model;
    TransformerWeights weights;
    if (!c.input.empty()) {
        const Checkpoint src = load_checkpoint(c.input);
        config = src.config;
        weights = dense_weights(src);
    } else {
        weights = TransformerWeights::zeros(config);
    }
    // Only the kept dimensions matter for the counts, so magnitude scores of
    // placeholder weights are fine.
    const CompressionPlan plan =
        plan_from_model(weights, config, c.compression_level, c.importance, c.importance_seed);
    std::vector<std::uint64_t> batches = c.flops_batches;
    if (batches.empty()) {
        batches = {1, 4, 16, 64, 256, 1024, 4096};
    }
    std::string csv = "batch,seq,tokens,overhead,compressed_forward,base_forward,overhead_fraction\n";
    Json rows = Json::array();
    for (std::uint64_t b : batches) {
        const FlopsBreakdown r = parity_report(plan, b, c.train.seq_len);
        csv += std::to_string(b) + "," + std::to_string(r.seq) + "," + std::to_string(b * r.seq) + "," +
               std::to_string(r.overhead) + "," + std::to_string(r.compressed_forward) + "," +
               std::to_string(r.base_forward) + "," + fmt(r.overhead_fraction) + "\n";
        rows.push_back(Json::parse(to_json(r)));
        out << "batch " << b << ": overhead fraction " << fmt(r.overhead_fraction)
            << (r.parity ? ", parity ok" : ", PARITY BROKEN") << "\n";
    }
    write_text_atomic(side_path(c.output, ".flops.csv"), csv);
    write_json_file(side_path(c.output, ".flops.json"), rows);
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const FormatError*>(&e)) return kExitFormat;
    if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
    if (dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const IndexError*>(&e)) {
        return kExitShape;
    }
    return kExitInternal;
}

const char* category_for(int code) {
    switch (code) {
        case kExitConfig: return "config error";
        case kExitIo: return "io error";
        case kExitFormat: return "format error";
        case kExitNumeric: return "numeric error";
        case kExitShape: return "shape error";
        default: return "internal error";
    }
}

// Flags that override a base TrainConfig only when given.
struct TrainFlags {
    std::optional<std::size_t> steps, batch_size, seq_len, warmup, loss_window;
    std::optional<double> lr, final_lr_fraction, beta1, beta2, eps, weight_decay, grad_clip;
    std::optional<std::string> schedule;
    std::optional<std::uint64_t> data_seed;

    void add(CLI::App* app) {
        app->add_option("--steps", steps, "Optimizer steps");
        app->add_option("--batch-size", batch_size, "Sequences per step");
        app->add_option("--seq-len", seq_len, "Tokens per sequence");
        app->add_option("--lr", lr, "Peak learning rate");
        app->add_option("--warmup", warmup, "Linear warmup steps");
        app->add_option("--schedule", schedule, "constant | cosine");
        app->add_option("--final-lr-fraction", final_lr_fraction, "Cosine floor as a fraction of --lr");
        app->add_option("--beta1", beta1);
        app->add_option("--beta2", beta2);
        app->add_option("--adam-eps", eps);
        app->add_option("--weight-decay", weight_decay, "Decoupled decay on matrix parameters");
        app->add_option("--grad-clip", grad_clip, "Global gradient norm limit (0 disables)");
        app->add_option("--data-seed", data_seed, "Batch order seed");
        app->add_option("--loss-window", loss_window, "Steps in the reported tail average");
    }

    void apply(TrainConfig& c) const {
        if (steps) c.steps = *steps;
        if (batch_size) c.batch_size = *batch_size;
        if (seq_len) c.seq_len = *seq_len;
        if (warmup) c.warmup_steps = *warmup;
        if (loss_window) c.loss_window = *loss_window;
        if (lr) c.learning_rate = *lr;
        if (final_lr_fraction) c.final_lr_fraction = *final_lr_fraction;
        if (beta1) c.adam_beta1 = *beta1;
        if (beta2) c.adam_beta2 = *beta2;
        if (eps) c.adam_eps = *eps;
        if (weight_decay) c.weight_decay = *weight_decay;
        if (grad_clip) c.grad_clip_norm = *grad_clip;
        if (schedule) c.schedule = parse_lr_schedule(*schedule);
        if (data_seed) c.seed = *data_seed;
    }
};

struct ModelFlags {
    std::optional<std::size_t> layers, heads, d_model, d_ff, seq_len;
    bool untied = false;

    void add(CLI::App* app) {
        app->add_option("--layers", layers, "Transformer blocks");
        app->add_option("--heads", heads, "Attention heads");
        app->add_option("--d-model", d_model, "Model width");
        app->add_option("--d-ff", d_ff, "Feed-forward hidden size");
        app->add_option("--context", seq_len, "Maximum context length (default: --seq-len)");
        app->add_flag("--untied", untied, "Separate output head");
    }

    void apply(ModelConfig& m, std::size_t train_seq) const {
        if (layers) m.n_layers = *layers;
        if (heads) m.n_heads = *heads;
        if (d_model) m.d_model = *d_model;
        if (d_ff) m.d_ff = *d_ff;
        m.seq_len = seq_len ? *seq_len : train_seq;
        m.tied_embeddings = !untied;
        m.validate();
    }
};

}  // namespace

void run_experiment(const ExperimentConfig& c, std::ostream& out) {
    if (c.command == "pretrain") {
        cmd_pretrain(c, out);
    } else if (c.command == "compress") {
        cmd_compress(c, out);
    } else if (c.command == "train") {
        cmd_train(c, out);
    } else if (c.command == "eval") {
        cmd_eval(c, out);
    } else if (c.command == "compare") {
        cmd_compare(c, out);
    } else if (c.command == "flops") {
        cmd_flops(c, out);
    } else if (c.command == "export") {
        cmd_export(c, out);
    } else {
        throw ConfigError("unknown command '" + c.command + "'");
    }
    if (!c.output.empty()) {
        write_resolved(c);
    }
}

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Projected compression and hard pruning for small GPT models", "projcomp"};
    app.require_subcommand(0, 1);

    ExperimentConfig cfg;
    TrainFlags train_flags;
    ModelFlags model_flags;
    std::string level = "0.5", method = "pc", importance = "magnitude", isa, config_path;
    bool no_residual = false;

    app.add_option("--isa", isa, "Kernel variant: scalar | avx2 (default: best available)");

    auto* pretrain = app.add_subcommand("pretrain", "Train a dense model from scratch");
    model_flags.add(pretrain);
    train_flags.add(pretrain);
    pretrain->add_option("--init-seed", cfg.init_seed, "Weight init seed");
    pretrain->add_option("--corpus", cfg.corpus, "Training text file")->required();
    pretrain->add_option("--out", cfg.output, "Output checkpoint")->required();

    auto* compress = app.add_subcommand("compress", "Compress a dense checkpoint with PC or HPR");
    compress->add_option("--input", cfg.input, "Dense base checkpoint")->required();
    compress->add_option("--method", method, "pc | hpr");
    compress->add_option("--level", level, "Fraction removed, or preset 35 | 50 | 65");
    compress->add_option("--importance", importance, "magnitude | random");
    compress->add_option("--importance-seed", cfg.importance_seed, "Seed for random importance");
    compress->add_flag("--no-residual", no_residual, "PC without the residual term");
    compress->add_option("--out", cfg.output, "Output checkpoint")->required();

    auto* train = app.add_subcommand("train", "Continue training a dense or projected checkpoint");
    train->add_option("--input", cfg.input, "Checkpoint to train")->required();
    train_flags.add(train);
    train->add_flag("--resume", cfg.resume, "Continue from the optimizer state stored in --input");
    train->add_option("--corpus", cfg.corpus, "Training text file")->required();
    train->add_option("--out", cfg.output, "Output checkpoint")->required();

    auto* eval = app.add_subcommand("eval", "Mean cross-entropy of a checkpoint");
    eval->add_option("--input", cfg.input, "Checkpoint")->required();
    eval->add_option("--corpus", cfg.corpus, "Evaluation text file")->required();
    eval->add_option("--batches", cfg.eval_batches, "Number of batches");
    train_flags.add(eval);
    eval->add_option("--out", cfg.output, "Optional JSON result file");

    auto* compare = app.add_subcommand("compare", "Train PC and HPR arms on identical batches");
    compare->add_option("--input", cfg.input, "Dense base checkpoint")->required();
    compare->add_option("--level", level, "Fraction removed, or preset 35 | 50 | 65");
    compare->add_option("--importance", importance, "magnitude | random");
    compare->add_option("--importance-seed", cfg.importance_seed, "Seed for random importance");
    compare->add_flag("--no-residual", no_residual, "PC without the residual term");
    train_flags.add(compare);
    compare->add_option("--corpus", cfg.corpus, "Training text file")->required();
    compare->add_option("--out", cfg.output, "Output prefix")->required();

    auto* flops = app.add_subcommand("flops", "Analytic FLOPs parity and overhead report");
    flops->add_option("--input", cfg.input, "Dense checkpoint (default: model flags)");
    model_flags.add(flops);
    flops->add_option("--seq-len", train_flags.seq_len, "Tokens per sequence");
    flops->add_option("--level", level, "Fraction removed, or preset 35 | 50 | 65");
    flops->add_option("--batches", cfg.flops_batches, "Batch sizes to tabulate");
    flops->add_option("--out", cfg.output, "Output prefix")->required();

    auto* exp = app.add_subcommand("export", "Write a projected checkpoint as a plain dense model");
    exp->add_option("--input", cfg.input, "Projected checkpoint")->required();
    exp->add_option("--out", cfg.output, "Output checkpoint")->required();

    auto* run = app.add_subcommand("run", "Re-run an emitted experiment config");
    run->add_option("--config", config_path, "Path to a *.config.json file")->required();

    if (argc <= 1) {
        err << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (app.get_subcommands().empty()) {
        err << app.help();
        return kExitUsage;
    }

    try {
        if (!isa.empty()) {
            kernels::set_active_isa(kernels::parse_isa(isa));
        }
        CLI::App* sub = app.get_subcommands().front();
        if (sub == run) {
            const ExperimentConfig loaded = experiment_config_from_json(read_json_file(config_path));
            run_experiment(loaded, out);
            return kExitOk;
        }
        cfg.command = sub->get_name();
        if (sub == train && cfg.resume) {
            const Checkpoint src = load_checkpoint(cfg.input);
            if (src.train_config) {
                cfg.train = *src.train_config;
            }
        }
        if (sub == pretrain || sub == flops) {
            train_flags.apply(cfg.train);
            model_flags.apply(cfg.model, cfg.train.seq_len);
        } else {
            train_flags.apply(cfg.train);
        }
        cfg.train.validate();
        cfg.method = parse_compression_method(method);
        cfg.compression_level = parse_compression_level(level);
        cfg.importance = parse_importance_method(importance);
        cfg.with_residual = !no_residual;
        run_experiment(cfg, out);
        return kExitOk;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        err << category_for(code) << ": " << e.what() << "\n";
        return code;
    }
}

}  // namespace projcomp
