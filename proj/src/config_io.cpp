// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "projcomp/data.hpp"

namespace projcomp {

namespace {

void expect_keys(const Json& j, std::initializer_list<const char*> keys, const char* what) {
    if (!j.is_object()) {
        throw ConfigError(std::string(what) + ": expected an object");
    }
    std::set<std::string> allowed;
    for (const char* k : keys) {
        allowed.insert(k);
        if (!j.contains(k)) {
            throw ConfigError(std::string(what) + ": missing key '" + k + "'");
        }
    }
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) {
            throw ConfigError(std::string(what) + ": unknown key '" + k + "'");
        }
    }
}

template <typename T>
T get(const Json& j, const char* key, const char* what) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(what) + ": bad value for '" + key + "': " + e.what());
    }
}

std::uint64_t get_u64(const Json& j, const char* key, const char* what) {
    const Json& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError(std::string(what) + ": '" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

double get_double(const Json& j, const char* key, const char* what) {
    const Json& v = j.at(key);
    if (!v.is_number()) {
        throw ConfigError(std::string(what) + ": '" + key + "' must be a number");
    }
    return v.get<double>();
}

}  // namespace

Json to_json(const ModelConfig& c) {
    return Json{{"n_layers", c.n_layers},     {"n_heads", c.n_heads},
                {"d_model", c.d_model},       {"d_ff", c.d_ff},
                {"vocab_size", c.vocab_size}, {"seq_len", c.seq_len},
                {"layer_norm_eps", c.layer_norm_eps}, {"tied_embeddings", c.tied_embeddings}};
}

ModelConfig model_config_from_json(const Json& j) {
    const char* w = "model config";
    expect_keys(j, {"n_layers", "n_heads", "d_model", "d_ff", "vocab_size", "seq_len",
                    "layer_norm_eps", "tied_embeddings"},
                w);
    ModelConfig c;
    c.n_layers = get_u64(j, "n_layers", w);
    c.n_heads = get_u64(j, "n_heads", w);
    c.d_model = get_u64(j, "d_model", w);
    c.d_ff = get_u64(j, "d_ff", w);
    c.vocab_size = get_u64(j, "vocab_size", w);
    c.seq_len = get_u64(j, "seq_len", w);
    c.layer_norm_eps = get_double(j, "layer_norm_eps", w);
    c.tied_embeddings = get<bool>(j, "tied_embeddings", w);
    c.validate();
    return c;
}

Json to_json(const TrainConfig& c) {
    return Json{{"steps", c.steps},
                {"batch_size", c.batch_size},
                {"seq_len", c.seq_len},
                {"learning_rate", c.learning_rate},
                {"warmup_steps", c.warmup_steps},
                {"schedule", to_string(c.schedule)},
                {"final_lr_fraction", c.final_lr_fraction},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"weight_decay", c.weight_decay},
                {"grad_clip_norm", c.grad_clip_norm},
                {"seed", c.seed},
                {"loss_window", c.loss_window}};
}

TrainConfig train_config_from_json(const Json& j) {
    const char* w = "train config";
    expect_keys(j, {"steps", "batch_size", "seq_len", "learning_rate", "warmup_steps", "schedule",
                    "final_lr_fraction", "adam_beta1", "adam_beta2", "adam_eps", "weight_decay",
                    "grad_clip_norm", "seed", "loss_window"},
                w);
    TrainConfig c;
    c.steps = get_u64(j, "steps", w);
    c.batch_size = get_u64(j, "batch_size", w);
    c.seq_len = get_u64(j, "seq_len", w);
    c.learning_rate = get_double(j, "learning_rate", w);
    c.warmup_steps = get_u64(j, "warmup_steps", w);
    c.schedule = parse_lr_schedule(get<std::string>(j, "schedule", w));
    c.final_lr_fraction = get_double(j, "final_lr_fraction", w);
    c.adam_beta1 = get_double(j, "adam_beta1", w);
    c.adam_beta2 = get_double(j, "adam_beta2", w);
    c.adam_eps = get_double(j, "adam_eps", w);
    c.weight_decay = get_double(j, "weight_decay", w);
    c.grad_clip_norm = get_double(j, "grad_clip_norm", w);
    c.seed = get_u64(j, "seed", w);
    c.loss_window = get_u64(j, "loss_window", w);
    c.validate();
    return c;
}

Json to_json(const KeptIndexSet& k) {
    return Json{{"original_dim", k.original_dim}, {"indices", k.indices}};
}

KeptIndexSet kept_from_json(const Json& j) {
    const char* w = "kept index set";
    expect_keys(j, {"original_dim", "indices"}, w);
    KeptIndexSet k;
    k.original_dim = get_u64(j, "original_dim", w);
    k.indices = get<std::vector<std::size_t>>(j, "indices", w);
    k.validate();
    return k;
}

Json to_json(const CompressionPlan& p) {
    Json ffn = Json::array();
    for (const auto& k : p.ffn_kept) {
        ffn.push_back(to_json(k));
    }
    Json sites = Json::array();
    for (const auto& [name, sides] : p.site_map) {
        sites.push_back(Json{{"param", name.str()}, {"sides", to_string(sides)}});
    }
    return Json{{"source_config", to_json(p.source_config)},
                {"target_config", to_json(p.target_config)},
                {"compression_level", p.compression_level},
                {"importance", to_string(p.importance)},
                {"importance_seed", p.importance_seed},
                {"width_kept", to_json(p.width_kept)},
                {"ffn_kept", ffn},
                {"site_map", sites},
                {"achieved", Json{{"width_ratio", p.width_ratio()},
                                  {"ffn_ratio", p.ffn_ratio()},
                                  {"param_reduction", p.param_reduction()},
                                  {"source_params", count_params(p.source_config)},
                                  {"target_params", count_params(p.target_config)}}}};
}

CompressionPlan plan_from_json(const Json& j) {
    const char* w = "plan";
    expect_keys(j, {"source_config", "target_config", "compression_level", "importance",
                    "importance_seed", "width_kept", "ffn_kept", "site_map", "achieved"},
                w);
    CompressionPlan p;
    p.source_config = model_config_from_json(j.at("source_config"));
    p.target_config = model_config_from_json(j.at("target_config"));
    p.compression_level = get_double(j, "compression_level", w);
    p.importance = parse_importance_method(get<std::string>(j, "importance", w));
    p.importance_seed = get_u64(j, "importance_seed", w);
    p.width_kept = kept_from_json(j.at("width_kept"));
    if (!j.at("ffn_kept").is_array() || !j.at("site_map").is_array()) {
        throw ConfigError("plan: ffn_kept and site_map must be arrays");
    }
    for (const auto& k : j.at("ffn_kept")) {
        p.ffn_kept.push_back(kept_from_json(k));
    }
    for (const auto& s : j.at("site_map")) {
        expect_keys(s, {"param", "sides"}, "site map entry");
        p.site_map.emplace_back(ParamName::parse(s.at("param").get<std::string>()),
                                parse_sides(s.at("sides").get<std::string>()));
    }
    p.validate();
    // "achieved" is derived; reject manifests whose summary disagrees with the plan.
    const Json& achieved = j.at("achieved");
    if (!achieved.is_object() || !achieved.contains("target_params") ||
        achieved.at("target_params") != count_params(p.target_config)) {
        throw ConfigError("plan: 'achieved' summary does not match the target config");
    }
    return p;
}

Json to_json(const TrainReport& r) {
    return Json{{"train_config", to_json(r.config)},
                {"steps", r.steps},
                {"tokens", r.tokens},
                {"first_loss", r.losses.empty() ? 0.0 : r.losses.front()},
                {"last_window_mean", r.last_window_mean},
                {"trainable_params", r.trainable_params},
                {"frozen_params", r.frozen_params},
                {"moment_tensors", r.moment_tensors},
                {"step_forward_flops", r.step_forward_flops},
                {"step_backward_flops", r.step_backward_flops},
                {"data_hash", r.data_hash},
                {"kernel_isa", r.kernel_isa}};
}

Json to_json(const ComparisonReport& r) {
    return Json{{"compression_level", r.compression_level},
                {"importance", r.importance},
                {"pc", to_json(r.pc)},
                {"hpr", to_json(r.hpr)},
                {"margin_pc_minus_hpr", r.margin},
                {"step0_margin", r.step0_margin},
                {"same_batches", r.same_batches}};
}

std::string to_string(CompressionMethod method) {
    return method == CompressionMethod::pc ? "pc" : "hpr";
}

CompressionMethod parse_compression_method(const std::string& text) {
    if (text == "pc") return CompressionMethod::pc;
    if (text == "hpr") return CompressionMethod::hpr;
    throw ConfigError("unknown method '" + text + "' (expected pc|hpr)");
}

double parse_compression_level(const std::string& text) {
    std::string t = text;
    if (!t.empty() && t.back() == '%') {
        t.pop_back();
    }
    if (t == "35") return 0.35;
    if (t == "50") return 0.5;
    if (t == "65") return 0.65;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ConfigError("invalid compression level '" + text + "'");
    }
    if (used != t.size() || !(v >= 0.0 && v < 1.0)) {
        throw ConfigError("compression level must be a fraction in [0, 1) or 35|50|65, got '" +
                          text + "'");
    }
    return v;
}

Json to_json(const ExperimentConfig& c) {
    return Json{{"command", c.command},
                {"model", to_json(c.model)},
                {"init_seed", c.init_seed},
                {"train", to_json(c.train)},
                {"method", to_string(c.method)},
                {"compression_level", c.compression_level},
                {"importance", to_string(c.importance)},
                {"importance_seed", c.importance_seed},
                {"with_residual", c.with_residual},
                {"corpus", c.corpus},
                {"input", c.input},
                {"output", c.output},
                {"resume", c.resume},
                {"eval_batches", c.eval_batches},
                {"flops_batches", c.flops_batches}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    const char* w = "experiment config";
    expect_keys(j, {"command", "model", "init_seed", "train", "method", "compression_level",
                    "importance", "importance_seed", "with_residual", "corpus", "input", "output",
                    "resume", "eval_batches", "flops_batches"},
                w);
    ExperimentConfig c;
    c.command = get<std::string>(j, "command", w);
    c.model = model_config_from_json(j.at("model"));
    c.init_seed = get_u64(j, "init_seed", w);
    c.train = train_config_from_json(j.at("train"));
    c.method = parse_compression_method(get<std::string>(j, "method", w));
    c.compression_level = get_double(j, "compression_level", w);
    c.importance = parse_importance_method(get<std::string>(j, "importance", w));
    c.importance_seed = get_u64(j, "importance_seed", w);
    c.with_residual = get<bool>(j, "with_residual", w);
    c.corpus = get<std::string>(j, "corpus", w);
    c.input = get<std::string>(j, "input", w);
    c.output = get<std::string>(j, "output", w);
    c.resume = get<bool>(j, "resume", w);
    c.eval_batches = get_u64(j, "eval_batches", w);
    c.flops_batches = get<std::vector<std::uint64_t>>(j, "flops_batches", w);
    return c;
}

Json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_file_bytes(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace projcomp
