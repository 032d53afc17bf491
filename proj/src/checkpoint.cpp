// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include "projcomp/config_io.hpp"
#include "projcomp/data.hpp"

namespace projcomp {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as native little-endian doubles");

namespace {

constexpr char kMagic[8] = {'P', 'R', 'O', 'J', 'C', 'K', 'P', 'T'};
constexpr std::size_t kPreamble = 24;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    }
    return v;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string kind_name(CheckpointKind k) { return k == CheckpointKind::dense ? "dense" : "projected"; }

CheckpointKind parse_kind(const std::string& s) {
    if (s == "dense") return CheckpointKind::dense;
    if (s == "projected") return CheckpointKind::projected;
    throw FormatError("unknown checkpoint kind '" + s + "'");
}

void append_tensor(std::string& payload, const Tensor& t) {
    const auto d = t.data();
    const std::size_t bytes = d.size() * sizeof(double);
    const std::size_t at = payload.size();
    payload.resize(at + bytes);
    std::memcpy(payload.data() + at, d.data(), bytes);
}

Tensor read_tensor(const std::string& bytes, std::size_t& pos, const Shape& shape) {
    const std::size_t n = shape_numel(shape);
    if (pos + n * sizeof(double) > bytes.size()) {
        throw FormatError("checkpoint payload is truncated");
    }
    std::vector<double> v(n);
    std::memcpy(v.data(), bytes.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return Tensor::from_data(shape, std::move(v));
}

Shape shape_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) {
        throw FormatError("tensor shape must be a non-empty array");
    }
    Shape s;
    for (const auto& d : j) {
        if (!d.is_number_unsigned() || d.get<std::uint64_t>() == 0) {
            throw FormatError("tensor dimensions must be positive integers");
        }
        s.push_back(d.get<std::size_t>());
    }
    return s;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

Checkpoint make_checkpoint(const ModelConfig& config, const TransformerWeights& weights) {
    check_weights(weights, config);
    Checkpoint c;
    c.kind = CheckpointKind::dense;
    c.config = config;
    for (const auto& nt : weights.named(config)) {
        c.tensors.push_back({nt.name.str(), nt.tensor, !nt.tensor.requires_grad()});
    }
    return c;
}

Checkpoint make_checkpoint(const ProjectedModel& model) {
    Checkpoint c;
    c.kind = CheckpointKind::projected;
    c.config = model.config();
    c.plan = model.plan();
    for (const auto& p : model.frozen()) {
        c.tensors.push_back({p.name, p.tensor, true});
    }
    for (const auto& p : model.trainable()) {
        c.tensors.push_back({p.name, p.tensor, false});
    }
    return c;
}

TransformerWeights dense_weights(const Checkpoint& ckpt) {
    if (ckpt.kind != CheckpointKind::dense) {
        throw FormatError("checkpoint holds a projected model, not dense weights");
    }
    TransformerWeights w;
    w.layers.resize(ckpt.config.n_layers);
    for (const auto& st : ckpt.tensors) {
        Tensor t = st.tensor;
        t.set_requires_grad(!st.frozen);
        w.get(ParamName::parse(st.name)) = t;
    }
    check_weights(w, ckpt.config);
    return w;
}

ProjectedModel projected_model(const Checkpoint& ckpt) {
    if (ckpt.kind != CheckpointKind::projected || !ckpt.plan) {
        throw FormatError("checkpoint does not hold a projected model");
    }
    const CompressionPlan& plan = *ckpt.plan;
    std::map<std::string, Tensor> by_name;
    for (const auto& st : ckpt.tensors) {
        by_name[st.name] = st.tensor;
    }
    auto take = [&](const std::string& name, bool required) -> Tensor {
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            if (required) throw FormatError("checkpoint is missing tensor " + name);
            return Tensor();
        }
        return it->second;
    };
    TransformerWeights base;
    base.layers.resize(plan.source_config.n_layers);
    for (const auto& name : param_names(plan.source_config)) {
        base.get(name) = take("base." + name.str(), true);
    }
    check_weights(base, plan.source_config);
    std::vector<std::pair<ParamName, ProjectionModule>> modules;
    for (const auto& [name, sides] : plan.site_map) {
        const std::string n = name.str();
        Tensor p1 = take(n + ".P1", sides != Sides::right);
        Tensor p2 = take(n + ".P2", sides != Sides::left);
        Tensor wr = take(n + ".W_r", false);
        modules.emplace_back(name, ProjectionModule(base.get(name), p1, p2, wr));
    }
    TransformerWeights vectors;
    vectors.layers.resize(plan.target_config.n_layers);
    for (const auto& name : param_names(plan.target_config)) {
        if (!is_matrix_site(name.site)) {
            vectors.get(name) = take(name.str(), true);
        }
    }
    return ProjectedModel(std::move(base), plan, std::move(modules), std::move(vectors));
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    std::string payload;
    Json tensors = Json::array();
    for (const auto& st : ckpt.tensors) {
        tensors.push_back(Json{{"name", st.name}, {"shape", st.tensor.shape()}, {"frozen", st.frozen}});
        append_tensor(payload, st.tensor);
    }
    Json header;
    header["format_version"] = kCheckpointVersion;
    header["kind"] = kind_name(ckpt.kind);
    header["dtype"] = "f64le";
    header["model_config"] = to_json(ckpt.config);
    header["plan"] = ckpt.plan ? to_json(*ckpt.plan) : Json(nullptr);
    header["tensors"] = tensors;
    header["train_config"] = ckpt.train_config ? to_json(*ckpt.train_config) : Json(nullptr);
    if (ckpt.train_state) {
        const TrainState& s = *ckpt.train_state;
        Json moments = Json::array();
        for (const auto& [name, mv] : s.moments) {
            moments.push_back(Json{{"name", name}, {"shape", mv.m.shape()}});
            append_tensor(payload, mv.m);
            append_tensor(payload, mv.v);
        }
        header["train_state"] = Json{{"step", s.step},
                                     {"windows_consumed", s.windows_consumed},
                                     {"loss_window", std::vector<double>(s.loss_window.begin(),
                                                                         s.loss_window.end())},
                                     {"moments", moments}};
    } else {
        header["train_state"] = nullptr;
    }
    header["payload_bytes"] = payload.size();
    header["payload_checksum"] = hex64(fnv1a64(payload.data(), payload.size()));

    const std::string text = header.dump();
    std::string out(kMagic, kMagic + 8);
    put_u32(out, kCheckpointVersion);
    put_u32(out, 0);
    put_u64(out, text.size());
    out += text;
    out += payload;
    return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < kPreamble) {
        throw FormatError("checkpoint is truncated (no preamble)");
    }
    if (std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw FormatError("not a checkpoint file (bad magic)");
    }
    const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                          " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint64_t header_len = get_le(bytes, 16, 8);
    if (header_len > bytes.size() - kPreamble) {
        throw FormatError("checkpoint is truncated (header)");
    }
    Json header;
    try {
        header = Json::parse(bytes.substr(kPreamble, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("corrupt checkpoint header: ") + e.what());
    }
    const std::size_t payload_at = kPreamble + header_len;
    const std::size_t payload_size = bytes.size() - payload_at;
    try {
        if (header.at("payload_bytes").get<std::uint64_t>() != payload_size) {
            throw FormatError("checkpoint payload length " + std::to_string(payload_size) +
                              " differs from the recorded " +
                              std::to_string(header.at("payload_bytes").get<std::uint64_t>()));
        }
        const std::string sum = hex64(fnv1a64(bytes.data() + payload_at, payload_size));
        if (header.at("payload_checksum").get<std::string>() != sum) {
            throw FormatError("checkpoint payload checksum mismatch");
        }
        if (header.at("dtype").get<std::string>() != "f64le") {
            throw FormatError("unsupported dtype " + header.at("dtype").get<std::string>());
        }
        Checkpoint c;
        c.kind = parse_kind(header.at("kind").get<std::string>());
        c.config = model_config_from_json(header.at("model_config"));
        if (!header.at("plan").is_null()) {
            c.plan = plan_from_json(header.at("plan"));
        }
        if (!header.at("train_config").is_null()) {
            c.train_config = train_config_from_json(header.at("train_config"));
        }
        std::size_t pos = payload_at;
        std::size_t expected = 0;
        for (const auto& t : header.at("tensors")) {
            const Shape shape = shape_from_json(t.at("shape"));
            expected += shape_numel(shape) * sizeof(double);
            Tensor tensor = read_tensor(bytes, pos, shape);
            const bool frozen = t.at("frozen").get<bool>();
            tensor.set_requires_grad(!frozen);
            c.tensors.push_back({t.at("name").get<std::string>(), tensor, frozen});
        }
        const Json& st = header.at("train_state");
        if (!st.is_null()) {
            TrainState s;
            s.step = st.at("step").get<std::uint64_t>();
            s.windows_consumed = st.at("windows_consumed").get<std::uint64_t>();
            for (double v : st.at("loss_window").get<std::vector<double>>()) {
                s.loss_window.push_back(v);
            }
            for (const auto& m : st.at("moments")) {
                const Shape shape = shape_from_json(m.at("shape"));
                expected += 2 * shape_numel(shape) * sizeof(double);
                Tensor mt = read_tensor(bytes, pos, shape);
                Tensor vt = read_tensor(bytes, pos, shape);
                s.moments.emplace(m.at("name").get<std::string>(), AdamMoments{mt, vt});
            }
            c.train_state = std::move(s);
        }
        if (expected != payload_size) {
            throw FormatError("header shapes account for " + std::to_string(expected) +
                              " payload bytes but the file holds " + std::to_string(payload_size));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint header: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid checkpoint metadata: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    write_text_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(read_file_bytes(path));
}

}  // namespace projcomp
