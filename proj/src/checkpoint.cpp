#include "smattn/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace smattn {

std::string double_to_hex(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double hex_to_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw DataError("checkpoint: bad float literal '" + s + "'");
    return v;
}

namespace {

nlohmann::json array_to_json(const NumArray& a) {
    nlohmann::json j;
    j["shape"] = a.shape;
    std::vector<std::string> vals;
    vals.reserve(a.numel());
    for (double v : a.values) vals.push_back(double_to_hex(v));
    j["values"] = std::move(vals);
    return j;
}

NumArray array_from_json(const nlohmann::json& j) {
    std::vector<std::size_t> shape = j.at("shape").get<std::vector<std::size_t>>();
    std::vector<double> values;
    for (const auto& s : j.at("values")) values.push_back(hex_to_double(s.get<std::string>()));
    return NumArray{std::move(shape), std::move(values)};
}

nlohmann::json vocab_to_json(const Vocabulary& vocab) {
    nlohmann::json j;
    j["items"] = vocab.items;
    if (vocab.has_groups()) {
        j["groups"] = vocab.groups;
        j["group_count"] = vocab.group_count;
    }
    return j;
}

Vocabulary vocab_from_json(const nlohmann::json& j) {
    Vocabulary vocab;
    vocab.items = j.at("items").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < vocab.items.size(); ++i)
        vocab.index.emplace(vocab.items[i], i);
    if (j.contains("groups")) {
        vocab.groups = j.at("groups").get<std::vector<std::size_t>>();
        vocab.group_count = j.at("group_count").get<std::size_t>();
    }
    return vocab;
}

nlohmann::json config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["n_items"] = cfg.n_items;
    j["d"] = cfg.d;
    j["d_e"] = cfg.d_e;
    j["d_pe"] = cfg.d_pe;
    j["d_g"] = cfg.d_g;
    j["blocks"] = cfg.blocks;
    j["residual"] = cfg.residual;
    j["qkv_bias"] = cfg.qkv_bias;
    j["pe_parity"] = cfg.pe_parity == PeParity::position ? "position" : "dimension";
    j["heads"] = cfg.head_mode == HeadMode::item ? "item" : "group";
    j["plain"] = cfg.plain;
    j["force_constant_intensity"] = cfg.force_constant_intensity;
    j["n_heads"] = cfg.n_heads;
    j["head_of"] = cfg.head_of;
    return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.n_items = j.at("n_items").get<std::size_t>();
    cfg.d = j.at("d").get<std::size_t>();
    cfg.d_e = j.at("d_e").get<std::size_t>();
    cfg.d_pe = j.at("d_pe").get<std::size_t>();
    cfg.d_g = j.at("d_g").get<std::size_t>();
    cfg.blocks = j.at("blocks").get<std::size_t>();
    cfg.residual = j.at("residual").get<bool>();
    cfg.qkv_bias = j.at("qkv_bias").get<bool>();
    cfg.pe_parity = parse_pe_parity(j.at("pe_parity").get<std::string>());
    cfg.head_mode = parse_head_mode(j.at("heads").get<std::string>());
    cfg.plain = j.at("plain").get<bool>();
    cfg.force_constant_intensity = j.at("force_constant_intensity").get<double>();
    cfg.n_heads = j.at("n_heads").get<std::size_t>();
    cfg.head_of = j.at("head_of").get<std::vector<std::size_t>>();
    return cfg;
}

}  // namespace

nlohmann::json model_to_json(const Model& model, const Vocabulary& vocab,
                             std::uint64_t seed) {
    nlohmann::json j;
    j["format"] = "smattn-checkpoint-v1";
    j["seed"] = seed;
    j["model"] = config_to_json(model.config);
    j["vocab"] = vocab_to_json(vocab);
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, value] : model.params.entries())
        params[name] = array_to_json(value);
    j["params"] = std::move(params);
    j["param_order"] = [&] {
        std::vector<std::string> names;
        for (const auto& [name, value] : model.params.entries()) names.push_back(name);
        return names;
    }();
    return j;
}

Checkpoint model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "smattn-checkpoint-v1")
        throw DataError("checkpoint: unknown format");
    Checkpoint ck;
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.vocab = vocab_from_json(j.at("vocab"));
    ck.model.config = config_from_json(j.at("model"));
    ck.model.config.validate();
    for (const auto& name : j.at("param_order").get<std::vector<std::string>>())
        ck.model.params.add(name, array_from_json(j.at("params").at(name)));
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Vocabulary& vocab, std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << model_to_json(model, vocab, seed).dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("checkpoint: invalid JSON in " + path.string());
    return model_from_json(j);
}

namespace {

nlohmann::json sequence_to_json(const EventSequence& seq) {
    nlohmann::json j;
    j["user"] = seq.user_id;
    std::vector<std::string> times;
    times.reserve(seq.length());
    for (double t : seq.times) times.push_back(double_to_hex(t));
    j["t"] = std::move(times);
    j["items"] = seq.items;
    return j;
}

EventSequence sequence_from_json(const nlohmann::json& j) {
    EventSequence seq;
    seq.user_id = j.at("user").get<std::string>();
    for (const auto& s : j.at("t")) seq.times.push_back(hex_to_double(s.get<std::string>()));
    seq.items = j.at("items").get<std::vector<std::size_t>>();
    if (seq.times.size() != seq.items.size())
        throw DataError("dataset: ragged sequence for user " + seq.user_id);
    return seq;
}

nlohmann::json holdout_to_json(const HoldoutUser& h) {
    nlohmann::json j;
    j["context"] = sequence_to_json(h.context);
    j["holdout_t"] = double_to_hex(h.holdout_time);
    j["holdout_item"] = h.holdout_item;
    return j;
}

HoldoutUser holdout_from_json(const nlohmann::json& j) {
    HoldoutUser h;
    h.context = sequence_from_json(j.at("context"));
    h.holdout_time = hex_to_double(j.at("holdout_t").get<std::string>());
    h.holdout_item = j.at("holdout_item").get<std::size_t>();
    return h;
}

}  // namespace

nlohmann::json dataset_to_json(const Dataset& ds) {
    nlohmann::json j;
    j["format"] = "smattn-dataset-v1";
    j["seed"] = ds.seed;
    j["vocab"] = vocab_to_json(ds.vocab);
    j["sequences"] = nlohmann::json::array();
    for (const auto& seq : ds.sequences) j["sequences"].push_back(sequence_to_json(seq));
    nlohmann::json split;
    split["train"] = nlohmann::json::array();
    for (const auto& seq : ds.split.train) split["train"].push_back(sequence_to_json(seq));
    split["validation"] = nlohmann::json::array();
    for (const auto& h : ds.split.validation) split["validation"].push_back(holdout_to_json(h));
    split["test"] = nlohmann::json::array();
    for (const auto& h : ds.split.test) split["test"].push_back(holdout_to_json(h));
    split["skipped"] = ds.split.skipped;
    j["split"] = std::move(split);
    return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "smattn-dataset-v1")
        throw DataError("dataset: unknown format");
    Dataset ds;
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.vocab = vocab_from_json(j.at("vocab"));
    for (const auto& s : j.at("sequences")) ds.sequences.push_back(sequence_from_json(s));
    const auto& split = j.at("split");
    for (const auto& s : split.at("train")) ds.split.train.push_back(sequence_from_json(s));
    for (const auto& h : split.at("validation"))
        ds.split.validation.push_back(holdout_from_json(h));
    for (const auto& h : split.at("test")) ds.split.test.push_back(holdout_from_json(h));
    ds.split.skipped = split.at("skipped").get<std::vector<std::string>>();
    return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << dataset_to_json(ds).dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("dataset: invalid JSON in " + path.string());
    return dataset_from_json(j);
}

}  // namespace smattn
