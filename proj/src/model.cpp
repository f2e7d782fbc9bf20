#include "smattn/model.hpp"

#include "smattn/rng.hpp"

namespace smattn {

PeParity parse_pe_parity(const std::string& s) {
    if (s == "position") return PeParity::position;
    if (s == "dimension") return PeParity::dimension;
    throw ConfigError("unknown positional parity '" + s + "'");
}

HeadMode parse_head_mode(const std::string& s) {
    if (s == "item") return HeadMode::item;
    if (s == "group") return HeadMode::group;
    throw ConfigError("unknown head mode '" + s + "'");
}

void ModelConfig::validate() const {
    if (n_items == 0) throw ConfigError("model: n_items must be > 0");
    if (d == 0 || d_e == 0 || d_pe == 0 || d_g == 0)
        throw ConfigError("model: widths must be > 0");
    if (d_pe % 2 != 0) throw ConfigError("model: d_pe must be even");
    if (blocks == 0) throw ConfigError("model: blocks must be >= 1");
    if (residual && d_in() != d)
        throw ConfigError("model: residual requires d_e + d_pe == d");
    if (n_heads == 0 || head_of.size() != n_items)
        throw ConfigError("model: heads unresolved");
    for (std::size_t h : head_of)
        if (h >= n_heads) throw ConfigError("model: head index out of range");
    if (force_constant_intensity < 0.0)
        throw ConfigError("model: forced intensity must be positive");
}

void ModelConfig::resolve_heads(const Vocabulary& vocab) {
    n_items = vocab.size();
    if (head_mode == HeadMode::item) {
        n_heads = n_items;
        head_of.resize(n_items);
        for (std::size_t i = 0; i < n_items; ++i) head_of[i] = i;
    } else {
        if (!vocab.has_groups())
            throw ConfigError("model: group head mode requires a group map");
        n_heads = vocab.group_count;
        head_of = vocab.groups;
    }
}

Model Model::init(ModelConfig config, std::uint64_t seed) {
    config.validate();
    Model model;
    model.config = config;
    Rng rng(mix_seed(seed, 0x70617261));

    auto uniform_array = [&](std::vector<std::size_t> shape) {
        NumArray a = NumArray::zeros(std::move(shape));
        for (double& v : a.values) v = rng.uniform(-0.1, 0.1);
        return a;
    };

    const std::size_t K = config.n_heads;
    auto& p = model.params;
    p.add("Y", uniform_array({config.n_items, config.d_e}));
    for (std::size_t b = 0; b < config.blocks; ++b) {
        const std::size_t in = b == 0 ? config.d_in() : config.d;
        const std::string suffix = std::to_string(b);
        p.add("Wq" + suffix, uniform_array({in, config.d}));
        p.add("Wk" + suffix, uniform_array({in, config.d}));
        p.add("Wv" + suffix, uniform_array({in, config.d}));
        if (config.qkv_bias) {
            p.add("bq" + suffix, NumArray::zeros({1, config.d}));
            p.add("bk" + suffix, NumArray::zeros({1, config.d}));
            p.add("bv" + suffix, NumArray::zeros({1, config.d}));
        }
    }
    p.add("B", uniform_array({config.n_items, config.d}));
    p.add("WG", uniform_array({K * config.d_g, config.d}));
    p.add("bG", uniform_array({K * config.d_g, 1}));
    p.add("w", uniform_array({K, config.d_g}));
    p.add("mu", NumArray::zeros({K}));
    p.add("rho", NumArray::zeros({K}));
    return model;
}

ModelVars bind(Tape& tape, const Model& model) {
    const auto& cfg = model.config;
    const auto& p = model.params;
    ModelVars v;
    v.Y = tape.param("Y", p.get("Y"));
    for (std::size_t b = 0; b < cfg.blocks; ++b) {
        const std::string suffix = std::to_string(b);
        v.Wq.push_back(tape.param("Wq" + suffix, p.get("Wq" + suffix)));
        v.Wk.push_back(tape.param("Wk" + suffix, p.get("Wk" + suffix)));
        v.Wv.push_back(tape.param("Wv" + suffix, p.get("Wv" + suffix)));
        if (cfg.qkv_bias) {
            v.bq.push_back(tape.param("bq" + suffix, p.get("bq" + suffix)));
            v.bk.push_back(tape.param("bk" + suffix, p.get("bk" + suffix)));
            v.bv.push_back(tape.param("bv" + suffix, p.get("bv" + suffix)));
        }
    }
    v.B = tape.param("B", p.get("B"));
    v.WG = tape.param("WG", p.get("WG"));
    v.bG = tape.param("bG", p.get("bG"));
    v.w = tape.param("w", p.get("w"));
    v.mu = tape.param("mu", p.get("mu"));
    v.rho = tape.param("rho", p.get("rho"));
    v.phi = tape.exp_(v.rho);
    return v;
}

}  // namespace smattn
