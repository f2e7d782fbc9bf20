#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smattn/events.hpp"
#include "smattn/params.hpp"
#include "smattn/tape.hpp"

namespace smattn {

enum class PeParity { position, dimension };
enum class HeadMode { item, group };

PeParity parse_pe_parity(const std::string& s);
HeadMode parse_head_mode(const std::string& s);

struct ModelConfig {
    std::size_t n_items = 0;
    std::size_t d = 50;     // attention output width
    std::size_t d_e = 25;   // item embedding width
    std::size_t d_pe = 25;  // positional encoding width (even)
    std::size_t d_g = 50;   // modulator feature width
    std::size_t blocks = 1;
    bool residual = false;
    bool qkv_bias = false;
    PeParity pe_parity = PeParity::position;
    HeadMode head_mode = HeadMode::item;

    // Scoring behaviour. plain drops the intensity factor entirely
    // (classic causal attention); force_constant_intensity > 0 pins every
    // head's intensity to that constant.
    bool plain = false;
    double force_constant_intensity = 0.0;

    std::size_t n_heads = 0;              // n (item mode) or G (group mode)
    std::vector<std::size_t> head_of;     // item index -> head index

    std::size_t d_in() const { return d_e + d_pe; }
    void validate() const;

    // Fills n_heads/head_of from the vocabulary per head_mode.
    void resolve_heads(const Vocabulary& vocab);
};

struct Model {
    ModelConfig config;
    ParamStore params;

    // Registers and initializes all learnable arrays under the given seed:
    // uniform [-0.1, 0.1] for matrices, zeros for mu and rho (phi = 1).
    static Model init(ModelConfig config, std::uint64_t seed);

    std::size_t head_of(std::size_t item) const { return config.head_of[item]; }
};

// Parameter handles bound on one tape. phi = exp(rho) is materialized once
// per tape at bind time.
struct ModelVars {
    std::vector<Var> Wq, Wk, Wv;
    std::vector<Var> bq, bk, bv;
    Var Y, B;
    Var WG, bG, w, mu, rho, phi;
};

ModelVars bind(Tape& tape, const Model& model);

}  // namespace smattn
