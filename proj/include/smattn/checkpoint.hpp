#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "smattn/events.hpp"
#include "smattn/model.hpp"

namespace smattn {

// Lossless float64 <-> string conversion (C99 hex-float notation).
std::string double_to_hex(double v);
double hex_to_double(const std::string& s);

nlohmann::json model_to_json(const Model& model, const Vocabulary& vocab,
                             std::uint64_t seed);

struct Checkpoint {
    Model model;
    Vocabulary vocab;
    std::uint64_t seed = 0;
};

Checkpoint model_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Vocabulary& vocab, std::uint64_t seed);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Ingested dataset bundle: vocabulary, normalized per-user sequences and
// the split plan, with times stored losslessly.
struct Dataset {
    Vocabulary vocab;
    std::vector<EventSequence> sequences;
    SplitPlan split;
    std::uint64_t seed = 0;
};

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace smattn
