#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smattn/ctreg.hpp"
#include "smattn/events.hpp"
#include "smattn/model.hpp"
#include "smattn/rng.hpp"

namespace smattn {

enum class OptimizerKind { sgd, adam };
enum class Arm { origin, smlayer, smlayer_ctreg };

OptimizerKind parse_optimizer(const std::string& s);
Arm parse_arm(const std::string& s);
std::string arm_name(Arm arm);

struct TrainSettings {
    OptimizerKind optimizer = OptimizerKind::adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    std::size_t negatives = 1;  // per positive
    double gamma = 1e-5;
    IntegratorMethod integrator = IntegratorMethod::trapezoid;
    std::size_t mc_samples = 5;
    Arm arm = Arm::smlayer_ctreg;
    std::uint64_t seed = 1;
    std::size_t eval_k = 10;

    void validate() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_hr = 0.0;
    double val_ndcg = 0.0;
};

struct TrainResult {
    Model model;  // best-validation checkpoint (last epoch if no validation users)
    std::vector<EpochStats> trace;
    std::size_t best_epoch = 0;  // 1-based; 0 if no validation users
};

struct MetricsReport {
    double hr = 0.0;
    double ndcg = 0.0;
    std::size_t k = 10;
    std::size_t users_evaluated = 0;
};

struct EvalSettings {
    std::size_t k = 10;
    bool sample_negatives = false;  // default: rank against the full catalog
    std::size_t negative_count = 100;
    std::uint64_t seed = 0;
    int threads = 1;
};

// One teacher-forcing target: position `anchor` predicts `target` at
// t_query against sampled negatives.
struct PositionTarget {
    std::size_t anchor = 0;
    double t_query = 0.0;
    std::size_t target = 0;
    std::vector<std::size_t> negatives;
};

// Uniform sampling without replacement from items outside `exclude`.
std::vector<std::size_t> sample_negatives(std::size_t n_items,
                                          const std::vector<std::size_t>& exclude,
                                          std::size_t count, Rng& rng);

std::vector<PositionTarget> make_position_targets(const EventSequence& seq,
                                                  std::size_t n_items,
                                                  std::size_t negatives, Rng& rng);

// Binary cross-entropy on candidate scores arranged [target, negatives...]:
//   softplus(-s_target) + sum softplus(s_neg)
Var bce_from_scores(Tape& tape, Var scores);

// Per-prediction ranking loss for one context (builds its own tape).
double ranking_loss(const Model& model, const EventSequence& context,
                    std::size_t target, const std::vector<std::size_t>& negatives,
                    double t_query);

// Sum of per-position BCE terms for one sequence given its forward pass.
Var user_ranking_loss(Tape& tape, const Model& model, const ModelVars& vars, Var H,
                      const EventSequence& seq,
                      const std::vector<PositionTarget>& targets);

// Combined objective over a batch of users:
//   mean ranking loss - gamma * mean regularizer
// gamma = 0 skips the regularizer entirely.
Var total_loss(Tape& tape, const Model& model, const ModelVars& vars,
               const std::vector<const EventSequence*>& batch,
               const std::vector<std::vector<PositionTarget>>& targets,
               double gamma, const IntegratorConfig& integ);

TrainResult train(const SplitPlan& plan, ModelConfig model_cfg,
                  const TrainSettings& settings);

MetricsReport evaluate(const Model& model, const std::vector<HoldoutUser>& holdouts,
                       const EvalSettings& settings);

// Scores the full candidate set for one holdout user at the holdout time
// and returns the 1-based rank of the target.
std::size_t holdout_rank(const Model& model, const HoldoutUser& user,
                         const std::vector<std::size_t>& candidates);

struct AblationArmResult {
    Arm arm;
    double hr_mean = 0.0, hr_std = 0.0;
    double ndcg_mean = 0.0, ndcg_std = 0.0;
    std::vector<double> hr_per_seed;
    std::vector<double> ndcg_per_seed;
};

struct AblationResult {
    std::vector<AblationArmResult> arms;  // origin, smlayer, smlayer_ctreg
};

// Trains the three arms under identical data, seeds and budgets and
// reports per-arm mean and sample standard deviation of the test metrics.
// The returned per-seed models of the full arm are kept for downstream
// diagnostics.
struct AblationRun {
    AblationResult table;
    std::vector<Model> full_arm_models;  // one per seed
};

AblationRun ablate(const SplitPlan& plan, ModelConfig model_cfg,
                   TrainSettings base_settings, const std::vector<std::uint64_t>& seeds);

}  // namespace smattn
