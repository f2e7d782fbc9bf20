#include "smattn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "smattn/log.hpp"
#include "smattn/metrics.hpp"

namespace smattn {

OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + s + "'");
}

Arm parse_arm(const std::string& s) {
    if (s == "origin") return Arm::origin;
    if (s == "smlayer") return Arm::smlayer;
    if (s == "smlayer_ctreg" || s == "smlayer+ctreg") return Arm::smlayer_ctreg;
    throw ConfigError("unknown ablation arm '" + s + "'");
}

std::string arm_name(Arm arm) {
    switch (arm) {
        case Arm::origin: return "origin";
        case Arm::smlayer: return "+SMLayer";
        case Arm::smlayer_ctreg: return "+SMLayer+CTReg";
    }
    return "?";
}

void TrainSettings::validate() const {
    if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
    if (gamma < 0.0) throw ConfigError("train: gamma must be >= 0");
    if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
    if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
    if (mc_samples == 0) throw ConfigError("train: mc_samples must be >= 1");
}

std::vector<std::size_t> sample_negatives(std::size_t n_items,
                                          const std::vector<std::size_t>& exclude,
                                          std::size_t count, Rng& rng) {
    std::vector<char> blocked(n_items, 0);
    for (std::size_t e : exclude) {
        if (e >= n_items) throw ConfigError("sample_negatives: exclude out of range");
        blocked[e] = 1;
    }
    std::vector<std::size_t> eligible;
    eligible.reserve(n_items);
    for (std::size_t i = 0; i < n_items; ++i)
        if (!blocked[i]) eligible.push_back(i);
    if (count > eligible.size())
        throw ConfigError("sample_negatives: requested " + std::to_string(count) +
                          " negatives but only " + std::to_string(eligible.size()) +
                          " items are eligible");
    // partial Fisher-Yates: draw without replacement
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
        out.push_back(eligible[i]);
    }
    return out;
}

std::vector<PositionTarget> make_position_targets(const EventSequence& seq,
                                                  std::size_t n_items,
                                                  std::size_t negatives, Rng& rng) {
    std::vector<PositionTarget> out;
    if (seq.length() < 2) return out;
    // exclude everything the user interacted with (targets included)
    std::vector<std::size_t> exclude(seq.items);
    std::sort(exclude.begin(), exclude.end());
    exclude.erase(std::unique(exclude.begin(), exclude.end()), exclude.end());
    for (std::size_t j = 0; j + 1 < seq.length(); ++j) {
        PositionTarget pt;
        pt.anchor = j;
        pt.t_query = seq.times[j + 1];
        pt.target = seq.items[j + 1];
        if (negatives > 0)
            pt.negatives = sample_negatives(n_items, exclude, negatives, rng);
        out.push_back(std::move(pt));
    }
    return out;
}

Var bce_from_scores(Tape& tape, Var scores) {
    const std::size_t n = tape.value(scores).numel();
    Var loss = tape.softplus(tape.neg(tape.element(scores, 0)));
    if (n > 1) {
        std::vector<std::size_t> neg_idx(n - 1);
        std::iota(neg_idx.begin(), neg_idx.end(), 1);
        Var negs = tape.gather_elements(scores, neg_idx);
        loss = tape.add(loss, tape.sum(tape.softplus(negs)));
    }
    return loss;
}

Var user_ranking_loss(Tape& tape, const Model& model, const ModelVars& vars, Var H,
                      const EventSequence& seq,
                      const std::vector<PositionTarget>& targets) {
    Var loss;
    for (const auto& pt : targets) {
        for (std::size_t n : pt.negatives)
            if (n == pt.target)
                throw ConfigError("ranking loss: target among negatives");
        std::vector<std::size_t> candidates{pt.target};
        candidates.insert(candidates.end(), pt.negatives.begin(), pt.negatives.end());
        Var h_row = tape.gather_rows(H, {pt.anchor});
        ScoreVars sv = score_candidates(tape, model, vars, h_row, seq.times[pt.anchor],
                                        pt.t_query, candidates);
        Var term = bce_from_scores(tape, sv.scores);
        loss = loss.valid() ? tape.add(loss, term) : term;
    }
    if (!loss.valid()) throw DataError("ranking loss: sequence has no targets");
    return loss;
}

double ranking_loss(const Model& model, const EventSequence& context,
                    std::size_t target, const std::vector<std::size_t>& negatives,
                    double t_query) {
    for (std::size_t n : negatives)
        if (n == target) throw ConfigError("ranking_loss: target among negatives");
    Tape tape;
    ModelVars vars = bind(tape, model);
    ForwardOut fwd = forward_sequence(tape, model, vars, context.items);
    std::vector<std::size_t> candidates{target};
    candidates.insert(candidates.end(), negatives.begin(), negatives.end());
    Var h_row = tape.gather_rows(fwd.H, {context.length() - 1});
    ScoreVars sv = score_candidates(tape, model, vars, h_row, context.times.back(),
                                    t_query, candidates);
    return tape.value(bce_from_scores(tape, sv.scores)).scalar_value();
}

Var total_loss(Tape& tape, const Model& model, const ModelVars& vars,
               const std::vector<const EventSequence*>& batch,
               const std::vector<std::vector<PositionTarget>>& targets,
               double gamma, const IntegratorConfig& integ) {
    if (batch.empty()) throw DataError("total_loss: empty batch");
    if (gamma < 0.0) throw ConfigError("total_loss: gamma must be >= 0");

    Var rank_sum;
    Var reg_sum;
    std::size_t ranked_users = 0;
    for (std::size_t u = 0; u < batch.size(); ++u) {
        const EventSequence& seq = *batch[u];
        ForwardOut fwd = forward_sequence(tape, model, vars, seq.items);
        if (!targets[u].empty()) {
            Var rl = user_ranking_loss(tape, model, vars, fwd.H, seq, targets[u]);
            rank_sum = rank_sum.valid() ? tape.add(rank_sum, rl) : rl;
            ++ranked_users;
        }
        if (gamma > 0.0) {
            IntegratorConfig user_integ = integ;
            user_integ.seed = mix_seed(integ.seed, hash_string(seq.user_id));
            RegVars rv = build_regularizer(tape, model, vars, fwd.H, seq, user_integ);
            reg_sum = reg_sum.valid() ? tape.add(reg_sum, rv.total) : rv.total;
        }
    }
    if (!rank_sum.valid() && !reg_sum.valid())
        throw DataError("total_loss: batch contributes no objective");
    Var loss;
    if (rank_sum.valid())
        loss = tape.scale(rank_sum, 1.0 / static_cast<double>(ranked_users));
    if (gamma > 0.0 && reg_sum.valid()) {
        Var reg_term = tape.scale(reg_sum, gamma / static_cast<double>(batch.size()));
        loss = loss.valid() ? tape.sub(loss, reg_term) : tape.neg(reg_term);
    }
    return loss;
}

namespace {

class Optimizer {
public:
    Optimizer(const TrainSettings& s, const ParamStore& params) : s_(s) {
        if (s.optimizer == OptimizerKind::adam)
            for (const auto& [name, value] : params.entries()) {
                m_.emplace_back(name, NumArray::zeros(value.shape));
                v_.emplace_back(name, NumArray::zeros(value.shape));
            }
    }

    void step(ParamStore& params,
              const std::vector<std::pair<std::string, NumArray>>& grads) {
        ++t_;
        for (std::size_t i = 0; i < grads.size(); ++i) {
            const auto& [name, g] = grads[i];
            NumArray& p = params.get(name);
            if (s_.optimizer == OptimizerKind::adam && m_[i].first != name)
                throw NumericError("optimizer: parameter order changed");
            if (s_.optimizer == OptimizerKind::sgd) {
                for (std::size_t j = 0; j < p.numel(); ++j)
                    p.values[j] -= s_.lr * g.values[j];
                continue;
            }
            NumArray& m = m_[i].second;
            NumArray& v = v_[i].second;
            const double bc1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
            for (std::size_t j = 0; j < p.numel(); ++j) {
                m.values[j] = s_.beta1 * m.values[j] + (1.0 - s_.beta1) * g.values[j];
                v.values[j] =
                    s_.beta2 * v.values[j] + (1.0 - s_.beta2) * g.values[j] * g.values[j];
                const double mhat = m.values[j] / bc1;
                const double vhat = v.values[j] / bc2;
                p.values[j] -= s_.lr * mhat / (std::sqrt(vhat) + s_.adam_eps);
            }
        }
    }

private:
    TrainSettings s_;
    std::uint64_t t_ = 0;
    std::vector<std::pair<std::string, NumArray>> m_, v_;
};

double param_norm(const ParamStore& params) {
    double s = 0.0;
    for (const auto& [name, v] : params.entries())
        for (double x : v.values) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::size_t holdout_rank(const Model& model, const HoldoutUser& user,
                         const std::vector<std::size_t>& candidates) {
    Tape tape;
    ModelVars vars = bind(tape, model);
    ForwardOut fwd = forward_sequence(tape, model, vars, user.context.items);
    Var h_row = tape.gather_rows(fwd.H, {user.context.length() - 1});
    ScoreVars sv = score_candidates(tape, model, vars, h_row, user.context.times.back(),
                                    user.holdout_time, candidates);
    const auto& scores = tape.value(sv.scores).values;
    std::size_t target_pos = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (candidates[i] == user.holdout_item) {
            target_pos = i;
            break;
        }
    if (target_pos == candidates.size())
        throw DataError("holdout_rank: target not among candidates");
    return rank_of(scores, candidates, target_pos);
}

MetricsReport evaluate(const Model& model, const std::vector<HoldoutUser>& holdouts,
                       const EvalSettings& settings) {
    MetricsReport report;
    report.k = settings.k;
    if (holdouts.empty()) return report;

    const std::size_t n = model.config.n_items;
    auto candidates_for = [&](const HoldoutUser& user) {
        std::vector<std::size_t> candidates;
        if (!settings.sample_negatives) {
            candidates.resize(n);
            std::iota(candidates.begin(), candidates.end(), 0);
            return candidates;
        }
        std::vector<std::size_t> exclude(user.context.items);
        exclude.push_back(user.holdout_item);
        std::sort(exclude.begin(), exclude.end());
        exclude.erase(std::unique(exclude.begin(), exclude.end()), exclude.end());
        std::size_t want = settings.negative_count;
        const std::size_t eligible = n - exclude.size();
        if (want > eligible) {
            log_warn("evaluate: only %zu eligible negatives for user %s", eligible,
                     user.context.user_id.c_str());
            want = eligible;
        }
        Rng rng(mix_seed(settings.seed, hash_string(user.context.user_id)));
        candidates = sample_negatives(n, exclude, want, rng);
        candidates.insert(candidates.begin(), user.holdout_item);
        return candidates;
    };

    std::vector<std::size_t> ranks(holdouts.size());
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            ranks[i] = holdout_rank(model, holdouts[i], candidates_for(holdouts[i]));
    };
    const int threads = std::max(1, settings.threads);
    if (threads == 1 || holdouts.size() < 2) {
        run_range(0, holdouts.size());
    } else {
        const std::size_t chunk = (holdouts.size() + threads - 1) / threads;
        std::vector<std::future<void>> futures;
        for (std::size_t lo = 0; lo < holdouts.size(); lo += chunk)
            futures.push_back(std::async(std::launch::async, run_range, lo,
                                         std::min(lo + chunk, holdouts.size())));
        for (auto& f : futures) f.get();
    }

    double hr = 0.0, ndcg = 0.0;
    for (std::size_t r : ranks) {
        hr += hit_rate_at_k(r, settings.k);
        ndcg += ndcg_at_k(r, settings.k);
    }
    report.users_evaluated = holdouts.size();
    report.hr = hr / static_cast<double>(holdouts.size());
    report.ndcg = ndcg / static_cast<double>(holdouts.size());
    return report;
}

TrainResult train(const SplitPlan& plan, ModelConfig model_cfg,
                  const TrainSettings& settings) {
    settings.validate();
    if (plan.train.empty()) throw DataError("train: no training users");

    // Arm semantics: origin scores with the plain attention distribution
    // and trains without the regularizer; +SMLayer adds the intensity
    // factor; +SMLayer+CTReg additionally enables the regularizer.
    double gamma = settings.gamma;
    if (settings.arm == Arm::origin) {
        model_cfg.plain = true;
        gamma = 0.0;
    } else if (settings.arm == Arm::smlayer) {
        gamma = 0.0;
    }

    Model model = Model::init(model_cfg, settings.seed);
    Optimizer opt(settings, model.params);
    Rng order_rng(mix_seed(settings.seed, 0x0ade));
    const std::uint64_t mc_base = mix_seed(settings.seed, 0x3c);

    // Single-event users cannot provide a prediction target; they still
    // contribute their regularizer term when gamma is active.
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < plan.train.size(); ++i)
        if (plan.train[i].length() >= 2 || gamma > 0.0) usable.push_back(i);
    bool any_targets = false;
    for (std::size_t i : usable) any_targets |= plan.train[i].length() >= 2;
    if (!any_targets) throw DataError("train: no training user has >= 2 events");

    TrainResult result{model, {}, 0};
    double best_hr = -1.0;

    for (std::size_t epoch = 1; epoch <= settings.epochs; ++epoch) {
        std::vector<std::size_t> order = usable;
        order_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size(); start += settings.batch_size) {
            const std::size_t stop = std::min(start + settings.batch_size, order.size());
            std::vector<const EventSequence*> batch;
            std::vector<std::vector<PositionTarget>> targets;
            for (std::size_t i = start; i < stop; ++i) {
                const EventSequence& seq = plan.train[order[i]];
                batch.push_back(&seq);
                targets.push_back(make_position_targets(seq, model.config.n_items,
                                                        settings.negatives, order_rng));
            }
            IntegratorConfig integ{settings.integrator, settings.mc_samples,
                                   mix_seed(mc_base, epoch * 100000 + steps)};
            Tape tape;
            ModelVars vars = bind(tape, model);
            Var loss = total_loss(tape, model, vars, batch, targets, gamma, integ);
            const double loss_value = tape.value(loss).scalar_value();
            if (!std::isfinite(loss_value))
                throw NumericError("train: non-finite loss at epoch " +
                                   std::to_string(epoch) + ", batch " +
                                   std::to_string(steps) + " (param norm " +
                                   std::to_string(param_norm(model.params)) + ")");
            tape.backward(loss);
            opt.step(model.params, tape.param_grads());
            epoch_loss += loss_value;
            ++steps;
        }

        EpochStats stats;
        stats.train_loss = epoch_loss / static_cast<double>(steps);
        if (!plan.validation.empty()) {
            EvalSettings es;
            es.k = settings.eval_k;
            MetricsReport val = evaluate(model, plan.validation, es);
            stats.val_hr = val.hr;
            stats.val_ndcg = val.ndcg;
            if (val.hr > best_hr) {
                best_hr = val.hr;
                result.model = model;
                result.best_epoch = epoch;
            }
        }
        result.trace.push_back(stats);
        log_info("epoch %zu: loss %.6f val_hr %.4f", epoch, stats.train_loss,
                 stats.val_hr);
    }
    if (plan.validation.empty()) result.model = model;
    return result;
}

AblationRun ablate(const SplitPlan& plan, ModelConfig model_cfg,
                   TrainSettings base_settings, const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("ablate: need at least one seed");

    AblationRun run;
    for (Arm arm : {Arm::origin, Arm::smlayer, Arm::smlayer_ctreg}) {
        AblationArmResult arm_result;
        arm_result.arm = arm;
        for (std::uint64_t seed : seeds) {
            TrainSettings s = base_settings;
            s.arm = arm;
            s.seed = seed;
            TrainResult tr = train(plan, model_cfg, s);
            EvalSettings es;
            es.k = base_settings.eval_k;
            MetricsReport test = evaluate(tr.model, plan.test, es);
            arm_result.hr_per_seed.push_back(test.hr);
            arm_result.ndcg_per_seed.push_back(test.ndcg);
            if (arm == Arm::smlayer_ctreg) run.full_arm_models.push_back(tr.model);
            log_info("ablate %s seed %llu: hr %.4f ndcg %.4f", arm_name(arm).c_str(),
                     static_cast<unsigned long long>(seed), test.hr, test.ndcg);
        }
        auto mean_std = [](const std::vector<double>& xs) {
            const double n = static_cast<double>(xs.size());
            double mean = 0.0;
            for (double x : xs) mean += x;
            mean /= n;
            double var = 0.0;
            for (double x : xs) var += (x - mean) * (x - mean);
            var = xs.size() > 1 ? var / (n - 1.0) : 0.0;
            return std::pair<double, double>{mean, std::sqrt(var)};
        };
        std::tie(arm_result.hr_mean, arm_result.hr_std) = mean_std(arm_result.hr_per_seed);
        std::tie(arm_result.ndcg_mean, arm_result.ndcg_std) =
            mean_std(arm_result.ndcg_per_seed);
        run.table.arms.push_back(std::move(arm_result));
    }
    return run;
}

}  // namespace smattn
