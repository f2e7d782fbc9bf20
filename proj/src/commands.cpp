#include "smattn/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smattn/bound.hpp"
#include "smattn/log.hpp"
#include "smattn/metrics.hpp"
#include "smattn/version.hpp"

namespace smattn {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericError*>(&e)) return 3;
    return 2;
}

std::uint64_t resolve_seed(const CommandContext& ctx) {
    if (ctx.seed_override) return *ctx.seed_override;
    if (ctx.config.has("run", "seed")) return ctx.config.get_u64("run", "seed", 0);
    throw ConfigError("seed is mandatory: set [run] seed or pass --seed");
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

SplitRatios ratios_from(const RunConfig& cfg) {
    const std::string spec = cfg.get_str("data", "ratio", "8:1:1");
    const auto parts = split_on(spec, ':');
    if (parts.size() != 3) throw ConfigError("data.ratio must look like 8:1:1");
    SplitRatios r;
    try {
        r.train = static_cast<unsigned>(std::stoul(parts[0]));
        r.validation = static_cast<unsigned>(std::stoul(parts[1]));
        r.test = static_cast<unsigned>(std::stoul(parts[2]));
    } catch (const std::exception&) {
        throw ConfigError("data.ratio must look like 8:1:1");
    }
    return r;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

// Run bookkeeping: resolved config echo plus a manifest. The manifest
// carries wall time and is the only non-reproducible output of a run.
class RunDir {
public:
    RunDir(CommandContext& ctx, std::uint64_t seed)
        : ctx_(ctx), seed_(seed), start_(std::chrono::steady_clock::now()) {
        fs::create_directories(ctx.out_dir);
        RunConfig resolved = ctx.config;
        resolved.set("run", "seed", std::to_string(seed));
        resolved_text_ = resolved.to_string();
        auto out = open_output(ctx.out_dir / "resolved.cfg");
        out << resolved_text_;
        outputs_.push_back("resolved.cfg");
    }

    fs::path path(const std::string& name) {
        outputs_.push_back(name);
        return ctx_.out_dir / name;
    }

    void finish() {
        using namespace std::chrono;
        nlohmann::json m;
        m["command"] = ctx_.command;
        m["version"] = kVersion;
        m["seed"] = seed_;
        m["threads"] = ctx_.threads;
        m["overrides"] = ctx_.overrides;
        m["config"] = resolved_text_;
        m["outputs"] = outputs_;
        m["wall_time_s"] =
            duration_cast<duration<double>>(steady_clock::now() - start_).count();
        m["created_unix"] =
            duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
        auto out = open_output(ctx_.out_dir / "manifest.json");
        out << m.dump(2) << '\n';
    }

private:
    CommandContext& ctx_;
    std::uint64_t seed_;
    std::chrono::steady_clock::time_point start_;
    std::string resolved_text_;
    std::vector<std::string> outputs_;
};

}  // namespace

DriftConfig drift_config_from(const RunConfig& cfg) {
    DriftConfig dc;
    dc.users = static_cast<std::size_t>(cfg.get_int("sim", "users", 500));
    dc.items = static_cast<std::size_t>(cfg.get_int("sim", "items", 30));
    dc.categories = static_cast<std::size_t>(cfg.get_int("sim", "categories", 6));
    dc.horizon = cfg.get_double("sim", "horizon_days", 100.0);
    dc.min_events = static_cast<std::size_t>(cfg.get_int("sim", "min_events", 2));
    dc.max_retries = static_cast<std::size_t>(cfg.get_int("sim", "max_retries", 20));

    // regimes = "start-end:cat@rate,cat@rate;start-end:..."
    const std::string spec = cfg.get_str("sim", "regimes");
    for (const auto& regime_spec : split_on(spec, ';')) {
        const auto colon = regime_spec.find(':');
        if (colon == std::string::npos)
            throw ConfigError("sim.regimes: expected window:categories in '" +
                              regime_spec + "'");
        const auto window = split_on(regime_spec.substr(0, colon), '-');
        if (window.size() != 2)
            throw ConfigError("sim.regimes: window must be start-end");
        DriftRegime regime;
        try {
            regime.window_start = std::stod(window[0]);
            regime.window_end = std::stod(window[1]);
            for (const auto& cat_spec : split_on(regime_spec.substr(colon + 1), ',')) {
                const auto at = cat_spec.find('@');
                if (at == std::string::npos)
                    throw std::invalid_argument(cat_spec);
                regime.categories.push_back(std::stoul(cat_spec.substr(0, at)));
                regime.rates.push_back(std::stod(cat_spec.substr(at + 1)));
            }
        } catch (const std::exception&) {
            throw ConfigError("sim.regimes: bad regime spec '" + regime_spec + "'");
        }
        dc.regimes.push_back(std::move(regime));
    }
    return dc;
}

ModelConfig model_config_from(const RunConfig& cfg, const Vocabulary& vocab) {
    ModelConfig mc;
    mc.d = static_cast<std::size_t>(cfg.get_int("model", "d", 50));
    mc.d_e = static_cast<std::size_t>(cfg.get_int("model", "d_e", mc.d / 2));
    mc.d_pe = static_cast<std::size_t>(cfg.get_int("model", "d_pe", mc.d - mc.d_e));
    mc.d_g = static_cast<std::size_t>(cfg.get_int("model", "d_g", mc.d));
    mc.blocks = static_cast<std::size_t>(cfg.get_int("model", "blocks", 1));
    mc.residual = cfg.get_bool("model", "residual", false);
    mc.qkv_bias = cfg.get_bool("model", "qkv_bias", false);
    mc.pe_parity = parse_pe_parity(cfg.get_str("model", "pe_parity", "position"));
    mc.head_mode = parse_head_mode(cfg.get_str("model", "heads", "item"));
    mc.plain = cfg.get_bool("model", "plain", false);
    mc.force_constant_intensity =
        cfg.get_double("model", "force_constant_intensity", 0.0);
    mc.resolve_heads(vocab);
    mc.validate();
    return mc;
}

TrainSettings train_settings_from(const RunConfig& cfg, std::uint64_t seed) {
    TrainSettings ts;
    ts.optimizer = parse_optimizer(cfg.get_str("train", "optimizer", "adam"));
    ts.lr = cfg.get_double("train", "lr", 1e-3);
    ts.beta1 = cfg.get_double("train", "beta1", 0.9);
    ts.beta2 = cfg.get_double("train", "beta2", 0.999);
    ts.adam_eps = cfg.get_double("train", "adam_eps", 1e-8);
    ts.epochs = static_cast<std::size_t>(cfg.get_int("train", "epochs", 30));
    ts.batch_size = static_cast<std::size_t>(cfg.get_int("train", "batch_size", 32));
    ts.negatives = static_cast<std::size_t>(cfg.get_int("train", "negatives", 1));
    ts.gamma = cfg.get_double("train", "gamma", 1e-5);
    ts.integrator = parse_integrator(cfg.get_str("train", "integrator", "trapezoid"));
    ts.mc_samples = static_cast<std::size_t>(cfg.get_int("train", "mc_samples", 5));
    ts.arm = parse_arm(cfg.get_str("train", "arm", "smlayer_ctreg"));
    ts.eval_k = static_cast<std::size_t>(cfg.get_int("train", "eval_k", 10));
    ts.seed = seed;
    ts.validate();
    return ts;
}

Dataset ingest_events(const std::vector<Event>& events,
                      const std::optional<std::string>& group_map_csv,
                      std::size_t min_user_events, std::size_t min_item_count,
                      SplitRatios ratios, std::uint64_t seed) {
    Dataset ds;
    ds.seed = seed;
    auto [vocab, sequences] = build_sequences(events, min_user_events, min_item_count);
    ds.vocab = std::move(vocab);
    if (group_map_csv) {
        std::istringstream in(*group_map_csv);
        load_group_map(in, ds.vocab);
    }
    ds.sequences.reserve(sequences.size());
    for (const auto& seq : sequences) ds.sequences.push_back(normalize_time(seq));
    ds.split = split_strong_generalization(ds.sequences, ratios, seed);
    return ds;
}

int cmd_simulate(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);
    const std::string kind = ctx.config.get_str("sim", "kind", "drift");

    std::vector<Event> events;
    if (kind == "drift") {
        const DriftConfig dc = drift_config_from(ctx.config);
        events = simulate_drifting_preferences(dc, seed);
        auto groups = open_output(run.path("groups.csv"));
        groups << "item_id,group_id\n";
        for (const auto& [item, group] : drift_group_map(dc))
            groups << item << ',' << group << '\n';
    } else if (kind == "poisson" || kind == "hawkes") {
        const std::size_t users =
            static_cast<std::size_t>(ctx.config.get_int("sim", "users", 50));
        const std::size_t items =
            static_cast<std::size_t>(ctx.config.get_int("sim", "items", 1));
        const double horizon = ctx.config.get_double("sim", "horizon_days", 100.0);
        for (std::size_t u = 0; u < users; ++u) {
            std::vector<double> times;
            if (kind == "poisson") {
                times = simulate_poisson(ctx.config.get_double("sim", "rate"), horizon,
                                         mix_seed(seed, u));
            } else {
                times = simulate_hawkes(ctx.config.get_double("sim", "mu"),
                                        ctx.config.get_double("sim", "alpha"),
                                        ctx.config.get_double("sim", "beta"), horizon,
                                        mix_seed(seed, u));
            }
            Rng item_rng(mix_seed(seed, 0x17e0 + u));
            for (double day : times)
                events.push_back(
                    Event{drift_user_id(u),
                          drift_item_id(items == 1 ? 0 : item_rng.below(items)),
                          static_cast<std::int64_t>(std::llround(day * 86400.0))});
        }
    } else {
        throw ConfigError("sim.kind must be drift, poisson or hawkes");
    }

    auto out = open_output(run.path("events.csv"));
    write_events_csv(out, events);
    log_info("simulate: wrote %zu events", events.size());
    run.finish();
    return 0;
}

int cmd_ingest(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);

    const std::string events_path = ctx.config.get_str("data", "events");
    std::string format_name = ctx.config.get_str("data", "format", "");
    if (format_name.empty())
        format_name = events_path.ends_with(".jsonl") ? "jsonl" : "csv";
    std::ifstream in(events_path);
    if (!in) throw DataError("cannot read events file " + events_path);
    const auto events = parse_events(in, parse_event_format(format_name));

    std::optional<std::string> group_csv;
    if (ctx.config.has("data", "group_map")) {
        std::ifstream gm(ctx.config.get_str("data", "group_map"));
        if (!gm)
            throw DataError("cannot read group map " +
                            ctx.config.get_str("data", "group_map"));
        std::stringstream buf;
        buf << gm.rdbuf();
        group_csv = buf.str();
    }

    const Dataset ds = ingest_events(
        events, group_csv,
        static_cast<std::size_t>(ctx.config.get_int("data", "min_user_events", 5)),
        static_cast<std::size_t>(ctx.config.get_int("data", "min_item_count", 1)),
        ratios_from(ctx.config), seed);
    save_dataset(run.path("dataset.json"), ds);
    log_info("ingest: %zu users, %zu items (train %zu / val %zu / test %zu)",
             ds.sequences.size(), ds.vocab.size(), ds.split.train.size(),
             ds.split.validation.size(), ds.split.test.size());
    run.finish();
    return 0;
}

namespace {

nlohmann::json trace_to_json(const TrainResult& result) {
    nlohmann::json j;
    j["best_epoch"] = result.best_epoch;
    j["epochs"] = nlohmann::json::array();
    for (const auto& e : result.trace)
        j["epochs"].push_back({{"train_loss", e.train_loss},
                               {"val_hr", e.val_hr},
                               {"val_ndcg", e.val_ndcg}});
    return j;
}

nlohmann::json metrics_to_json(const MetricsReport& m) {
    return {{"hr", m.hr},
            {"ndcg", m.ndcg},
            {"k", m.k},
            {"users_evaluated", m.users_evaluated}};
}

void write_metrics_text(std::ostream& out, const MetricsReport& m) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-10s %10.5f\n", "HR@K", m.hr);
    out << "K = " << m.k << ", users = " << m.users_evaluated << "\n" << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %10.5f\n", "NDCG@K", m.ndcg);
    out << buf;
}

}  // namespace

int cmd_train(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);

    const Dataset ds = load_dataset(ctx.config.get_str("data", "dataset"));
    const ModelConfig mc = model_config_from(ctx.config, ds.vocab);
    const TrainSettings ts = train_settings_from(ctx.config, seed);

    const TrainResult result = train(ds.split, mc, ts);
    save_checkpoint(run.path("checkpoint.json"), result.model, ds.vocab, seed);
    auto trace = open_output(run.path("loss_trace.json"));
    trace << trace_to_json(result).dump(2) << '\n';
    run.finish();
    return 0;
}

int cmd_evaluate(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);

    const Checkpoint ck = load_checkpoint(ctx.config.get_str("eval", "checkpoint"));
    const Dataset ds = load_dataset(ctx.config.get_str("eval", "dataset"));
    EvalSettings es;
    es.k = static_cast<std::size_t>(ctx.config.get_int("eval", "k", 10));
    es.sample_negatives = ctx.config.get_bool("eval", "sample_negatives", false);
    es.negative_count =
        static_cast<std::size_t>(ctx.config.get_int("eval", "negative_count", 100));
    es.seed = seed;
    es.threads = ctx.threads;
    const std::string which = ctx.config.get_str("eval", "split", "test");
    const auto& holdouts = which == "validation" ? ds.split.validation
                          : which == "test"      ? ds.split.test
                          : throw ConfigError("eval.split must be test or validation");

    const MetricsReport m = evaluate(ck.model, holdouts, es);
    auto out = open_output(run.path("metrics.json"));
    out << metrics_to_json(m).dump(2) << '\n';
    auto text = open_output(run.path("metrics.txt"));
    write_metrics_text(text, m);
    run.finish();
    return 0;
}

int cmd_ablate(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);

    const Dataset ds = load_dataset(ctx.config.get_str("data", "dataset"));
    const ModelConfig mc = model_config_from(ctx.config, ds.vocab);
    const TrainSettings ts = train_settings_from(ctx.config, seed);

    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_on(ctx.config.get_str("ablate", "seeds",
                                                     std::to_string(seed)),
                                  ',')) {
        try {
            seeds.push_back(std::stoull(s));
        } catch (const std::exception&) {
            throw ConfigError("ablate.seeds must be a comma-separated integer list");
        }
    }

    const AblationRun ab = ablate(ds.split, mc, ts, seeds);

    nlohmann::json j;
    j["seeds"] = seeds;
    j["k"] = ts.eval_k;
    j["arms"] = nlohmann::json::array();
    for (const auto& arm : ab.table.arms)
        j["arms"].push_back({{"arm", arm_name(arm.arm)},
                             {"hr_mean", arm.hr_mean},
                             {"hr_std", arm.hr_std},
                             {"ndcg_mean", arm.ndcg_mean},
                             {"ndcg_std", arm.ndcg_std},
                             {"hr_per_seed", arm.hr_per_seed},
                             {"ndcg_per_seed", arm.ndcg_per_seed}});
    auto out = open_output(run.path("ablation.json"));
    out << j.dump(2) << '\n';

    auto text = open_output(run.path("ablation.txt"));
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %10s %10s\n", "arm", "HR mean",
                  "HR std", "NDCG mean", "NDCG std");
    text << buf;
    for (const auto& arm : ab.table.arms) {
        std::snprintf(buf, sizeof(buf), "%-16s %10.5f %10.5f %10.5f %10.5f\n",
                      arm_name(arm.arm).c_str(), arm.hr_mean, arm.hr_std, arm.ndcg_mean,
                      arm.ndcg_std);
        text << buf;
    }
    run.finish();
    return 0;
}

int cmd_intensity_export(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);

    const Checkpoint ck = load_checkpoint(ctx.config.get_str("intensity", "checkpoint"));
    const Dataset ds = load_dataset(ctx.config.get_str("intensity", "dataset"));
    const std::string user = ctx.config.get_str("intensity", "user");

    const EventSequence* seq = nullptr;
    for (const auto& s : ds.sequences)
        if (s.user_id == user) seq = &s;
    if (!seq) throw DataError("intensity: unknown user " + user);

    std::vector<double> grid;
    const std::size_t points =
        static_cast<std::size_t>(ctx.config.get_int("intensity", "grid_points", 200));
    double start = seq->times.front(), stop = seq->times.back();
    if (ctx.config.has("intensity", "grid")) {
        const auto parts = split_on(ctx.config.get_str("intensity", "grid"), ':');
        if (parts.size() != 2) throw ConfigError("intensity.grid must be start:end");
        start = std::stod(parts[0]);
        stop = std::stod(parts[1]);
    }
    if (!(stop >= start)) throw ConfigError("intensity: empty grid window");
    for (std::size_t i = 0; i < points; ++i)
        grid.push_back(points == 1 ? start
                                   : start + (stop - start) * static_cast<double>(i) /
                                                 static_cast<double>(points - 1));

    std::vector<std::size_t> heads(ck.model.config.n_heads);
    for (std::size_t k = 0; k < heads.size(); ++k) heads[k] = k;
    const NumArray m = intensity_matrix(ck.model, *seq, grid, heads);

    auto out = open_output(run.path("intensity.csv"));
    out << "time";
    for (std::size_t k = 0; k < heads.size(); ++k) out << ",head_" << k;
    out << '\n';
    char buf[64];
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::snprintf(buf, sizeof(buf), "%.17g", grid[g]);
        out << buf;
        for (std::size_t k = 0; k < heads.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.at(g, k));
            out << ',' << buf;
        }
        out << '\n';
    }
    run.finish();
    return 0;
}

int cmd_bound(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);

    const Checkpoint ck = load_checkpoint(ctx.config.get_str("bound", "checkpoint"));
    const Dataset ds = load_dataset(ctx.config.get_str("bound", "dataset"));
    const double epsilon = ctx.config.get_double("bound", "epsilon", 0.01);
    const double delta = ctx.config.get_double("bound", "delta", 0.05);

    // One sample per test user: the last-position attention row paired
    // with the held-out target item.
    std::vector<std::vector<double>> rows;
    std::vector<MuSample> samples;
    const std::size_t n = ck.model.config.n_items;
    for (const auto& user : ds.split.test) {
        Tape tape;
        ModelVars vars = bind(tape, ck.model);
        ForwardOut fwd = forward_sequence(tape, ck.model, vars, user.context.items);
        const NumArray& P = tape.value(fwd.P);
        const NumArray& V = tape.value(fwd.V);
        const NumArray& B = ck.model.params.get("B");  // item-major: (n, d)
        const std::size_t last = user.context.length() - 1;

        MuSample ms;
        ms.item = user.holdout_item;
        ms.p_row.resize(user.context.length());
        for (std::size_t k = 0; k < ms.p_row.size(); ++k) ms.p_row[k] = P.at(last, k);
        ms.vb.assign(user.context.length(), std::vector<double>(n, 0.0));
        for (std::size_t k = 0; k < ms.vb.size(); ++k)
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t c = 0; c < ck.model.config.d; ++c)
                    s += V.at(k, c) * B.at(i, c);
                ms.vb[k][i] = s;
            }
        rows.push_back(ms.p_row);
        samples.push_back(std::move(ms));
    }
    if (rows.empty()) throw DataError("bound: no test users");

    BoundInputs inputs;
    inputs.lipschitz = ctx.config.get_double("bound", "lipschitz", 1.0);
    inputs.mu = empirical_mu(samples);
    inputs.rho = empirical_rho(rows, epsilon);
    inputs.omega_size = rows.size();
    inputs.delta = delta;
    inputs.d = ck.model.config.d;
    inputs.m = ds.sequences.size();
    inputs.n = n;
    inputs.log2_capacity = ctx.config.get_bool("bound", "log2_capacity", false);
    const BoundReport report = bound_complexity_term(inputs);

    nlohmann::json j;
    j["rho"] = inputs.rho;
    j["mu"] = inputs.mu;
    j["C"] = report.capacity;
    j["complexity_term"] = report.complexity_term;
    j["epsilon"] = epsilon;
    j["omega_size"] = inputs.omega_size;
    j["delta"] = delta;
    j["lipschitz"] = inputs.lipschitz;
    j["d"] = inputs.d;
    j["m"] = inputs.m;
    j["n"] = inputs.n;
    j["p_rows"] = "last-position attention rows of test users";
    auto out = open_output(run.path("bound.json"));
    out << j.dump(2) << '\n';
    run.finish();
    return 0;
}

std::vector<GradCheckRun> run_gradcheck(const RunConfig& cfg, std::uint64_t seed) {
    const std::size_t users =
        static_cast<std::size_t>(cfg.get_int("gradcheck", "users", 2));
    const std::size_t seq_len =
        static_cast<std::size_t>(cfg.get_int("gradcheck", "seq_len", 10));
    const std::size_t items = static_cast<std::size_t>(cfg.get_int("model", "items", 20));
    const double eps = cfg.get_double("gradcheck", "eps", 1e-5);
    const double tol = cfg.get_double("gradcheck", "tol", 1e-4);

    const auto events = make_toy_events(users, seq_len, items, seed);
    Dataset ds = ingest_events(events, std::nullopt, 1, 1, SplitRatios{1, 1, 1},
                               mix_seed(seed, 1));
    const ModelConfig mc = model_config_from(cfg, ds.vocab);
    const TrainSettings ts = train_settings_from(cfg, seed);
    Model model = Model::init(mc, seed);

    // Fixed batch: every sequence, with negatives drawn once.
    std::vector<const EventSequence*> batch;
    std::vector<std::vector<PositionTarget>> targets;
    Rng neg_rng(mix_seed(seed, 2));
    for (const auto& seq : ds.sequences) {
        batch.push_back(&seq);
        targets.push_back(
            make_position_targets(seq, mc.n_items, ts.negatives, neg_rng));
    }

    std::vector<std::string> methods;
    const std::string which = cfg.get_str("gradcheck", "integrators", "both");
    if (which == "both") {
        methods = {"trapezoid", "monte_carlo"};
    } else {
        methods = {which};
    }

    std::vector<GradCheckRun> runs;
    for (const auto& method : methods) {
        IntegratorConfig integ{parse_integrator(method), ts.mc_samples, mix_seed(seed, 3)};
        auto builder = [&](Tape& tape, const ParamStore& params) -> Var {
            Model work;
            work.config = mc;
            work.params = params;
            ModelVars vars = bind(tape, work);
            return total_loss(tape, work, vars, batch, targets, ts.gamma, integ);
        };
        GradCheckRun gr;
        gr.integrator = method;
        gr.report = grad_check(builder, model.params, eps);
        gr.pass = gr.report.max_rel_err < tol;
        runs.push_back(std::move(gr));
    }
    return runs;
}

int cmd_gradcheck(CommandContext& ctx) {
    const std::uint64_t seed = resolve_seed(ctx);
    RunDir run(ctx, seed);

    const auto runs = run_gradcheck(ctx.config, seed);
    bool all_pass = true;
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : runs) {
        all_pass = all_pass && r.pass;
        j.push_back({{"integrator", r.integrator},
                     {"max_rel_err", r.report.max_rel_err},
                     {"worst_param", r.report.worst_param},
                     {"worst_index", r.report.worst_index},
                     {"ad", r.report.worst_ad},
                     {"fd", r.report.worst_fd},
                     {"checked", r.report.checked},
                     {"pass", r.pass}});
        log_info("gradcheck %s: max rel err %.3g (%s[%zu])", r.integrator.c_str(),
                 r.report.max_rel_err, r.report.worst_param.c_str(),
                 r.report.worst_index);
    }
    auto out = open_output(run.path("gradcheck.json"));
    out << nlohmann::json{{"pass", all_pass}, {"runs", j}}.dump(2) << '\n';
    run.finish();
    if (!all_pass) throw NumericError("gradcheck failed");
    return 0;
}

}  // namespace smattn
