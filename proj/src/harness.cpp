#include "prefrank/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <variant>

#include "prefrank/bounds.hpp"
#include "prefrank/simulate.hpp"

namespace prefrank {

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::SyntheticLogistic: return "synthetic-logistic";
        case Scenario::ReplayPool: return "replay-pool";
        case Scenario::GeneralizationSplit: return "generalization-split";
        case Scenario::FewShotAdd: return "few-shot-add";
    }
    return "?";
}

Scenario parse_scenario(std::string_view name) {
    for (auto s : {Scenario::SyntheticLogistic, Scenario::ReplayPool, Scenario::GeneralizationSplit, Scenario::FewShotAdd})
        if (to_string(s) == name) return s;
    throw ConfigError("unknown scenario '" + std::string(name) +
                      "' (valid: synthetic-logistic, replay-pool, generalization-split, few-shot-add)");
}

std::string ExperimentConfig::algorithm() const {
    if (!label.empty()) return label;
    std::string name(to_string(sampler.kind));
    if (model_kind() != default_model_for(sampler.kind)) name += "-" + std::string(to_string(model_kind()));
    return name;
}

LearnerConfig ExperimentConfig::learner_config() const {
    LearnerConfig lc;
    lc.model = model_kind();
    lc.sampler = sampler;
    lc.reg = reg;
    lc.reg_zeta = reg_zeta;
    lc.refit_stride = refit_stride;
    lc.budget = budget;
    return lc;
}

namespace {

bool synthetic_source(const ExperimentConfig& c) { return !c.items_path.has_value(); }

bool uses_replay(const ExperimentConfig& c) {
    if (c.scenario == Scenario::ReplayPool) return true;
    if (c.scenario == Scenario::FewShotAdd) return c.comparisons_path.has_value() || c.replay_annotations > 0;
    return false;
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        learner_config().validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (budget < 1) throw ConfigError("budget must be >= 1");
    if (seeds.empty()) throw ConfigError("seed list is empty");
    if (eval_stride < 1) throw ConfigError("eval_stride must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("holdout_fraction must be in [0, 1)");
    if (synthetic_source(*this)) {
        if (synthetic.n < 2 || synthetic.d < 1) throw ConfigError("synthetic instances need n >= 2 and d >= 1");
        if (!(synthetic.noise > 0.0)) throw ConfigError("noise must be positive");
        if (!(synthetic.theta_range > 0.0)) throw ConfigError("theta_range must be positive");
    }
    if (items_path && (scenario == Scenario::SyntheticLogistic || scenario == Scenario::GeneralizationSplit))
        throw ConfigError("this scenario generates its own items; remove 'items'");
    if (scenario == Scenario::ReplayPool && items_path && !comparisons_path)
        throw ConfigError("replay-pool with an items file needs a comparisons file");
    if (scenario == Scenario::ReplayPool && !items_path && replay_annotations == 0)
        throw ConfigError("replay-pool needs a comparisons file or replay_annotations > 0");
    if (comparisons_path && !items_path) throw ConfigError("a comparisons file needs an items file");
    if (scenario == Scenario::FewShotAdd && items_path && !comparisons_path)
        throw ConfigError("few-shot-add with an items file needs a comparisons file");
    if (scenario == Scenario::GeneralizationSplit) {
        if (synthetic.n < 4) throw ConfigError("generalization-split needs n >= 4");
        if (model_kind() == ModelKind::TrueSkill) throw ConfigError("the trueskill model cannot score unseen items");
    }
    if (scenario == Scenario::FewShotAdd) {
        if (few_shot_initial < 2) throw ConfigError("few_shot_initial must be >= 2");
        if (synthetic_source(*this) && few_shot_initial >= synthetic.n)
            throw ConfigError("few_shot_initial must be below n");
        if (few_shot_add_at < 1) throw ConfigError("few_shot_add_at must be >= 1");
    }
    if (bound) {
        if (!(bound->eps > 0.0 && bound->eps <= 1.0)) throw ConfigError("bound_eps must be in (0, 1]");
        if (!synthetic_source(*this)) throw ConfigError("bound evaluation needs a synthetic instance with known theta_*");
        if (model_kind() == ModelKind::TrueSkill || model_kind() == ModelKind::Hybrid)
            throw ConfigError("bound evaluation needs a contextual or bayes model");
        if (bound->mode == ConstantsMode::Fixed && !(bound->S >= 0.0 && bound->Q > 0.0 && bound->lambda0 > 0.0))
            throw ConfigError("fixed bound constants need S >= 0, Q > 0, lambda0 > 0");
    }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_uint(const std::string& key, const std::string& v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(out))
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            seeds.push_back(parse_uint<std::uint64_t>("seeds", part));
            continue;
        }
        const auto lo = parse_uint<std::uint64_t>("seeds", trim(part.substr(0, dash)));
        const auto hi = parse_uint<std::uint64_t>("seeds", trim(part.substr(dash + 1)));
        if (hi < lo) throw ConfigError("seed range '" + part + "' is reversed");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (seeds.empty()) throw ConfigError("seed list is empty");
    return seeds;
}

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    const std::string& v = value;
    auto bound = [&]() -> BoundEval& {
        if (!c.bound) c.bound = BoundEval{};
        return *c.bound;
    };
    try {
        if (key == "scenario") c.scenario = parse_scenario(v);
        else if (key == "sampler") c.sampler.kind = parse_sampler_kind(v);
        else if (key == "model") c.model = parse_model_kind(v);
        else if (key == "reg") c.reg = parse_double(key, v);
        else if (key == "reg_zeta") c.reg_zeta = parse_double(key, v);
        else if (key == "budget") c.budget = parse_uint<std::size_t>(key, v);
        else if (key == "seeds") c.seeds = parse_seed_list(v);
        else if (key == "eval_stride") c.eval_stride = parse_uint<std::size_t>(key, v);
        else if (key == "refit_stride") c.refit_stride = parse_uint<std::size_t>(key, v);
        else if (key == "posterior_samples") c.sampler.posterior_samples = parse_uint<std::size_t>(key, v);
        else if (key == "candidate_cap") c.sampler.candidate_cap = parse_uint<std::size_t>(key, v);
        else if (key == "confidence_width") c.sampler.confidence_width = parse_double(key, v);
        else if (key == "bald_halved_exponent") c.sampler.bald_halved_exponent = parse_bool(key, v);
        else if (key == "trueskill_anchor") c.sampler.trueskill_anchor = parse_bool(key, v);
        else if (key == "bound") {
            if (parse_bool(key, v)) bound();
            else c.bound.reset();
        } else if (key == "bound_eps") bound().eps = parse_double(key, v);
        else if (key == "bound_constants") {
            if (v == "estimated") bound().mode = ConstantsMode::Estimated;
            else if (v == "fixed") bound().mode = ConstantsMode::Fixed;
            else throw ConfigError("bound_constants must be 'estimated' or 'fixed'");
        } else if (key == "bound_S") bound().S = parse_double(key, v);
        else if (key == "bound_Q") bound().Q = parse_double(key, v);
        else if (key == "bound_lambda0") bound().lambda0 = parse_double(key, v);
        else if (key == "n") c.synthetic.n = parse_uint<std::size_t>(key, v);
        else if (key == "d") c.synthetic.d = parse_uint<std::size_t>(key, v);
        else if (key == "theta_range") c.synthetic.theta_range = parse_double(key, v);
        else if (key == "noise") c.synthetic.noise = parse_double(key, v);
        else if (key == "items") c.items_path = v;
        else if (key == "comparisons") c.comparisons_path = v;
        else if (key == "holdout_fraction") c.holdout_fraction = parse_double(key, v);
        else if (key == "replay_annotations") c.replay_annotations = parse_uint<std::size_t>(key, v);
        else if (key == "few_shot_initial") c.few_shot_initial = parse_uint<std::size_t>(key, v);
        else if (key == "few_shot_add_at") c.few_shot_add_at = parse_uint<std::size_t>(key, v);
        else if (key == "threads") c.threads = parse_uint<std::size_t>(key, v);
        else if (key == "wall_time") c.record_wall_time = parse_bool(key, v);
        else if (key == "label") c.label = v;
        else throw ConfigError("unknown config key '" + key + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_config_value(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    auto c = parse_config(in);
    const auto base = path.parent_path();
    if (c.items_path && c.items_path->is_relative()) c.items_path = base / *c.items_path;
    if (c.comparisons_path && c.comparisons_path->is_relative()) c.comparisons_path = base / *c.comparisons_path;
    return c;
}

// ---------------------------------------------------------------------------
// Runs

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
    ExperimentData data;
    if (cfg.items_path) data.pool = read_items_csv(*cfg.items_path);
    if (cfg.comparisons_path) data.comparisons = read_comparisons_csv(*cfg.comparisons_path, data.pool->size());
    return data;
}

namespace {

std::vector<ItemId> iota_ids(std::size_t lo, std::size_t hi) {
    std::vector<ItemId> ids(hi - lo);
    std::iota(ids.begin(), ids.end(), lo);
    return ids;
}

// Synthetic annotation pool: uniformly drawn pairs, random orientation.
std::vector<Comparison> synthetic_annotations(const ItemPool& pool, const Eigen::VectorXd& theta_star, double noise,
                                              std::size_t count, std::uint64_t seed) {
    Rng rng = make_substream(seed, "replay-data");
    LogisticAnnotator ann(theta_star, noise, make_substream(seed, "replay-labels"));
    std::uniform_int_distribution<std::size_t> item(0, pool.size() - 1);
    std::vector<Comparison> out;
    out.reserve(count);
    while (out.size() < count) {
        const ItemId i = item(rng), j = item(rng);
        if (i == j) continue;
        out.push_back({i, j, ann.annotate(diff_vector(pool, i, j))});
    }
    return out;
}

struct Environment {
    ItemPool pool;                          // every item the run will ever see
    std::optional<Eigen::VectorXd> truth;   // ground-truth scores over `pool`
    std::optional<Eigen::VectorXd> theta_star;  // effective, noise included
    std::vector<Comparison> holdout;
    std::optional<LogisticAnnotator> logistic;
    std::optional<ReplayAnnotator> replay;
    std::optional<ItemPool> eval_pool;
    std::optional<Eigen::VectorXd> eval_truth;
    std::size_t n_active = 0;
    std::size_t add_at = 0;  // 0: never
};

Environment build_environment(const ExperimentConfig& cfg, const ExperimentData& data, std::uint64_t seed) {
    Environment env;
    const auto& sp = cfg.synthetic;
    std::optional<Eigen::VectorXd> raw_theta;
    if (cfg.items_path) {
        env.pool = *data.pool;
        if (env.pool.has_true_scores()) env.truth = env.pool.true_scores();
    } else {
        Rng inst = make_substream(seed, "instance");
        auto si = make_synthetic_instance(sp.n, sp.d, sp.theta_range, inst);
        env.pool = std::move(si.pool);
        env.truth = env.pool.true_scores();
        raw_theta = si.theta_star;
        env.theta_star = sp.noise * si.theta_star;
    }

    if (cfg.scenario == Scenario::GeneralizationSplit) {
        const auto split = split_generalization(env.pool, *env.truth);
        env.eval_pool = split.eval;
        env.eval_truth = split.eval.true_scores();
        env.pool = split.train;
        env.truth = split.train.true_scores();
    }

    if (uses_replay(cfg)) {
        std::vector<Comparison> comps = data.comparisons
                                            ? *data.comparisons
                                            : synthetic_annotations(env.pool, *raw_theta, sp.noise,
                                                                    cfg.replay_annotations, seed);
        Rng hr = make_substream(seed, "holdout");
        auto cp = split_holdout(std::move(comps), cfg.holdout_fraction, hr);
        env.holdout = std::move(cp.holdout);
        env.replay.emplace(cp.replay, env.pool.size());
    } else {
        env.logistic.emplace(*raw_theta, sp.noise, make_substream(seed, "annotator"));
    }

    env.n_active = env.pool.size();
    if (cfg.scenario == Scenario::FewShotAdd) {
        if (cfg.few_shot_initial >= env.pool.size()) throw ConfigError("few_shot_initial must be below the pool size");
        env.n_active = cfg.few_shot_initial;
        env.add_at = cfg.few_shot_add_at;
    }
    return env;
}

struct BoundCache {
    std::size_t n_active = 0;
    MarginSpec margins;
    ItemPool pool;
};

void fill_metrics(TrajectoryRecord& rec, const ExperimentConfig& cfg, const Environment& env, const Learner& learner,
                  BoundCache& cache) {
    const Eigen::VectorXd scores = learner.scores();
    const std::size_t n = learner.pool().size();
    if (env.truth) {
        rec.ordering_error = kendall_tau_error(induced_ranking(scores), induced_ranking(env.truth->head(static_cast<Eigen::Index>(n))));
    }
    if (!env.holdout.empty()) {
        std::vector<Comparison> active;
        for (const auto& c : env.holdout)
            if (c.i < n && c.j < n) active.push_back(c);
        if (!active.empty()) rec.holdout_error = holdout_error(scores, active);
    }
    if (env.eval_pool) {
        const Eigen::VectorXd eval_scores = env.eval_pool->features() * learner.theta();
        rec.eval_ordering_error = kendall_tau_error(induced_ranking(eval_scores), induced_ranking(*env.eval_truth));
        if (rec.ordering_error) rec.gap = *rec.eval_ordering_error - *rec.ordering_error;
    }
    if (cfg.bound && env.theta_star && learner.info()) {
        if (cache.n_active != n) {
            cache.pool = learner.pool();
            cache.margins = oracle_margins(cache.pool, *env.theta_star);
            cache.n_active = n;
        }
        const std::size_t t = rec.step;
        BoundConstants consts;
        if (cfg.bound->mode == ConstantsMode::Fixed) {
            consts.S = cfg.bound->S;
            consts.Q = cfg.bound->Q;
            consts.lambda0 = cfg.bound->lambda0;
            consts.d = learner.pool().dim();
        } else {
            consts = estimate_constants(cache.pool, *env.theta_star, *learner.info(), t);
        }
        const auto b = ordering_error_bound(cache.pool, learner.theta(), *learner.info(), t, cfg.bound->eps, consts,
                                            cache.margins);
        rec.bound = b.value;
        rec.bound_approx = b.approx;
        rec.bound_vacuous = b.vacuous;
        rec.bound_first_order = b.max_first_order;
    }
}

}  // namespace

std::vector<TrajectoryRecord> run_seed(const ExperimentConfig& cfg, const ExperimentData& data, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Environment env = build_environment(cfg, data, seed);
    ItemPool initial = env.n_active == env.pool.size() ? env.pool : env.pool.subset(iota_ids(0, env.n_active));
    Learner learner(std::move(initial), cfg.learner_config(), substream_seed(seed, "learner"));
    Rng replay_rng = make_substream(seed, "annotator");
    BoundCache cache;
    const std::string algo = cfg.algorithm();

    std::vector<TrajectoryRecord> out;
    Pair last{0, 0};
    auto record = [&](std::size_t t, bool truncated) {
        TrajectoryRecord rec;
        rec.algorithm = algo;
        rec.seed = seed;
        rec.step = t;
        rec.pair_i = last.first;
        rec.pair_j = last.second;
        rec.truncated = truncated;
        fill_metrics(rec, cfg, env, learner, cache);
        if (cfg.record_wall_time)
            rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.push_back(std::move(rec));
    };

    for (std::size_t t = 1; t <= cfg.budget; ++t) {
        if (env.add_at && t - 1 == env.add_at && env.n_active < env.pool.size()) {
            learner.add_items(env.pool.subset(iota_ids(env.n_active, env.pool.size())));
            env.n_active = env.pool.size();
        }
        const PairDomain domain = env.replay ? env.replay->eligible(env.n_active) : PairDomain::all(env.n_active);
        if (domain.empty()) {
            if (!out.empty() && out.back().step == t - 1) out.back().truncated = true;
            else if (t > 1) record(t - 1, true);
            break;
        }
        last = learner.select(domain);
        const int c = env.replay ? env.replay->annotate(last.first, last.second, replay_rng)
                                 : env.logistic->annotate(diff_vector(learner.pool(), last.first, last.second));
        learner.observe(last.first, last.second, c);
        if (t % cfg.eval_stride == 0 || t == cfg.budget) record(t, false);
    }
    return out;
}

std::vector<TrajectoryRecord> run_all(const ExperimentConfig& cfg, const ExperimentData& data) {
    const std::size_t m = cfg.seeds.size();
    std::vector<std::vector<TrajectoryRecord>> per_seed(m);
    std::vector<std::exception_ptr> errors(m);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < m;) {
            try {
                per_seed[k] = run_seed(cfg, data, cfg.seeds[k]);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(cfg.threads, m);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<TrajectoryRecord> all;
    for (auto& v : per_seed) all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    return all;
}

void run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_path) {
    cfg.validate();
    const ExperimentData data = load_experiment_data(cfg);
    const auto records = run_all(cfg, data);
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write " + out_path.string());
    write_trajectory_csv(records, out, cfg.record_wall_time);
}

// ---------------------------------------------------------------------------
// Trajectory CSV

namespace {

constexpr const char* kColumns[] = {"algorithm", "seed",          "step",          "ordering_error", "holdout_error",
                                    "eval_ordering_error", "gap", "bound",         "bound_approx",   "bound_vacuous", "bound_first_order",
                                    "pair_i",    "pair_j",        "truncated"};

std::string fmt_double(std::optional<double> v) {
    if (!v) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void write_trajectory_csv(const std::vector<TrajectoryRecord>& records, std::ostream& out, bool wall_time) {
    for (std::size_t k = 0; k < std::size(kColumns); ++k) out << (k ? "," : "") << kColumns[k];
    if (wall_time) out << ",wall_time";
    out << '\n';
    for (const auto& r : records) {
        if (r.algorithm.find(',') != std::string::npos) throw ValidationError("algorithm label contains a comma");
        out << r.algorithm << ',' << r.seed << ',' << r.step << ',' << fmt_double(r.ordering_error) << ','
            << fmt_double(r.holdout_error) << ',' << fmt_double(r.eval_ordering_error) << ',' << fmt_double(r.gap)
            << ',' << fmt_double(r.bound) << ',' << fmt_double(r.bound_approx) << ','
            << (r.bound_vacuous ? (*r.bound_vacuous ? "1" : "0") : "") << ',' << fmt_double(r.bound_first_order)
            << ',' << r.pair_i << ',' << r.pair_j << ','
            << (r.truncated ? 1 : 0);
        if (wall_time) out << ',' << fmt_double(r.wall_time);
        out << '\n';
    }
}

std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("trajectory file is empty", 1);
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
    for (const char* c : kColumns)
        if (!col.count(c)) throw ParseError(std::string("trajectory header lacks column '") + c + "'", 1);
    const bool has_wall = col.count("wall_time") > 0;

    std::vector<TrajectoryRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size()) throw ParseError("wrong number of fields", lineno);
        auto get = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
        auto opt = [&](const char* name) -> std::optional<double> {
            const auto& s = get(name);
            if (s.empty()) return std::nullopt;
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size()) throw ParseError(std::string("bad number in column ") + name, lineno);
            return v;
        };
        auto uint = [&](const char* name) -> std::uint64_t {
            try {
                return parse_uint<std::uint64_t>(name, get(name));
            } catch (const ConfigError&) {
                throw ParseError(std::string("bad integer in column ") + name, lineno);
            }
        };
        TrajectoryRecord r;
        r.algorithm = get("algorithm");
        r.seed = uint("seed");
        r.step = uint("step");
        r.ordering_error = opt("ordering_error");
        r.holdout_error = opt("holdout_error");
        r.eval_ordering_error = opt("eval_ordering_error");
        r.gap = opt("gap");
        r.bound = opt("bound");
        r.bound_approx = opt("bound_approx");
        if (!get("bound_vacuous").empty()) r.bound_vacuous = uint("bound_vacuous") != 0;
        r.bound_first_order = opt("bound_first_order");
        r.pair_i = uint("pair_i");
        r.pair_j = uint("pair_j");
        r.truncated = uint("truncated") != 0;
        if (has_wall) r.wall_time = opt("wall_time");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TrajectoryRecord> read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    return read_trajectory_csv(in);
}

}  // namespace prefrank
