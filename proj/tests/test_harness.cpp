#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prefrank/harness.hpp"
#include "prefrank/report.hpp"

using namespace prefrank;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_synthetic(std::string_view sampler = "guro") {
    ExperimentConfig c;
    c.sampler.kind = parse_sampler_kind(sampler);
    c.synthetic.n = 12;
    c.synthetic.d = 3;
    c.budget = 10;
    c.eval_stride = 5;
    c.seeds = {1, 2, 3};
    return c;
}

std::string to_csv(const std::vector<TrajectoryRecord>& r) {
    std::ostringstream out;
    write_trajectory_csv(r, out);
    return out.str();
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / "prefrank_harness" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

TrajectoryRecord rec(const std::string& algo, std::uint64_t seed, std::size_t step, double err) {
    TrajectoryRecord r;
    r.algorithm = algo;
    r.seed = seed;
    r.step = step;
    r.ordering_error = err;
    return r;
}

const SummaryRow& find_row(const Summary& s, const std::string& algo, std::size_t step, const std::string& metric) {
    for (const auto& r : s.rows)
        if (r.algorithm == algo && r.step == step && r.metric == metric) return r;
    throw std::runtime_error("row not found");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("harness-cli") {

TEST_CASE("record bookkeeping") {
    const auto cfg = small_synthetic();
    const auto r = run_all(cfg, load_experiment_data(cfg));
    REQUIRE(r.size() == 6);
    CHECK(r[0].seed == 1);
    CHECK(r[0].step == 5);
    CHECK(r[1].step == 10);
    CHECK(r[5].seed == 3);
    for (const auto& x : r) {
        CHECK(x.ordering_error.has_value());
        CHECK_FALSE(x.holdout_error.has_value());
        CHECK_FALSE(x.truncated);
        CHECK(x.pair_i < x.pair_j);
    }
}

TEST_CASE("final step is always recorded") {
    auto cfg = small_synthetic();
    cfg.budget = 7;
    cfg.seeds = {4};
    const auto r = run_all(cfg, load_experiment_data(cfg));
    REQUIRE(r.size() == 2);
    CHECK(r[1].step == 7);
}

TEST_CASE("runs are bitwise deterministic") {
    for (auto s : {"guro", "bayes-guro", "uniform", "colstim", "bald"}) {
        auto cfg = small_synthetic(s);
        cfg.budget = 30;
        const auto data = load_experiment_data(cfg);
        CHECK(to_csv(run_all(cfg, data)) == to_csv(run_all(cfg, data)));
    }
}

TEST_CASE("parallel seeds match serial execution") {
    auto cfg = small_synthetic("bayes-guro");
    cfg.budget = 25;
    cfg.seeds = parse_seed_list("1-6");
    const auto data = load_experiment_data(cfg);
    const auto serial = run_all(cfg, data);
    cfg.threads = 4;
    CHECK(run_all(cfg, data) == serial);
}

TEST_CASE("seed lists") {
    CHECK(parse_seed_list("1-3,7") == std::vector<std::uint64_t>{1, 2, 3, 7});
    CHECK(parse_seed_list("5") == std::vector<std::uint64_t>{5});
    CHECK_THROWS_AS(parse_seed_list("3-1"), ConfigError);
    CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
    CHECK_THROWS_AS(parse_seed_list("a"), ConfigError);
}

TEST_CASE("config parsing") {
    std::istringstream in(
        "# comment\n"
        "scenario = replay-pool\n"
        "sampler = bayes-guro   # trailing comment\n"
        "posterior_samples = 20\n"
        "budget = 50\n"
        "seeds = 0-4\n"
        "replay_annotations = 300\n"
        "n = 20\n"
        "\n");
    const auto c = parse_config(in);
    CHECK(c.scenario == Scenario::ReplayPool);
    CHECK(c.sampler.kind == SamplerKind::BayesGuro);
    CHECK(c.sampler.posterior_samples == 20);
    CHECK(c.seeds.size() == 5);
    CHECK(c.synthetic.n == 20);
    CHECK(c.model_kind() == ModelKind::Bayes);
    CHECK(c.algorithm() == "bayes-guro");
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config errors") {
    ExperimentConfig c;
    CHECK_THROWS_AS(apply_config_value(c, "nope", "1"), ConfigError);
    CHECK_THROWS_AS(apply_config_value(c, "budget", "-3"), ConfigError);
    CHECK_THROWS_AS(apply_config_value(c, "reg", "abc"), ConfigError);
    CHECK_THROWS_AS(apply_config_value(c, "sampler", "best"), ConfigError);
    CHECK_THROWS_AS(apply_config_value(c, "scenario", "live"), ConfigError);
    std::istringstream bad("budget 10\n");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    c = ExperimentConfig{};
    c.budget = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.scenario = Scenario::ReplayPool;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.scenario = Scenario::GeneralizationSplit;
    c.sampler.kind = SamplerKind::TrueSkill;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.bound = BoundEval{};
    c.sampler.kind = SamplerKind::TrueSkill;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("non-default model shows in the algorithm label") {
    auto c = small_synthetic();
    c.model = ModelKind::Hybrid;
    CHECK(c.algorithm() == "guro-hybrid");
    c.label = "mine";
    CHECK(c.algorithm() == "mine");
}

TEST_CASE("replay exhaustion truncates and flags the last record") {
    auto c = small_synthetic("guro");
    c.scenario = Scenario::ReplayPool;
    c.replay_annotations = 40;
    c.holdout_fraction = 0.25;  // 30 replay annotations
    c.budget = 100;
    c.eval_stride = 7;
    c.seeds = {9};
    c.validate();
    const auto r = run_all(c, load_experiment_data(c));
    REQUIRE_FALSE(r.empty());
    CHECK(r.back().truncated);
    CHECK(r.back().step == 30);
    CHECK(r.back().holdout_error.has_value());
    for (std::size_t k = 0; k + 1 < r.size(); ++k) CHECK_FALSE(r[k].truncated);
}

TEST_CASE("generalization split reports eval error and gap") {
    auto c = small_synthetic();
    c.scenario = Scenario::GeneralizationSplit;
    c.synthetic.n = 20;
    c.seeds = {1};
    const auto r = run_all(c, load_experiment_data(c));
    REQUIRE(r.size() == 2);
    REQUIRE(r[1].gap.has_value());
    CHECK(*r[1].gap == doctest::Approx(*r[1].eval_ordering_error - *r[1].ordering_error));
}

TEST_CASE("few-shot items join at the configured step") {
    auto c = small_synthetic("guro");
    c.scenario = Scenario::FewShotAdd;
    c.model = ModelKind::Hybrid;
    c.synthetic.n = 16;
    c.replay_annotations = 2000;
    c.few_shot_initial = 8;
    c.few_shot_add_at = 20;
    c.budget = 40;
    c.eval_stride = 1;
    c.seeds = {2};
    c.validate();
    const auto r = run_all(c, load_experiment_data(c));
    REQUIRE(r.size() == 40);
    bool new_item_seen = false;
    for (const auto& x : r) {
        if (x.step <= 20) CHECK(x.pair_j < 8);
        if (x.pair_j >= 8) new_item_seen = true;
    }
    CHECK(new_item_seen);
}

TEST_CASE("bound columns on synthetic runs") {
    auto c = small_synthetic();
    c.bound = BoundEval{};
    c.seeds = {1};
    const auto r = run_all(c, load_experiment_data(c));
    for (const auto& x : r) {
        REQUIRE(x.bound.has_value());
        CHECK(*x.bound >= 0.0);
        CHECK(*x.bound <= 1.0);
        CHECK(x.bound_vacuous.has_value());
    }
}

TEST_CASE("trajectory CSV round trip") {
    auto c = small_synthetic();
    c.bound = BoundEval{};
    const auto r = run_all(c, load_experiment_data(c));
    std::istringstream in(to_csv(r));
    CHECK(read_trajectory_csv(in) == r);
}

TEST_CASE("aggregate of one seed") {
    const auto s = aggregate_runs({rec("a", 1, 10, 0.25)});
    const auto& row = find_row(s, "a", 10, "ordering_error");
    CHECK(row.n == 1);
    CHECK(row.mean == 0.25);
    CHECK(row.sd == 0.0);
    CHECK(row.ci_lo == 0.25);
    CHECK(row.ci_hi == 0.25);
}

TEST_CASE("aggregate of two seeds") {
    const auto s = aggregate_runs({rec("a", 1, 10, 0.2), rec("a", 2, 10, 0.4)});
    CHECK(find_row(s, "a", 10, "ordering_error").mean == doctest::Approx(0.3));
}

TEST_CASE("confidence interval against the direct formula") {
    const std::vector<double> v{0.11, 0.25, 0.19, 0.32, 0.08};
    std::vector<TrajectoryRecord> rs;
    for (std::size_t k = 0; k < v.size(); ++k) rs.push_back(rec("x", k, 100, v[k]));
    const auto& row = find_row(aggregate_runs(rs), "x", 100, "ordering_error");
    double m = 0.0;
    for (double x : v) m += x;
    m /= 5.0;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / 4.0);
    const double tq = 2.7764451051977987;  // t_{0.975, 4}
    CHECK(row.mean == doctest::Approx(m).epsilon(1e-14));
    CHECK(row.sd == doctest::Approx(sd).epsilon(1e-14));
    CHECK(row.ci_lo == doctest::Approx(m - tq * sd / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(row.ci_hi == doctest::Approx(m + tq * sd / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("misaligned step grids are rejected") {
    CHECK_THROWS_AS(aggregate_runs({rec("a", 1, 10, 0.1), rec("a", 2, 20, 0.1)}), AlignmentError);
    CHECK_THROWS_AS(aggregate_runs({rec("a", 1, 10, 0.1), rec("a", 1, 10, 0.2)}), AlignmentError);
    // Different algorithms may use different grids.
    CHECK_NOTHROW(aggregate_runs({rec("a", 1, 10, 0.1), rec("b", 1, 20, 0.1)}));
}

TEST_CASE("paired one-sided test") {
    const std::vector<double> a{0.1, 0.2, 0.15, 0.12}, b{0.3, 0.35, 0.2, 0.4};
    std::vector<double> d(4);
    double m = 0.0;
    for (int k = 0; k < 4; ++k) m += (d[k] = a[k] - b[k]) / 4.0;
    double ss = 0.0;
    for (double x : d) ss += (x - m) * (x - m);
    const double t = m / std::sqrt(ss / 3.0 / 4.0);
    const double expect = boost::math::cdf(boost::math::students_t(3.0), t);
    CHECK(paired_t_pvalue_less(a, b) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(paired_t_pvalue_less(b, a) == doctest::Approx(1.0 - expect).epsilon(1e-12));
}

TEST_CASE("empty summary writes headers only") {
    std::ostringstream wide, lng;
    write_aggregate_csv(Summary{}, wide);
    write_long_csv(Summary{}, lng);
    const std::string w = wide.str();
    CHECK(std::count(w.begin(), w.end(), '\n') == 1);
    CHECK(lng.str() == "step,metric,mean,sd,ci_lo,ci_hi,algorithm\n");
}

TEST_CASE("long CSV round trip") {
    auto c = small_synthetic();
    c.bound = BoundEval{};
    const auto s = aggregate_runs(run_all(c, load_experiment_data(c)));
    std::stringstream buf;
    write_long_csv(s, buf);
    const auto back = read_long_csv(buf);
    REQUIRE(back.rows.size() == s.rows.size());
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
        CHECK(back.rows[k].algorithm == s.rows[k].algorithm);
        CHECK(back.rows[k].step == s.rows[k].step);
        CHECK(back.rows[k].metric == s.rows[k].metric);
        CHECK(back.rows[k].mean == s.rows[k].mean);
        CHECK(back.rows[k].ci_hi == s.rows[k].ci_hi);
    }
}

TEST_CASE("wide schema is the same across scenarios") {
    auto a = small_synthetic();
    auto b = small_synthetic();
    b.scenario = Scenario::ReplayPool;
    b.replay_annotations = 200;
    std::ostringstream wa, wb;
    write_aggregate_csv(aggregate_runs(run_all(a, load_experiment_data(a))), wa);
    write_aggregate_csv(aggregate_runs(run_all(b, load_experiment_data(b))), wb);
    CHECK(wa.str().substr(0, wa.str().find('\n')) == wb.str().substr(0, wb.str().find('\n')));
}

TEST_CASE("command line run, aggregate and report") {
    const auto dir = scratch("cli");
    {
        std::ofstream cfg(dir / "exp.cfg");
        cfg << "scenario = synthetic-logistic\nsampler = guro\nn = 10\nd = 2\nbudget = 12\neval_stride = 4\nseeds = 1-3\n";
    }
    const std::string cli = PREFRANK_CLI_PATH;
    const auto run = [&](const std::string& args) {
        return std::system((cli + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
    };
    CHECK(run("run -c " + (dir / "exp.cfg").string() + " -o " + (dir / "a.csv").string()) == 0);
    CHECK(run("run -c " + (dir / "exp.cfg").string() + " -o " + (dir / "b.csv").string()) == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(run("run -c " + (dir / "exp.cfg").string() + " --sampler uniform --budget 8 -o " + (dir / "u.csv").string()) == 0);
    const auto u = read_trajectory_csv(dir / "u.csv");
    REQUIRE_FALSE(u.empty());
    CHECK(u.front().algorithm == "uniform");
    CHECK(u.back().step == 8);

    CHECK(run("aggregate " + (dir / "a.csv").string() + " " + (dir / "u.csv").string() + " -o " +
              (dir / "agg.csv").string()) == 0);
    CHECK(fs::exists(dir / "agg.csv"));
    CHECK(run("report " + (dir / "a.csv").string() + " --out-dir " + (dir / "rep").string()) == 0);
    CHECK(fs::exists(dir / "rep" / "long.csv"));
    CHECK(fs::exists(dir / "rep" / "aggregate.csv"));

    CHECK(run("run -c " + (dir / "missing.cfg").string()) != 0);
    CHECK(run("run -c " + (dir / "exp.cfg").string() + " --sampler nope") != 0);
    CHECK(slurp(dir / "log.txt").find("valid names") != std::string::npos);
}

}  // TEST_SUITE
