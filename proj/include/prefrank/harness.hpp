#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefrank/dataset.hpp"
#include "prefrank/learner.hpp"

namespace prefrank {

enum class Scenario { SyntheticLogistic, ReplayPool, GeneralizationSplit, FewShotAdd };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

struct SyntheticParams {
    std::size_t n = 100;
    std::size_t d = 10;
    double theta_range = 3.0;
    double noise = 0.5;  // lambda in P(c = 1) = sigma(lambda theta_*^T z)
};

enum class ConstantsMode { Estimated, Fixed };

struct BoundEval {
    double eps = 0.2;
    ConstantsMode mode = ConstantsMode::Estimated;
    // Only read in fixed mode.
    double S = 1.0;
    double Q = 1.0;
    double lambda0 = 1.0;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::SyntheticLogistic;
    SamplerSpec sampler;
    std::optional<ModelKind> model;  // defaults per sampler
    double reg = 1.0;
    double reg_zeta = 1.0;
    std::size_t budget = 100;
    std::vector<std::uint64_t> seeds{0};
    std::size_t eval_stride = 1;
    std::size_t refit_stride = 1;
    std::optional<BoundEval> bound;
    SyntheticParams synthetic;

    // Replay data: files, or synthetic annotations when no files are given.
    std::optional<std::filesystem::path> items_path;
    std::optional<std::filesystem::path> comparisons_path;
    double holdout_fraction = 0.1;
    std::size_t replay_annotations = 0;  // synthetic replay pool size

    // Few-shot: items with id >= few_shot_initial join after few_shot_add_at steps.
    std::size_t few_shot_initial = 0;
    std::size_t few_shot_add_at = 0;

    std::size_t threads = 1;
    bool record_wall_time = false;
    std::string label;  // algorithm column; sampler name when empty

    ModelKind model_kind() const { return model.value_or(default_model_for(sampler.kind)); }
    std::string algorithm() const;
    LearnerConfig learner_config() const;
    void validate() const;
};

/// Flat `key = value` text; `#` starts a comment.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig read_config(const std::filesystem::path& path);
/// Applies one key; throws ConfigError on unknown keys or bad values.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// "1,2,5" or "1-50" (inclusive), or a mix.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct TrajectoryRecord {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::size_t step = 0;
    std::optional<double> ordering_error;
    std::optional<double> holdout_error;
    std::optional<double> eval_ordering_error;
    std::optional<double> gap;
    std::optional<double> bound;
    std::optional<double> bound_approx;
    std::optional<bool> bound_vacuous;
    std::optional<double> bound_first_order;  // max over pairs of sigma'(z^T theta) |z|_{(H/T)^-1}
    ItemId pair_i = 0;
    ItemId pair_j = 0;
    bool truncated = false;
    std::optional<double> wall_time;

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Everything a seeded run reads besides the config. Loaded once per
/// experiment; per-seed randomness happens inside run_seed.
struct ExperimentData {
    std::optional<ItemPool> pool;                  // file-backed items
    std::optional<std::vector<Comparison>> comparisons;
};

ExperimentData load_experiment_data(const ExperimentConfig& cfg);

std::vector<TrajectoryRecord> run_seed(const ExperimentConfig& cfg, const ExperimentData& data, std::uint64_t seed);

/// All seeds (in parallel when cfg.threads > 1), concatenated in seed order.
std::vector<TrajectoryRecord> run_all(const ExperimentConfig& cfg, const ExperimentData& data);

/// Validates, runs and writes the trajectory CSV.
void run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_path);

void write_trajectory_csv(const std::vector<TrajectoryRecord>& records, std::ostream& out, bool wall_time = false);
std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in);
std::vector<TrajectoryRecord> read_trajectory_csv(const std::filesystem::path& path);

}  // namespace prefrank
