#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <string_view>
#include <vector>

#include "prefrank/dataset.hpp"
#include "prefrank/info_matrix.hpp"
#include "prefrank/models.hpp"
#include "prefrank/samplers.hpp"
#include "prefrank/trueskill.hpp"

namespace prefrank {

enum class ModelKind { Contextual, Hybrid, Bayes, TrueSkill };

std::string_view to_string(ModelKind kind);
/// Accepts contextual, hybrid, bayes, trueskill.
ModelKind parse_model_kind(std::string_view name);
/// Model a sampler runs on when none is configured.
ModelKind default_model_for(SamplerKind kind);

struct LearnerConfig {
    ModelKind model = ModelKind::Contextual;
    SamplerSpec sampler;
    double reg = 1.0;        // ridge on theta; prior precision reg * I for the Bayesian model
    double reg_zeta = 1.0;   // ridge on the per-item offsets
    std::size_t refit_stride = 1;
    std::size_t budget = 1;  // horizon T (CoLSTIM width default)
    FitOptions fit;

    void validate() const;
};

void to_json(nlohmann::json& j, const LearnerConfig& c);
void from_json(const nlohmann::json& j, LearnerConfig& c);

/// One active-learning agent: model, information matrix and sampler state
/// over a pool. Shared by the experiment loop and the annotation service so
/// both follow the same update rules.
///
/// Each observation updates the inverse information by Sherman-Morrison
/// with the weight at the current estimate; every `refit_stride`
/// observations the model is refit (warm start) and the information matrix
/// is rebuilt at the new estimate.
class Learner {
public:
    Learner(ItemPool pool, LearnerConfig config, std::uint64_t seed);

    const LearnerConfig& config() const { return config_; }
    const ItemPool& pool() const { return pool_; }
    const ComparisonHistory& history() const { return history_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t step() const { return history_.size(); }

    /// Pair for the next step. Randomized samplers draw from a substream
    /// keyed by the step number, so repeated calls agree.
    Pair select(const PairDomain& domain) const;

    void observe(ItemId i, ItemId j, int c);

    /// Forces a refit now (no-op for TrueSkill).
    void refit();

    /// Point-estimate score per item.
    Eigen::VectorXd scores() const;
    /// Per-item score standard deviation (Bayes/hybrid: Laplace posterior;
    /// TrueSkill: rating sd). Empty for the contextual model.
    std::optional<Eigen::VectorXd> score_sd() const;
    std::vector<ItemId> ranking() const { return induced_ranking(scores()); }

    /// Parameter over features; empty for TrueSkill.
    Eigen::VectorXd theta() const;
    /// Information matrix the criteria read; null for TrueSkill.
    const InfoMatrix* info() const;

    /// Appends items with their offsets at zero.
    void add_items(const ItemPool& extra);

    const HybridModel& hybrid() const { return hybrid_; }
    const TrueSkillState& trueskill() const { return trueskill_; }

    nlohmann::json checkpoint() const;
    static Learner restore(const nlohmann::json& j);

    /// Rebuilds a learner by replaying comparisons in order.
    static Learner replay(ItemPool pool, LearnerConfig config, std::uint64_t seed,
                          const std::vector<Comparison>& comparisons);

private:
    Learner() = default;
    void rebuild_information();
    SelectionContext context(const PairDomain& domain, Rng* rng) const;

    ItemPool pool_;
    LearnerConfig config_;
    std::uint64_t seed_ = 0;
    ComparisonHistory history_;

    LinearModel linear_;
    BayesLinearModel bayes_;
    HybridModel hybrid_;
    TrueSkillState trueskill_;

    InfoMatrix info_;                 // contextual and hybrid theta block
    Eigen::VectorXd item_precision_;  // hybrid offsets, diagonal
    Eigen::VectorXd item_variance_;
    std::optional<InfoMatrix> design_;  // CoLSTIM
};

}  // namespace prefrank
