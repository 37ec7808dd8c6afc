#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefrank/dataset.hpp"
#include "prefrank/info_matrix.hpp"
#include "prefrank/rng.hpp"
#include "prefrank/trueskill.hpp"

namespace prefrank {

/// Set of unordered pairs (first < second) that may still be queried,
/// enumerated in lexicographic order.
class PairDomain {
public:
    /// Every pair over n items.
    static PairDomain all(std::size_t n_items);
    /// An explicit pair list; normalized to first < second, sorted, deduplicated.
    static PairDomain of(std::vector<Pair> pairs, std::size_t n_items);

    bool is_full() const { return full_; }
    std::size_t n_items() const { return n_items_; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    /// k-th pair in lexicographic order.
    Pair at(std::size_t k) const;
    bool contains(Pair p) const;
    /// Explicit list (materialized on demand for full domains).
    std::vector<Pair> to_vector() const;

private:
    bool full_ = true;
    std::size_t n_items_ = 0;
    std::vector<Pair> pairs_;
};

enum class SamplerKind { Guro, BayesGuro, Bald, NormMin, Uniform, CoLSTIM, TrueSkill };

std::string_view to_string(SamplerKind kind);
/// Accepts guro, bayes-guro, bald, normmin, uniform, colstim, trueskill.
SamplerKind parse_sampler_kind(std::string_view name);
std::vector<std::string> sampler_names();

struct SamplerSpec {
    SamplerKind kind = SamplerKind::Guro;
    std::size_t posterior_samples = 50;
    std::optional<std::size_t> candidate_cap;
    std::optional<double> confidence_width;  // CoLSTIM c1; defaults to sqrt(d log T)
    bool bald_halved_exponent = false;
    // TrueSkill: pair the most uncertain item with its best-quality partner
    // instead of taking the global best-quality pair, which locks onto one
    // well-measured, evenly matched pair.
    bool trueskill_anchor = true;

    void validate() const;
};

/// Everything a selector reads. Pointers that a criterion does not use may be null.
struct SelectionContext {
    const ItemPool* pool = nullptr;
    const PairDomain* domain = nullptr;
    Eigen::VectorXd scores;                        // point-estimate item scores
    const InfoMatrix* info = nullptr;              // inverse information over theta
    const Eigen::VectorXd* item_variance = nullptr; // independent per-item offset variances (hybrid)
    const Eigen::VectorXd* theta = nullptr;        // posterior mean over theta (sampling criteria)
    const Eigen::VectorXd* item_offsets = nullptr; // posterior mean of per-item offsets (hybrid)
    const InfoMatrix* design = nullptr;            // V = ridge I + sum z z^T (CoLSTIM)
    const TrueSkillState* trueskill = nullptr;
    std::size_t budget = 1;                        // horizon T, for the CoLSTIM default width
    Rng* rng = nullptr;
};

Pair guro_select(const SelectionContext& ctx);
Pair bayes_guro_select(const SelectionContext& ctx, std::size_t k);
Pair bald_select(const SelectionContext& ctx, bool halved_exponent = false);
Pair normmin_select(const SelectionContext& ctx);
Pair uniform_select(const SelectionContext& ctx);
Pair colstim_select(const SelectionContext& ctx, double c1);
Pair trueskill_select(const SelectionContext& ctx);
/// Highest match quality among eligible pairs containing the largest-variance
/// item (ties to the smaller id).
Pair trueskill_anchored_select(const SelectionContext& ctx);

/// Uniform subset of min(m, |domain|) eligible pairs.
PairDomain subsample_candidates(const PairDomain& domain, std::size_t m, Rng& rng);

/// Applies candidate subsampling (if configured) and dispatches on the kind.
Pair select_pair(const SamplerSpec& spec, const SelectionContext& ctx);

/// Criterion values over the domain, in domain order (diagnostics and tests).
std::vector<double> guro_scores(const SelectionContext& ctx);
std::vector<double> normmin_scores(const SelectionContext& ctx);
std::vector<double> bald_scores(const SelectionContext& ctx, bool halved_exponent = false);

}  // namespace prefrank
