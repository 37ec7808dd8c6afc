#include "prefrank/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_set>

#include "prefrank/kernels.hpp"

namespace prefrank {

// ---------------------------------------------------------------------------
// PairDomain

PairDomain PairDomain::all(std::size_t n_items) {
    PairDomain d;
    d.full_ = true;
    d.n_items_ = n_items;
    return d;
}

PairDomain PairDomain::of(std::vector<Pair> pairs, std::size_t n_items) {
    PairDomain d;
    d.full_ = false;
    d.n_items_ = n_items;
    for (auto& p : pairs) {
        if (p.first == p.second) throw InvalidPairError("pair of an item with itself");
        if (p.first >= n_items || p.second >= n_items) throw InvalidPairError("pair references unknown item");
        p = make_pair_sorted(p.first, p.second);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    d.pairs_ = std::move(pairs);
    return d;
}

std::size_t PairDomain::size() const {
    return full_ ? (n_items_ < 2 ? 0 : n_items_ * (n_items_ - 1) / 2) : pairs_.size();
}

Pair PairDomain::at(std::size_t k) const {
    if (k >= size()) throw InvalidPairError("pair index out of range");
    if (!full_) return pairs_[k];
    std::size_t i = 0;
    std::size_t row = n_items_ - 1;
    while (k >= row) {
        k -= row;
        ++i;
        --row;
    }
    return {i, i + 1 + k};
}

bool PairDomain::contains(Pair p) const {
    if (p.first == p.second) return false;
    p = make_pair_sorted(p.first, p.second);
    if (full_) return p.second < n_items_;
    return std::binary_search(pairs_.begin(), pairs_.end(), p);
}

std::vector<Pair> PairDomain::to_vector() const {
    if (!full_) return pairs_;
    std::vector<Pair> out;
    out.reserve(size());
    for (std::size_t i = 0; i < n_items_; ++i)
        for (std::size_t j = i + 1; j < n_items_; ++j) out.push_back({i, j});
    return out;
}

// ---------------------------------------------------------------------------
// Names

std::string_view to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::Guro: return "guro";
        case SamplerKind::BayesGuro: return "bayes-guro";
        case SamplerKind::Bald: return "bald";
        case SamplerKind::NormMin: return "normmin";
        case SamplerKind::Uniform: return "uniform";
        case SamplerKind::CoLSTIM: return "colstim";
        case SamplerKind::TrueSkill: return "trueskill";
    }
    return "unknown";
}

std::vector<std::string> sampler_names() {
    return {"guro", "bayes-guro", "bald", "normmin", "uniform", "colstim", "trueskill"};
}

SamplerKind parse_sampler_kind(std::string_view name) {
    for (auto k : {SamplerKind::Guro, SamplerKind::BayesGuro, SamplerKind::Bald, SamplerKind::NormMin,
                   SamplerKind::Uniform, SamplerKind::CoLSTIM, SamplerKind::TrueSkill})
        if (to_string(k) == name) return k;
    std::string valid;
    for (const auto& n : sampler_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ValidationError("unknown sampler '" + std::string(name) + "'; valid names: " + valid);
}

void SamplerSpec::validate() const {
    if (kind == SamplerKind::BayesGuro && posterior_samples < 2)
        throw ValidationError("bayes-guro needs at least 2 posterior samples");
    if (candidate_cap && *candidate_cap < 1) throw ValidationError("candidate cap must be >= 1");
    if (confidence_width && !(*confidence_width >= 0.0)) throw ValidationError("confidence width must be >= 0");
}

// ---------------------------------------------------------------------------
// Pair evaluation

namespace {

void require(const SelectionContext& ctx) {
    if (!ctx.pool || !ctx.domain) throw ValidationError("selection context needs a pool and a pair domain");
    if (ctx.domain->empty()) throw ExhaustedError("no eligible pairs remain");
}

void require_info(const SelectionContext& ctx) {
    if (!ctx.info) throw ValidationError("criterion needs an information matrix");
    if (static_cast<std::size_t>(ctx.scores.size()) != ctx.pool->size())
        throw ValidationError("criterion needs one score per item");
}

// Visits the domain grouped by first item: f(i, js) with js ascending.
template <class F>
void for_each_row(const PairDomain& dom, F&& f) {
    if (dom.is_full()) {
        const std::size_t n = dom.n_items();
        std::vector<ItemId> ids(n);
        std::iota(ids.begin(), ids.end(), 0);
        for (std::size_t i = 0; i + 1 < n; ++i) f(i, std::span<const ItemId>(ids).subspan(i + 1), true);
        return;
    }
    const auto pairs = dom.to_vector();
    std::vector<ItemId> js;
    std::size_t k = 0;
    while (k < pairs.size()) {
        const ItemId i = pairs[k].first;
        js.clear();
        while (k < pairs.size() && pairs[k].first == i) js.push_back(pairs[k++].second);
        f(i, std::span<const ItemId>(js), false);
    }
}

// Streams (mu, q) per row into `crit`, which fills criterion values; `sink`
// receives (i, js, values).
template <class Crit, class Sink>
void evaluate_quadratic(const SelectionContext& ctx, Crit&& crit, Sink&& sink) {
    const auto& x = ctx.pool->features();
    const Eigen::MatrixXd p = x * ctx.info->h_inv();  // rows: H^{-1} x_i
    Eigen::VectorXd g = (p.array() * x.array()).rowwise().sum();
    if (ctx.item_variance) {
        const auto m = std::min<Eigen::Index>(g.size(), ctx.item_variance->size());
        g.head(m) += ctx.item_variance->head(m);
    }
    std::vector<double> mu, q, cross, diag, out;
    for_each_row(*ctx.domain, [&](ItemId i, std::span<const ItemId> js, bool contiguous) {
        const auto m = js.size();
        const auto ii = static_cast<Eigen::Index>(i);
        mu.resize(m);
        q.resize(m);
        cross.resize(m);
        diag.resize(m);
        out.resize(m);
        if (contiguous) {
            const auto start = static_cast<Eigen::Index>(js.front());
            Eigen::Map<Eigen::VectorXd>(cross.data(), static_cast<Eigen::Index>(m)).noalias() =
                x.middleRows(start, static_cast<Eigen::Index>(m)) * p.row(ii).transpose();
            std::copy_n(g.data() + start, m, diag.data());
        } else {
            for (std::size_t k = 0; k < m; ++k) {
                const auto jj = static_cast<Eigen::Index>(js[k]);
                cross[k] = x.row(jj).dot(p.row(ii));
                diag[k] = g(jj);
            }
        }
        const double si = ctx.scores(ii);
        for (std::size_t k = 0; k < m; ++k) mu[k] = si - ctx.scores(static_cast<Eigen::Index>(js[k]));
        kernels::pair_quadform(g(ii), diag, cross, q);
        crit(std::span<const double>(mu), std::span<const double>(q), std::span<double>(out));
        sink(i, js, std::span<const double>(out));
    });
}

// Lexicographic-first argmax; NaN never wins.
struct ArgMax {
    double best = -std::numeric_limits<double>::infinity();
    Pair pair{};
    bool found = false;

    void offer(ItemId i, std::span<const ItemId> js, std::span<const double> vals) {
        for (std::size_t k = 0; k < js.size(); ++k) {
            const double v = vals[k];
            if (!found || v > best) {
                if (std::isnan(v) && found) continue;
                best = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
                pair = {i, js[k]};
                found = true;
            }
        }
    }
};

template <class Crit>
Pair argmax_quadratic(const SelectionContext& ctx, Crit&& crit) {
    ArgMax am;
    evaluate_quadratic(ctx, crit, [&](ItemId i, std::span<const ItemId> js, std::span<const double> v) { am.offer(i, js, v); });
    return am.pair;
}

template <class Crit>
std::vector<double> collect_quadratic(const SelectionContext& ctx, Crit&& crit) {
    std::vector<double> all;
    all.reserve(ctx.domain->size());
    evaluate_quadratic(ctx, crit, [&](ItemId, std::span<const ItemId>, std::span<const double> v) {
        all.insert(all.end(), v.begin(), v.end());
    });
    return all;
}

const auto kGuro = [](std::span<const double> mu, std::span<const double> q, std::span<double> out) {
    kernels::guro_criterion(mu, q, out);
};
const auto kNorm = [](std::span<const double>, std::span<const double> q, std::span<double> out) {
    kernels::norm_criterion(q, out);
};

Rng& need_rng(const SelectionContext& ctx) {
    if (!ctx.rng) throw ValidationError("criterion needs a random stream");
    return *ctx.rng;
}

}  // namespace

std::vector<double> guro_scores(const SelectionContext& ctx) {
    require(ctx);
    require_info(ctx);
    return collect_quadratic(ctx, kGuro);
}

std::vector<double> normmin_scores(const SelectionContext& ctx) {
    require(ctx);
    require_info(ctx);
    return collect_quadratic(ctx, kNorm);
}

std::vector<double> bald_scores(const SelectionContext& ctx, bool halved_exponent) {
    require(ctx);
    require_info(ctx);
    return collect_quadratic(ctx, [&](std::span<const double> mu, std::span<const double> q, std::span<double> out) {
        kernels::bald_criterion(mu, q, out, halved_exponent);
    });
}

Pair guro_select(const SelectionContext& ctx) {
    require(ctx);
    require_info(ctx);
    return argmax_quadratic(ctx, kGuro);
}

Pair normmin_select(const SelectionContext& ctx) {
    require(ctx);
    require_info(ctx);
    return argmax_quadratic(ctx, kNorm);
}

Pair bald_select(const SelectionContext& ctx, bool halved_exponent) {
    require(ctx);
    require_info(ctx);
    return argmax_quadratic(ctx, [&](std::span<const double> mu, std::span<const double> q, std::span<double> out) {
        kernels::bald_criterion(mu, q, out, halved_exponent);
    });
}

Pair bayes_guro_select(const SelectionContext& ctx, std::size_t k) {
    require(ctx);
    if (!ctx.info || !ctx.theta) throw ValidationError("bayes-guro needs a posterior mean and covariance");
    if (k < 2) throw ValidationError("bayes-guro needs at least 2 posterior samples");
    Rng& rng = need_rng(ctx);
    const auto& x = ctx.pool->features();
    const auto n = x.rows();
    const Eigen::MatrixXd theta_samples = sample_gaussian(*ctx.theta, ctx.info->h_inv(), k, rng);
    // Column per item holds its k sampled scores contiguously.
    Eigen::MatrixXd sampled = theta_samples * x.transpose();
    if (ctx.item_offsets) {
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < n && i < ctx.item_offsets->size(); ++i) {
            const double mean = (*ctx.item_offsets)(i);
            const double sd = ctx.item_variance ? std::sqrt(std::max(0.0, (*ctx.item_variance)(i))) : 0.0;
            for (Eigen::Index s = 0; s < sampled.rows(); ++s) sampled(s, i) += mean + sd * normal(rng);
        }
    }
    const auto kk = static_cast<std::size_t>(sampled.rows());
    ArgMax am;
    std::vector<double> vals;
    for_each_row(*ctx.domain, [&](ItemId i, std::span<const ItemId> js, bool) {
        vals.resize(js.size());
        const double* a = sampled.col(static_cast<Eigen::Index>(i)).data();
        for (std::size_t m = 0; m < js.size(); ++m) {
            const double* b = sampled.col(static_cast<Eigen::Index>(js[m])).data();
            vals[m] = kernels::sigmoid_diff_variance(std::span<const double>(a, kk), std::span<const double>(b, kk));
        }
        am.offer(i, js, vals);
    });
    return am.pair;
}

Pair uniform_select(const SelectionContext& ctx) {
    require(ctx);
    Rng& rng = need_rng(ctx);
    std::uniform_int_distribution<std::size_t> pick(0, ctx.domain->size() - 1);
    return ctx.domain->at(pick(rng));
}

Pair colstim_select(const SelectionContext& ctx, double c1) {
    require(ctx);
    if (!ctx.design) throw ValidationError("colstim needs a design matrix");
    if (static_cast<std::size_t>(ctx.scores.size()) != ctx.pool->size())
        throw ValidationError("criterion needs one score per item");
    Rng& rng = need_rng(ctx);
    const auto& x = ctx.pool->features();
    const std::size_t n = ctx.pool->size();
    const auto pairs = ctx.domain->is_full() ? std::vector<Pair>{} : ctx.domain->to_vector();

    std::vector<bool> has_partner(n, ctx.domain->is_full());
    for (const auto& p : pairs) has_partner[p.first] = has_partner[p.second] = true;

    // Draw one Gumbel per item in id order so the stream use is fixed.
    std::extreme_value_distribution<double> gumbel(0.0, 1.0);
    ItemId first = 0;
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double eps = gumbel(rng);
        if (!has_partner[i]) continue;
        const auto xi = x.row(static_cast<Eigen::Index>(i)).transpose();
        const double u = ctx.scores(static_cast<Eigen::Index>(i)) + c1 * eps * ctx.design->norm(xi);
        if (!found || u > best) {
            best = u;
            first = i;
            found = true;
        }
    }

    ItemId second = 0;
    best = -std::numeric_limits<double>::infinity();
    found = false;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == first || !ctx.domain->contains({first, j})) continue;
        const Eigen::VectorXd z = (x.row(static_cast<Eigen::Index>(j)) - x.row(static_cast<Eigen::Index>(first))).transpose();
        const double u = ctx.scores(static_cast<Eigen::Index>(j)) + c1 * ctx.design->norm(z);
        if (!found || u > best) {
            best = u;
            second = j;
            found = true;
        }
    }
    return make_pair_sorted(first, second);
}

Pair trueskill_select(const SelectionContext& ctx) {
    require(ctx);
    if (!ctx.trueskill) throw ValidationError("trueskill selection needs rating state");
    ArgMax am;
    std::vector<double> vals;
    for_each_row(*ctx.domain, [&](ItemId i, std::span<const ItemId> js, bool) {
        vals.resize(js.size());
        for (std::size_t m = 0; m < js.size(); ++m) vals[m] = trueskill_match_quality(*ctx.trueskill, i, js[m]);
        am.offer(i, js, vals);
    });
    return am.pair;
}

Pair trueskill_anchored_select(const SelectionContext& ctx) {
    require(ctx);
    if (!ctx.trueskill) throw ValidationError("trueskill selection needs rating state");
    const auto& sigma2 = ctx.trueskill->sigma2;
    // Anchor: the most uncertain item that still has an eligible partner.
    std::optional<ItemId> anchor;
    for_each_row(*ctx.domain, [&](ItemId i, std::span<const ItemId> js, bool) {
        auto consider = [&](ItemId k) {
            if (!anchor || sigma2(static_cast<Eigen::Index>(k)) > sigma2(static_cast<Eigen::Index>(*anchor)) ||
                (sigma2(static_cast<Eigen::Index>(k)) == sigma2(static_cast<Eigen::Index>(*anchor)) && k < *anchor))
                anchor = k;
        };
        if (js.empty()) return;
        consider(i);
        for (ItemId j : js) consider(j);
    });
    if (!anchor) throw ExhaustedError("no eligible pair");
    const ItemId a = *anchor;
    ArgMax am;
    for_each_row(*ctx.domain, [&](ItemId i, std::span<const ItemId> js, bool) {
        for (std::size_t m = 0; m < js.size(); ++m) {
            if (i != a && js[m] != a) continue;
            const double q = trueskill_match_quality(*ctx.trueskill, i, js[m]);
            am.offer(i, js.subspan(m, 1), std::span<const double>(&q, 1));
        }
    });
    return am.pair;
}

PairDomain subsample_candidates(const PairDomain& domain, std::size_t m, Rng& rng) {
    const std::size_t total = domain.size();
    if (m >= total) return domain;
    if (m < 1) throw ValidationError("candidate cap must be >= 1");
    // Floyd's algorithm: m distinct indices, each subset equally likely.
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(m * 2);
    for (std::size_t r = total - m; r < total; ++r) {
        std::uniform_int_distribution<std::size_t> pick(0, r);
        const std::size_t t = pick(rng);
        if (!chosen.insert(t).second) chosen.insert(r);
    }
    std::vector<std::size_t> idx(chosen.begin(), chosen.end());
    std::sort(idx.begin(), idx.end());
    std::vector<Pair> pairs;
    pairs.reserve(m);
    if (domain.is_full()) {
        for (auto k : idx) pairs.push_back(domain.at(k));
    } else {
        const auto all = domain.to_vector();
        for (auto k : idx) pairs.push_back(all[k]);
    }
    return PairDomain::of(std::move(pairs), domain.n_items());
}

Pair select_pair(const SamplerSpec& spec, const SelectionContext& ctx) {
    spec.validate();
    require(ctx);
    SelectionContext local = ctx;
    PairDomain subset;
    if (spec.candidate_cap && spec.kind != SamplerKind::Uniform && *spec.candidate_cap < ctx.domain->size()) {
        subset = subsample_candidates(*ctx.domain, *spec.candidate_cap, need_rng(ctx));
        local.domain = &subset;
    }
    switch (spec.kind) {
        case SamplerKind::Guro: return guro_select(local);
        case SamplerKind::BayesGuro: return bayes_guro_select(local, spec.posterior_samples);
        case SamplerKind::Bald: return bald_select(local, spec.bald_halved_exponent);
        case SamplerKind::NormMin: return normmin_select(local);
        case SamplerKind::Uniform: return uniform_select(local);
        case SamplerKind::CoLSTIM: {
            const double d = static_cast<double>(ctx.pool->dim());
            const double t = static_cast<double>(std::max<std::size_t>(ctx.budget, 2));
            const double c1 = spec.confidence_width.value_or(std::sqrt(d * std::log(t)));
            return colstim_select(local, c1);
        }
        case SamplerKind::TrueSkill:
            return spec.trueskill_anchor ? trueskill_anchored_select(local) : trueskill_select(local);
    }
    throw ValidationError("unhandled sampler kind");
}

}  // namespace prefrank
