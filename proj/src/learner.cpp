#include "prefrank/learner.hpp"

#include <cmath>

#include "json_eigen.hpp"
#include "prefrank/logistic.hpp"

namespace prefrank {

using detail::mat_from_json;
using detail::mat_to_json;
using detail::vec_from_json;
using detail::vec_to_json;

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Contextual: return "contextual";
        case ModelKind::Hybrid: return "hybrid";
        case ModelKind::Bayes: return "bayes";
        case ModelKind::TrueSkill: return "trueskill";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto k : {ModelKind::Contextual, ModelKind::Hybrid, ModelKind::Bayes, ModelKind::TrueSkill})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown model '" + std::string(name) + "' (valid: contextual, hybrid, bayes, trueskill)");
}

ModelKind default_model_for(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::BayesGuro:
        case SamplerKind::Bald: return ModelKind::Bayes;
        case SamplerKind::TrueSkill: return ModelKind::TrueSkill;
        default: return ModelKind::Contextual;
    }
}

void LearnerConfig::validate() const {
    sampler.validate();
    if (!(reg > 0.0) || !(reg_zeta > 0.0)) throw ValidationError("regularization strengths must be positive");
    if (refit_stride < 1) throw ValidationError("refit stride must be >= 1");
    if (budget < 1) throw ValidationError("budget must be >= 1");
    const bool ts_model = model == ModelKind::TrueSkill;
    const auto k = sampler.kind;
    if (ts_model && k != SamplerKind::TrueSkill && k != SamplerKind::Uniform)
        throw ValidationError("the trueskill model only supports the trueskill and uniform samplers");
    if (!ts_model && k == SamplerKind::TrueSkill) throw ValidationError("the trueskill sampler needs the trueskill model");
}

void to_json(nlohmann::json& j, const LearnerConfig& c) {
    j = nlohmann::json{{"model", to_string(c.model)},
                       {"sampler", to_string(c.sampler.kind)},
                       {"posterior_samples", c.sampler.posterior_samples},
                       {"bald_halved_exponent", c.sampler.bald_halved_exponent},
                       {"trueskill_anchor", c.sampler.trueskill_anchor},
                       {"reg", c.reg},
                       {"reg_zeta", c.reg_zeta},
                       {"refit_stride", c.refit_stride},
                       {"budget", c.budget},
                       {"grad_tol", c.fit.grad_tol},
                       {"max_iter", c.fit.max_iter}};
    if (c.sampler.candidate_cap) j["candidate_cap"] = *c.sampler.candidate_cap;
    if (c.sampler.confidence_width) j["confidence_width"] = *c.sampler.confidence_width;
}

void from_json(const nlohmann::json& j, LearnerConfig& c) {
    if (!j.is_object()) throw ValidationError("learner config must be an object");
    c = LearnerConfig{};
    if (j.contains("sampler")) c.sampler.kind = parse_sampler_kind(j.at("sampler").get<std::string>());
    c.model = j.contains("model") ? parse_model_kind(j.at("model").get<std::string>())
                                  : default_model_for(c.sampler.kind);
    c.sampler.posterior_samples = j.value("posterior_samples", c.sampler.posterior_samples);
    c.sampler.bald_halved_exponent = j.value("bald_halved_exponent", false);
    c.sampler.trueskill_anchor = j.value("trueskill_anchor", true);
    if (j.contains("candidate_cap") && !j["candidate_cap"].is_null())
        c.sampler.candidate_cap = j["candidate_cap"].get<std::size_t>();
    if (j.contains("confidence_width") && !j["confidence_width"].is_null())
        c.sampler.confidence_width = j["confidence_width"].get<double>();
    c.reg = j.value("reg", c.reg);
    c.reg_zeta = j.value("reg_zeta", c.reg_zeta);
    c.refit_stride = j.value("refit_stride", c.refit_stride);
    c.budget = j.value("budget", c.budget);
    c.fit.grad_tol = j.value("grad_tol", c.fit.grad_tol);
    c.fit.max_iter = j.value("max_iter", c.fit.max_iter);
}

Learner::Learner(ItemPool pool, LearnerConfig config, std::uint64_t seed)
    : pool_(std::move(pool)), config_(std::move(config)), seed_(seed) {
    config_.validate();
    if (pool_.size() < 2) throw ValidationError("a pool needs at least two items");
    const auto d = static_cast<Eigen::Index>(pool_.dim());
    const auto n = pool_.size();
    switch (config_.model) {
        case ModelKind::Contextual:
            linear_.theta = Eigen::VectorXd::Zero(d);
            linear_.reg = config_.reg;
            info_ = InfoMatrix(pool_.dim(), config_.reg);
            break;
        case ModelKind::Bayes: {
            const Eigen::MatrixXd prior = config_.reg * Eigen::MatrixXd::Identity(d, d);
            bayes_.theta_map = Eigen::VectorXd::Zero(d);
            bayes_.prior_mean = Eigen::VectorXd::Zero(d);
            bayes_.prior_precision = prior;
            bayes_.posterior = InfoMatrix(prior);
            break;
        }
        case ModelKind::Hybrid:
            hybrid_.theta = Eigen::VectorXd::Zero(d);
            hybrid_.zeta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            hybrid_.reg_theta = config_.reg;
            hybrid_.reg_zeta = config_.reg_zeta;
            info_ = InfoMatrix(pool_.dim(), config_.reg);
            item_precision_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), config_.reg_zeta);
            item_variance_ = item_precision_.cwiseInverse();
            break;
        case ModelKind::TrueSkill: trueskill_ = TrueSkillState::initial(n); break;
    }
    if (config_.sampler.kind == SamplerKind::CoLSTIM) design_ = InfoMatrix(pool_.dim(), config_.reg);
}

SelectionContext Learner::context(const PairDomain& domain, Rng* rng) const {
    SelectionContext ctx;
    ctx.pool = &pool_;
    ctx.domain = &domain;
    ctx.scores = scores();
    ctx.info = info();
    ctx.budget = config_.budget;
    ctx.rng = rng;
    ctx.design = design_ ? &*design_ : nullptr;
    switch (config_.model) {
        case ModelKind::Contextual: ctx.theta = &linear_.theta; break;
        case ModelKind::Bayes: ctx.theta = &bayes_.theta_map; break;
        case ModelKind::Hybrid:
            ctx.theta = &hybrid_.theta;
            ctx.item_offsets = &hybrid_.zeta;
            ctx.item_variance = &item_variance_;
            break;
        case ModelKind::TrueSkill: ctx.trueskill = &trueskill_; break;
    }
    return ctx;
}

Pair Learner::select(const PairDomain& domain) const {
    if (domain.n_items() > pool_.size()) throw ValidationError("pair domain covers items outside the pool");
    Rng rng = make_substream(seed_, "sampler", step() + 1);
    return select_pair(config_.sampler, context(domain, &rng));
}

void Learner::observe(ItemId i, ItemId j, int c) {
    if (i >= pool_.size() || j >= pool_.size() || i == j)
        throw InvalidPairError("invalid pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    history_.append(i, j, c);
    const Eigen::VectorXd z = diff_vector(pool_, i, j);
    switch (config_.model) {
        case ModelKind::Contextual: info_.update(z, sigmoid_slope(linear_.theta.dot(z))); break;
        case ModelKind::Bayes: bayes_.posterior.update(z, sigmoid_slope(bayes_.theta_map.dot(z))); break;
        case ModelKind::Hybrid: {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            const double w = sigmoid_slope(hybrid_.theta.dot(z) + hybrid_.zeta(ii) - hybrid_.zeta(jj));
            info_.update(z, w);
            item_precision_(ii) += w;
            item_precision_(jj) += w;
            item_variance_(ii) = 1.0 / item_precision_(ii);
            item_variance_(jj) = 1.0 / item_precision_(jj);
            break;
        }
        case ModelKind::TrueSkill: trueskill_update_inplace(trueskill_, i, j, c); break;
    }
    if (design_) design_->update(z, 1.0);
    if (history_.size() % config_.refit_stride == 0) refit();
}

void Learner::refit() {
    switch (config_.model) {
        case ModelKind::Contextual: {
            const Eigen::VectorXd warm = linear_.theta;
            linear_ = fit_mle(history_, pool_, config_.reg, config_.fit, &warm);
            break;
        }
        case ModelKind::Bayes: {
            const Eigen::VectorXd warm = bayes_.theta_map;
            bayes_ = fit_map(history_, pool_, bayes_.prior_mean, bayes_.prior_precision, config_.fit, &warm);
            return;  // posterior comes with the fit
        }
        case ModelKind::Hybrid: {
            const HybridModel warm = hybrid_;
            hybrid_ = fit_hybrid(history_, pool_, config_.reg, config_.reg_zeta, config_.fit, &warm);
            break;
        }
        case ModelKind::TrueSkill: return;
    }
    rebuild_information();
}

void Learner::rebuild_information() {
    if (config_.model == ModelKind::Contextual) {
        info_ = observed_fisher(history_, pool_, linear_.theta, config_.reg);
        return;
    }
    // Hybrid: theta block plus independent per-item offset precisions.
    const auto d = static_cast<Eigen::Index>(pool_.dim());
    Eigen::MatrixXd h = config_.reg * Eigen::MatrixXd::Identity(d, d);
    item_precision_.setConstant(static_cast<Eigen::Index>(pool_.size()), config_.reg_zeta);
    for (const auto& r : history_) {
        const Eigen::VectorXd z = diff_vector(pool_, r.i, r.j);
        const auto ii = static_cast<Eigen::Index>(r.i);
        const auto jj = static_cast<Eigen::Index>(r.j);
        const double w = sigmoid_slope(hybrid_.theta.dot(z) + hybrid_.zeta(ii) - hybrid_.zeta(jj));
        h.selfadjointView<Eigen::Lower>().rankUpdate(z, w);
        item_precision_(ii) += w;
        item_precision_(jj) += w;
    }
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
    const Eigen::MatrixXd prior = config_.reg * Eigen::MatrixXd::Identity(d, d);
    info_ = InfoMatrix::restore(prior, h, symmetric_inverse(h), history_.size());
    item_variance_ = item_precision_.cwiseInverse();
}

Eigen::VectorXd Learner::scores() const {
    switch (config_.model) {
        case ModelKind::Contextual: return item_scores(linear_, pool_);
        case ModelKind::Bayes: return pool_.features() * bayes_.theta_map;
        case ModelKind::Hybrid: return item_scores(hybrid_, pool_);
        case ModelKind::TrueSkill: return trueskill_.mu;
    }
    return {};
}

std::optional<Eigen::VectorXd> Learner::score_sd() const {
    const auto& x = pool_.features();
    switch (config_.model) {
        case ModelKind::Contextual: return std::nullopt;
        case ModelKind::Bayes:
            return ((x * bayes_.posterior.h_inv()).cwiseProduct(x).rowwise().sum()).cwiseMax(0.0).cwiseSqrt();
        case ModelKind::Hybrid:
            return ((x * info_.h_inv()).cwiseProduct(x).rowwise().sum() + item_variance_).cwiseMax(0.0).cwiseSqrt();
        case ModelKind::TrueSkill: return trueskill_.sigma2.cwiseSqrt();
    }
    return std::nullopt;
}

Eigen::VectorXd Learner::theta() const {
    switch (config_.model) {
        case ModelKind::Contextual: return linear_.theta;
        case ModelKind::Bayes: return bayes_.theta_map;
        case ModelKind::Hybrid: return hybrid_.theta;
        case ModelKind::TrueSkill: return {};
    }
    return {};
}

const InfoMatrix* Learner::info() const {
    switch (config_.model) {
        case ModelKind::Contextual:
        case ModelKind::Hybrid: return &info_;
        case ModelKind::Bayes: return &bayes_.posterior;
        case ModelKind::TrueSkill: return nullptr;
    }
    return nullptr;
}

void Learner::add_items(const ItemPool& extra) {
    const std::size_t n = pool_.size() + extra.size();
    pool_ = pool_.appended(extra);
    if (config_.model == ModelKind::Hybrid) {
        hybrid_.grow(n);
        const auto old = item_precision_.size();
        item_precision_.conservativeResize(static_cast<Eigen::Index>(n));
        item_precision_.tail(static_cast<Eigen::Index>(n) - old).setConstant(config_.reg_zeta);
        item_variance_ = item_precision_.cwiseInverse();
    }
    if (config_.model == ModelKind::TrueSkill) trueskill_.grow(n);
}

namespace {

nlohmann::json info_to_json(const InfoMatrix& m) {
    return {{"prior", mat_to_json(m.prior())},
            {"h", mat_to_json(m.h())},
            {"h_inv", mat_to_json(m.h_inv())},
            {"updates", m.updates()}};
}

InfoMatrix info_from_json(const nlohmann::json& j) {
    return InfoMatrix::restore(mat_from_json(j.at("prior")), mat_from_json(j.at("h")), mat_from_json(j.at("h_inv")),
                               j.at("updates").get<std::size_t>());
}

}  // namespace

nlohmann::json Learner::checkpoint() const {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& r : history_) hist.push_back({r.i, r.j, r.c});
    nlohmann::json j{{"version", 1},
                     {"config", config_},
                     {"seed", seed_},
                     {"pool", pool_},
                     {"history", hist}};
    switch (config_.model) {
        case ModelKind::Contextual:
            j["theta"] = vec_to_json(linear_.theta);
            j["info"] = info_to_json(info_);
            break;
        case ModelKind::Bayes:
            j["theta"] = vec_to_json(bayes_.theta_map);
            j["prior_mean"] = vec_to_json(bayes_.prior_mean);
            j["info"] = info_to_json(bayes_.posterior);
            break;
        case ModelKind::Hybrid:
            j["theta"] = vec_to_json(hybrid_.theta);
            j["zeta"] = vec_to_json(hybrid_.zeta);
            j["info"] = info_to_json(info_);
            j["item_precision"] = vec_to_json(item_precision_);
            break;
        case ModelKind::TrueSkill:
            j["trueskill"] = {{"mu", vec_to_json(trueskill_.mu)},
                              {"sigma2", vec_to_json(trueskill_.sigma2)},
                              {"beta2", trueskill_.beta2},
                              {"tau2", trueskill_.tau2}};
            break;
    }
    if (design_) j["design"] = info_to_json(*design_);
    return j;
}

Learner Learner::restore(const nlohmann::json& j) {
    try {
        Learner l(j.at("pool").get<ItemPool>(), j.at("config").get<LearnerConfig>(), j.at("seed").get<std::uint64_t>());
        for (const auto& r : j.at("history")) {
            const auto i = r.at(0).get<ItemId>();
            const auto k = r.at(1).get<ItemId>();
            if (i >= l.pool_.size() || k >= l.pool_.size()) throw ValidationError("checkpoint history references unknown item");
            l.history_.append(i, k, r.at(2).get<int>());
        }
        switch (l.config_.model) {
            case ModelKind::Contextual:
                l.linear_.theta = vec_from_json(j.at("theta"));
                l.info_ = info_from_json(j.at("info"));
                break;
            case ModelKind::Bayes:
                l.bayes_.theta_map = vec_from_json(j.at("theta"));
                l.bayes_.prior_mean = vec_from_json(j.at("prior_mean"));
                l.bayes_.posterior = info_from_json(j.at("info"));
                l.bayes_.prior_precision = l.bayes_.posterior.prior();
                break;
            case ModelKind::Hybrid:
                l.hybrid_.theta = vec_from_json(j.at("theta"));
                l.hybrid_.zeta = vec_from_json(j.at("zeta"));
                l.info_ = info_from_json(j.at("info"));
                l.item_precision_ = vec_from_json(j.at("item_precision"));
                l.item_variance_ = l.item_precision_.cwiseInverse();
                break;
            case ModelKind::TrueSkill: {
                const auto& t = j.at("trueskill");
                l.trueskill_.mu = vec_from_json(t.at("mu"));
                l.trueskill_.sigma2 = vec_from_json(t.at("sigma2"));
                l.trueskill_.beta2 = t.at("beta2").get<double>();
                l.trueskill_.tau2 = t.at("tau2").get<double>();
                break;
            }
        }
        if (j.contains("design")) l.design_ = info_from_json(j.at("design"));
        const auto d = static_cast<Eigen::Index>(l.pool_.dim());
        const auto n = static_cast<Eigen::Index>(l.pool_.size());
        const auto th = l.theta();
        if (l.config_.model != ModelKind::TrueSkill && th.size() != d)
            throw ValidationError("checkpoint parameter has the wrong dimension");
        if (l.config_.model == ModelKind::Hybrid && (l.hybrid_.zeta.size() != n || l.item_precision_.size() != n))
            throw ValidationError("checkpoint offsets do not match the pool");
        if (l.config_.model == ModelKind::TrueSkill && (l.trueskill_.mu.size() != n || l.trueskill_.sigma2.size() != n))
            throw ValidationError("checkpoint ratings do not match the pool");
        return l;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed checkpoint: ") + e.what());
    }
}

Learner Learner::replay(ItemPool pool, LearnerConfig config, std::uint64_t seed,
                        const std::vector<Comparison>& comparisons) {
    Learner l(std::move(pool), std::move(config), seed);
    for (const auto& c : comparisons) l.observe(c.i, c.j, c.c);
    return l;
}

}  // namespace prefrank
