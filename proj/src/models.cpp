#include "prefrank/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prefrank/logistic.hpp"

namespace prefrank {

namespace {

// Rows z_s = x_{i_s} - x_{j_s} and labels of a history.
struct Design {
    Eigen::MatrixXd z;
    Eigen::VectorXd c;
    std::vector<ItemId> first;
    std::vector<ItemId> second;
};

Design build_design(const ComparisonHistory& history, const ItemPool& pool) {
    Design d;
    const auto t = static_cast<Eigen::Index>(history.size());
    d.z.resize(t, static_cast<Eigen::Index>(pool.dim()));
    d.c.resize(t);
    d.first.reserve(history.size());
    d.second.reserve(history.size());
    for (Eigen::Index s = 0; s < t; ++s) {
        const auto& r = history[static_cast<std::size_t>(s)];
        if (r.i >= pool.size() || r.j >= pool.size()) throw ValidationError("history references unknown item");
        d.z.row(s) = pool.feature(r.i) - pool.feature(r.j);
        d.c(s) = r.c;
        d.first.push_back(r.i);
        d.second.push_back(r.j);
    }
    if (!d.z.allFinite()) throw ValidationError("non-finite feature values");
    return d;
}

// sum_s softplus(f_s) - c_s f_s : the negative log-likelihood.
double neg_loglik(const Eigen::VectorXd& f, const Eigen::VectorXd& c) {
    double acc = 0.0;
    for (Eigen::Index s = 0; s < f.size(); ++s) acc += softplus(f(s)) - c(s) * f(s);
    return acc;
}

struct Derivs {
    Eigen::VectorXd grad;  // of the objective (descent form)
    Eigen::MatrixXd hess;
};

// Damped Newton on a strictly convex objective. `objective(beta)` returns the
// value; `derivs(beta)` gradient and Hessian.
template <class Objective, class Derivatives>
FitStatus newton_minimize(Eigen::VectorXd& beta, Objective objective, Derivatives derivs, const FitOptions& opts) {
    FitStatus st;
    st.converged = false;
    double value = objective(beta);
    for (st.iterations = 0;; ++st.iterations) {
        Derivs dv = derivs(beta);
        st.grad_inf = dv.grad.size() ? dv.grad.cwiseAbs().maxCoeff() : 0.0;
        if (st.grad_inf < opts.grad_tol) {
            st.converged = true;
            break;
        }
        if (st.iterations >= opts.max_iter) break;
        Eigen::LLT<Eigen::MatrixXd> llt(dv.hess);
        Eigen::VectorXd step = llt.info() == Eigen::Success ? Eigen::VectorXd(llt.solve(dv.grad)) : dv.grad;
        const double slope = dv.grad.dot(step);
        double t = 1.0;
        Eigen::VectorXd candidate = beta - step;
        double cand_value = objective(candidate);
        while (cand_value > value - 1e-4 * t * slope && t > 1e-12) {
            t *= 0.5;
            candidate = beta - t * step;
            cand_value = objective(candidate);
        }
        if (!(cand_value <= value)) break;  // no progress possible at machine precision
        beta = std::move(candidate);
        value = cand_value;
    }
    return st;
}

struct LinearProblem {
    const Design& design;
    Eigen::VectorXd prior_mean;
    Eigen::MatrixXd prior_precision;

    double objective(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd diff = theta - prior_mean;
        double v = 0.5 * diff.dot(prior_precision * diff);
        if (design.z.rows() > 0) v += neg_loglik(design.z * theta, design.c);
        return v;
    }

    Derivs derivs(const Eigen::VectorXd& theta) const {
        Derivs dv;
        dv.grad = prior_precision * (theta - prior_mean);
        dv.hess = prior_precision;
        if (design.z.rows() > 0) {
            const Eigen::VectorXd f = design.z * theta;
            Eigen::VectorXd r(f.size()), w(f.size());
            for (Eigen::Index s = 0; s < f.size(); ++s) {
                r(s) = sigmoid(f(s)) - design.c(s);
                w(s) = sigmoid_slope(f(s));
            }
            dv.grad.noalias() += design.z.transpose() * r;
            dv.hess.noalias() += design.z.transpose() * w.asDiagonal() * design.z;
        }
        return dv;
    }
};

Eigen::VectorXd linear_fit(const Design& design, const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision,
                           const FitOptions& opts, const Eigen::VectorXd* warm, FitStatus& status) {
    LinearProblem prob{design, mean, precision};
    Eigen::VectorXd theta = (warm && warm->size() == mean.size()) ? *warm : mean;
    status = newton_minimize(
        theta, [&](const Eigen::VectorXd& b) { return prob.objective(b); },
        [&](const Eigen::VectorXd& b) { return prob.derivs(b); }, opts);
    return theta;
}

struct HybridProblem {
    const Design& design;
    std::size_t d;
    std::size_t n;
    double reg_theta;
    double reg_zeta;

    Eigen::VectorXd margins(const Eigen::VectorXd& beta) const {
        const auto theta = beta.head(static_cast<Eigen::Index>(d));
        Eigen::VectorXd f = design.z.rows() > 0 ? Eigen::VectorXd(design.z * theta) : Eigen::VectorXd();
        for (Eigen::Index s = 0; s < f.size(); ++s) {
            const auto zi = static_cast<Eigen::Index>(d + design.first[static_cast<std::size_t>(s)]);
            const auto zj = static_cast<Eigen::Index>(d + design.second[static_cast<std::size_t>(s)]);
            f(s) += beta(zi) - beta(zj);
        }
        return f;
    }

    double objective(const Eigen::VectorXd& beta) const {
        const auto dd = static_cast<Eigen::Index>(d);
        double v = 0.5 * reg_theta * beta.head(dd).squaredNorm() + 0.5 * reg_zeta * beta.tail(beta.size() - dd).squaredNorm();
        if (design.z.rows() > 0) v += neg_loglik(margins(beta), design.c);
        return v;
    }

    Derivs derivs(const Eigen::VectorXd& beta) const {
        const auto dd = static_cast<Eigen::Index>(d);
        const auto p = beta.size();
        Derivs dv;
        dv.grad.resize(p);
        dv.grad.head(dd) = reg_theta * beta.head(dd);
        dv.grad.tail(p - dd) = reg_zeta * beta.tail(p - dd);
        dv.hess = Eigen::MatrixXd::Zero(p, p);
        dv.hess.diagonal().head(dd).setConstant(reg_theta);
        dv.hess.diagonal().tail(p - dd).setConstant(reg_zeta);
        if (design.z.rows() == 0) return dv;
        const Eigen::VectorXd f = margins(beta);
        Eigen::VectorXd r(f.size()), w(f.size());
        for (Eigen::Index s = 0; s < f.size(); ++s) {
            r(s) = sigmoid(f(s)) - design.c(s);
            w(s) = sigmoid_slope(f(s));
        }
        dv.grad.head(dd).noalias() += design.z.transpose() * r;
        dv.hess.topLeftCorner(dd, dd).noalias() += design.z.transpose() * w.asDiagonal() * design.z;
        for (Eigen::Index s = 0; s < f.size(); ++s) {
            const auto i = static_cast<Eigen::Index>(d + design.first[static_cast<std::size_t>(s)]);
            const auto j = static_cast<Eigen::Index>(d + design.second[static_cast<std::size_t>(s)]);
            dv.grad(i) += r(s);
            dv.grad(j) -= r(s);
            const auto zs = design.z.row(s).transpose();
            dv.hess.block(0, i, dd, 1).noalias() += w(s) * zs;
            dv.hess.block(0, j, dd, 1).noalias() -= w(s) * zs;
            dv.hess(i, i) += w(s);
            dv.hess(j, j) += w(s);
            dv.hess(i, j) -= w(s);
            dv.hess(j, i) -= w(s);
        }
        dv.hess.bottomLeftCorner(p - dd, dd) = dv.hess.topRightCorner(dd, p - dd).transpose();
        return dv;
    }
};

Eigen::VectorXd stack(const HybridModel& m) {
    Eigen::VectorXd beta(m.theta.size() + m.zeta.size());
    beta << m.theta, m.zeta;
    return beta;
}

}  // namespace

void HybridModel::grow(std::size_t n) {
    const auto old = zeta.size();
    if (static_cast<std::size_t>(old) >= n) return;
    zeta.conservativeResize(static_cast<Eigen::Index>(n));
    zeta.tail(static_cast<Eigen::Index>(n) - old).setZero();
}

LinearModel fit_mle(const ComparisonHistory& history, const ItemPool& pool, double reg, const FitOptions& opts,
                    const Eigen::VectorXd* warm_start) {
    if (!(reg > 0.0)) throw ValidationError("ridge strength must be positive");
    const auto d = static_cast<Eigen::Index>(pool.dim());
    const Design design = build_design(history, pool);
    LinearModel m;
    m.reg = reg;
    m.theta = linear_fit(design, Eigen::VectorXd::Zero(d), reg * Eigen::MatrixXd::Identity(d, d), opts, warm_start,
                         m.status);
    return m;
}

BayesLinearModel fit_map(const ComparisonHistory& history, const ItemPool& pool, const Eigen::VectorXd& prior_mean,
                         const Eigen::MatrixXd& prior_precision, const FitOptions& opts,
                         const Eigen::VectorXd* warm_start) {
    const auto d = static_cast<Eigen::Index>(pool.dim());
    if (prior_mean.size() != d || prior_precision.rows() != d || prior_precision.cols() != d)
        throw ValidationError("prior shape does not match feature dimension");
    if (Eigen::LLT<Eigen::MatrixXd>(prior_precision).info() != Eigen::Success)
        throw ValidationError("prior precision must be positive definite");
    const Design design = build_design(history, pool);
    BayesLinearModel m;
    m.prior_mean = prior_mean;
    m.prior_precision = prior_precision;
    m.theta_map = linear_fit(design, prior_mean, prior_precision, opts, warm_start, m.status);
    // Laplace: H_B = prior precision + sum_s sigma'(theta_map^T z_s) z_s z_s^T.
    Eigen::MatrixXd h = prior_precision;
    if (design.z.rows() > 0) {
        const Eigen::VectorXd f = design.z * m.theta_map;
        Eigen::VectorXd w(f.size());
        for (Eigen::Index s = 0; s < f.size(); ++s) w(s) = sigmoid_slope(f(s));
        h.noalias() += design.z.transpose() * w.asDiagonal() * design.z;
        h = 0.5 * (h + h.transpose());
    }
    m.posterior = InfoMatrix::restore(prior_precision, h, symmetric_inverse(h), history.size());
    return m;
}

HybridModel fit_hybrid(const ComparisonHistory& history, const ItemPool& pool, double reg_theta, double reg_zeta,
                       const FitOptions& opts, const HybridModel* warm_start) {
    if (!(reg_theta > 0.0) || !(reg_zeta > 0.0)) throw ValidationError("ridge strengths must be positive");
    const std::size_t d = pool.dim();
    const std::size_t n = pool.size();
    const Design design = build_design(history, pool);
    HybridProblem prob{design, d, n, reg_theta, reg_zeta};

    HybridModel init;
    init.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    init.zeta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (warm_start && static_cast<std::size_t>(warm_start->theta.size()) == d &&
        static_cast<std::size_t>(warm_start->zeta.size()) <= n) {
        init.theta = warm_start->theta;
        init.zeta.head(warm_start->zeta.size()) = warm_start->zeta;
    }
    Eigen::VectorXd beta = stack(init);
    HybridModel m;
    m.reg_theta = reg_theta;
    m.reg_zeta = reg_zeta;
    m.status = newton_minimize(
        beta, [&](const Eigen::VectorXd& b) { return prob.objective(b); },
        [&](const Eigen::VectorXd& b) { return prob.derivs(b); }, opts);
    m.theta = beta.head(static_cast<Eigen::Index>(d));
    m.zeta = beta.tail(static_cast<Eigen::Index>(n));
    return m;
}

Eigen::VectorXd loglik_grad(const LinearModel& model, const ComparisonHistory& history, const ItemPool& pool) {
    const auto d = static_cast<Eigen::Index>(pool.dim());
    const Design design = build_design(history, pool);
    LinearProblem prob{design, Eigen::VectorXd::Zero(d), model.reg * Eigen::MatrixXd::Identity(d, d)};
    return -prob.derivs(model.theta).grad;
}

Eigen::VectorXd loglik_grad(const BayesLinearModel& model, const ComparisonHistory& history, const ItemPool& pool) {
    const Design design = build_design(history, pool);
    LinearProblem prob{design, model.prior_mean, model.prior_precision};
    return -prob.derivs(model.theta_map).grad;
}

Eigen::VectorXd loglik_grad(const HybridModel& model, const ComparisonHistory& history, const ItemPool& pool) {
    const Design design = build_design(history, pool);
    HybridModel m = model;
    m.grow(pool.size());
    HybridProblem prob{design, pool.dim(), pool.size(), model.reg_theta, model.reg_zeta};
    return -prob.derivs(stack(m)).grad;
}

double penalized_loglik(const LinearModel& model, const ComparisonHistory& history, const ItemPool& pool) {
    const auto d = static_cast<Eigen::Index>(pool.dim());
    const Design design = build_design(history, pool);
    LinearProblem prob{design, Eigen::VectorXd::Zero(d), model.reg * Eigen::MatrixXd::Identity(d, d)};
    return -prob.objective(model.theta);
}

double penalized_loglik(const HybridModel& model, const ComparisonHistory& history, const ItemPool& pool) {
    const Design design = build_design(history, pool);
    HybridModel m = model;
    m.grow(pool.size());
    HybridProblem prob{design, pool.dim(), pool.size(), model.reg_theta, model.reg_zeta};
    return -prob.objective(stack(m));
}

Eigen::VectorXd item_scores(const LinearModel& model, const ItemPool& pool) { return pool.features() * model.theta; }

Eigen::VectorXd item_scores(const HybridModel& model, const ItemPool& pool) {
    Eigen::VectorXd s = pool.features() * model.theta;
    const auto k = std::min<Eigen::Index>(s.size(), model.zeta.size());
    s.head(k) += model.zeta.head(k);
    return s;
}

double predict_prob(const LinearModel& model, const ItemPool& pool, ItemId i, ItemId j) {
    return preference_probability(model.theta.dot(diff_vector(pool, i, j)));
}

double predict_prob(const HybridModel& model, const ItemPool& pool, ItemId i, ItemId j) {
    const auto zeta_at = [&](ItemId k) {
        return static_cast<Eigen::Index>(k) < model.zeta.size() ? model.zeta(static_cast<Eigen::Index>(k)) : 0.0;
    };
    return preference_probability(model.theta.dot(diff_vector(pool, i, j)) + (zeta_at(i) - zeta_at(j)));
}

std::vector<ItemId> induced_ranking(const Eigen::VectorXd& scores) {
    std::vector<ItemId> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
        return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
    });
    return order;
}

std::vector<ItemId> induced_ranking(const LinearModel& model, const ItemPool& pool) {
    return induced_ranking(item_scores(model, pool));
}

std::vector<ItemId> induced_ranking(const HybridModel& model, const ItemPool& pool) {
    return induced_ranking(item_scores(model, pool));
}

}  // namespace prefrank
