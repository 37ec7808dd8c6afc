#include "prefrank/report.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace prefrank {

MeanCi mean_ci(const std::vector<double>& values, double level) {
    if (values.empty()) throw ValidationError("no values to summarize");
    const double n = static_cast<double>(values.size());
    MeanCi r;
    for (double v : values) r.mean += v;
    r.mean /= n;
    if (values.size() < 2) {
        r.lo = r.hi = r.mean;
        return r;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    const double q = boost::math::quantile(dist, 0.5 + level / 2.0);
    const double half = q * r.sd / std::sqrt(n);
    r.lo = r.mean - half;
    r.hi = r.mean + half;
    return r;
}

double paired_t_pvalue_less(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw ValidationError("paired test needs two equal-length samples (n >= 2)");
    std::vector<double> diff(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
    const auto s = mean_ci(diff);
    const double n = static_cast<double>(diff.size());
    if (s.sd == 0.0) return s.mean < 0.0 ? 0.0 : 1.0;
    const double t = s.mean / (s.sd / std::sqrt(n));
    return boost::math::cdf(boost::math::students_t(n - 1.0), t);
}

namespace {

std::optional<double> metric_value(const TrajectoryRecord& r, const std::string& m) {
    if (m == "ordering_error") return r.ordering_error;
    if (m == "holdout_error") return r.holdout_error;
    if (m == "eval_ordering_error") return r.eval_ordering_error;
    if (m == "gap") return r.gap;
    if (m == "bound") return r.bound;
    if (m == "bound_approx") return r.bound_approx;
    if (m == "bound_first_order") return r.bound_first_order;
    return std::nullopt;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Summary aggregate_runs(const std::vector<TrajectoryRecord>& records) {
    // algorithm -> seed -> records in step order
    std::map<std::string, std::map<std::uint64_t, std::vector<const TrajectoryRecord*>>> groups;
    for (const auto& r : records) groups[r.algorithm][r.seed].push_back(&r);

    Summary out;
    for (auto& [algo, seeds] : groups) {
        std::vector<std::size_t> grid;
        bool first = true;
        for (auto& [seed, recs] : seeds) {
            std::stable_sort(recs.begin(), recs.end(), [](auto* a, auto* b) { return a->step < b->step; });
            std::vector<std::size_t> steps;
            for (auto* r : recs) steps.push_back(r->step);
            if (std::adjacent_find(steps.begin(), steps.end()) != steps.end())
                throw AlignmentError(algo + " seed " + std::to_string(seed) + " repeats a step");
            if (first) {
                grid = steps;
                first = false;
            } else if (steps != grid) {
                throw AlignmentError(algo + " seed " + std::to_string(seed) + " has a different step grid");
            }
        }
        for (std::size_t k = 0; k < grid.size(); ++k) {
            for (const auto& m : report_metrics()) {
                std::vector<double> vals;
                for (auto& [seed, recs] : seeds)
                    if (auto v = metric_value(*recs[k], m)) vals.push_back(*v);
                if (vals.empty()) continue;
                const auto s = mean_ci(vals);
                out.rows.push_back({algo, grid[k], m, vals.size(), s.mean, s.sd, s.lo, s.hi});
            }
        }
    }
    return out;
}

void write_aggregate_csv(const Summary& summary, std::ostream& out) {
    out << "algorithm,step,n_seeds";
    for (const auto& m : report_metrics()) out << ',' << m << "_mean," << m << "_sd," << m << "_ci_lo," << m << "_ci_hi";
    out << '\n';
    std::size_t k = 0;
    const auto& rows = summary.rows;
    while (k < rows.size()) {
        const auto& algo = rows[k].algorithm;
        const auto step = rows[k].step;
        std::map<std::string, const SummaryRow*> by_metric;
        std::size_t n = 0;
        for (; k < rows.size() && rows[k].algorithm == algo && rows[k].step == step; ++k) {
            by_metric[rows[k].metric] = &rows[k];
            n = std::max(n, rows[k].n);
        }
        out << algo << ',' << step << ',' << n;
        for (const auto& m : report_metrics()) {
            auto it = by_metric.find(m);
            if (it == by_metric.end()) {
                out << ",,,,";
                continue;
            }
            const auto& r = *it->second;
            out << ',' << fmt(r.mean) << ',' << fmt(r.sd) << ',' << fmt(r.ci_lo) << ',' << fmt(r.ci_hi);
        }
        out << '\n';
    }
}

void write_long_csv(const Summary& summary, std::ostream& out) {
    out << "step,metric,mean,sd,ci_lo,ci_hi,algorithm\n";
    for (const auto& r : summary.rows)
        out << r.step << ',' << r.metric << ',' << fmt(r.mean) << ',' << fmt(r.sd) << ',' << fmt(r.ci_lo) << ','
            << fmt(r.ci_hi) << ',' << r.algorithm << '\n';
}

Summary read_long_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "step,metric,mean,sd,ci_lo,ci_hi,algorithm")
        throw ParseError("unexpected long-format header", 1);
    Summary s;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 7) throw ParseError("expected 7 fields", lineno);
        SummaryRow r;
        try {
            r.step = static_cast<std::size_t>(std::stoull(f[0]));
            r.metric = f[1];
            r.mean = std::stod(f[2]);
            r.sd = std::stod(f[3]);
            r.ci_lo = std::stod(f[4]);
            r.ci_hi = std::stod(f[5]);
        } catch (const std::exception&) {
            throw ParseError("bad number", lineno);
        }
        r.algorithm = f[6];
        s.rows.push_back(std::move(r));
    }
    return s;
}

void emit_report(const Summary& summary, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream wide(out_dir / "aggregate.csv");
    std::ofstream lng(out_dir / "long.csv");
    if (!wide || !lng) throw ConfigError("cannot write report files under " + out_dir.string());
    write_aggregate_csv(summary, wide);
    write_long_csv(summary, lng);
}

}  // namespace prefrank
