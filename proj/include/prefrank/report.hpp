#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "prefrank/harness.hpp"

namespace prefrank {

/// Metrics aggregated across seeds, in report column order.
inline const std::vector<std::string>& report_metrics() {
    static const std::vector<std::string> m{"ordering_error", "holdout_error", "eval_ordering_error",
                                            "gap",            "bound",         "bound_approx",
                                            "bound_first_order"};
    return m;
}

struct SummaryRow {
    std::string algorithm;
    std::size_t step = 0;
    std::string metric;
    std::size_t n = 0;  // seeds contributing
    double mean = 0.0;
    double sd = 0.0;     // sample sd (n - 1); 0 for one seed
    double ci_lo = 0.0;  // 95% t interval; equals the mean for one seed
    double ci_hi = 0.0;
};

struct Summary {
    std::vector<SummaryRow> rows;  // sorted by algorithm, step, metric order
};

struct MeanCi {
    double mean = 0.0;
    double sd = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Mean, sample sd and two-sided t confidence interval.
MeanCi mean_ci(const std::vector<double>& values, double level = 0.95);

/// One-sided paired t-test of H1: mean(a - b) < 0. Returns the p-value.
double paired_t_pvalue_less(const std::vector<double>& a, const std::vector<double>& b);

/// Per (algorithm, step, metric) statistics across seeds. Every seed of an
/// algorithm must report the same step grid, else AlignmentError.
Summary aggregate_runs(const std::vector<TrajectoryRecord>& records);

/// Writes <dir>/aggregate.csv (wide) and <dir>/long.csv
/// (step,metric,mean,sd,ci_lo,ci_hi,algorithm).
void emit_report(const Summary& summary, const std::filesystem::path& out_dir);

void write_aggregate_csv(const Summary& summary, std::ostream& out);
void write_long_csv(const Summary& summary, std::ostream& out);
Summary read_long_csv(std::istream& in);

}  // namespace prefrank
