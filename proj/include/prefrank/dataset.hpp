#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prefrank/rng.hpp"
#include "prefrank/types.hpp"

namespace prefrank {

/// Items with precomputed feature rows and optional ground-truth scores.
/// Item ids are the row indices 0..n-1.
class ItemPool {
public:
    ItemPool() = default;
    explicit ItemPool(Eigen::MatrixXd features, std::optional<Eigen::VectorXd> true_scores = std::nullopt,
                      std::vector<std::string> payloads = {});

    std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }

    const Eigen::MatrixXd& features() const { return features_; }
    auto feature(ItemId i) const { return features_.row(static_cast<Eigen::Index>(i)); }

    bool has_true_scores() const { return true_scores_.has_value(); }
    const Eigen::VectorXd& true_scores() const;

    /// Opaque display blobs (service only); empty or one per item.
    const std::vector<std::string>& payloads() const { return payloads_; }

    /// Sub-pool made of the given rows, in the given order.
    ItemPool subset(const std::vector<ItemId>& ids) const;

    /// Pool with `other`'s rows appended after this pool's rows.
    ItemPool appended(const ItemPool& other) const;

    bool operator==(const ItemPool& other) const;

private:
    Eigen::MatrixXd features_;
    std::optional<Eigen::VectorXd> true_scores_;
    std::vector<std::string> payloads_;
};

/// One noisy binary judgement; c = 1 means i is preferred over j.
struct Comparison {
    ItemId i = 0;
    ItemId j = 0;
    int c = 0;

    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct ComparisonRecord {
    ItemId i = 0;
    ItemId j = 0;
    int c = 0;
    std::size_t t = 0;  // 1-based step

    friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

/// Append-only record of queried comparisons; steps run 1, 2, 3, ...
class ComparisonHistory {
public:
    const ComparisonRecord& append(ItemId i, ItemId j, int c);

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<ComparisonRecord>& records() const { return records_; }
    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }
    const ComparisonRecord& operator[](std::size_t k) const { return records_[k]; }

    static ComparisonHistory from_comparisons(const std::vector<Comparison>& comparisons);

private:
    std::vector<ComparisonRecord> records_;
};

/// Pre-collected annotations: the replay side answers queries, the holdout
/// side is reserved for evaluation.
struct ComparisonPool {
    std::vector<Comparison> replay;
    std::vector<Comparison> holdout;
    double holdout_fraction = 0.0;
};

struct Dataset {
    ItemPool pool;
    std::optional<ComparisonPool> comparisons;
};

/// Pool split at the median of the given scores.
struct PoolSplit {
    ItemPool train;
    ItemPool eval;
    std::vector<ItemId> train_ids;  // original ids, ascending score order
    std::vector<ItemId> eval_ids;
};

/// Items CSV: `id,f0,...,f{d-1}[,score]` with an optional header row; a
/// trailing `score` column is only recognised through the header.
ItemPool read_items_csv(const std::filesystem::path& path);
ItemPool parse_items_csv(std::istream& in);
void write_items_csv(const ItemPool& pool, std::ostream& out);

/// Comparisons CSV: `i,j,c` with an optional header row.
std::vector<Comparison> read_comparisons_csv(const std::filesystem::path& path, std::size_t n_items);
std::vector<Comparison> parse_comparisons_csv(std::istream& in, std::size_t n_items);
void write_comparisons_csv(const std::vector<Comparison>& comparisons, std::ostream& out);

/// Seeded per-annotation split; holdout size = round(fraction * N).
ComparisonPool split_holdout(std::vector<Comparison> comparisons, double holdout_fraction, Rng& rng);

Dataset load_dataset(const std::filesystem::path& items_path,
                     const std::optional<std::filesystem::path>& comparisons_path, double holdout_fraction,
                     std::uint64_t seed);

/// z_ij = x_i - x_j.
Eigen::VectorXd diff_vector(const ItemPool& pool, ItemId i, ItemId j);

/// Lower half of the scores (ties broken by item id) trains, upper half
/// evaluates.
PoolSplit split_generalization(const ItemPool& pool, const Eigen::VectorXd& scores);

void to_json(nlohmann::json& j, const ItemPool& pool);
void from_json(const nlohmann::json& j, ItemPool& pool);

}  // namespace prefrank
