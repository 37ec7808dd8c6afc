#include "prefrank/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace prefrank {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        auto b = field.find_first_not_of(" \t\r");
        auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    // std::from_chars for double is available in libstdc++ 11
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_index(const std::string& s, long long& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return in;
}

}  // namespace

ItemPool::ItemPool(Eigen::MatrixXd features, std::optional<Eigen::VectorXd> true_scores,
                   std::vector<std::string> payloads)
    : features_(std::move(features)), true_scores_(std::move(true_scores)), payloads_(std::move(payloads)) {
    if (features_.cols() < 1) throw ValidationError("item features must have dimension d >= 1");
    if (!features_.allFinite()) throw ValidationError("item features contain non-finite values");
    if (true_scores_ && true_scores_->size() != features_.rows())
        throw ValidationError("true score count does not match item count");
    if (!payloads_.empty() && payloads_.size() != size())
        throw ValidationError("payload count does not match item count");
}

const Eigen::VectorXd& ItemPool::true_scores() const {
    if (!true_scores_) throw ValidationError("pool has no ground-truth scores");
    return *true_scores_;
}

ItemPool ItemPool::subset(const std::vector<ItemId>& ids) const {
    Eigen::MatrixXd f(static_cast<Eigen::Index>(ids.size()), features_.cols());
    std::optional<Eigen::VectorXd> s;
    if (true_scores_) s = Eigen::VectorXd(static_cast<Eigen::Index>(ids.size()));
    std::vector<std::string> p;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] >= size()) throw ValidationError("subset references item " + std::to_string(ids[k]));
        const auto r = static_cast<Eigen::Index>(ids[k]);
        f.row(static_cast<Eigen::Index>(k)) = features_.row(r);
        if (s) (*s)(static_cast<Eigen::Index>(k)) = (*true_scores_)(r);
        if (!payloads_.empty()) p.push_back(payloads_[ids[k]]);
    }
    return ItemPool(std::move(f), std::move(s), std::move(p));
}

ItemPool ItemPool::appended(const ItemPool& other) const {
    if (other.dim() != dim()) throw ValidationError("appended items have a different feature dimension");
    Eigen::MatrixXd f(features_.rows() + other.features_.rows(), features_.cols());
    f << features_, other.features_;
    std::optional<Eigen::VectorXd> s;
    if (true_scores_ && other.true_scores_) {
        s = Eigen::VectorXd(f.rows());
        *s << *true_scores_, *other.true_scores_;
    }
    std::vector<std::string> p;
    if (!payloads_.empty() || !other.payloads_.empty()) {
        p = payloads_;
        p.resize(size());
        auto q = other.payloads_;
        q.resize(other.size());
        p.insert(p.end(), q.begin(), q.end());
    }
    return ItemPool(std::move(f), std::move(s), std::move(p));
}

bool ItemPool::operator==(const ItemPool& other) const {
    if (features_.rows() != other.features_.rows() || features_.cols() != other.features_.cols()) return false;
    if (features_ != other.features_) return false;
    if (true_scores_.has_value() != other.true_scores_.has_value()) return false;
    if (true_scores_ && *true_scores_ != *other.true_scores_) return false;
    return payloads_ == other.payloads_;
}

const ComparisonRecord& ComparisonHistory::append(ItemId i, ItemId j, int c) {
    if (i == j) throw InvalidPairError("comparison of an item with itself");
    if (c != 0 && c != 1) throw ValidationError("comparison label must be 0 or 1");
    records_.push_back({i, j, c, records_.size() + 1});
    return records_.back();
}

ComparisonHistory ComparisonHistory::from_comparisons(const std::vector<Comparison>& comparisons) {
    ComparisonHistory h;
    for (const auto& c : comparisons) h.append(c.i, c.j, c.c);
    return h;
}

ItemPool parse_items_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool has_score = false;
    bool header_seen = false;
    std::size_t width = 0;
    std::vector<std::pair<long long, std::vector<double>>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        auto fields = split_csv_line(line);
        if (!header_seen && rows.empty()) {
            long long probe = 0;
            if (!fields.empty() && !parse_index(fields[0], probe)) {
                header_seen = true;
                if (fields.size() < 2) throw ParseError("items header needs at least one feature column", line_no);
                has_score = fields.back() == "score";
                width = fields.size();
                continue;
            }
        }
        if (fields.size() < 2) throw ParseError("expected id followed by at least one feature", line_no);
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw ValidationError("feature dimension differs across rows (line " + std::to_string(line_no) + ")");
        long long id = 0;
        if (!parse_index(fields[0], id)) throw ParseError("malformed item id '" + fields[0] + "'", line_no);
        std::vector<double> values(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            if (!parse_double(fields[k], values[k - 1]))
                throw ParseError("malformed number '" + fields[k] + "'", line_no);
        }
        rows.emplace_back(id, std::move(values));
    }
    if (rows.empty()) throw ValidationError("items file contains no rows");

    const std::size_t n = rows.size();
    const std::size_t d = width - 1 - (has_score ? 1 : 0);
    if (d < 1) throw ValidationError("items need at least one feature column");
    Eigen::MatrixXd features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::optional<Eigen::VectorXd> scores;
    if (has_score) scores = Eigen::VectorXd(static_cast<Eigen::Index>(n));
    std::vector<bool> seen(n, false);
    for (const auto& [id, values] : rows) {
        if (id < 0 || static_cast<std::size_t>(id) >= n || seen[static_cast<std::size_t>(id)])
            throw ValidationError("item ids must be exactly 0.." + std::to_string(n - 1) + ", got " +
                                  std::to_string(id));
        seen[static_cast<std::size_t>(id)] = true;
        for (std::size_t k = 0; k < d; ++k) features(id, static_cast<Eigen::Index>(k)) = values[k];
        if (scores) (*scores)(id) = values[d];
    }
    return ItemPool(std::move(features), std::move(scores));
}

ItemPool read_items_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_items_csv(in);
}

void write_items_csv(const ItemPool& pool, std::ostream& out) {
    out << "id";
    for (std::size_t k = 0; k < pool.dim(); ++k) out << ",f" << k;
    if (pool.has_true_scores()) out << ",score";
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, res.ptr - buf);
    };
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out << i;
        for (std::size_t k = 0; k < pool.dim(); ++k) {
            out << ',';
            put(pool.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
        if (pool.has_true_scores()) {
            out << ',';
            put(pool.true_scores()(static_cast<Eigen::Index>(i)));
        }
        out << '\n';
    }
}

std::vector<Comparison> parse_comparisons_csv(std::istream& in, std::size_t n_items) {
    std::vector<Comparison> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        auto fields = split_csv_line(line);
        long long a = 0, b = 0, c = 0;
        if (out.empty() && !fields.empty() && !parse_index(fields[0], a)) continue;  // header
        if (fields.size() != 3) throw ParseError("expected i,j,c", line_no);
        if (!parse_index(fields[0], a) || !parse_index(fields[1], b) || !parse_index(fields[2], c))
            throw ParseError("malformed comparison row", line_no);
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n_items || static_cast<std::size_t>(b) >= n_items)
            throw ValidationError("comparison on line " + std::to_string(line_no) + " references unknown item");
        if (a == b) throw ValidationError("comparison on line " + std::to_string(line_no) + " pairs an item with itself");
        if (c != 0 && c != 1) throw ParseError("label must be 0 or 1", line_no);
        out.push_back({static_cast<ItemId>(a), static_cast<ItemId>(b), static_cast<int>(c)});
    }
    return out;
}

std::vector<Comparison> read_comparisons_csv(const std::filesystem::path& path, std::size_t n_items) {
    auto in = open_or_throw(path);
    return parse_comparisons_csv(in, n_items);
}

void write_comparisons_csv(const std::vector<Comparison>& comparisons, std::ostream& out) {
    out << "i,j,c\n";
    for (const auto& c : comparisons) out << c.i << ',' << c.j << ',' << c.c << '\n';
}

ComparisonPool split_holdout(std::vector<Comparison> comparisons, double holdout_fraction, Rng& rng) {
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
        throw ValidationError("holdout fraction must lie in [0, 1)");
    const auto n_holdout = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(comparisons.size())));
    std::vector<std::size_t> order(comparisons.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> in_holdout(comparisons.size(), false);
    for (std::size_t k = 0; k < n_holdout; ++k) in_holdout[order[k]] = true;

    ComparisonPool pool;
    pool.holdout_fraction = holdout_fraction;
    for (std::size_t k = 0; k < comparisons.size(); ++k)
        (in_holdout[k] ? pool.holdout : pool.replay).push_back(comparisons[k]);
    return pool;
}

Dataset load_dataset(const std::filesystem::path& items_path,
                     const std::optional<std::filesystem::path>& comparisons_path, double holdout_fraction,
                     std::uint64_t seed) {
    Dataset ds{read_items_csv(items_path), std::nullopt};
    if (comparisons_path) {
        auto comps = read_comparisons_csv(*comparisons_path, ds.pool.size());
        auto rng = make_substream(seed, "holdout");
        ds.comparisons = split_holdout(std::move(comps), holdout_fraction, rng);
    }
    return ds;
}

Eigen::VectorXd diff_vector(const ItemPool& pool, ItemId i, ItemId j) {
    if (i == j) throw InvalidPairError("difference vector of an item with itself");
    if (i >= pool.size() || j >= pool.size()) throw InvalidPairError("item id out of range");
    return (pool.feature(i) - pool.feature(j)).transpose();
}

PoolSplit split_generalization(const ItemPool& pool, const Eigen::VectorXd& scores) {
    const std::size_t n = pool.size();
    if (n < 4) throw ValidationError("generalization split needs at least 4 items");
    if (static_cast<std::size_t>(scores.size()) != n) throw ValidationError("one score per item required");
    std::vector<ItemId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
        return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b));
    });
    const std::size_t half = n / 2;
    PoolSplit split;
    split.train_ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    split.eval_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    split.train = pool.subset(split.train_ids);
    split.eval = pool.subset(split.eval_ids);
    return split;
}

void to_json(nlohmann::json& j, const ItemPool& pool) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::vector<double> r(pool.dim());
        for (std::size_t k = 0; k < pool.dim(); ++k)
            r[k] = pool.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        rows.push_back(r);
    }
    j = nlohmann::json{{"features", rows}};
    if (pool.has_true_scores()) {
        const auto& s = pool.true_scores();
        j["scores"] = std::vector<double>(s.data(), s.data() + s.size());
    }
    if (!pool.payloads().empty()) j["payloads"] = pool.payloads();
}

void from_json(const nlohmann::json& j, ItemPool& pool) {
    if (!j.is_object() || !j.contains("features") || !j["features"].is_array())
        throw ValidationError("pool JSON needs a 'features' array");
    const auto& rows = j["features"];
    if (rows.empty()) throw ValidationError("pool has no items");
    if (!rows[0].is_array()) throw ValidationError("each feature row must be an array");
    const std::size_t d = rows[0].size();
    Eigen::MatrixXd f(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != d)
            throw ValidationError("feature dimension differs across rows (row " + std::to_string(i) + ")");
        for (std::size_t k = 0; k < d; ++k) {
            if (!rows[i][k].is_number()) throw ValidationError("feature values must be numbers");
            f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
        }
    }
    std::optional<Eigen::VectorXd> scores;
    if (j.contains("scores")) {
        auto s = j["scores"].get<std::vector<double>>();
        scores = Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    }
    std::vector<std::string> payloads;
    if (j.contains("payloads")) {
        for (const auto& p : j["payloads"]) payloads.push_back(p.is_string() ? p.get<std::string>() : p.dump());
    }
    pool = ItemPool(std::move(f), std::move(scores), std::move(payloads));
}

}  // namespace prefrank
