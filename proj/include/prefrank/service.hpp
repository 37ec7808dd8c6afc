#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "prefrank/learner.hpp"

namespace prefrank {

/// One live annotation session. All mutation goes through the owning
/// SessionStore, which serializes calls per session.
struct Session {
    Session(std::string id_, Learner learner_) : id(std::move(id_)), learner(std::move(learner_)) {}

    std::string id;
    Learner learner;
    std::optional<std::vector<Pair>> allowed;  // remaining allowed pairs (each answerable once); all pairs when unset
    std::optional<Pair> pending;
    std::vector<std::string> annotators;       // tag per history entry ("" when absent)
    std::int64_t created_ms = 0;
    std::int64_t updated_ms = 0;

    std::mutex mutex;
    std::ofstream log;
    std::size_t log_lines = 0;
    std::size_t answers_since_checkpoint = 0;

    PairDomain domain() const;
};

struct NextPair {
    bool exhausted = false;
    Pair pair{0, 0};
    std::size_t step = 0;  // step the answer will occupy (1-based)
    std::vector<std::string> payloads;  // of pair.first and pair.second, when the pool has them
};

/// Sessions kept in memory and persisted under a data directory:
///   <dir>/<id>/events.jsonl   append-only event log (one JSON object per line)
///   <dir>/<id>/checkpoint.json  learner state after `log_lines` log entries
class SessionStore {
public:
    static constexpr std::size_t kCheckpointEvery = 50;

    /// Loads every persisted session under `data_dir` (created if missing).
    /// An empty path keeps sessions in memory only.
    explicit SessionStore(std::filesystem::path data_dir = {});

    /// Body fields: items (pool JSON) or items_csv (text) or items_path,
    /// sampler, model, seed, reg, reg_zeta, refit_stride, budget,
    /// posterior_samples, candidate_cap, confidence_width, pairs; or
    /// import (an export object).
    std::string create(const nlohmann::json& body);

    NextPair next(const std::string& id);
    /// Returns the new step count. Throws ConflictError unless `pair` is the
    /// pending query.
    std::size_t answer(const std::string& id, Pair pair, int choice, const std::string& annotator);

    nlohmann::json ranking(const std::string& id, std::optional<std::size_t> top_k = std::nullopt);
    /// {"history_csv": "i,j,c\n...", "checkpoint": {...}, "annotators": [...]}
    nlohmann::json export_session(const std::string& id);

    /// Learner copy (tests and diagnostics).
    Learner learner(const std::string& id);
    std::optional<Pair> pending(const std::string& id);
    std::size_t size() const;

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    std::string new_id();
    void open_log(Session& s, bool truncate);
    void append_event(Session& s, const nlohmann::json& event);
    void write_checkpoint(Session& s);
    void load(const std::filesystem::path& dir);
    static void apply_answer(Session& s, Pair pair, int choice, const std::string& annotator);

    std::filesystem::path dir_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex id_mutex_;
    std::uint64_t id_counter_ = 0;
};

/// JSON error envelope {"error": {"code", "message"}} and HTTP status for an Error code.
int http_status_for(const std::string& code);
nlohmann::json error_body(const std::string& code, const std::string& message);

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "sessions";
};

}  // namespace prefrank

namespace httplib {
class Server;
}

namespace prefrank {

/// Registers the endpoints on `server`; the store must outlive it.
void install_routes(httplib::Server& server, SessionStore& store);

/// Blocks serving the HTTP API until the process is stopped.
void serve(const ServeOptions& opts);

}  // namespace prefrank
