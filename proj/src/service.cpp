#include "prefrank/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

namespace prefrank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

json pair_json(Pair p) { return json::array({p.first, p.second}); }

Pair pair_from_json(const json& j) {
    auto index = [](const json& v) { return v.is_number_integer() && v.get<std::int64_t>() >= 0; };
    if (!j.is_array() || j.size() != 2 || !index(j[0]) || !index(j[1]))
        throw ValidationError("pair must be [i, j] with non-negative integers");
    return {j[0].get<ItemId>(), j[1].get<ItemId>()};
}

std::string history_csv(const ComparisonHistory& h) {
    std::vector<Comparison> comps;
    for (const auto& r : h) comps.push_back({r.i, r.j, r.c});
    std::ostringstream out;
    write_comparisons_csv(comps, out);
    return out.str();
}

LearnerConfig config_from_body(const json& body) {
    json cfg = json::object();
    for (const char* key : {"sampler", "model", "posterior_samples", "candidate_cap", "confidence_width",
                            "bald_halved_exponent", "trueskill_anchor", "reg", "reg_zeta", "refit_stride", "budget"})
        if (body.contains(key)) cfg[key] = body[key];
    if (!cfg.contains("sampler")) cfg["sampler"] = "guro";
    return cfg.get<LearnerConfig>();
}

ItemPool pool_from_body(const json& body) {
    if (body.contains("items")) return body["items"].get<ItemPool>();
    if (body.contains("items_csv")) {
        std::istringstream in(body["items_csv"].get<std::string>());
        auto pool = parse_items_csv(in);
        if (body.contains("payloads")) {
            return ItemPool(pool.features(),
                            pool.has_true_scores() ? std::optional<Eigen::VectorXd>(pool.true_scores()) : std::nullopt,
                            body["payloads"].get<std::vector<std::string>>());
        }
        return pool;
    }
    if (body.contains("items_path")) return read_items_csv(body["items_path"].get<std::string>());
    throw ValidationError("session needs 'items', 'items_csv' or 'items_path'");
}

}  // namespace

PairDomain Session::domain() const {
    if (allowed) return PairDomain::of(*allowed, learner.pool().size());
    return PairDomain::all(learner.pool().size());
}

SessionStore::SessionStore(fs::path data_dir) : dir_(std::move(data_dir)) {
    if (dir_.empty()) return;
    fs::create_directories(dir_);
    for (const auto& entry : fs::directory_iterator(dir_))
        if (entry.is_directory() && fs::exists(entry.path() / "events.jsonl")) load(entry.path());
}

std::size_t SessionStore::size() const {
    std::shared_lock lock(map_mutex_);
    return sessions_.size();
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
}

std::string SessionStore::new_id() {
    std::lock_guard lock(id_mutex_);
    std::random_device rd;
    const std::uint64_t r = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ (++id_counter_ * 0x9E3779B97F4A7C15ULL);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r));
    return buf;
}

void SessionStore::open_log(Session& s, bool truncate) {
    if (dir_.empty()) return;
    const fs::path d = dir_ / s.id;
    fs::create_directories(d);
    s.log.open(d / "events.jsonl", truncate ? std::ios::trunc : std::ios::app);
    if (!s.log) throw ConfigError("cannot open event log for session " + s.id);
}

void SessionStore::append_event(Session& s, const json& event) {
    ++s.log_lines;
    if (!s.log.is_open()) return;
    s.log << event.dump() << '\n';
    s.log.flush();
}

void SessionStore::write_checkpoint(Session& s) {
    s.answers_since_checkpoint = 0;
    if (dir_.empty()) return;
    json cp{{"log_lines", s.log_lines},
            {"learner", s.learner.checkpoint()},
            {"annotators", s.annotators},
            {"created_ms", s.created_ms},
            {"updated_ms", s.updated_ms}};
    cp["pending"] = s.pending ? pair_json(*s.pending) : json(nullptr);
    if (s.allowed) {
        json a = json::array();
        for (auto p : *s.allowed) a.push_back(pair_json(p));
        cp["allowed"] = a;
    }
    const fs::path d = dir_ / s.id;
    const fs::path tmp = d / "checkpoint.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << cp.dump();
        if (!out) throw ConfigError("cannot write checkpoint for session " + s.id);
    }
    fs::rename(tmp, d / "checkpoint.json");
}

void SessionStore::apply_answer(Session& s, Pair pair, int choice, const std::string& annotator) {
    s.learner.observe(pair.first, pair.second, choice);
    s.annotators.push_back(annotator);
    if (s.allowed) {
        const Pair key = make_pair_sorted(pair.first, pair.second);
        auto it = std::find(s.allowed->begin(), s.allowed->end(), key);
        if (it != s.allowed->end()) s.allowed->erase(it);
    }
    s.pending.reset();
}

namespace {

std::optional<std::vector<Pair>> allowed_from_json(const json& j, std::size_t n) {
    if (j.is_null()) return std::nullopt;
    std::vector<Pair> out;
    for (const auto& p : j) {
        const Pair q = pair_from_json(p);
        if (q.first == q.second || q.first >= n || q.second >= n) throw InvalidPairError("allowed pair out of range");
        out.push_back(make_pair_sorted(q.first, q.second));
    }
    auto dom = PairDomain::of(out, n);
    return dom.to_vector();
}

}  // namespace

std::string SessionStore::create(const json& body) {
    if (!body.is_object()) throw ValidationError("request body must be a JSON object");
    std::shared_ptr<Session> s;
    json created{{"type", "created"}};
    try {
        if (body.contains("import")) {
            const auto& ex = body["import"];
            Learner l = Learner::restore(ex.at("checkpoint"));
            if (ex.contains("history_csv") && ex["history_csv"].get<std::string>() != history_csv(l.history()))
                throw ValidationError("imported history does not match the checkpoint");
            s = std::make_shared<Session>(new_id(), std::move(l));
            if (ex.contains("annotators")) s->annotators = ex["annotators"].get<std::vector<std::string>>();
            s->annotators.resize(s->learner.history().size());
            if (ex.contains("allowed")) s->allowed = allowed_from_json(ex["allowed"], s->learner.pool().size());
            created["checkpoint"] = ex.at("checkpoint");
            created["annotators"] = s->annotators;
        } else {
            ItemPool pool = pool_from_body(body);
            LearnerConfig cfg = config_from_body(body);
            std::uint64_t seed = 0;
            if (body.contains("seed")) {
                seed = body["seed"].get<std::uint64_t>();
            } else {
                std::random_device rd;
                seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            }
            Learner l(std::move(pool), cfg, seed);
            s = std::make_shared<Session>(new_id(), std::move(l));
            if (body.contains("pairs")) s->allowed = allowed_from_json(body["pairs"], s->learner.pool().size());
            created["config"] = cfg;
            created["seed"] = seed;
            created["pool"] = s->learner.pool();
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed session request: ") + e.what());
    }
    if (s->allowed) {
        json a = json::array();
        for (auto p : *s->allowed) a.push_back(pair_json(p));
        created["pairs"] = a;
    }
    s->created_ms = s->updated_ms = now_ms();
    created["ms"] = s->created_ms;
    {
        std::lock_guard lock(s->mutex);
        open_log(*s, true);
        append_event(*s, created);
    }
    std::unique_lock lock(map_mutex_);
    sessions_[s->id] = s;
    return s->id;
}

NextPair SessionStore::next(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    NextPair out;
    out.step = s->learner.step() + 1;
    const auto& payloads = s->learner.pool().payloads();
    if (s->pending) {
        out.pair = *s->pending;
        if (!payloads.empty()) out.payloads = {payloads[out.pair.first], payloads[out.pair.second]};
        return out;
    }
    const PairDomain dom = s->domain();
    if (dom.empty()) {
        out.exhausted = true;
        return out;
    }
    out.pair = s->learner.select(dom);
    s->pending = out.pair;
    if (!payloads.empty()) out.payloads = {payloads[out.pair.first], payloads[out.pair.second]};
    s->updated_ms = now_ms();
    append_event(*s, {{"type", "query"}, {"pair", pair_json(out.pair)}, {"step", out.step}, {"ms", s->updated_ms}});
    return out;
}

std::size_t SessionStore::answer(const std::string& id, Pair pair, int choice, const std::string& annotator) {
    if (choice != 0 && choice != 1) throw ValidationError("choice must be 0 or 1");
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (!s->pending) throw ConflictError("no query is pending");
    if (!(*s->pending == pair))
        throw ConflictError("answer is for (" + std::to_string(pair.first) + ", " + std::to_string(pair.second) +
                            ") but the pending query is (" + std::to_string(s->pending->first) + ", " +
                            std::to_string(s->pending->second) + ")");
    const std::size_t step = s->learner.step() + 1;
    apply_answer(*s, pair, choice, annotator);
    s->updated_ms = now_ms();
    append_event(*s, {{"type", "answer"},
                      {"pair", pair_json(pair)},
                      {"choice", choice},
                      {"annotator", annotator},
                      {"step", step},
                      {"ms", s->updated_ms}});
    if (++s->answers_since_checkpoint >= kCheckpointEvery) write_checkpoint(*s);
    return s->learner.step();
}

namespace {

json ranking_json(const Learner& l, std::optional<std::size_t> top_k) {
    const Eigen::VectorXd scores = l.scores();
    const auto sd = l.score_sd();
    const auto order = induced_ranking(scores);
    const auto& payloads = l.pool().payloads();
    json items = json::array();
    const std::size_t k = std::min(order.size(), top_k.value_or(order.size()));
    for (std::size_t r = 0; r < k; ++r) {
        const ItemId i = order[r];
        json e{{"rank", r + 1}, {"item", i}, {"score", scores(static_cast<Eigen::Index>(i))}};
        e["sd"] = sd ? json((*sd)(static_cast<Eigen::Index>(i))) : json(nullptr);
        if (!payloads.empty()) e["payload"] = payloads[i];
        items.push_back(std::move(e));
    }
    return items;
}

}  // namespace

json SessionStore::ranking(const std::string& id, std::optional<std::size_t> top_k) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return {{"step", s->learner.step()}, {"ranking", ranking_json(s->learner, top_k)}};
}

json SessionStore::export_session(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    json out{{"history_csv", history_csv(s->learner.history())},
             {"checkpoint", s->learner.checkpoint()},
             {"annotators", s->annotators}};
    if (s->allowed) {
        json a = json::array();
        for (auto p : *s->allowed) a.push_back(pair_json(p));
        out["allowed"] = a;
    }
    return out;
}

Learner SessionStore::learner(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return s->learner;
}

std::optional<Pair> SessionStore::pending(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return s->pending;
}

void SessionStore::load(const fs::path& dir) {
    std::ifstream in(dir / "events.jsonl");
    std::vector<json> events;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        try {
            events.push_back(json::parse(line));
        } catch (const json::exception&) {
            break;  // torn final write
        }
    }
    if (events.empty() || events[0].value("type", "") != "created") {
        std::cerr << "prefrank: skipping " << dir << ": no creation event\n";
        return;
    }
    const std::string id = dir.filename().string();
    std::shared_ptr<Session> s;
    std::size_t from = 0;
    const fs::path cp_path = dir / "checkpoint.json";
    if (fs::exists(cp_path)) {
        std::ifstream cin(cp_path);
        const json cp = json::parse(cin, nullptr, false);
        if (!cp.is_discarded() && cp.value("log_lines", std::size_t{0}) <= events.size()) {
            s = std::make_shared<Session>(id, Learner::restore(cp.at("learner")));
            s->annotators = cp.at("annotators").get<std::vector<std::string>>();
            s->created_ms = cp.value("created_ms", std::int64_t{0});
            s->updated_ms = cp.value("updated_ms", std::int64_t{0});
            if (!cp["pending"].is_null()) s->pending = pair_from_json(cp["pending"]);
            if (cp.contains("allowed")) s->allowed = allowed_from_json(cp["allowed"], s->learner.pool().size());
            from = cp.at("log_lines").get<std::size_t>();
        }
    }
    if (!s) {
        const auto& c = events[0];
        if (c.contains("checkpoint")) {
            s = std::make_shared<Session>(id, Learner::restore(c["checkpoint"]));
            s->annotators = c.value("annotators", std::vector<std::string>{});
            s->annotators.resize(s->learner.history().size());
        } else {
            s = std::make_shared<Session>(
                id, Learner(c.at("pool").get<ItemPool>(), c.at("config").get<LearnerConfig>(), c.at("seed").get<std::uint64_t>()));
        }
        if (c.contains("pairs")) s->allowed = allowed_from_json(c["pairs"], s->learner.pool().size());
        s->created_ms = s->updated_ms = c.value("ms", std::int64_t{0});
        from = 1;
    }
    for (std::size_t k = from; k < events.size(); ++k) {
        const auto& e = events[k];
        const auto type = e.value("type", "");
        if (type == "query") {
            s->pending = pair_from_json(e.at("pair"));
        } else if (type == "answer") {
            apply_answer(*s, pair_from_json(e.at("pair")), e.at("choice").get<int>(), e.value("annotator", ""));
        }
        s->updated_ms = e.value("ms", s->updated_ms);
    }
    s->log_lines = events.size();
    open_log(*s, false);
    std::unique_lock lock(map_mutex_);
    sessions_[id] = s;
}

// ---------------------------------------------------------------------------
// HTTP

int http_status_for(const std::string& code) {
    if (code == "validation_error" || code == "parse_error" || code == "invalid_pair" || code == "config_error")
        return 400;
    if (code == "not_found") return 404;
    if (code == "conflict") return 409;
    return 500;
}

json error_body(const std::string& code, const std::string& message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_json(res, http_status_for(e.code()), error_body(e.code(), e.what()));
        } catch (const json::exception& e) {
            send_json(res, 400, error_body("validation_error", e.what()));
        } catch (const std::exception& e) {
            send_json(res, 500, error_body("internal", e.what()));
        }
    };
}

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) throw ParseError("request body is not valid JSON", 1);
    return body;
}

}  // namespace

void install_routes(httplib::Server& server, SessionStore& store) {
    server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const auto id = store.create(parse_body(req));
        send_json(res, 201, {{"id", id}});
    }));
    server.Get(R"(/sessions/([^/]+)/next)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto n = store.next(id);
        if (n.exhausted) {
            send_json(res, 200, {{"status", "exhausted"}, {"step", n.step}});
            return;
        }
        const json items = n.payloads.empty() ? json(nullptr) : json(n.payloads);
        send_json(res, 200, {{"status", "pending"}, {"pair", pair_json(n.pair)}, {"items", items}, {"step", n.step}});
    }));
    server.Post(R"(/sessions/([^/]+)/answers)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const json body = parse_body(req);
        if (!body.is_object() || !body.contains("pair") || !body.contains("choice"))
            throw ValidationError("answer needs 'pair' and 'choice'");
        const Pair pair = pair_from_json(body["pair"]);
        if (!body["choice"].is_number_integer()) throw ValidationError("choice must be 0 or 1");
        const int choice = body["choice"].get<int>();
        const std::string annotator = body.value("annotator", "");
        const std::size_t k = body.value("preview", std::size_t{5});
        const auto step = store.answer(id, pair, choice, annotator);
        send_json(res, 200, {{"step", step}, {"preview", store.ranking(id, k)["ranking"]}});
    }));
    server.Get(R"(/sessions/([^/]+)/ranking)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::size_t> k;
        if (req.has_param("top_k")) {
            try {
                k = static_cast<std::size_t>(std::stoull(req.get_param_value("top_k")));
            } catch (const std::exception&) {
                throw ValidationError("top_k must be a non-negative integer");
            }
        }
        send_json(res, 200, store.ranking(req.matches[1], k));
    }));
    server.Get(R"(/sessions/([^/]+)/export)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, store.export_session(req.matches[1]));
    }));
}

void serve(const ServeOptions& opts) {
    SessionStore store(opts.data_dir);
    httplib::Server server;
    install_routes(server, store);
    std::cerr << "prefrank: serving on " << opts.host << ":" << opts.port << " (data in " << opts.data_dir << ", "
              << store.size() << " sessions loaded)\n";
    if (!server.listen(opts.host, opts.port)) throw ConfigError("cannot bind " + opts.host + ":" + std::to_string(opts.port));
}

}  // namespace prefrank
