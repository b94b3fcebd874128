#include "newshub/service/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include "http_server.hpp"
#include "newshub/error.hpp"
#include "newshub/features/features.hpp"
#include "newshub/labeling/llm.hpp"
#include "newshub/log.hpp"
#include "newshub/models/model.hpp"
#include "newshub/pipeline/pipeline.hpp"

namespace newshub::service {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Errors raised by handlers that map straight to a status code.
struct HttpError {
  int status;
  json body;
};

[[noreturn]] void fail(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  throw HttpError{status, std::move(extra)};
}

int status_for(Errc code) {
  switch (code) {
    case Errc::input:
    case Errc::validation:
    case Errc::unparseable_verdict: return 422;
    case Errc::parse: return 400;
    case Errc::not_found: return 404;
    case Errc::conflict:
    case Errc::integrity: return 409;
    case Errc::gate_failed:
    case Errc::export_blocked: return 412;
    default: return 500;
  }
}

Response json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::size_t parse_count(const std::map<std::string, std::string>& q, const std::string& key, std::size_t dflt,
                        std::size_t max) {
  auto it = q.find(key);
  if (it == q.end()) return dflt;
  const std::string& s = it->second;
  if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    fail(422, "query parameter '" + key + "' must be a non-negative integer");
  return std::min<std::size_t>(std::stoul(s), max);
}

json parse_body(const Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(400, "request body must be a JSON object");
  return j;
}

Label body_label(const json& body) {
  if (!body.contains("label") || !body["label"].is_number_integer()) fail(422, "'label' must be 0 or 1");
  const auto v = body["label"].get<long long>();
  if (v != 0 && v != 1) fail(422, "'label' must be 0 or 1");
  return v == 1 ? Label::fake : Label::real;
}

std::string body_string(const json& body, const char* key, bool required = true) {
  if (!body.contains(key)) {
    if (required) fail(422, std::string("'") + key + "' is required");
    return {};
  }
  if (!body[key].is_string()) fail(422, std::string("'") + key + "' must be a string");
  return body[key].get<std::string>();
}

std::optional<std::string> body_note(const json& body) {
  if (!body.contains("note") || body["note"].is_null()) return std::nullopt;
  if (!body["note"].is_string()) fail(422, "'note' must be a string");
  return body["note"].get<std::string>();
}

void check_keys(const json& params, std::initializer_list<const char*> allowed) {
  for (auto it = params.begin(); it != params.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw Error(Errc::validation, "unknown job parameter '" + it.key() + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ServiceConfig load_service_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config, "cannot read service config " + path.string());
  const fs::path base = path.parent_path();
  ServiceConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "host") c.host = value;
      else if (key == "port") c.port = std::stoi(value);
      else if (key == "store") c.store_dir = resolve(base, value);
      else if (key == "ui_dir") c.ui_dir = resolve(base, value);
      else if (key == "admin_token") c.admin_token = value;
      else if (key == "workers") c.workers = std::stoul(value);
      else if (key == "llm_stub") c.llm_stub = resolve(base, value);
      else if (key == "seed") c.seed = std::stoull(value);
      else throw Error(Errc::config, path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(Errc::config, path.string() + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
  return c;
}

void apply_env_overrides(ServiceConfig& c) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("NEWSHUB_STORE")) c.store_dir = *v;
  if (auto v = env("NEWSHUB_UI_DIR")) c.ui_dir = fs::path(*v);
  if (auto v = env("NEWSHUB_ADMIN_TOKEN")) c.admin_token = *v;
  if (auto v = env("NEWSHUB_LLM_STUB")) c.llm_stub = fs::path(*v);
  if (auto v = env("NEWSHUB_PORT")) {
    try {
      c.port = std::stoi(*v);
    } catch (const std::logic_error&) {
      throw Error(Errc::config, "NEWSHUB_PORT is not a number");
    }
  }
}

std::vector<AnnotatorAccount> load_accounts(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config, "cannot read annotators file " + path.string());
  std::vector<AnnotatorAccount> out;
  auto annotators = labeling::load_annotators(path);
  // Tokens are read separately; load_annotators ignores them.
  std::stringstream buf;
  buf << in.rdbuf();
  std::map<std::string, std::string> tokens;
  auto take = [&](const json& j) {
    if (j.is_object() && j.contains("id") && j.contains("token") && j["token"].is_string())
      tokens[j["id"].get<std::string>()] = j["token"].get<std::string>();
  };
  json whole = json::parse(buf.str(), nullptr, false);
  if (!whole.is_discarded() && whole.is_array()) {
    for (const auto& j : whole) take(j);
  } else {
    std::istringstream lines(buf.str());
    std::string line;
    while (std::getline(lines, line)) {
      json j = json::parse(line, nullptr, false);
      if (!j.is_discarded()) take(j);
    }
  }
  for (auto& a : annotators) out.push_back({a, tokens[a.id]});
  return out;
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  ServiceConfig config;
  fs::path corpus_path;
  fs::path artifacts;

  mutable std::shared_mutex corpus_mu;
  Corpus corpus;
  std::map<std::string, std::size_t> corpus_index;

  std::map<std::string, std::string> token_to_annotator;
  labeling::LabelingStore store;
  std::unique_ptr<JobManager> jobs;
  std::unique_ptr<detail::HttpServer> http;
  std::thread listener;
  std::mutex artifact_mu;

  explicit Impl(ServiceConfig c) : config(std::move(c)) {
    if (config.store_dir.empty()) throw Error(Errc::config, "no store directory configured");
    if (!fs::is_directory(config.store_dir))
      throw Error(Errc::config, "store directory " + config.store_dir.string() + " does not exist");
    corpus_path = config.store_dir / "corpus.jsonl";
    if (!fs::exists(corpus_path)) throw Error(Errc::config, "store has no corpus.jsonl");
    const fs::path accounts_path = config.store_dir / "annotators.json";
    if (!fs::exists(accounts_path)) throw Error(Errc::config, "store has no annotators.json");
    set_corpus(read_corpus_jsonl(corpus_path));

    store = labeling::LabelingStore::open(config.store_dir / "journal.jsonl");
    for (const auto& acct : load_accounts(accounts_path)) {
      if (!store.annotator(acct.annotator.id)) store.add_annotator(acct.annotator);
      if (!acct.token.empty()) token_to_annotator[acct.token] = acct.annotator.id;
    }
    artifacts = config.store_dir / "artifacts";
    fs::create_directories(artifacts / "models");
    fs::create_directories(artifacts / "reports");
    fs::create_directories(artifacts / "ingest");
    fs::create_directories(artifacts / "suggestions");
    jobs = std::make_unique<JobManager>(config.workers, [this](const JobRecord& job) { return run_job(job); });
  }

  void set_corpus(Corpus c) {
    std::unique_lock lock(corpus_mu);
    corpus = std::move(c);
    corpus_index.clear();
    for (std::size_t i = 0; i < corpus.size(); ++i) corpus_index[corpus[i].id] = i;
  }

  std::optional<ConsolidatedRecord> record(const std::string& id) const {
    std::shared_lock lock(corpus_mu);
    auto it = corpus_index.find(id);
    if (it == corpus_index.end()) return std::nullopt;
    return corpus[it->second];
  }

  Corpus corpus_snapshot() const {
    std::shared_lock lock(corpus_mu);
    return corpus;
  }

  // Corpus label, replaced by the adjudicated one where resolved.
  Corpus effective_labels() const {
    Corpus out = corpus_snapshot();
    std::map<std::string, Label> adjudicated;
    for (const auto& a : store.adjudications())
      if (a.resolved() && a.final_label) adjudicated[a.record_id] = *a.final_label;
    for (auto& r : out)
      if (auto it = adjudicated.find(r.id); it != adjudicated.end()) r.label = it->second;
    return out;
  }

  Corpus labeled_corpus() const {
    auto failures = labeling::gate_failures(store.agreement(), labeling::GateOptions{});
    if (!failures.empty()) throw IdListError(Errc::gate_failed, "agreement below gate", failures);
    Corpus out;
    for (auto& r : effective_labels())
      if (r.label) out.push_back(std::move(r));
    return out;
  }

  Session authenticate(const Request& req) const {
    auto it = req.headers.find("authorization");
    if (it == req.headers.end() || it->second.rfind("Bearer ", 0) != 0)
      fail(401, "missing bearer token");
    const std::string token = trim(it->second.substr(7));
    if (!config.admin_token.empty() && token == config.admin_token) return {"", true};
    auto a = token_to_annotator.find(token);
    if (token.empty() || a == token_to_annotator.end()) fail(401, "unknown token");
    return {a->second, false};
  }

  static void require_admin(const Session& s) {
    if (!s.admin) fail(403, "admin session required");
  }

  bool suggestions_visible_to(const Session& s) const { return s.admin || store.suggestions_visible(); }

  // --- handlers -----------------------------------------------------------

  Response get_records(const Request& req) {
    authenticate(req);
    std::optional<bool> labeled;
    if (auto it = req.query.find("labeled"); it != req.query.end()) {
      if (it->second == "true" || it->second == "1") labeled = true;
      else if (it->second == "false" || it->second == "0") labeled = false;
      else fail(422, "'labeled' must be true or false");
    }
    const std::size_t limit = parse_count(req.query, "limit", 50, 1000);
    const std::size_t offset = parse_count(req.query, "offset", 0, std::numeric_limits<std::size_t>::max());
    json items = json::array();
    std::size_t total = 0;
    for (const auto& r : effective_labels()) {
      if (labeled && r.label.has_value() != *labeled) continue;
      if (total >= offset && items.size() < limit) items.push_back(to_json(r));
      ++total;
    }
    return json_response(200, {{"total", total}, {"offset", offset}, {"limit", limit}, {"records", items}});
  }

  Response get_queue(const Request& req, const std::string& annotator_id) {
    Session s = authenticate(req);
    if (!s.admin && s.annotator_id != annotator_id) fail(403, "sessions may only read their own queue");
    if (!store.annotator(annotator_id)) fail(404, "unknown annotator '" + annotator_id + "'");
    const bool show = suggestions_visible_to(s);
    json items = json::array();
    for (const auto& a : store.queue(annotator_id)) {
      auto rec = record(a.record_id);
      json item = {{"assignment_id", a.id}, {"record_id", a.record_id}};
      if (rec) {
        item["text"] = rec->text;
        item["dataset"] = rec->dataset;
        item["published_at"] = rec->published_at ? json(format_rfc3339(*rec->published_at)) : json(nullptr);
        item["keyword_group"] = rec->keyword_group ? json(*rec->keyword_group) : json(nullptr);
      }
      if (show) {
        if (auto sug = store.suggestion(a.record_id))
          item["suggestion"] = {{"label", to_int(sug->suggested_label)}, {"visible", true}};
      }
      items.push_back(std::move(item));
    }
    return json_response(200, {{"annotator_id", annotator_id}, {"items", items}});
  }

  Response post_review(const Request& req) {
    Session s = authenticate(req);
    json body = parse_body(req);
    const std::string assignment_id = body_string(body, "assignment_id");
    const Label label = body_label(body);
    auto a = store.assignment(assignment_id);
    if (!a) fail(404, "unknown assignment " + assignment_id);
    if (!s.admin && a->annotator_id != s.annotator_id) fail(403, "assignment belongs to another annotator");
    if (a->round != 1) fail(422, "tie-break reviews go through /adjudication");
    try {
      auto outcome = store.record_review(assignment_id, label, body_note(body), now_utc());
      return json_response(outcome.created ? 201 : 200,
                           {{"created", outcome.created}, {"review", labeling::to_json(outcome.review)}});
    } catch (const Error& e) {
      if (e.code() != Errc::conflict) throw;
      json extra;
      for (const auto& r : store.reviews_for(a->record_id))
        if (r.assignment_id == assignment_id) extra["stored_label"] = to_int(r.label);
      extra["submitted_label"] = to_int(label);
      fail(409, e.what(), extra);
    }
  }

  Response post_supersede(const Request& req) {
    Session s = authenticate(req);
    json body = parse_body(req);
    const std::string assignment_id = body_string(body, "assignment_id");
    const Label label = body_label(body);
    const std::string reason = body_string(body, "reason");
    auto a = store.assignment(assignment_id);
    if (!a) fail(404, "unknown assignment " + assignment_id);
    if (!s.admin && a->annotator_id != s.annotator_id) fail(403, "assignment belongs to another annotator");
    const std::string actor = s.admin ? "admin" : s.annotator_id;
    auto review = store.supersede(assignment_id, label, actor, reason, now_utc());
    return json_response(200, {{"review", labeling::to_json(review)}});
  }

  Response get_adjudication(const Request& req) {
    Session s = authenticate(req);
    if (s.admin) fail(403, "adjudication cases are per annotator");
    json cases = json::array();
    for (const auto& rid : store.adjudication_cases(s.annotator_id)) {
      json c = {{"record_id", rid}};
      if (auto rec = record(rid)) {
        c["text"] = rec->text;
        c["dataset"] = rec->dataset;
      }
      json prior = json::array();
      for (const auto& r : store.reviews_for(rid))
        if (r.round == 1) prior.push_back(to_int(r.label));
      c["prior_labels"] = prior;
      cases.push_back(std::move(c));
    }
    return json_response(200, {{"annotator_id", s.annotator_id}, {"cases", cases}});
  }

  Response post_adjudication(const Request& req) {
    Session s = authenticate(req);
    if (s.admin) fail(403, "tie-break reviews need an annotator session");
    json body = parse_body(req);
    const std::string record_id = body_string(body, "record_id");
    const Label label = body_label(body);
    auto outcome = store.record_third_review(record_id, s.annotator_id, label, body_note(body), now_utc());
    json out = {{"created", outcome.created}, {"review", labeling::to_json(outcome.review)}};
    if (auto adj = store.adjudication(record_id)) out["adjudication"] = labeling::to_json(*adj);
    return json_response(outcome.created ? 201 : 200, out);
  }

  Response get_agreement(const Request& req) {
    authenticate(req);
    labeling::GateOptions gate;
    auto summary = store.agreement(gate.threshold);
    json j = labeling::to_json(summary);
    j["gate"] = {{"threshold", gate.threshold}, {"min_pair_items", gate.min_pair_items}, {"scope", "pairwise"}};
    j["gate_failures"] = labeling::gate_failures(summary, gate);
    return json_response(200, j);
  }

  Response get_suggestion(const Request& req, const std::string& record_id) {
    Session s = authenticate(req);
    if (!suggestions_visible_to(s)) fail(403, "suggestions are hidden for this study");
    auto sug = store.suggestion(record_id);
    if (!sug) fail(404, "no suggestion for record " + record_id);
    return json_response(200, labeling::to_json(*sug));
  }

  Response get_settings(const Request& req) {
    authenticate(req);
    return json_response(200, {{"suggestions_visible", store.suggestions_visible()}});
  }

  Response post_settings(const Request& req) {
    Session s = authenticate(req);
    require_admin(s);
    json body = parse_body(req);
    if (!body.contains("suggestions_visible") || !body["suggestions_visible"].is_boolean())
      fail(422, "'suggestions_visible' must be true or false");
    store.set_suggestions_visible(body["suggestions_visible"].get<bool>());
    return json_response(200, {{"suggestions_visible", store.suggestions_visible()}});
  }

  Response post_assignments(const Request& req) {
    Session s = authenticate(req);
    require_admin(s);
    json body = parse_body(req);
    std::uint64_t seed = config.seed;
    if (body.contains("seed")) {
      if (!body["seed"].is_number_unsigned()) fail(422, "'seed' must be a non-negative integer");
      seed = body["seed"].get<std::uint64_t>();
    }
    std::set<std::string> assigned;
    for (const auto& a : store.assignments()) assigned.insert(a.record_id);
    std::vector<std::string> todo;
    for (const auto& r : corpus_snapshot())
      if (!r.label && !assigned.count(r.id)) todo.push_back(r.id);
    auto annotators = store.annotators();
    auto batch = labeling::assign_reviews(todo, annotators, seed);
    store.add_assignments(batch);
    json items = json::array();
    for (const auto& a : batch) items.push_back(labeling::to_json(a));
    return json_response(201, {{"created", batch.size()}, {"assignments", items}});
  }

  json validate_job(JobKind kind, const json& params) {
    if (!params.is_object()) throw Error(Errc::validation, "'params' must be an object");
    auto check_seed = [&] {
      if (params.contains("seed") && !params["seed"].is_number_unsigned())
        throw Error(Errc::validation, "'seed' must be a non-negative integer");
    };
    switch (kind) {
      case JobKind::train: {
        check_keys(params, {"model", "seed", "hyperparameters"});
        if (!params.contains("model") || !params["model"].is_string())
          throw Error(Errc::validation, "train jobs need a 'model'");
        models::model_kind_from_string(params["model"].get<std::string>());
        check_seed();
        if (params.contains("hyperparameters"))
          models::Hyperparameters::from_json({{"kind", params["model"]}, {"values", params["hyperparameters"]}});
        break;
      }
      case JobKind::evaluate:
        check_keys(params, {"models", "seed"});
        check_seed();
        if (params.contains("models")) {
          if (!params["models"].is_array()) throw Error(Errc::validation, "'models' must be a list");
          for (const auto& m : params["models"]) {
            if (!m.is_string()) throw Error(Errc::validation, "model names must be strings");
            models::model_kind_from_string(m.get<std::string>());
          }
        }
        break;
      case JobKind::ingest:
        check_keys(params, {"config", "benchmark", "offline", "install"});
        for (const char* k : {"config", "benchmark"})
          if (params.contains(k) && !params[k].is_string())
            throw Error(Errc::validation, std::string("'") + k + "' must be a path string");
        for (const char* k : {"offline", "install"})
          if (params.contains(k) && !params[k].is_boolean())
            throw Error(Errc::validation, std::string("'") + k + "' must be true or false");
        break;
      case JobKind::suggest:
        check_keys(params, {"stub", "prompt"});
        for (const char* k : {"stub", "prompt"})
          if (params.contains(k) && !params[k].is_string())
            throw Error(Errc::validation, std::string("'") + k + "' must be a path string");
        break;
    }
    return params;
  }

  Response post_job(const Request& req) {
    Session s = authenticate(req);
    json body = parse_body(req);
    if (!body.contains("kind") || !body["kind"].is_string()) fail(422, "'kind' is required");
    std::optional<std::string> key;
    if (auto it = req.headers.find("idempotency-key"); it != req.headers.end()) key = it->second;
    if (body.contains("idempotency_key")) key = body_string(body, "idempotency_key");
    const JobKind kind = job_kind_from_string(body["kind"].get<std::string>());
    if ((kind == JobKind::ingest || kind == JobKind::suggest) && !s.admin)
      fail(403, "admin session required for this job kind");
    json params = validate_job(kind, body.value("params", json::object()));
    auto outcome = jobs->submit(kind, params, key);
    return json_response(outcome.created ? 202 : 200, to_json(outcome.job));
  }

  Response get_job(const Request& req, const std::string& id) {
    authenticate(req);
    auto job = jobs->get(id);
    if (!job) fail(404, "unknown job " + id);
    return json_response(200, to_json(*job));
  }

  Response list_jobs(const Request& req) {
    authenticate(req);
    json items = json::array();
    for (const auto& j : jobs->list()) items.push_back(to_json(j));
    return json_response(200, {{"jobs", items}});
  }

  Response get_latest_report(const Request& req) {
    authenticate(req);
    std::lock_guard lock(artifact_mu);
    const fs::path p = artifacts / "reports" / "latest.json";
    std::ifstream in(p);
    if (!in) fail(404, "no report yet");
    std::stringstream buf;
    buf << in.rdbuf();
    return {200, buf.str(), "application/json"};
  }

  Response route(const Request& req) {
    auto seg = split_path(req.path);
    if (seg.empty() || seg[0] != "api") fail(404, "not found");
    std::size_t i = 1;
    if (seg.size() > 1 && seg[1] == "v1") i = 2;
    std::vector<std::string> p(seg.begin() + static_cast<std::ptrdiff_t>(i), seg.end());
    const std::string& m = req.method;
    auto is = [&](std::initializer_list<const char*> parts) {
      if (p.size() != parts.size()) return false;
      std::size_t k = 0;
      for (const char* part : parts) {
        if (std::string(part) != "*" && p[k] != part) return false;
        ++k;
      }
      return true;
    };
    if (m == "GET" && is({"health"})) return json_response(200, {{"status", "ok"}});
    if (m == "GET" && is({"records"})) return get_records(req);
    if (m == "GET" && is({"queue", "*"})) return get_queue(req, p[1]);
    if (m == "POST" && is({"reviews"})) return post_review(req);
    if (m == "POST" && is({"reviews", "supersede"})) return post_supersede(req);
    if (m == "GET" && is({"adjudication"})) return get_adjudication(req);
    if (m == "POST" && is({"adjudication"})) return post_adjudication(req);
    if (m == "GET" && is({"agreement"})) return get_agreement(req);
    if (m == "POST" && is({"assignments"})) return post_assignments(req);
    if (m == "POST" && is({"jobs"})) return post_job(req);
    if (m == "GET" && is({"jobs"})) return list_jobs(req);
    if (m == "GET" && is({"jobs", "*"})) return get_job(req, p[1]);
    if (m == "GET" && is({"reports", "latest"})) return get_latest_report(req);
    if (m == "GET" && is({"suggestions", "*"})) return get_suggestion(req, p[1]);
    if (m == "GET" && is({"settings"})) return get_settings(req);
    if (m == "POST" && is({"settings"})) return post_settings(req);
    fail(404, "no route for " + m + " " + req.path);
  }

  // --- jobs ---------------------------------------------------------------

  std::string run_job(const JobRecord& job) {
    switch (job.kind) {
      case JobKind::train: return run_train(job);
      case JobKind::evaluate: return run_evaluate(job);
      case JobKind::ingest: return run_ingest_job(job);
      case JobKind::suggest: return run_suggest(job);
    }
    throw Error(Errc::validation, "unsupported job kind");
  }

  std::string run_train(const JobRecord& job) {
    const auto kind = models::model_kind_from_string(job.params.at("model").get<std::string>());
    const std::uint64_t seed = job.params.value("seed", config.seed);
    json hp = {{"kind", models::to_string(kind)}, {"seed", seed}};
    if (job.params.contains("hyperparameters")) hp["values"] = job.params["hyperparameters"];
    auto params = models::Hyperparameters::from_json(hp);

    auto model = pipeline::train_on_corpus(labeled_corpus(), params);
    const fs::path out = artifacts / "models" / (std::string(models::to_string(kind)) + "-" + job.job_id + ".json");
    models::save_model(model, out);
    return out.string();
  }

  std::string run_evaluate(const JobRecord& job) {
    pipeline::BenchmarkOptions opts;
    opts.split.seed = job.params.value("seed", config.seed);
    if (job.params.contains("models")) {
      opts.models.clear();
      for (const auto& m : job.params["models"]) opts.models.push_back(models::model_kind_from_string(m.get<std::string>()));
    }
    auto result = pipeline::run_benchmark(labeled_corpus(), opts);
    const json report = pipeline::benchmark_json(result, opts);
    const std::string markdown = eval::render_report(result.board, eval::ReportFormat::markdown);
    std::lock_guard lock(artifact_mu);
    const fs::path dir = artifacts / "reports";
    const fs::path out = dir / (job.job_id + ".json");
    for (const auto& p : {out, dir / "latest.json"}) std::ofstream(p, std::ios::binary) << report.dump(2) << '\n';
    for (const auto& p : {dir / (job.job_id + ".md"), dir / "latest.md"}) std::ofstream(p, std::ios::binary) << markdown;
    return out.string();
  }

  std::string run_ingest_job(const JobRecord& job) {
    const fs::path cfg_path = resolve(config.store_dir, job.params.value("config", std::string("feeds.conf")));
    auto cfg = ingest::load_ingest_config(cfg_path);
    Corpus benchmark;
    if (job.params.contains("benchmark"))
      benchmark = read_corpus_jsonl(resolve(config.store_dir, job.params["benchmark"].get<std::string>()));
    pipeline::IngestRun run;
    if (job.params.value("offline", false)) {
      auto transport = pipeline::fixture_transport(cfg);
      run = pipeline::run_ingest(cfg, benchmark, transport);
    } else {
      ingest::HttpTransport transport;
      run = pipeline::run_ingest(cfg, benchmark, transport);
    }
    const fs::path out = artifacts / "ingest" / (job.job_id + ".jsonl");
    write_corpus_jsonl(out, run.corpus);
    if (job.params.value("install", false)) {
      write_corpus_jsonl(corpus_path, run.corpus);
      set_corpus(run.corpus);
    }
    return out.string();
  }

  std::string run_suggest(const JobRecord& job) {
    std::unique_ptr<labeling::CompletionClient> client;
    std::optional<fs::path> stub = config.llm_stub;
    if (job.params.contains("stub")) stub = resolve(config.store_dir, job.params["stub"].get<std::string>());
    if (stub) client = std::make_unique<labeling::StubCompletionClient>(labeling::StubCompletionClient::from_file(*stub));
    else client = std::make_unique<labeling::HttpCompletionClient>(labeling::LlmEndpoint::from_env());
    std::string tmpl(labeling::default_prompt_template());
    if (job.params.contains("prompt")) {
      std::ifstream in(resolve(config.store_dir, job.params["prompt"].get<std::string>()));
      if (!in) throw Error(Errc::io, "cannot read prompt template");
      std::stringstream buf;
      buf << in.rdbuf();
      tmpl = buf.str();
    }
    std::set<std::string> skip;
    for (const auto& sug : store.suggestions()) skip.insert(sug.record_id);
    auto run = pipeline::suggest_corpus(corpus_snapshot(), *client, tmpl, skip);
    const fs::path out = artifacts / "suggestions" / (job.job_id + ".jsonl");
    std::ofstream os(out, std::ios::binary);
    for (const auto& sug : run.suggestions) {
      store.add_suggestion(sug);
      os << labeling::to_json(sug).dump() << '\n';
    }
    if (!run.failures.empty()) log_warn(std::to_string(run.failures.size()) + " suggestion(s) failed");
    return out.string();
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

Response Service::handle(const Request& request) {
  try {
    return impl_->route(request);
  } catch (const HttpError& e) {
    return json_response(e.status, e.body);
  } catch (const IdListError& e) {
    return json_response(status_for(e.code()), {{"error", e.what()}, {"code", to_string(e.code())}, {"ids", e.ids()}});
  } catch (const Error& e) {
    return json_response(status_for(e.code()), {{"error", e.what()}, {"code", to_string(e.code())}});
  } catch (const std::exception& e) {
    return json_response(500, {{"error", e.what()}});
  }
}

int Service::start() {
  impl_->http = std::make_unique<detail::HttpServer>([this](const Request& r) { return handle(r); },
                                                      impl_->config.ui_dir);
  const int port = impl_->http->bind(impl_->config.host, impl_->config.port);
  impl_->listener = std::thread([this] { impl_->http->listen(); });
  while (!impl_->http->running()) std::this_thread::yield();
  return port;
}

void Service::run() {
  impl_->http = std::make_unique<detail::HttpServer>([this](const Request& r) { return handle(r); },
                                                      impl_->config.ui_dir);
  impl_->http->bind(impl_->config.host, impl_->config.port);
  impl_->http->listen();
}

void Service::stop() {
  if (!impl_) return;
  if (impl_->http) impl_->http->stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  if (impl_->jobs) impl_->jobs->shutdown();
}

labeling::LabelingStore& Service::store() { return impl_->store; }
JobManager& Service::jobs() { return *impl_->jobs; }
const ServiceConfig& Service::config() const { return impl_->config; }

}  // namespace newshub::service
