#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "../support.hpp"
#include "newshub/error.hpp"
#include "newshub/pipeline/pipeline.hpp"
#include "newshub/service/service.hpp"

using namespace newshub;
using namespace newshub::service;
using nlohmann::json;

namespace {

// Store directory with 60 labeled synthetic records, 5 unlabeled ones and
// three annotators.
struct StoreFixture {
  testing::TempDir dir;

  StoreFixture() {
    pipeline::SyntheticSpec spec;
    spec.n_documents = 60;
    spec.seed = 5;
    Corpus corpus = pipeline::make_synthetic_corpus(spec);
    for (int i = 0; i < 5; ++i) {
      ConsolidatedRecord r;
      r.id = "open-" + std::to_string(i);
      r.dataset = "Harbor Daily";
      r.text = "Council approves the harbor budget, item " + std::to_string(i) + ".";
      r.published_at = make_timestamp(2023, 6, 1 + i);
      corpus.push_back(r);
    }
    write_corpus_jsonl(dir / "corpus.jsonl", corpus);
    testing::spit(dir / "annotators.json", R"([
  {"id": "ana", "display_name": "Ana", "role": "linguist", "token": "tok-ana"},
  {"id": "ben", "display_name": "Ben", "role": "student", "token": "tok-ben"},
  {"id": "chi", "display_name": "Chi", "role": "data_scientist", "token": "tok-chi"}
])");
  }

  ServiceConfig config() const {
    ServiceConfig c;
    c.store_dir = dir.path();
    c.admin_token = "root";
    c.port = 0;
    c.workers = 1;
    return c;
  }
};

Response call(Service& svc, const std::string& method, const std::string& path, const std::string& token = {},
              const json& body = nullptr, std::map<std::string, std::string> query = {},
              std::map<std::string, std::string> headers = {}) {
  Request r;
  r.method = method;
  r.path = path;
  r.query = std::move(query);
  r.headers = std::move(headers);
  if (!token.empty()) r.headers["authorization"] = "Bearer " + token;
  if (!body.is_null()) r.body = body.dump();
  return svc.handle(r);
}

json body_of(const Response& r) { return json::parse(r.body); }

std::string token_for(const std::string& annotator) { return "tok-" + annotator; }

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("startup needs a complete store") {
    testing::TempDir empty;
    ServiceConfig c;
    c.store_dir = empty.path();
    try {
      Service svc(c);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::config);
    }
  }

  TEST_CASE("health, auth and unknown routes") {
    StoreFixture f;
    Service svc(f.config());
    const auto h = call(svc, "GET", "/api/health");
    CHECK(h.status == 200);
    CHECK(body_of(h)["status"] == "ok");
    CHECK(call(svc, "GET", "/api/v1/health").status == 200);
    CHECK(call(svc, "GET", "/api/records").status == 401);
    CHECK(call(svc, "GET", "/api/records", "nope").status == 401);
    CHECK(call(svc, "GET", "/api/nothing", "root").status == 404);
    CHECK(call(svc, "GET", "/elsewhere", "root").status == 404);
  }

  TEST_CASE("records pagination and filtering") {
    StoreFixture f;
    Service svc(f.config());
    const auto all = body_of(call(svc, "GET", "/api/records", "tok-ana"));
    CHECK(all["total"] == 65);
    CHECK(all["records"].size() == 50);
    const auto page = body_of(call(svc, "GET", "/api/records", "tok-ana", nullptr,
                                   {{"labeled", "false"}, {"limit", "2"}, {"offset", "1"}}));
    CHECK(page["total"] == 5);
    REQUIRE(page["records"].size() == 2);
    CHECK(page["records"][0]["id"] == "open-1");
    CHECK(call(svc, "GET", "/api/records", "tok-ana", nullptr, {{"labeled", "maybe"}}).status == 422);
    CHECK(body_of(call(svc, "GET", "/api/records", "tok-ana", nullptr, {{"limit", "5000"}}))["limit"] == 1000);
    CHECK(call(svc, "GET", "/api/records", "tok-ana", nullptr, {{"limit", "-1"}}).status == 422);
  }

  TEST_CASE("review workflow over the API") {
    StoreFixture f;
    Service svc(f.config());
    CHECK(call(svc, "POST", "/api/assignments", "tok-ana", json::object()).status == 403);
    const auto made = call(svc, "POST", "/api/assignments", "root", json::object());
    REQUIRE(made.status == 201);
    CHECK(body_of(made)["created"] == 10);
    CHECK(body_of(call(svc, "POST", "/api/assignments", "root", json::object()))["created"] == 0);

    const auto a = svc.store().assignments().front();
    const std::string owner = a.annotator_id;
    const std::string other = owner == "ana" ? "ben" : "ana";

    const auto q = body_of(call(svc, "GET", "/api/queue/" + owner, token_for(owner)));
    REQUIRE_FALSE(q["items"].empty());
    CHECK(q["items"][0]["assignment_id"] == a.id);
    CHECK(q["items"][0]["text"].get<std::string>().find("harbor budget") != std::string::npos);
    CHECK(call(svc, "GET", "/api/queue/" + owner, token_for(other)).status == 403);
    CHECK(call(svc, "GET", "/api/queue/zed", "root").status == 404);

    const json first = {{"assignment_id", a.id}, {"label", 1}};
    CHECK(call(svc, "POST", "/api/reviews", token_for(other), first).status == 403);
    CHECK(call(svc, "POST", "/api/reviews", token_for(owner), first).status == 201);
    CHECK(call(svc, "POST", "/api/reviews", token_for(owner), first).status == 200);
    const auto clash = call(svc, "POST", "/api/reviews", token_for(owner), {{"assignment_id", a.id}, {"label", 0}});
    CHECK(clash.status == 409);
    CHECK(body_of(clash)["stored_label"] == 1);
    CHECK(body_of(clash)["submitted_label"] == 0);
    CHECK(call(svc, "POST", "/api/reviews", token_for(owner), {{"assignment_id", a.id}, {"label", 3}}).status ==
          422);
    CHECK(call(svc, "POST", "/api/reviews", token_for(owner), {{"assignment_id", "nope"}, {"label", 1}}).status ==
          404);
    Request bad;
    bad.method = "POST";
    bad.path = "/api/reviews";
    bad.headers["authorization"] = "Bearer " + token_for(owner);
    bad.body = "{not json";
    CHECK(svc.handle(bad).status == 400);

    // Second reviewer disagrees, the third annotator resolves.
    std::string second_id, second_owner;
    for (const auto& x : svc.store().assignments())
      if (x.record_id == a.record_id && x.id != a.id) {
        second_id = x.id;
        second_owner = x.annotator_id;
      }
    REQUIRE_FALSE(second_id.empty());
    CHECK(call(svc, "POST", "/api/reviews", token_for(second_owner), {{"assignment_id", second_id}, {"label", 0}})
              .status == 201);
    std::string third;
    for (const char* who : {"ana", "ben", "chi"})
      if (who != owner && who != second_owner) third = who;
    const auto cases = body_of(call(svc, "GET", "/api/adjudication", token_for(third)));
    REQUIRE(cases["cases"].size() == 1);
    CHECK(cases["cases"][0]["record_id"] == a.record_id);
    CHECK(cases["cases"][0]["prior_labels"].size() == 2);
    CHECK(body_of(call(svc, "GET", "/api/adjudication", token_for(owner)))["cases"].empty());
    CHECK(call(svc, "POST", "/api/adjudication", token_for(owner), {{"record_id", a.record_id}, {"label", 1}})
              .status == 409);
    const auto resolved =
        call(svc, "POST", "/api/adjudication", token_for(third), {{"record_id", a.record_id}, {"label", 0}});
    CHECK(resolved.status == 201);
    CHECK(body_of(resolved)["adjudication"]["status"] == "adjudicated_by_third");

    const auto labeled = body_of(call(svc, "GET", "/api/records", "root", nullptr, {{"labeled", "false"}}));
    CHECK(labeled["total"] == 4);

    const auto agreement = body_of(call(svc, "GET", "/api/agreement", "tok-chi"));
    CHECK(agreement["gate"]["threshold"] == 0.8);
    CHECK(agreement["gate_failures"].empty());

    const auto fix = call(svc, "POST", "/api/reviews/supersede", token_for(owner),
                          {{"assignment_id", a.id}, {"label", 0}, {"reason", "misread"}});
    CHECK(fix.status == 200);
    CHECK(svc.store().supersedes().size() == 1);
  }

  TEST_CASE("suggestion visibility") {
    StoreFixture f;
    Service svc(f.config());
    call(svc, "POST", "/api/assignments", "root", json::object());
    const auto a = svc.store().assignments().front();
    svc.store().add_suggestion({a.record_id, Label::fake, "FAKE", "stub", now_utc()});
    const std::string tok = token_for(a.annotator_id);

    auto item = body_of(call(svc, "GET", "/api/queue/" + a.annotator_id, tok))["items"][0];
    CHECK_FALSE(item.contains("suggestion"));
    CHECK(call(svc, "GET", "/api/suggestions/" + a.record_id, tok).status == 403);
    CHECK(call(svc, "GET", "/api/suggestions/" + a.record_id, "root").status == 200);
    item = body_of(call(svc, "GET", "/api/queue/" + a.annotator_id, "root"))["items"][0];
    CHECK(item["suggestion"]["label"] == 1);

    CHECK(call(svc, "POST", "/api/settings", tok, {{"suggestions_visible", true}}).status == 403);
    CHECK(call(svc, "POST", "/api/settings", "root", {{"suggestions_visible", "yes"}}).status == 422);
    CHECK(body_of(call(svc, "POST", "/api/settings", "root", {{"suggestions_visible", true}}))["suggestions_visible"] ==
          true);
    CHECK(body_of(call(svc, "GET", "/api/settings", tok))["suggestions_visible"] == true);
    item = body_of(call(svc, "GET", "/api/queue/" + a.annotator_id, tok))["items"][0];
    CHECK(item["suggestion"]["label"] == 1);
    CHECK(call(svc, "GET", "/api/suggestions/" + a.record_id, tok).status == 200);
    CHECK(call(svc, "GET", "/api/suggestions/unknown", tok).status == 404);
  }

  TEST_CASE("train and evaluate jobs") {
    StoreFixture f;
    Service svc(f.config());
    const auto submit =
        call(svc, "POST", "/api/jobs", "tok-ana", {{"kind", "train"}, {"params", {{"model", "multinomial_nb"}}}});
    REQUIRE(submit.status == 202);
    const std::string id = body_of(submit)["job_id"];
    const auto done = svc.jobs().wait(id);
    REQUIRE(done);
    CHECK(done->state == JobState::done);
    REQUIRE(done->result_path);
    CHECK(std::filesystem::exists(*done->result_path));
    const auto status = body_of(call(svc, "GET", "/api/jobs/" + id, "tok-ana"));
    CHECK(status["state"] == "done");
    CHECK(call(svc, "GET", "/api/jobs/job-999", "tok-ana").status == 404);

    CHECK(call(svc, "POST", "/api/jobs", "tok-ana", {{"kind", "train"}, {"params", {{"model", "xgboost"}}}}).status ==
          422);
    CHECK(call(svc, "POST", "/api/jobs", "tok-ana",
               {{"kind", "train"}, {"params", {{"model", "logistic_regression"}, {"hyperparameters", {{"penalty", "l1"}}}}}})
              .status == 422);
    CHECK(call(svc, "POST", "/api/jobs", "tok-ana", {{"kind", "train"}, {"params", {{"model", "knn"}, {"extra", 1}}}})
              .status == 422);
    CHECK(call(svc, "POST", "/api/jobs", "tok-ana", {{"kind", "launch"}}).status == 422);
    CHECK(call(svc, "POST", "/api/jobs", "tok-ana", {{"kind", "ingest"}}).status == 403);

    CHECK(call(svc, "GET", "/api/reports/latest", "tok-ana").status == 404);
    const auto ev = call(svc, "POST", "/api/jobs", "tok-ana",
                         {{"kind", "evaluate"}, {"params", {{"models", {"multinomial_nb", "logistic_regression"}}}}});
    REQUIRE(ev.status == 202);
    const auto ev_done = svc.jobs().wait(body_of(ev)["job_id"]);
    REQUIRE(ev_done);
    CHECK(ev_done->state == JobState::done);
    const auto latest = call(svc, "GET", "/api/reports/latest", "tok-ana");
    CHECK(latest.status == 200);
    CHECK(body_of(latest)["leaderboard"]["rows"].size() == 2);
    CHECK(body_of(call(svc, "GET", "/api/jobs", "tok-ana"))["jobs"].size() == 2);
  }

  TEST_CASE("job idempotency keys") {
    StoreFixture f;
    Service svc(f.config());
    const json body = {{"kind", "train"}, {"params", {{"model", "bernoulli_nb"}}}};
    const auto first = call(svc, "POST", "/api/jobs", "tok-ana", body, {}, {{"idempotency-key", "k1"}});
    CHECK(first.status == 202);
    const auto again = call(svc, "POST", "/api/jobs", "tok-ana", body, {}, {{"idempotency-key", "k1"}});
    CHECK(again.status == 200);
    CHECK(body_of(again)["job_id"] == body_of(first)["job_id"]);
    const json other = {{"kind", "train"}, {"params", {{"model", "knn"}}}, {"idempotency_key", "k1"}};
    CHECK(call(svc, "POST", "/api/jobs", "tok-ana", other).status == 409);
    svc.jobs().wait(body_of(first)["job_id"]);
  }

  TEST_CASE("gate failure blocks training") {
    StoreFixture f;
    Service svc(f.config());
    // 40 records reviewed by ana and ben with kappa 0.6.
    std::vector<labeling::Assignment> batch;
    for (int i = 0; i < 40; ++i) {
      const std::string rid = "gate-" + std::to_string(i);
      batch.push_back({rid + "/r1a", rid, "ana"});
      batch.push_back({rid + "/r1b", rid, "ben"});
    }
    svc.store().add_assignments(batch);
    const int a[10] = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const int b[10] = {1, 1, 1, 1, 0, 1, 0, 0, 0, 0};
    for (int i = 0; i < 40; ++i) {
      const std::string rid = "gate-" + std::to_string(i);
      svc.store().record_review(rid + "/r1a", label_from_int(a[i % 10]), std::nullopt, now_utc());
      svc.store().record_review(rid + "/r1b", label_from_int(b[i % 10]), std::nullopt, now_utc());
    }
    const auto agreement = body_of(call(svc, "GET", "/api/agreement", "root"));
    CHECK(agreement["gate_failures"].size() == 1);
    const auto submit =
        call(svc, "POST", "/api/jobs", "tok-ana", {{"kind", "train"}, {"params", {{"model", "multinomial_nb"}}}});
    const auto job = svc.jobs().wait(body_of(submit)["job_id"]);
    REQUIRE(job);
    CHECK(job->state == JobState::failed);
    REQUIRE(job->error);
    CHECK(job->error->find("agreement") != std::string::npos);
  }

  TEST_CASE("served over a real socket") {
    StoreFixture f;
    Service svc(f.config());
    const int port = svc.start();
    REQUIRE(port > 0);
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(10, 0);
    auto health = cli.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    httplib::Headers auth = {{"Authorization", "Bearer tok-ana"}};
    auto recs = cli.Get("/api/records?labeled=false&limit=3", auth);
    REQUIRE(recs);
    CHECK(recs->status == 200);
    CHECK(json::parse(recs->body)["records"].size() == 3);
    auto denied = cli.Post("/api/settings", R"({"suggestions_visible":true})", "application/json");
    REQUIRE(denied);
    CHECK(denied->status == 401);
    svc.stop();
  }

  TEST_CASE("config file") {
    testing::TempDir dir;
    testing::spit(dir / "svc.conf", "# service\nport = 9123\nstore = data\nadmin_token = secret\nworkers = 3\n");
    const auto c = load_service_config(dir / "svc.conf");
    CHECK(c.port == 9123);
    CHECK(c.store_dir == dir.path() / "data");
    CHECK(c.admin_token == "secret");
    CHECK(c.workers == 3);
    testing::spit(dir / "bad.conf", "colour = blue\n");
    CHECK_THROWS_AS(load_service_config(dir / "bad.conf"), Error);
  }
}

TEST_SUITE("jobs") {
  TEST_CASE("runs, records results and failures") {
    JobManager jm(2, [](const JobRecord& j) -> std::string {
      if (j.params.value("fail", false)) throw Error(Errc::training, "boom");
      return "out/" + j.job_id;
    });
    const auto ok = jm.submit(JobKind::evaluate, json::object());
    const auto bad = jm.submit(JobKind::evaluate, {{"fail", true}});
    const auto a = jm.wait(ok.job.job_id);
    const auto b = jm.wait(bad.job.job_id);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->state == JobState::done);
    CHECK(a->result_path == "out/" + ok.job.job_id);
    CHECK(b->state == JobState::failed);
    CHECK(b->error->find("boom") != std::string::npos);
    CHECK(jm.list().size() == 2);
    CHECK_FALSE(jm.wait("missing"));
  }

  TEST_CASE("train jobs for one model kind never overlap") {
    std::atomic<int> active{0}, peak{0};
    JobManager jm(3, [&](const JobRecord& j) -> std::string {
      const int now = ++active;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
      --active;
      return j.job_id;
    });
    std::vector<std::string> ids;
    for (int i = 0; i < 4; ++i) ids.push_back(jm.submit(JobKind::train, {{"model", "knn"}}).job.job_id);
    for (const auto& id : ids) CHECK(jm.wait(id)->state == JobState::done);
    CHECK(peak == 1);
  }

  TEST_CASE("idempotency") {
    JobManager jm(1, [](const JobRecord& j) { return j.job_id; });
    const auto a = jm.submit(JobKind::train, {{"model", "knn"}}, "key");
    const auto b = jm.submit(JobKind::train, {{"model", "knn"}}, "key");
    CHECK(a.created);
    CHECK_FALSE(b.created);
    CHECK(a.job.job_id == b.job.job_id);
    CHECK_THROWS_AS(jm.submit(JobKind::train, {{"model", "adaboost"}}, "key"), Error);
    jm.wait(a.job.job_id);
  }

  TEST_CASE("kind names") {
    CHECK(job_kind_from_string("suggest") == JobKind::suggest);
    CHECK(std::string(to_string(JobState::failed)) == "failed");
    CHECK_THROWS_AS(job_kind_from_string("launch"), Error);
  }
}
