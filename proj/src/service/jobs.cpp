#include "newshub/service/jobs.hpp"

#include <algorithm>
#include <cstdio>

#include "newshub/error.hpp"

namespace newshub::service {

using nlohmann::json;

const char* to_string(JobKind k) noexcept {
  switch (k) {
    case JobKind::ingest: return "ingest";
    case JobKind::suggest: return "suggest";
    case JobKind::train: return "train";
    case JobKind::evaluate: return "evaluate";
  }
  return "train";
}

const char* to_string(JobState s) noexcept {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "queued";
}

JobKind job_kind_from_string(const std::string& s) {
  if (s == "ingest") return JobKind::ingest;
  if (s == "suggest") return JobKind::suggest;
  if (s == "train") return JobKind::train;
  if (s == "evaluate") return JobKind::evaluate;
  throw Error(Errc::validation, "unknown job kind '" + s + "'");
}

json to_json(const JobRecord& job) {
  json j = {{"job_id", job.job_id},
            {"kind", to_string(job.kind)},
            {"state", to_string(job.state)},
            {"params", job.params}};
  j["result_path"] = job.result_path ? json(*job.result_path) : json(nullptr);
  j["error"] = job.error ? json(*job.error) : json(nullptr);
  if (job.idempotency_key) j["idempotency_key"] = *job.idempotency_key;
  return j;
}

JobManager::JobManager(std::size_t workers, JobRunner runner) : runner_(std::move(runner)) {
  workers = std::max<std::size_t>(workers, 1);
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

JobManager::~JobManager() { shutdown(); }

void JobManager::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && workers_.empty()) return;
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : workers_)
    if (t.joinable()) t.join();
  workers_.clear();
}

std::optional<std::string> JobManager::exclusivity_key(const JobRecord& job) {
  if (job.kind != JobKind::train) return std::nullopt;
  return "train:" + job.params.value("model", std::string());
}

SubmitOutcome JobManager::submit(JobKind kind, json params, std::optional<std::string> idempotency_key) {
  std::unique_lock lock(mu_);
  if (stopping_) throw Error(Errc::config, "job manager is shutting down");
  if (idempotency_key) {
    if (auto it = by_key_.find(*idempotency_key); it != by_key_.end()) {
      const JobRecord& existing = jobs_.at(it->second);
      if (existing.kind != kind || existing.params != params)
        throw Error(Errc::conflict, "idempotency key '" + *idempotency_key + "' was used for a different job");
      return {existing, false};
    }
  }
  char id[32];
  std::snprintf(id, sizeof id, "job-%06zu", next_id_++);
  JobRecord job{id, kind, JobState::queued, std::move(params), std::nullopt, std::nullopt, idempotency_key};
  jobs_[job.job_id] = job;
  order_.push_back(job.job_id);
  queue_.push_back(job.job_id);
  if (idempotency_key) by_key_[*idempotency_key] = job.job_id;
  lock.unlock();
  cv_.notify_all();
  return {job, true};
}

std::optional<JobRecord> JobManager::get(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<JobRecord> JobManager::list() const {
  std::lock_guard lock(mu_);
  std::vector<JobRecord> out;
  for (const auto& id : order_) out.push_back(jobs_.at(id));
  return out;
}

std::optional<JobRecord> JobManager::wait(const std::string& job_id) const {
  std::unique_lock lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  cv_.wait(lock, [&] {
    const auto s = jobs_.at(job_id).state;
    return s == JobState::done || s == JobState::failed || stopping_;
  });
  return jobs_.at(job_id);
}

void JobManager::worker_loop() {
  std::unique_lock lock(mu_);
  for (;;) {
    auto pick = queue_.end();
    cv_.wait(lock, [&] {
      if (stopping_) return true;
      pick = std::find_if(queue_.begin(), queue_.end(), [&](const std::string& id) {
        auto key = exclusivity_key(jobs_.at(id));
        return !key || running_exclusive_[*key] == 0;
      });
      return pick != queue_.end();
    });
    if (stopping_) return;
    const std::string id = *pick;
    queue_.erase(pick);
    JobRecord& job = jobs_.at(id);
    job.state = JobState::running;
    const auto key = exclusivity_key(job);
    if (key) ++running_exclusive_[*key];
    const JobRecord snapshot = job;
    lock.unlock();

    std::optional<std::string> result, error;
    try {
      result = runner_(snapshot);
    } catch (const std::exception& e) {
      error = e.what();
    }

    lock.lock();
    JobRecord& done = jobs_.at(id);
    done.state = error ? JobState::failed : JobState::done;
    done.result_path = result;
    done.error = error;
    if (key) --running_exclusive_[*key];
    cv_.notify_all();
  }
}

}  // namespace newshub::service
