#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace newshub::service {

enum class JobKind { ingest, suggest, train, evaluate };
enum class JobState { queued, running, done, failed };

const char* to_string(JobKind k) noexcept;
const char* to_string(JobState s) noexcept;
// Errc::validation for unknown kinds.
JobKind job_kind_from_string(const std::string& s);

struct JobRecord {
  std::string job_id;
  JobKind kind = JobKind::train;
  JobState state = JobState::queued;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::string> result_path;
  std::optional<std::string> error;
  std::optional<std::string> idempotency_key;
};

nlohmann::json to_json(const JobRecord& job);

// Runs a job and returns its result path; throwing marks the job failed.
using JobRunner = std::function<std::string(const JobRecord&)>;

struct SubmitOutcome {
  JobRecord job;
  // False when an earlier submission with the same idempotency key matched.
  bool created = true;
};

// Bounded worker pool. Jobs run in submission order, except that a train job
// waits while another train job for the same model kind is running.
class JobManager {
 public:
  JobManager(std::size_t workers, JobRunner runner);
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  // Reusing a key with different kind/params is Errc::conflict.
  SubmitOutcome submit(JobKind kind, nlohmann::json params, std::optional<std::string> idempotency_key = {});
  std::optional<JobRecord> get(const std::string& job_id) const;
  std::vector<JobRecord> list() const;
  // Blocks until the job is done or failed; nullopt for unknown ids.
  std::optional<JobRecord> wait(const std::string& job_id) const;
  // Finishes running jobs, abandons queued ones.
  void shutdown();

 private:
  void worker_loop();
  static std::optional<std::string> exclusivity_key(const JobRecord& job);

  JobRunner runner_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::map<std::string, JobRecord> jobs_;
  std::vector<std::string> order_;
  std::deque<std::string> queue_;
  std::map<std::string, std::string> by_key_;
  std::map<std::string, std::size_t> running_exclusive_;
  std::size_t next_id_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace newshub::service
