#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "accelforge/bench_store.hpp"
#include "accelforge/core.hpp"
#include "accelforge/profiling.hpp"

namespace accelforge {

// ---------------------------------------------------------------------------
// Wire messages. Jobs reuse EvaluationRequest; results carry the status and
// profile back, keyed by request_id.
// ---------------------------------------------------------------------------

struct ResultMessage {
    std::string request_id;
    KernelStatus status = KernelStatus::incorrect;
    std::optional<ProfileReport> profile;
    std::string error;
    std::string worker_id;
};

void to_json(json& j, const ResultMessage& v);
void from_json(const json& j, ResultMessage& v);

struct WorkerRecord {
    std::string worker_id;
    int capacity = 1;
    std::vector<std::string> cores;
    std::map<std::string, int> jobs_since_rotation;
};

// Rotates through cores after a fixed number of jobs on each, wrapping
// round-robin. With rotate_after=3 and cores {A,B}, seven jobs land on
// A,A,A,B,B,B,A.
class CoreRotator {
  public:
    CoreRotator(std::vector<std::string> cores, int rotate_after);
    const std::string& next();
    const WorkerRecord& record() const { return record_; }

  private:
    WorkerRecord record_;
    int rotate_after_;
    std::size_t active_ = 0;
    int used_on_active_ = 0;
};

// ---------------------------------------------------------------------------
// Manager: a serialized state machine over a FIFO queue. Delivery is
// at-least-once via leases; results are written durably before the report
// is acknowledged and repeated reports for the same request_id are ignored.
// ---------------------------------------------------------------------------

class ProfilingManager {
  public:
    struct Options {
        std::filesystem::path results_dir;      // durable result documents
        std::size_t queue_capacity = 100000;
        double lease_timeout_s = 60.0;
    };

    struct PollReply {
        std::string state;                      // pending | running | done | unknown
        std::optional<ResultMessage> result;
    };

    struct Stats {
        int submitted = 0;
        int completed = 0;
        int duplicates = 0;
        int requeued = 0;
        int max_in_flight = 0;                  // peak over all workers
        std::map<std::string, int> in_flight;   // live leases per worker
    };

    explicit ProfilingManager(Options options);

    void submit(const EvaluationRequest& job);                    // throws QueueFull
    PollReply poll(const std::string& request_id) const;
    std::optional<EvaluationRequest> worker_pull(const std::string& worker_id, int capacity);
    void worker_report(const ResultMessage& result);
    void worker_lost(const std::string& worker_id);               // requeue its leases
    int reap_expired(std::chrono::steady_clock::time_point now);  // returns requeue count

    Stats stats() const;

  private:
    struct Lease {
        EvaluationRequest job;
        std::string worker_id;
        std::chrono::steady_clock::time_point deadline;
    };

    std::filesystem::path result_path(const std::string& request_id) const;

    Options options_;
    mutable std::mutex mutex_;
    std::deque<EvaluationRequest> pending_;
    std::map<std::string, Lease> leases_;        // by request_id
    std::map<std::string, ResultMessage> done_;  // by request_id
    Stats stats_;
};

// ---------------------------------------------------------------------------
// Line-delimited JSON over TCP.
//
//   {"op":"submit","job":{...}}            -> {"ok":true}
//   {"op":"poll","request_id":id}          -> {"ok":true,"state":...,"result":{...}?}
//   {"op":"pull","worker_id":w,"capacity":c} -> {"ok":true,"job":{...}|null}
//   {"op":"report","result":{...}}         -> {"ok":true}
//   {"op":"lost","worker_id":w}            -> {"ok":true}
// ---------------------------------------------------------------------------

class ServiceServer {
  public:
    // listen_addr is "host:port"; port 0 binds an ephemeral port.
    ServiceServer(ProfilingManager& manager, const std::string& listen_addr);
    ~ServiceServer();

    void start();
    void stop();
    std::string address() const { return address_; }

  private:
    void accept_loop();
    void serve_connection(int fd);

    ProfilingManager& manager_;
    int listen_fd_ = -1;
    std::string address_;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::thread reap_thread_;
    std::mutex workers_mutex_;
    std::vector<std::thread> workers_;
};

class ServiceClient {
  public:
    explicit ServiceClient(std::string manager_addr);

    void submit(const EvaluationRequest& job);
    ProfilingManager::PollReply poll(const std::string& request_id);
    std::optional<EvaluationRequest> pull(const std::string& worker_id, int capacity);
    void report(const ResultMessage& result);
    void lost(const std::string& worker_id);

  private:
    json call(const json& request);
    std::string host_;
    int port_ = 0;
};

// ---------------------------------------------------------------------------
// Shared-filesystem transport: the same payloads as job and result files in
// spool directories, claimed and completed by atomic rename.
//
//   jobs/pending/<id>    submitted work
//   jobs/running/<id>    claimed work (suffix .<worker>)
//   jobs/done/<id>       durable results
// ---------------------------------------------------------------------------

class SpoolQueue {
  public:
    explicit SpoolQueue(std::filesystem::path root);

    void submit(const EvaluationRequest& job);
    std::optional<EvaluationRequest> claim(const std::string& worker_id);
    void report(const ResultMessage& result);
    std::optional<ResultMessage> result(const std::string& request_id) const;
    int requeue_stale(double older_than_s);

  private:
    std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// Worker and the remote-service evaluator.
// ---------------------------------------------------------------------------

struct WorkerOptions {
    std::string worker_id;
    std::string manager_addr;
    std::vector<std::string> cores{"core0"};
    int rotate_after = 16;
    int capacity = 1;
    std::filesystem::path store_root;     // resolves task_refs for evaluation
    double poll_interval_s = 0.02;
    int max_idle_polls = 0;               // 0: run until stop_flag
};

// Pulls, evaluates, reports. Returns the number of jobs completed.
int run_worker(const WorkerOptions& options, std::atomic<bool>& stop_flag);

// Builds the local evaluation backend a worker uses for `task`, from the
// task's reference handle ("synthetic:<seed>" or "command:<config path>").
std::shared_ptr<EvalBackend> backend_for_task(const TaskSpec& task);

// Evaluator that ships kernels to the profiling service and polls for the
// durable result.
class ServiceEvaluator : public Evaluator {
  public:
    ServiceEvaluator(std::string manager_addr, TaskSpec task, double fluctuation_threshold,
                     MeasurementParams params = {}, double poll_interval_s = 0.02,
                     double deadline_s = 600.0);

    KernelArtifact evaluate(const std::string& source, const Provenance& prov,
                            std::optional<double> initial_latency_ms) override;

  private:
    std::string manager_addr_;
    TaskSpec task_;
    double fluctuation_threshold_;
    MeasurementParams params_;
    double poll_interval_s_;
    double deadline_s_;
};

}  // namespace accelforge
