#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "accelforge/core.hpp"

namespace accelforge {

// ---------------------------------------------------------------------------
// Tensors and the correctness criterion.
// ---------------------------------------------------------------------------

struct Tensor {
    std::vector<std::uint64_t> shape;
    std::vector<double> data;       // row-major
};

// ||output - reference|| < tol * ||reference||, Euclidean norms, strict.
// A shape mismatch is incorrect, not an error. Total function.
bool check_correctness(const Tensor& output, const Tensor& reference, double tol);

// ---------------------------------------------------------------------------
// Latency measurement protocol.
//
// Rounds of warmup + timed runs; a round's latency is the mean of its timed
// runs and its fluctuation is (max - min) / min. The first round whose
// fluctuation is below the threshold wins; if none qualifies within
// rounds_max, the minimum-fluctuation round does.
// ---------------------------------------------------------------------------

struct EvaluationRequest {
    std::string request_id;
    std::string task_ref;           // "<operator>/<config-key>"
    std::string kernel_source;
    int num_seeds = 3;
    int rounds_max = 10;
    int warmup_runs = 2;
    int timed_runs = 10;
    double fluctuation_threshold = 0.01;
    double timeout_s = 120.0;
};

void to_json(json& j, const EvaluationRequest& v);
void from_json(const json& j, EvaluationRequest& v);

struct MeasurementOutcome {
    double latency_ms = 0;
    double fluctuation = 0;
    int rounds_used = 0;
};

// run_once executes the kernel once and returns the duration in ms.
// Throws MeasurementFailure if run_once throws.
MeasurementOutcome measure_latency(const std::function<double()>& run_once,
                                   const EvaluationRequest& req);

// ---------------------------------------------------------------------------
// Evaluator contract.
// ---------------------------------------------------------------------------

struct Provenance {
    std::string candidate_id;
    std::string plan_id;
    int attempt_index = 0;
};

// A compiled kernel instance a local backend can drive.
class KernelRunner {
  public:
    virtual ~KernelRunner() = default;
    virtual Tensor run(int seed) = 0;
    virtual Tensor reference(int seed) = 0;
    virtual double time_once() = 0;                          // ms
    virtual ProfileReport counters(double latency_ms) = 0;   // fills non-latency fields
};

// Compiles kernel text into a runner. Throws CompileError; may throw
// MeasurementFailure for execution-environment faults.
class EvalBackend {
  public:
    virtual ~EvalBackend() = default;
    virtual std::unique_ptr<KernelRunner> compile(const std::string& source) = 0;
};

// What the search engine talks to. Implementations: LocalEvaluator (synthetic
// or command backends) and ServiceEvaluator (remote profiling service).
class Evaluator {
  public:
    virtual ~Evaluator() = default;
    virtual KernelArtifact evaluate(const std::string& source, const Provenance& prov,
                                    std::optional<double> initial_latency_ms) = 0;
};

struct MeasurementParams {
    int rounds_max = 10;
    int warmup_runs = 2;
    int timed_runs = 10;
};

// compile -> correctness over seeds 0..num_seeds-1 -> latency protocol ->
// profile counters. Compilation time never enters the latency. Speedup is
// frozen against initial_latency_ms at evaluation time (1.0 when absent,
// i.e. when evaluating the initial kernel itself).
class LocalEvaluator : public Evaluator {
  public:
    LocalEvaluator(TaskSpec task, std::shared_ptr<EvalBackend> backend,
                   double fluctuation_threshold, MeasurementParams params = {},
                   double timeout_s = 120.0);

    KernelArtifact evaluate(const std::string& source, const Provenance& prov,
                            std::optional<double> initial_latency_ms) override;

    // The same pipeline, operating on a wire request; used by service workers.
    KernelArtifact evaluate_request(const EvaluationRequest& req);

  private:
    TaskSpec task_;
    std::shared_ptr<EvalBackend> backend_;
    double fluctuation_threshold_;
    MeasurementParams params_;
    double timeout_s_;
};

// Shared artifact assembly used by every evaluator implementation.
KernelArtifact finalize_artifact(const std::string& source, const Provenance& prov,
                                 KernelStatus status, std::optional<ProfileReport> profile,
                                 std::optional<double> initial_latency_ms);

}  // namespace accelforge
