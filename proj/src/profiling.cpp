#include "accelforge/profiling.hpp"

#include <cmath>
#include <limits>

#include "accelforge/errors.hpp"

namespace accelforge {

bool check_correctness(const Tensor& output, const Tensor& reference, double tol) {
    if (output.shape != reference.shape) return false;
    if (output.data.size() != reference.data.size()) return false;
    double diff_sq = 0;
    double ref_sq = 0;
    for (std::size_t i = 0; i < reference.data.size(); ++i) {
        const double d = output.data[i] - reference.data[i];
        diff_sq += d * d;
        ref_sq += reference.data[i] * reference.data[i];
    }
    return std::sqrt(diff_sq) < tol * std::sqrt(ref_sq);
}

void to_json(json& j, const EvaluationRequest& v) {
    j = json{{"request_id", v.request_id},
             {"task_ref", v.task_ref},
             {"kernel_source", v.kernel_source},
             {"num_seeds", v.num_seeds},
             {"rounds_max", v.rounds_max},
             {"warmup_runs", v.warmup_runs},
             {"timed_runs", v.timed_runs},
             {"fluctuation_threshold", v.fluctuation_threshold},
             {"timeout_s", v.timeout_s}};
}

void from_json(const json& j, EvaluationRequest& v) {
    j.at("request_id").get_to(v.request_id);
    j.at("task_ref").get_to(v.task_ref);
    j.at("kernel_source").get_to(v.kernel_source);
    j.at("num_seeds").get_to(v.num_seeds);
    j.at("rounds_max").get_to(v.rounds_max);
    j.at("warmup_runs").get_to(v.warmup_runs);
    j.at("timed_runs").get_to(v.timed_runs);
    j.at("fluctuation_threshold").get_to(v.fluctuation_threshold);
    j.at("timeout_s").get_to(v.timeout_s);
}

MeasurementOutcome measure_latency(const std::function<double()>& run_once,
                                   const EvaluationRequest& req) {
    double best_latency = 0;
    double best_fluctuation = std::numeric_limits<double>::infinity();
    int rounds_executed = 0;
    for (int round = 1; round <= req.rounds_max; ++round) {
        double mean = 0;
        double fluctuation = 0;
        try {
            for (int i = 0; i < req.warmup_runs; ++i) run_once();
            double sum = 0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = 0;
            for (int i = 0; i < req.timed_runs; ++i) {
                const double t = run_once();
                sum += t;
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
            mean = sum / req.timed_runs;
            fluctuation = (hi - lo) / lo;
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw MeasurementFailure(std::string("measurement source failed: ") + e.what());
        }
        rounds_executed = round;
        if (fluctuation < req.fluctuation_threshold) {
            return {mean, fluctuation, rounds_executed};
        }
        if (fluctuation < best_fluctuation) {
            best_latency = mean;
            best_fluctuation = fluctuation;
        }
    }
    // No round met the threshold; report the calmest one. rounds_used counts
    // executed rounds, not the index of the chosen round.
    return {best_latency, best_fluctuation, rounds_executed};
}

KernelArtifact finalize_artifact(const std::string& source, const Provenance& prov,
                                 KernelStatus status, std::optional<ProfileReport> profile,
                                 std::optional<double> initial_latency_ms) {
    KernelArtifact artifact;
    artifact.kernel_id = make_kernel_id(source, prov.candidate_id, prov.plan_id);
    artifact.source = source;
    artifact.candidate_id = prov.candidate_id;
    artifact.plan_id = prov.plan_id;
    artifact.attempt_index = prov.attempt_index;
    artifact.status = status;
    if (status == KernelStatus::correct) {
        artifact.profile = std::move(profile);
        const double initial = initial_latency_ms.value_or(artifact.profile->latency);
        artifact.speedup_vs_initial = initial / artifact.profile->latency;
    }
    return artifact;
}

LocalEvaluator::LocalEvaluator(TaskSpec task, std::shared_ptr<EvalBackend> backend,
                               double fluctuation_threshold, MeasurementParams params,
                               double timeout_s)
    : task_(std::move(task)),
      backend_(std::move(backend)),
      fluctuation_threshold_(fluctuation_threshold),
      params_(params),
      timeout_s_(timeout_s) {}

KernelArtifact LocalEvaluator::evaluate(const std::string& source, const Provenance& prov,
                                        std::optional<double> initial_latency_ms) {
    std::unique_ptr<KernelRunner> runner;
    try {
        runner = backend_->compile(source);
    } catch (const CompileError&) {
        return finalize_artifact(source, prov, KernelStatus::compile_error, std::nullopt,
                                 initial_latency_ms);
    }

    EvaluationRequest req;
    req.num_seeds = task_.num_seeds;
    req.rounds_max = params_.rounds_max;
    req.warmup_runs = params_.warmup_runs;
    req.timed_runs = params_.timed_runs;
    req.fluctuation_threshold = fluctuation_threshold_;
    req.timeout_s = timeout_s_;

    try {
        for (int seed = 0; seed < task_.num_seeds; ++seed) {
            if (!check_correctness(runner->run(seed), runner->reference(seed), task_.tolerance)) {
                return finalize_artifact(source, prov, KernelStatus::incorrect, std::nullopt,
                                         initial_latency_ms);
            }
        }
        const auto measured = measure_latency([&] { return runner->time_once(); }, req);
        ProfileReport profile = runner->counters(measured.latency_ms);
        profile.latency = measured.latency_ms;
        return finalize_artifact(source, prov, KernelStatus::correct, std::move(profile),
                                 initial_latency_ms);
    } catch (const TimedOut&) {
        return finalize_artifact(source, prov, KernelStatus::timeout, std::nullopt,
                                 initial_latency_ms);
    } catch (const MeasurementFailure&) {
        return finalize_artifact(source, prov, KernelStatus::timeout, std::nullopt,
                                 initial_latency_ms);
    }
}

KernelArtifact LocalEvaluator::evaluate_request(const EvaluationRequest& req) {
    MeasurementParams params{req.rounds_max, req.warmup_runs, req.timed_runs};
    LocalEvaluator scoped(task_, backend_, req.fluctuation_threshold, params, req.timeout_s);
    scoped.task_.num_seeds = req.num_seeds;
    return scoped.evaluate(req.kernel_source, Provenance{}, std::nullopt);
}

}  // namespace accelforge
