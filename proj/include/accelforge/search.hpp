#pragma once

#include <functional>
#include <span>

#include "accelforge/agents.hpp"
#include "accelforge/bench_store.hpp"
#include "accelforge/core.hpp"
#include "accelforge/opt_memory.hpp"
#include "accelforge/profiling.hpp"

namespace accelforge {

// ---------------------------------------------------------------------------
// Candidate selection.
//
// Per (candidate, plan) group the fastest correct kernel represents the
// group; representatives sort by latency and fill up to B slots; remaining
// slots are taken by the previous frontier in its existing order, skipping
// kernels already chosen. Ties break on kernel_id.
// ---------------------------------------------------------------------------

std::vector<KernelArtifact> select_candidates(std::span<const KernelArtifact> pool,
                                              std::span<const KernelArtifact> previous, int beam_width);

// The kernels of one plan on one candidate (A_p).
struct PlanGroup {
    std::string candidate_id;
    std::string plan_id;
    std::vector<KernelArtifact> kernels;   // length <= K
};

struct ExpansionResult {
    std::vector<KernelArtifact> new_kernels;        // slot order: candidate, plan, attempt
    std::vector<ExperienceItem> new_memory;
    std::vector<KernelArtifact> next_candidates;
    std::vector<TokenUsage> usage;                  // planner + executor + summarizer calls
    int planner_shortfall = 0;
    int executor_dropped = 0;
};

// One iteration: N plans per candidate, K executor attempts per plan, every
// attempt evaluated; then memory curation and candidate selection at the
// barrier. Agent and evaluator faults (AgentUnavailable,
// EvaluatorUnavailable, BackendUnavailable) propagate without touching
// state. All randomness derives from (config.seed, iteration, slot), so the
// result is independent of scheduling.
ExpansionResult expand_frontier(const TaskSpec& task, const CampaignState& state,
                                const SearchConfig& config, Planner& planner, Executor& executor,
                                Summarizer& summarizer, Evaluator& evaluator,
                                double initial_latency_ms, int iteration, int max_parallel = 8);

// ---------------------------------------------------------------------------
// Campaign driver.
// ---------------------------------------------------------------------------

struct AgentSet {
    Planner* planner = nullptr;
    Executor* executor = nullptr;
    Summarizer* summarizer = nullptr;
};

struct CampaignHooks {
    // Runs after each iteration is persisted; an exception aborts the
    // campaign without losing the persisted records (crash injection and
    // progress printing both hang off this).
    std::function<void(const CampaignState&, const IterationRecord&)> after_iteration;
    int max_parallel = 8;
};

// Evaluates the initial kernel (InitialKernelIncorrect when it fails),
// registers the campaign in the store, then runs T iterations, persisting
// each before starting the next. A failed iteration is retried once and then
// raises IterationFailed.
CampaignState run_campaign(const TaskSpec& task, const HardwareSpec& hw,
                           const SearchConfig& config, const AgentSet& agents,
                           Evaluator& evaluator, BenchStore& store,
                           const std::string& campaign_id, const CampaignHooks& hooks = {});

// Continues a stored campaign from its last complete iteration record.
// Throws CampaignNotFound; IncompatibleConfig when expected_config is given
// and differs from the stored one.
CampaignState resume_campaign(BenchStore& store, const std::string& campaign_id,
                              const AgentSet& agents, Evaluator& evaluator,
                              const CampaignHooks& hooks = {},
                              const std::optional<SearchConfig>& expected_config = std::nullopt);

}  // namespace accelforge
