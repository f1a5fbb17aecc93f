#include "accelforge/search.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>

#include "accelforge/errors.hpp"
#include "accelforge/metrics.hpp"
#include "accelforge/util.hpp"

namespace accelforge {

std::vector<KernelArtifact> select_candidates(std::span<const KernelArtifact> pool,
                                              std::span<const KernelArtifact> previous,
                                              int beam_width) {
    // Representative per plan group: the fastest correct kernel.
    std::map<std::pair<std::string, std::string>, const KernelArtifact*> reps;
    for (const auto& k : pool) {
        if (!k.correct()) continue;
        auto& slot = reps[{k.candidate_id, k.plan_id}];
        if (!slot || std::make_pair(k.latency(), k.kernel_id) <
                         std::make_pair(slot->latency(), slot->kernel_id)) {
            slot = &k;
        }
    }

    std::vector<const KernelArtifact*> ranked;
    ranked.reserve(reps.size());
    for (const auto& [key, k] : reps) ranked.push_back(k);
    std::sort(ranked.begin(), ranked.end(), [](const KernelArtifact* a, const KernelArtifact* b) {
        return std::make_pair(a->latency(), a->kernel_id) <
               std::make_pair(b->latency(), b->kernel_id);
    });

    std::vector<KernelArtifact> selected;
    std::set<std::string> chosen;
    for (const KernelArtifact* k : ranked) {
        if (static_cast<int>(selected.size()) >= beam_width) break;
        if (chosen.insert(k->kernel_id).second) selected.push_back(*k);
    }
    for (const auto& prev : previous) {
        if (static_cast<int>(selected.size()) >= beam_width) break;
        if (chosen.insert(prev.kernel_id).second) selected.push_back(prev);
    }
    return selected;
}

ExpansionResult expand_frontier(const TaskSpec& task, const CampaignState& state,
                                const SearchConfig& config, Planner& planner, Executor& executor,
                                Summarizer& summarizer, Evaluator& evaluator,
                                double initial_latency_ms, int iteration, int max_parallel) {
    const std::uint64_t iter_seed =
        seed_mix({config.seed, 0xA17E4ULL, static_cast<std::uint64_t>(iteration)});
    const std::size_t num_candidates = state.candidates.size();
    const std::size_t plan_slots = num_candidates * static_cast<std::size_t>(config.plans_per_candidate);

    // Stage 1: N plans per frontier candidate, all requests independent.
    struct PlanSlot {
        std::optional<OptimizationPlan> plan;
        std::vector<TokenUsage> usage;
        int shortfall = 0;
    };
    std::vector<PlanSlot> plans(plan_slots);
    parallel_for(plan_slots, static_cast<std::size_t>(max_parallel), [&](std::size_t slot) {
        const std::size_t ci = slot / config.plans_per_candidate;
        const std::size_t pi = slot % config.plans_per_candidate;
        PlannerResult r = planner.propose(task, state.candidates[ci], state.memory, 1,
                                          seed_mix({iter_seed, 0x01ULL, ci, pi}));
        plans[slot].usage = std::move(r.usage);
        plans[slot].shortfall = r.shortfall;
        if (!r.plans.empty()) plans[slot].plan = std::move(r.plans.front());
    });

    // Stage 2: K executor attempts per plan, each evaluated.
    struct ExecSlot {
        std::vector<KernelArtifact> kernels;
        std::vector<TokenUsage> usage;
        int dropped = 0;
    };
    std::vector<ExecSlot> groups(plan_slots);
    parallel_for(plan_slots, static_cast<std::size_t>(max_parallel), [&](std::size_t slot) {
        if (!plans[slot].plan) return;
        const std::size_t ci = slot / config.plans_per_candidate;
        const std::size_t pi = slot % config.plans_per_candidate;
        const KernelArtifact& candidate = state.candidates[ci];
        const OptimizationPlan& plan = *plans[slot].plan;
        ExecutorResult r = executor.implement(task, plan, candidate, config.attempts_per_plan,
                                              seed_mix({iter_seed, 0x02ULL, ci, pi}));
        groups[slot].usage = std::move(r.usage);
        groups[slot].dropped = r.dropped;
        for (std::size_t a = 0; a < r.sources.size(); ++a) {
            Provenance prov{candidate.kernel_id, plan.plan_id, static_cast<int>(a)};
            groups[slot].kernels.push_back(
                evaluator.evaluate(r.sources[a], prov, initial_latency_ms));
        }
    });

    // Barrier: deterministic assembly in slot order, then curation and
    // candidate selection.
    ExpansionResult result;
    for (std::size_t slot = 0; slot < plan_slots; ++slot) {
        for (const auto& u : plans[slot].usage) result.usage.push_back(u);
        result.planner_shortfall += plans[slot].shortfall;
    }
    for (std::size_t slot = 0; slot < plan_slots; ++slot) {
        for (const auto& u : groups[slot].usage) result.usage.push_back(u);
        result.executor_dropped += groups[slot].dropped;
        for (auto& k : groups[slot].kernels) result.new_kernels.push_back(std::move(k));
    }

    CurationResult curated =
        curate(result.new_kernels, state.candidates, state.memory, config, summarizer, iteration,
               seed_mix({iter_seed, 0x03ULL}));
    result.new_memory = std::move(curated.memory);
    for (const auto& u : curated.usage) result.usage.push_back(u);

    result.next_candidates = select_candidates(result.new_kernels, state.candidates, config.beam_width);
    return result;
}

namespace {

// Shared iteration loop for fresh and resumed campaigns.
CampaignState drive_campaign(const TaskSpec& task, const CampaignMeta& meta, CampaignState state,
                             const AgentSet& agents, Evaluator& evaluator, BenchStore& store,
                             const CampaignHooks& hooks) {
    const SearchConfig& config = meta.config;
    const double initial_latency = meta.initial.latency();
    const double peak_ms = peak_time(task, meta.hardware);

    for (int i = state.iteration + 1; i <= config.iterations; ++i) {
        ExpansionResult expansion;
        for (int attempt = 0;; ++attempt) {
            try {
                expansion = expand_frontier(task, state, config, *agents.planner, *agents.executor,
                                            *agents.summarizer, evaluator, initial_latency, i,
                                            hooks.max_parallel);
                break;
            } catch (const Error& e) {
                if (attempt >= 1) {
                    throw IterationFailed("iteration " + std::to_string(i) + ": " + e.what());
                }
                std::cerr << "[campaign] iteration " << i << " failed (" << e.what()
                          << "), retrying\n";
            }
        }

        state.iteration = i;
        for (const auto& kernel : expansion.new_kernels) {
            state.history.push_back({i, kernel});
            store.store_kernel(meta.task_ref, kernel);
        }
        state.memory = expansion.new_memory;
        if (!expansion.next_candidates.empty()) state.candidates = expansion.next_candidates;
        for (const auto& usage : expansion.usage) ledger_add(state.cost_ledger, usage);

        IterationRecord record;
        record.iteration = i;
        record.kernels = expansion.new_kernels;
        record.frontier = state.candidates;
        record.memory = state.memory;
        record.cost_ledger = state.cost_ledger;
        store.append_iteration(meta.campaign_id, record);

        if (hooks.after_iteration) hooks.after_iteration(state, record);

        if (config.early_stop_peak) {
            double best_latency = meta.initial.latency();
            for (const auto& entry : state.history) {
                if (entry.kernel.correct()) {
                    best_latency = std::min(best_latency, entry.kernel.latency());
                }
            }
            if (percent_of_peak(peak_ms, best_latency) >= *config.early_stop_peak) {
                std::cerr << "[campaign] early stop: best kernel at "
                          << percent_of_peak(peak_ms, best_latency) * 100 << "% of peak\n";
                break;
            }
        }
    }
    return state;
}

}  // namespace

CampaignState run_campaign(const TaskSpec& task, const HardwareSpec& hw,
                           const SearchConfig& config, const AgentSet& agents,
                           Evaluator& evaluator, BenchStore& store,
                           const std::string& campaign_id, const CampaignHooks& hooks) {
    KernelArtifact initial = evaluator.evaluate(task.initial_kernel, Provenance{}, std::nullopt);
    if (!initial.correct()) {
        throw InitialKernelIncorrect("initial kernel evaluates as " +
                                     std::string(to_string(initial.status)));
    }

    CampaignMeta meta;
    meta.campaign_id = campaign_id;
    meta.task_ref = task_ref_of(task);
    meta.hardware = hw;
    meta.config = config;
    meta.initial = initial;
    store.store_task(task);
    store.store_kernel(meta.task_ref, initial);
    store.create_campaign(meta);

    CampaignState state;
    state.iteration = 0;
    state.candidates = {initial};
    return drive_campaign(task, meta, std::move(state), agents, evaluator, store, hooks);
}

CampaignState resume_campaign(BenchStore& store, const std::string& campaign_id,
                              const AgentSet& agents, Evaluator& evaluator,
                              const CampaignHooks& hooks,
                              const std::optional<SearchConfig>& expected_config) {
    const CampaignMeta meta = store.load_campaign_meta(campaign_id);
    if (expected_config && json(*expected_config) != json(meta.config)) {
        throw IncompatibleConfig("stored SearchConfig differs; resume refused");
    }
    const TaskSpec task = store.load_task(meta.task_ref);
    CampaignState state = store.resume_state(campaign_id);
    return drive_campaign(task, meta, std::move(state), agents, evaluator, store, hooks);
}

}  // namespace accelforge
