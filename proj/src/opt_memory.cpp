#include "accelforge/opt_memory.hpp"

#include <algorithm>
#include <iostream>
#include <map>

#include "accelforge/errors.hpp"

namespace accelforge {

ClassifiedRewrites classify_groups(std::span<const KernelArtifact> kernels,
                                   std::span<const KernelArtifact> candidates, double t_pos,
                                   double t_neg) {
    std::map<std::pair<std::string, std::string>, std::vector<const KernelArtifact*>> groups;
    for (const auto& k : kernels) {
        groups[{k.candidate_id, k.plan_id}].push_back(&k);
    }

    auto find_candidate = [&](const std::string& id) -> const KernelArtifact& {
        for (const auto& c : candidates) {
            if (c.kernel_id == id) return c;
        }
        throw UnresolvableProvenance("kernel references unknown candidate " + id);
    };

    ClassifiedRewrites out;
    for (const auto& [key, members] : groups) {
        const KernelArtifact* fastest = nullptr;
        const KernelArtifact* slowest = nullptr;
        for (const KernelArtifact* k : members) {
            if (!k->correct()) continue;
            auto faster = [](const KernelArtifact* a, const KernelArtifact* b) {
                return std::make_pair(a->latency(), a->kernel_id) <
                       std::make_pair(b->latency(), b->kernel_id);
            };
            if (!fastest || faster(k, fastest)) fastest = k;
            if (!slowest || faster(slowest, k)) slowest = k;
        }
        if (!fastest) continue;  // no correct kernel in this group

        const KernelArtifact& baseline = find_candidate(key.first);
        const double max_speedup = baseline.latency() / fastest->latency();
        if (max_speedup > t_pos) {
            RewriteCandidate rc;
            rc.candidate_id = key.first;
            rc.plan_id = key.second;
            rc.slow = baseline;
            rc.fast = *fastest;
            rc.speedup = max_speedup;
            rc.polarity = RewritePolarity::positive_rewrite;
            out.positives.push_back(std::move(rc));
        } else if (max_speedup < 1.0 / t_neg) {
            RewriteCandidate rc;
            rc.candidate_id = key.first;
            rc.plan_id = key.second;
            rc.slow = *slowest;
            rc.fast = baseline;
            rc.speedup = slowest->latency() / baseline.latency();
            rc.polarity = RewritePolarity::negative_rewrite;
            out.negatives.push_back(std::move(rc));
        }
    }
    return out;
}

namespace {

void sort_by_speedup(std::vector<RewriteCandidate>& rewrites) {
    std::sort(rewrites.begin(), rewrites.end(),
              [](const RewriteCandidate& a, const RewriteCandidate& b) {
                  if (a.speedup != b.speedup) return a.speedup > b.speedup;
                  return a.generated_id() < b.generated_id();
              });
}

}  // namespace

CurationResult curate(std::span<const KernelArtifact> kernels,
                      std::span<const KernelArtifact> candidates,
                      std::span<const ExperienceItem> prev_memory, const SearchConfig& config,
                      Summarizer& summarizer, int iteration, std::uint64_t call_seed) {
    ClassifiedRewrites rewrites = classify_groups(kernels, candidates, config.t_pos, config.t_neg);
    sort_by_speedup(rewrites.positives);
    sort_by_speedup(rewrites.negatives);

    CurationResult result;
    std::uint64_t call_index = 0;

    // An empty summary promotes the next-ranked rewrite rather than leaving
    // the slot unused.
    auto summarize_into = [&](const std::vector<RewriteCandidate>& ranked, std::size_t budget,
                              std::vector<ExperienceItem>& out) {
        for (const auto& rc : ranked) {
            if (out.size() >= budget) break;
            SummarizerOutcome outcome;
            try {
                outcome = summarizer.summarize(rc.slow.source, rc.fast.source, rc.speedup,
                                               seed_mix({call_seed, 0xC4E, call_index++}));
            } catch (const AgentUnavailable& e) {
                std::cerr << "[curate] summarizer unavailable, rewrite skipped: " << e.what()
                          << "\n";
                ++result.summaries_skipped;
                continue;
            }
            for (const auto& u : outcome.usage) result.usage.push_back(u);
            if (!outcome.summary) {
                ++result.summaries_skipped;
                continue;
            }
            ExperienceItem item;
            item.strategy = outcome.summary->strategy;
            item.slow_snippet = outcome.summary->slow_snippet;
            item.fast_snippet = outcome.summary->fast_snippet;
            item.speedup = rc.speedup;
            item.polarity = rc.polarity;
            item.iteration_created = iteration;
            out.push_back(std::move(item));
        }
    };

    std::vector<ExperienceItem> fresh_pos;
    std::vector<ExperienceItem> fresh_neg;
    const std::size_t pos_budget = static_cast<std::size_t>(config.top_k / 2);
    summarize_into(rewrites.positives, pos_budget, fresh_pos);
    const std::size_t neg_budget = static_cast<std::size_t>(config.top_k) - fresh_pos.size();
    summarize_into(rewrites.negatives, neg_budget, fresh_neg);

    result.memory = std::move(fresh_pos);
    result.memory.insert(result.memory.end(), fresh_neg.begin(), fresh_neg.end());
    const std::size_t cap = static_cast<std::size_t>(config.exp_n);
    const std::size_t keep = cap > result.memory.size() ? cap - result.memory.size() : 0;
    for (std::size_t i = 0; i < prev_memory.size() && i < keep; ++i) {
        result.memory.push_back(prev_memory[i]);
    }
    return result;
}

}  // namespace accelforge
