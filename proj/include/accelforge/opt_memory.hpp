#pragma once

#include <span>
#include <vector>

#include "accelforge/agents.hpp"
#include "accelforge/core.hpp"

namespace accelforge {

// ---------------------------------------------------------------------------
// Optimization-memory curation.
//
// Kernels group by their originating (candidate, plan). Each group
// contributes at most one rewrite: a positive one when its best correct
// kernel beats the candidate by more than t_pos, a negative one when even
// the best is slower than the candidate by more than t_neg. Speedups are
// always stored in the improving direction, so both polarities carry a
// value > 1.
// ---------------------------------------------------------------------------

struct RewriteCandidate {
    std::string candidate_id;       // group key
    std::string plan_id;
    KernelArtifact slow;
    KernelArtifact fast;
    double speedup = 0;             // slow.latency / fast.latency, > 1
    RewritePolarity polarity = RewritePolarity::positive_rewrite;

    // The generated (non-baseline) side; used for deterministic tie-breaks.
    const std::string& generated_id() const {
        return polarity == RewritePolarity::positive_rewrite ? fast.kernel_id : slow.kernel_id;
    }
};

struct ClassifiedRewrites {
    std::vector<RewriteCandidate> positives;
    std::vector<RewriteCandidate> negatives;
};

// Throws UnresolvableProvenance when a kernel names a candidate that is not
// in `candidates`. Groups without a correct kernel, and groups inside the
// [1/t_neg, t_pos] dead band, emit nothing.
ClassifiedRewrites classify_groups(std::span<const KernelArtifact> kernels,
                                   std::span<const KernelArtifact> candidates, double t_pos,
                                   double t_neg);

struct CurationResult {
    std::vector<ExperienceItem> memory;    // new items first, |memory| <= exp_n
    std::vector<TokenUsage> usage;
    int summaries_skipped = 0;             // "No optimization found" / parse failures
};

// One iteration of the curation procedure. Positives fill up to
// top_k/2 slots in speedup order, negatives the remainder of top_k; a
// summary that comes back empty promotes the next-ranked rewrite instead of
// wasting its slot. New items prepend; the oldest tail of prev_memory is
// evicted beyond exp_n.
CurationResult curate(std::span<const KernelArtifact> kernels,
                      std::span<const KernelArtifact> candidates,
                      std::span<const ExperienceItem> prev_memory, const SearchConfig& config,
                      Summarizer& summarizer, int iteration, std::uint64_t call_seed);

}  // namespace accelforge
