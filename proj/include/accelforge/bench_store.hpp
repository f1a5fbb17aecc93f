#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "accelforge/core.hpp"

namespace accelforge {

// One iteration's inputs and outputs, persisted before the next begins.
struct IterationRecord {
    int iteration = 0;
    std::vector<KernelArtifact> kernels;       // generated this iteration, slot order
    std::vector<KernelArtifact> frontier;      // C_{i+1}
    std::vector<ExperienceItem> memory;        // E_i
    std::vector<TokenUsage> cost_ledger;       // cumulative through this iteration
};

void to_json(json& j, const IterationRecord& v);
void from_json(const json& j, IterationRecord& v);

struct CampaignMeta {
    std::string campaign_id;
    std::string task_ref;                      // "<operator>/<config-key>"
    HardwareSpec hardware;
    SearchConfig config;
    KernelArtifact initial;                    // evaluated initial kernel
    std::vector<double> p_levels{1.0};         // Fast@p levels for reports
};

void to_json(json& j, const CampaignMeta& v);
void from_json(const json& j, CampaignMeta& v);

std::string task_ref_of(const TaskSpec& task);

// ---------------------------------------------------------------------------
// File layout, all documents in the canonical serialization:
//
//   tasks/<operator>/<config-key>/task
//   tasks/<operator>/<config-key>/kernels/<kernel_id>
//   campaigns/<campaign-id>/meta.json
//   campaigns/<campaign-id>/iterations/<000001..>.json
//
// Iteration records commit via write-then-rename, so resume sees either a
// complete record or none; a truncated or missing record ends the replay.
// ---------------------------------------------------------------------------

class BenchStore {
  public:
    explicit BenchStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    std::filesystem::path store_task(const TaskSpec& task);
    bool task_exists(const std::string& task_ref) const;
    TaskSpec load_task(const std::string& operator_name, const std::string& key) const;
    TaskSpec load_task(const std::string& task_ref) const;

    void store_kernel(const std::string& task_ref, const KernelArtifact& kernel);
    std::vector<KernelArtifact> list_kernels(const std::string& task_ref) const;

    bool campaign_exists(const std::string& campaign_id) const;
    std::vector<std::string> list_campaigns() const;
    void create_campaign(const CampaignMeta& meta);
    CampaignMeta load_campaign_meta(const std::string& campaign_id) const;
    void append_iteration(const std::string& campaign_id, const IterationRecord& record);
    std::vector<IterationRecord> load_iterations(const std::string& campaign_id) const;

    // State as of the last complete iteration record.
    CampaignState resume_state(const std::string& campaign_id) const;

  private:
    std::filesystem::path campaign_dir(const std::string& campaign_id) const;
    std::filesystem::path root_;
};

}  // namespace accelforge
