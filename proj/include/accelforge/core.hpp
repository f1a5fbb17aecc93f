#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace accelforge {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Hardware and task description.
// ---------------------------------------------------------------------------

struct HardwareSpec {
    std::string name;
    double peak_bandwidth = 0;          // bytes / second
    double peak_mm = 0;                 // FLOP / second, matmul engine
    double peak_vec = 0;                // FLOP / second, vector + scalar engines combined
    double fluctuation_threshold = 0;   // in (0, 1)
};

// Built-in single-core specs. Bandwidth in 1e9 bytes/s, compute in FLOP/s.
HardwareSpec trainium1_spec();
HardwareSpec trainium2_spec();
std::optional<HardwareSpec> hardware_by_name(const std::string& name);

struct TaskSpec {
    std::string operator_name;
    // Ordered (dimension name, extent) pairs; order is the operator's own.
    std::vector<std::pair<std::string, std::uint64_t>> config;
    std::string initial_kernel;
    std::uint64_t traffic_min = 0;      // bytes, sum of all input+output tensors
    std::uint64_t flops_mm = 0;
    std::uint64_t flops_vec = 0;
    double tolerance = 0;
    int num_seeds = 3;
    std::string reference;              // opaque handle to the correctness oracle
};

// Canonical "name=value" join of the config, sorted by dimension name.
std::string config_key(const TaskSpec& task);
std::string config_key(const std::vector<std::pair<std::string, std::uint64_t>>& config);

// ---------------------------------------------------------------------------
// Evaluation results.
// ---------------------------------------------------------------------------

struct ProfileReport {
    double latency = 0;                 // milliseconds
    std::uint64_t hbm_read_bytes = 0;
    std::uint64_t hbm_write_bytes = 0;
    std::uint64_t spill_save_bytes = 0;
    std::uint64_t spill_reload_bytes = 0;
    std::uint64_t sbuf_read_bytes = 0;
    std::uint64_t sbuf_write_bytes = 0;
    std::uint64_t psum_read_bytes = 0;
    std::uint64_t psum_write_bytes = 0;
    std::uint64_t hardware_flops = 0;
    std::uint64_t transpose_flops = 0;  // subset of hardware_flops
    double tensor_util = 0;             // hfu_estimated_percent, in [0,1]
    double vector_util = 0;
    double scalar_util = 0;
    double gpsimd_util = 0;
    double mm_arithmetic_intensity = 0;
    double peak_flops_bandwidth_ratio = 0;
};

enum class KernelStatus { correct, incorrect, compile_error, timeout };

const char* to_string(KernelStatus s);

struct KernelArtifact {
    std::string kernel_id;              // content-addressed, see make_kernel_id
    std::string source;
    std::string candidate_id;           // empty for the initial kernel
    std::string plan_id;                // empty for the initial kernel
    int attempt_index = 0;              // in [0, K)
    KernelStatus status = KernelStatus::incorrect;
    std::optional<ProfileReport> profile;        // present iff status == correct
    std::optional<double> speedup_vs_initial;    // present iff status == correct

    bool correct() const { return status == KernelStatus::correct; }
    double latency() const { return profile ? profile->latency : 0.0; }
};

// Identifiers hash content plus provenance, so identical generations from
// the same candidate and plan dedupe to one id.
std::string make_kernel_id(const std::string& source, const std::string& candidate_id,
                           const std::string& plan_id);
std::string make_plan_id(const std::string& candidate_id, const std::string& plan_text);

struct OptimizationPlan {
    std::string plan_id;
    std::string candidate_id;
    std::string text;                   // one-step plan, natural language
};

// ---------------------------------------------------------------------------
// Optimization memory.
// ---------------------------------------------------------------------------

enum class RewritePolarity { positive_rewrite, negative_rewrite };

struct ExperienceItem {
    std::string strategy;               // bold headline plus generalizable description
    std::string slow_snippet;
    std::string fast_snippet;
    double speedup = 0;                 // > 1; always the improving direction
    RewritePolarity polarity = RewritePolarity::positive_rewrite;
    int iteration_created = 0;
};

// ---------------------------------------------------------------------------
// Search configuration and campaign state.
// ---------------------------------------------------------------------------

struct SearchConfig {
    int beam_width = 6;                 // B
    int plans_per_candidate = 12;       // N
    int attempts_per_plan = 2;          // K
    int iterations = 16;                // T
    int top_k = 8;                      // per-iteration memory update budget
    int exp_n = 16;                     // memory capacity
    double t_pos = 1.04;
    double t_neg = 1.15;
    double executor_timeout = 120.0;    // seconds
    std::uint64_t seed = 0;
    // Stop once the best kernel reaches this fraction of roofline peak. Off
    // when absent.
    std::optional<double> early_stop_peak;
};

struct TokenUsage {
    std::string role;                   // planner | executor | summarizer
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
};

struct HistoryEntry {
    int iteration = 0;
    KernelArtifact kernel;
};

struct CampaignState {
    int iteration = 0;                  // completed iterations
    std::vector<KernelArtifact> candidates;   // frontier C_i, |C_i| >= 1
    std::vector<ExperienceItem> memory;       // E_i, newest first, |E_i| <= exp_n
    std::vector<HistoryEntry> history;        // every generated kernel, iteration-tagged
    std::vector<TokenUsage> cost_ledger;      // aggregated per role, sorted by role
};

// Folds usage entries into the per-role ledger.
void ledger_add(std::vector<TokenUsage>& ledger, const TokenUsage& usage);

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

struct Violation {
    std::string where;
    std::string message;
};

std::vector<Violation> validate(const HardwareSpec& hw);
std::vector<Violation> validate(const TaskSpec& task);
std::vector<Violation> validate(const ProfileReport& profile);
std::vector<Violation> validate(const KernelArtifact& kernel);
std::vector<Violation> validate(const ExperienceItem& item);
std::vector<Violation> validate(const SearchConfig& config);

// Every invariant of the state and its members against the config. An empty
// result means valid. Total: never throws.
std::vector<Violation> validate(const CampaignState& state, const SearchConfig& config);

// ---------------------------------------------------------------------------
// Canonical serialization. Objects serialize with alphabetically ordered
// keys; canonical_json is the byte-exact on-disk form.
// ---------------------------------------------------------------------------

void to_json(json& j, const HardwareSpec& v);
void from_json(const json& j, HardwareSpec& v);
void to_json(json& j, const TaskSpec& v);
void from_json(const json& j, TaskSpec& v);
void to_json(json& j, const ProfileReport& v);
void from_json(const json& j, ProfileReport& v);
void to_json(json& j, const KernelArtifact& v);
void from_json(const json& j, KernelArtifact& v);
void to_json(json& j, const OptimizationPlan& v);
void from_json(const json& j, OptimizationPlan& v);
void to_json(json& j, const ExperienceItem& v);
void from_json(const json& j, ExperienceItem& v);
void to_json(json& j, const SearchConfig& v);
void from_json(const json& j, SearchConfig& v);
void to_json(json& j, const TokenUsage& v);
void from_json(const json& j, TokenUsage& v);
void to_json(json& j, const HistoryEntry& v);
void from_json(const json& j, HistoryEntry& v);
void to_json(json& j, const CampaignState& v);
void from_json(const json& j, CampaignState& v);

template <typename T>
std::string canonical_json(const T& value) {
    return json(value).dump(2) + "\n";
}

template <typename T>
T parse_json(const std::string& text) {
    return json::parse(text).get<T>();
}

NLOHMANN_JSON_SERIALIZE_ENUM(KernelStatus, {
    {KernelStatus::correct, "correct"},
    {KernelStatus::incorrect, "incorrect"},
    {KernelStatus::compile_error, "compile_error"},
    {KernelStatus::timeout, "timeout"},
})

NLOHMANN_JSON_SERIALIZE_ENUM(RewritePolarity, {
    {RewritePolarity::positive_rewrite, "positive_rewrite"},
    {RewritePolarity::negative_rewrite, "negative_rewrite"},
})

}  // namespace accelforge
