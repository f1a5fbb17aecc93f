#include "accelforge/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "accelforge/util.hpp"

namespace accelforge {

HardwareSpec trainium1_spec() {
    return {"trainium1", 440.2e9, 23.75e12, 286.8e9, 0.01};
}

HardwareSpec trainium2_spec() {
    return {"trainium2", 640.0e9, 19.75e12, 550.0e9, 0.04};
}

std::optional<HardwareSpec> hardware_by_name(const std::string& name) {
    if (name == "trainium1") return trainium1_spec();
    if (name == "trainium2") return trainium2_spec();
    return std::nullopt;
}

std::string config_key(const std::vector<std::pair<std::string, std::uint64_t>>& config) {
    auto sorted = config;
    std::sort(sorted.begin(), sorted.end());
    std::string key;
    for (const auto& [name, value] : sorted) {
        if (!key.empty()) key += '_';
        key += name + "=" + std::to_string(value);
    }
    return key;
}

std::string config_key(const TaskSpec& task) { return config_key(task.config); }

const char* to_string(KernelStatus s) {
    switch (s) {
        case KernelStatus::correct: return "correct";
        case KernelStatus::incorrect: return "incorrect";
        case KernelStatus::compile_error: return "compile_error";
        case KernelStatus::timeout: return "timeout";
    }
    return "incorrect";
}

std::string make_kernel_id(const std::string& source, const std::string& candidate_id,
                           const std::string& plan_id) {
    return sha256_hex(source + "\x1f" + candidate_id + "\x1f" + plan_id);
}

std::string make_plan_id(const std::string& candidate_id, const std::string& plan_text) {
    return sha256_hex(candidate_id + "\x1f" + plan_text);
}

void ledger_add(std::vector<TokenUsage>& ledger, const TokenUsage& usage) {
    for (auto& entry : ledger) {
        if (entry.role == usage.role) {
            entry.input_tokens += usage.input_tokens;
            entry.output_tokens += usage.output_tokens;
            return;
        }
    }
    ledger.push_back(usage);
    std::sort(ledger.begin(), ledger.end(),
              [](const TokenUsage& a, const TokenUsage& b) { return a.role < b.role; });
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void require(std::vector<Violation>& out, bool ok, const std::string& where,
             const std::string& message) {
    if (!ok) out.push_back({where, message});
}

}  // namespace

std::vector<Violation> validate(const HardwareSpec& hw) {
    std::vector<Violation> v;
    require(v, hw.peak_bandwidth > 0, "hardware.peak_bandwidth", "must be strictly positive");
    require(v, hw.peak_mm > 0, "hardware.peak_mm", "must be strictly positive");
    require(v, hw.peak_vec > 0, "hardware.peak_vec", "must be strictly positive");
    require(v, hw.fluctuation_threshold > 0 && hw.fluctuation_threshold < 1,
            "hardware.fluctuation_threshold", "must lie in (0, 1)");
    return v;
}

std::vector<Violation> validate(const TaskSpec& task) {
    std::vector<Violation> v;
    require(v, !task.operator_name.empty(), "task.operator_name", "must be non-empty");
    require(v, task.traffic_min > 0, "task.traffic_min", "must be > 0");
    require(v, task.flops_mm + task.flops_vec > 0, "task.flops", "flops_mm + flops_vec must be > 0");
    require(v, task.tolerance > 0, "task.tolerance", "must be > 0");
    require(v, task.num_seeds >= 1, "task.num_seeds", "must be >= 1");
    std::set<std::string> names;
    for (const auto& [name, value] : task.config) {
        require(v, value > 0, "task.config." + name, "dimension extent must be positive");
        require(v, names.insert(name).second, "task.config." + name, "duplicate dimension name");
    }
    return v;
}

std::vector<Violation> validate(const ProfileReport& profile) {
    std::vector<Violation> v;
    require(v, profile.latency > 0, "profile.latency", "must be > 0");
    require(v, profile.transpose_flops <= profile.hardware_flops, "profile.transpose_flops",
            "cannot exceed hardware_flops");
    auto ratio = [&](double x, const char* name) {
        require(v, x >= 0.0 && x <= 1.0, std::string("profile.") + name, "must lie in [0, 1]");
    };
    ratio(profile.tensor_util, "tensor_util");
    ratio(profile.vector_util, "vector_util");
    ratio(profile.scalar_util, "scalar_util");
    ratio(profile.gpsimd_util, "gpsimd_util");
    return v;
}

std::vector<Violation> validate(const KernelArtifact& kernel) {
    std::vector<Violation> v;
    const bool correct = kernel.status == KernelStatus::correct;
    require(v, correct == kernel.profile.has_value(), "kernel." + kernel.kernel_id,
            "profile must be present iff status is correct");
    require(v, correct == kernel.speedup_vs_initial.has_value(), "kernel." + kernel.kernel_id,
            "speedup_vs_initial must be present iff status is correct");
    require(v, kernel.attempt_index >= 0, "kernel." + kernel.kernel_id,
            "attempt_index must be non-negative");
    if (kernel.profile) {
        for (auto& pv : validate(*kernel.profile)) {
            v.push_back({"kernel." + kernel.kernel_id + "." + pv.where, pv.message});
        }
    }
    return v;
}

std::vector<Violation> validate(const ExperienceItem& item) {
    std::vector<Violation> v;
    require(v, item.speedup > 1.0, "memory.item", "speedup must be > 1 for both polarities");
    require(v, !item.slow_snippet.empty(), "memory.item", "slow_snippet must be non-empty");
    require(v, !item.fast_snippet.empty(), "memory.item", "fast_snippet must be non-empty");
    require(v, !item.strategy.empty(), "memory.item", "strategy must be non-empty");
    return v;
}

std::vector<Violation> validate(const SearchConfig& config) {
    std::vector<Violation> v;
    require(v, config.beam_width >= 1, "config.B", "must be >= 1");
    require(v, config.plans_per_candidate >= 1, "config.N", "must be >= 1");
    require(v, config.attempts_per_plan >= 1, "config.K", "must be >= 1");
    require(v, config.iterations >= 0, "config.T", "must be >= 0");
    require(v, config.top_k >= 1, "config.top_k", "must be >= 1");
    require(v, config.exp_n >= 1, "config.exp_n", "must be >= 1");
    require(v, config.top_k <= config.exp_n, "config.top_k",
            "must not exceed exp_n: one iteration may not emit more items than the memory holds");
    require(v, config.t_pos > 1.0, "config.t_pos", "must be > 1");
    require(v, config.t_neg > 1.0, "config.t_neg", "must be > 1");
    require(v, config.executor_timeout > 0, "config.executor_timeout", "must be > 0");
    if (config.early_stop_peak) {
        require(v, *config.early_stop_peak > 0, "config.early_stop_peak", "must be > 0");
    }
    return v;
}

std::vector<Violation> validate(const CampaignState& state, const SearchConfig& config) {
    std::vector<Violation> v = validate(config);
    require(v, state.iteration >= 0, "state.iteration", "must be >= 0");
    require(v, !state.candidates.empty(), "state.candidates",
            "frontier must hold at least one candidate");
    require(v, static_cast<int>(state.candidates.size()) <= config.beam_width,
            "state.candidates", "frontier exceeds beam width B");
    require(v, static_cast<int>(state.memory.size()) <= config.exp_n, "state.memory",
            "memory exceeds capacity exp_n");
    for (const auto& c : state.candidates) {
        require(v, c.status == KernelStatus::correct, "state.candidates",
                "frontier kernels must be correct");
        for (auto& kv : validate(c)) v.push_back(kv);
    }
    for (const auto& item : state.memory) {
        for (auto& mv : validate(item)) v.push_back(mv);
    }
    for (const auto& entry : state.history) {
        require(v, entry.kernel.attempt_index < config.attempts_per_plan,
                "history." + entry.kernel.kernel_id, "attempt_index must be < K");
        for (auto& kv : validate(entry.kernel)) v.push_back(kv);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void to_json(json& j, const HardwareSpec& v) {
    j = json{{"name", v.name},
             {"peak_bandwidth", v.peak_bandwidth},
             {"peak_mm", v.peak_mm},
             {"peak_vec", v.peak_vec},
             {"fluctuation_threshold", v.fluctuation_threshold}};
}

void from_json(const json& j, HardwareSpec& v) {
    j.at("name").get_to(v.name);
    j.at("peak_bandwidth").get_to(v.peak_bandwidth);
    j.at("peak_mm").get_to(v.peak_mm);
    j.at("peak_vec").get_to(v.peak_vec);
    j.at("fluctuation_threshold").get_to(v.fluctuation_threshold);
}

void to_json(json& j, const TaskSpec& v) {
    j = json{{"operator_name", v.operator_name},
             {"config", v.config},
             {"initial_kernel", v.initial_kernel},
             {"traffic_min", v.traffic_min},
             {"flops_mm", v.flops_mm},
             {"flops_vec", v.flops_vec},
             {"tolerance", v.tolerance},
             {"num_seeds", v.num_seeds},
             {"reference", v.reference}};
}

void from_json(const json& j, TaskSpec& v) {
    j.at("operator_name").get_to(v.operator_name);
    j.at("config").get_to(v.config);
    j.at("initial_kernel").get_to(v.initial_kernel);
    j.at("traffic_min").get_to(v.traffic_min);
    j.at("flops_mm").get_to(v.flops_mm);
    j.at("flops_vec").get_to(v.flops_vec);
    j.at("tolerance").get_to(v.tolerance);
    j.at("num_seeds").get_to(v.num_seeds);
    j.at("reference").get_to(v.reference);
}

void to_json(json& j, const ProfileReport& v) {
    j = json{{"latency", v.latency},
             {"hbm_read_bytes", v.hbm_read_bytes},
             {"hbm_write_bytes", v.hbm_write_bytes},
             {"spill_save_bytes", v.spill_save_bytes},
             {"spill_reload_bytes", v.spill_reload_bytes},
             {"sbuf_read_bytes", v.sbuf_read_bytes},
             {"sbuf_write_bytes", v.sbuf_write_bytes},
             {"psum_read_bytes", v.psum_read_bytes},
             {"psum_write_bytes", v.psum_write_bytes},
             {"hardware_flops", v.hardware_flops},
             {"transpose_flops", v.transpose_flops},
             {"tensor_util", v.tensor_util},
             {"vector_util", v.vector_util},
             {"scalar_util", v.scalar_util},
             {"gpsimd_util", v.gpsimd_util},
             {"mm_arithmetic_intensity", v.mm_arithmetic_intensity},
             {"peak_flops_bandwidth_ratio", v.peak_flops_bandwidth_ratio}};
}

void from_json(const json& j, ProfileReport& v) {
    j.at("latency").get_to(v.latency);
    j.at("hbm_read_bytes").get_to(v.hbm_read_bytes);
    j.at("hbm_write_bytes").get_to(v.hbm_write_bytes);
    j.at("spill_save_bytes").get_to(v.spill_save_bytes);
    j.at("spill_reload_bytes").get_to(v.spill_reload_bytes);
    j.at("sbuf_read_bytes").get_to(v.sbuf_read_bytes);
    j.at("sbuf_write_bytes").get_to(v.sbuf_write_bytes);
    j.at("psum_read_bytes").get_to(v.psum_read_bytes);
    j.at("psum_write_bytes").get_to(v.psum_write_bytes);
    j.at("hardware_flops").get_to(v.hardware_flops);
    j.at("transpose_flops").get_to(v.transpose_flops);
    j.at("tensor_util").get_to(v.tensor_util);
    j.at("vector_util").get_to(v.vector_util);
    j.at("scalar_util").get_to(v.scalar_util);
    j.at("gpsimd_util").get_to(v.gpsimd_util);
    j.at("mm_arithmetic_intensity").get_to(v.mm_arithmetic_intensity);
    j.at("peak_flops_bandwidth_ratio").get_to(v.peak_flops_bandwidth_ratio);
}

void to_json(json& j, const KernelArtifact& v) {
    j = json{{"kernel_id", v.kernel_id},
             {"source", v.source},
             {"candidate_id", v.candidate_id},
             {"plan_id", v.plan_id},
             {"attempt_index", v.attempt_index},
             {"status", v.status}};
    if (v.profile) j["profile"] = *v.profile;
    if (v.speedup_vs_initial) j["speedup_vs_initial"] = *v.speedup_vs_initial;
}

void from_json(const json& j, KernelArtifact& v) {
    j.at("kernel_id").get_to(v.kernel_id);
    j.at("source").get_to(v.source);
    j.at("candidate_id").get_to(v.candidate_id);
    j.at("plan_id").get_to(v.plan_id);
    j.at("attempt_index").get_to(v.attempt_index);
    j.at("status").get_to(v.status);
    v.profile.reset();
    v.speedup_vs_initial.reset();
    if (j.contains("profile")) v.profile = j.at("profile").get<ProfileReport>();
    if (j.contains("speedup_vs_initial")) v.speedup_vs_initial = j.at("speedup_vs_initial").get<double>();
}

void to_json(json& j, const OptimizationPlan& v) {
    j = json{{"plan_id", v.plan_id}, {"candidate_id", v.candidate_id}, {"text", v.text}};
}

void from_json(const json& j, OptimizationPlan& v) {
    j.at("plan_id").get_to(v.plan_id);
    j.at("candidate_id").get_to(v.candidate_id);
    j.at("text").get_to(v.text);
}

void to_json(json& j, const ExperienceItem& v) {
    j = json{{"strategy", v.strategy},
             {"slow_snippet", v.slow_snippet},
             {"fast_snippet", v.fast_snippet},
             {"speedup", v.speedup},
             {"polarity", v.polarity},
             {"iteration_created", v.iteration_created}};
}

void from_json(const json& j, ExperienceItem& v) {
    j.at("strategy").get_to(v.strategy);
    j.at("slow_snippet").get_to(v.slow_snippet);
    j.at("fast_snippet").get_to(v.fast_snippet);
    j.at("speedup").get_to(v.speedup);
    j.at("polarity").get_to(v.polarity);
    j.at("iteration_created").get_to(v.iteration_created);
}

void to_json(json& j, const SearchConfig& v) {
    j = json{{"B", v.beam_width},
             {"N", v.plans_per_candidate},
             {"K", v.attempts_per_plan},
             {"T", v.iterations},
             {"top_k", v.top_k},
             {"exp_n", v.exp_n},
             {"t_pos", v.t_pos},
             {"t_neg", v.t_neg},
             {"executor_timeout", v.executor_timeout},
             {"seed", v.seed}};
    if (v.early_stop_peak) j["early_stop_peak"] = *v.early_stop_peak;
}

void from_json(const json& j, SearchConfig& v) {
    j.at("B").get_to(v.beam_width);
    j.at("N").get_to(v.plans_per_candidate);
    j.at("K").get_to(v.attempts_per_plan);
    j.at("T").get_to(v.iterations);
    j.at("top_k").get_to(v.top_k);
    j.at("exp_n").get_to(v.exp_n);
    j.at("t_pos").get_to(v.t_pos);
    j.at("t_neg").get_to(v.t_neg);
    j.at("executor_timeout").get_to(v.executor_timeout);
    j.at("seed").get_to(v.seed);
    v.early_stop_peak.reset();
    if (j.contains("early_stop_peak")) v.early_stop_peak = j.at("early_stop_peak").get<double>();
}

void to_json(json& j, const TokenUsage& v) {
    j = json{{"role", v.role}, {"input_tokens", v.input_tokens}, {"output_tokens", v.output_tokens}};
}

void from_json(const json& j, TokenUsage& v) {
    j.at("role").get_to(v.role);
    j.at("input_tokens").get_to(v.input_tokens);
    j.at("output_tokens").get_to(v.output_tokens);
}

void to_json(json& j, const HistoryEntry& v) {
    j = json{{"iteration", v.iteration}, {"kernel", v.kernel}};
}

void from_json(const json& j, HistoryEntry& v) {
    j.at("iteration").get_to(v.iteration);
    j.at("kernel").get_to(v.kernel);
}

void to_json(json& j, const CampaignState& v) {
    j = json{{"iteration", v.iteration},
             {"candidates", v.candidates},
             {"memory", v.memory},
             {"history", v.history},
             {"cost_ledger", v.cost_ledger}};
}

void from_json(const json& j, CampaignState& v) {
    j.at("iteration").get_to(v.iteration);
    j.at("candidates").get_to(v.candidates);
    j.at("memory").get_to(v.memory);
    j.at("history").get_to(v.history);
    j.at("cost_ledger").get_to(v.cost_ledger);
}

}  // namespace accelforge
