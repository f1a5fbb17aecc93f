#include "accelforge/agents.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "accelforge/errors.hpp"

#ifndef ACCELFORGE_PROMPT_DIR
#define ACCELFORGE_PROMPT_DIR ""
#endif

namespace accelforge {

const char* to_string(AgentRole role) {
    switch (role) {
        case AgentRole::planner: return "planner";
        case AgentRole::executor: return "executor";
        case AgentRole::summarizer: return "summarizer";
    }
    return "planner";
}

const std::map<std::string, PriceSheet>& known_model_prices() {
    static const std::map<std::string, PriceSheet> prices = {
        {"Claude Sonnet 4", {3.0, 15.0}},
        {"gpt-oss-20b", {0.07, 0.3}},
        {"gpt-oss-120b", {0.15, 0.6}},
        {"Qwen3-Coder-30B", {0.15, 0.6}},
        {"Qwen3-235B-A22B-Thinking-2507", {0.22, 0.88}},
        {"Qwen3-Coder-480B", {0.45, 1.8}},
    };
    return prices;
}

double cost(std::span<const TokenUsage> ledger,
            const std::map<std::string, PriceSheet>& prices_by_role) {
    double total = 0;
    for (const auto& entry : ledger) {
        auto it = prices_by_role.find(entry.role);
        if (it == prices_by_role.end()) {
            throw MissingPrice("no price entry for role: " + entry.role);
        }
        total += static_cast<double>(entry.input_tokens) / 1e6 * it->second.input_per_mtok;
        total += static_cast<double>(entry.output_tokens) / 1e6 * it->second.output_per_mtok;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

PromptLibrary::PromptLibrary(std::string dir) {
    if (dir.empty()) {
        if (const char* env = std::getenv("ACCELFORGE_PROMPT_DIR")) dir = env;
    }
    if (dir.empty()) dir = ACCELFORGE_PROMPT_DIR;
    if (dir.empty()) throw Error("prompt template directory not configured");
    const std::filesystem::path root(dir);
    nki_basics_ = read_file(root / "nki_basics.txt");
    profile_terminology_ = read_file(root / "profile_terminology.txt");
    planner_user_ = read_file(root / "planner_user.txt");
    program_guide_a_ = read_file(root / "nki_program_guide_a.txt");
    program_guide_b_ = read_file(root / "nki_program_guide_b.txt");
    kernel_usage_ = read_file(root / "kernel_usage.txt");
    summarizer_ = read_file(root / "summarizer.txt");
}

std::string instantiate_template(const std::string& tmpl,
                                 const std::map<std::string, std::string>& fields) {
    std::string out = tmpl;
    for (const auto& [name, value] : fields) {
        const std::string token = "{" + name + "}";
        std::size_t pos = out.find(token);
        if (pos == std::string::npos) {
            throw TemplateFieldMissing("template has no placeholder " + token);
        }
        while (pos != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos = out.find(token, pos + value.size());
        }
    }
    return out;
}

std::string render_problem_code(const TaskSpec& task) {
    std::ostringstream out;
    out << "operator: " << task.operator_name << "\n";
    out << "config: ";
    for (std::size_t i = 0; i < task.config.size(); ++i) {
        if (i) out << ", ";
        out << task.config[i].first << "=" << task.config[i].second;
    }
    out << "\n";
    out << "minimal_traffic_bytes: " << task.traffic_min << "\n";
    out << "matmul_flops: " << task.flops_mm << "\n";
    out << "vector_flops: " << task.flops_vec << "\n";
    out << "tolerance: " << format_double(task.tolerance) << "\n";
    out << "The kernel must produce outputs matching the reference within the tolerance above.";
    return out.str();
}

std::string render_profile_items(const ProfileReport& profile, Rng& rng) {
    auto u64 = [](std::uint64_t v) { return std::to_string(v); };
    auto pct = [](double v) { return format_double(v * 100.0); };
    std::vector<std::pair<std::string, std::string>> items = {
        {"hbm_read_bytes", u64(profile.hbm_read_bytes)},
        {"hbm_write_bytes", u64(profile.hbm_write_bytes)},
        {"psum_read_bytes", u64(profile.psum_read_bytes)},
        {"psum_write_bytes", u64(profile.psum_write_bytes)},
        {"sbuf_read_bytes", u64(profile.sbuf_read_bytes)},
        {"sbuf_write_bytes", u64(profile.sbuf_write_bytes)},
        {"spill_reload_bytes", u64(profile.spill_reload_bytes)},
        {"spill_save_bytes", u64(profile.spill_save_bytes)},
        {"hardware_flops", u64(profile.hardware_flops)},
        {"transpose_flops", u64(profile.transpose_flops)},
        {"peak_flops_bandwidth_ratio", format_double(profile.peak_flops_bandwidth_ratio)},
        {"mm_arithmetic_intensity", format_double(profile.mm_arithmetic_intensity)},
        {"hfu_estimated_percent", pct(profile.tensor_util)},
        {"scalar_engine_active_time_percent", pct(profile.scalar_util)},
        {"vector_engine_active_time_percent", pct(profile.vector_util)},
        {"gpsimd_engine_active_time_percent", pct(profile.gpsimd_util)},
        {"latency", format_double(profile.latency)},
    };
    rng.shuffle(items);
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += "\n";
        out += items[i].first + ": " + items[i].second;
    }
    return out;
}

std::string render_experience_item(const ExperienceItem& item) {
    return item.strategy + "\nOriginal code:\n```\n" + item.slow_snippet +
           "\n```\nOptimized code:\n```\n" + item.fast_snippet + "\n```";
}

PromptPair render_planner_prompt(const TaskSpec& task, const KernelArtifact& kernel,
                                 std::span<const ExperienceItem> memory, Rng& rng) {
    static const PromptLibrary* library = new PromptLibrary();
    if (!kernel.profile) throw Error("planner prompt needs a profiled kernel");

    PromptPair prompt;
    prompt.system = library->nki_basics() + "\n" + library->profile_terminology();

    std::string user;
    if (!memory.empty()) {
        user += "# Past optimization experiences\n\n";
        for (const auto& item : memory) {
            user += render_experience_item(item);
            user += "\n\n";
        }
    }
    user += instantiate_template(library->planner_user(),
                                 {{"problem_code", render_problem_code(task)},
                                  {"kernel_code", kernel.source},
                                  {"profile", render_profile_items(*kernel.profile, rng)}});
    prompt.user = std::move(user);
    return prompt;
}

PromptPair render_executor_prompt(const TaskSpec& task, const OptimizationPlan& plan,
                                  const KernelArtifact& kernel) {
    static const PromptLibrary* library = new PromptLibrary();
    PromptPair prompt;
    prompt.system = library->nki_basics() + "\n" + library->program_guide_a() + "\n" +
                    library->program_guide_b() + "\n" + library->kernel_usage();
    // The plan text leads the message untouched; the executor sees the
    // problem and baseline kernel right after it.
    prompt.user = plan.text + "\n\n# Problem\n```\n" + render_problem_code(task) +
                  "\n```\n\n# Baseline NKI kernel\n```\n" + kernel.source +
                  "\n```\n\nOutput the optimized `kernel` function wrapped in code block.\n";
    return prompt;
}

PromptPair render_summarizer_prompt(const std::string& slow_source,
                                    const std::string& fast_source, double speedup) {
    static const PromptLibrary* library = new PromptLibrary();
    PromptPair prompt;
    prompt.user = instantiate_template(library->summarizer(), {{"slow_kernel", slow_source},
                                                               {"fast_kernel", fast_source},
                                                               {"speedup", format_double(speedup)}});
    return prompt;
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

namespace {

// First fenced block in [begin, end); returns npos pair when absent.
std::optional<std::string> code_block_between(const std::string& text, std::size_t begin,
                                              std::size_t end) {
    const std::size_t open = text.find("```", begin);
    if (open == std::string::npos || open >= end) return std::nullopt;
    const std::size_t close = text.find("```", open + 3);
    if (close == std::string::npos || close > end) return std::nullopt;
    std::size_t body = text.find('\n', open);
    if (body == std::string::npos || body >= close) {
        body = open + 3;
    } else {
        body += 1;
    }
    std::string content = text.substr(body, close - body);
    if (!content.empty() && content.back() == '\n') content.pop_back();
    return content;
}

}  // namespace

std::optional<std::string> extract_last_code_block(const std::string& text) {
    std::vector<std::size_t> fences;
    std::size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string::npos) {
        fences.push_back(pos);
        pos += 3;
    }
    if (fences.size() < 2) return std::nullopt;
    if (fences.size() % 2 != 0) fences.pop_back();  // unclosed trailing fence
    const std::size_t open = fences[fences.size() - 2];
    return code_block_between(text, open, fences.back() + 3);
}

std::optional<SummaryText> parse_summary(const std::string& text) {
    if (text.find("No optimization found") != std::string::npos) return std::nullopt;
    const std::size_t original = text.find("Original code:");
    if (original == std::string::npos) return std::nullopt;
    const std::size_t bold = text.find("**");
    if (bold == std::string::npos || bold >= original) return std::nullopt;
    const std::size_t optimized = text.find("Optimized code:", original);
    if (optimized == std::string::npos) return std::nullopt;

    SummaryText summary;
    summary.strategy = trim(text.substr(bold, original - bold));
    auto slow = code_block_between(text, original, optimized);
    auto fast = code_block_between(text, optimized, text.size());
    if (!slow || !fast || slow->empty() || fast->empty() || summary.strategy.empty()) {
        return std::nullopt;
    }
    summary.slow_snippet = std::move(*slow);
    summary.fast_snippet = std::move(*fast);
    return summary;
}

OptimizationPlan make_plan(const std::string& candidate_id, const std::string& text) {
    OptimizationPlan plan;
    plan.candidate_id = candidate_id;
    plan.text = text;
    plan.plan_id = make_plan_id(candidate_id, text);
    return plan;
}

// ---------------------------------------------------------------------------
// Mock agents
// ---------------------------------------------------------------------------

namespace {

TokenUsage mock_usage(AgentRole role, std::size_t input_chars, std::size_t output_chars) {
    TokenUsage usage;
    usage.role = to_string(role);
    usage.input_tokens = input_chars / 4 + 16;
    usage.output_tokens = output_chars / 4 + 4;
    return usage;
}

}  // namespace

MockPlanner::MockPlanner(std::shared_ptr<const SyntheticLandscape> landscape)
    : landscape_(std::move(landscape)) {}

PlannerResult MockPlanner::propose(const TaskSpec&, const KernelArtifact& candidate,
                                   std::span<const ExperienceItem> memory, int n,
                                   std::uint64_t call_seed) {
    PlannerResult result;
    const auto& dims = landscape_->dimensions();
    std::size_t memory_chars = 0;
    for (const auto& item : memory) memory_chars += item.strategy.size();
    for (int i = 0; i < n; ++i) {
        Rng rng(seed_mix({call_seed, static_cast<std::uint64_t>(i)}));
        const auto& dim = dims[rng.below(dims.size())];
        const int level = static_cast<int>(rng.below(static_cast<std::uint64_t>(dim.levels)));
        const std::string text = "Set optimization dimension `" + dim.name + "` to level " +
                                 std::to_string(level) + ".";
        result.plans.push_back(make_plan(candidate.kernel_id, text));
        result.usage.push_back(
            mock_usage(AgentRole::planner, candidate.source.size() + memory_chars, text.size()));
    }
    return result;
}

std::optional<std::pair<std::string, int>> parse_move(const std::string& plan_text) {
    const std::string lead = "dimension `";
    const std::size_t name_begin = plan_text.find(lead);
    if (name_begin == std::string::npos) return std::nullopt;
    const std::size_t name_end = plan_text.find('`', name_begin + lead.size());
    if (name_end == std::string::npos) return std::nullopt;
    const std::string name = plan_text.substr(name_begin + lead.size(),
                                              name_end - name_begin - lead.size());
    const std::string level_lead = "to level ";
    const std::size_t level_begin = plan_text.find(level_lead, name_end);
    if (level_begin == std::string::npos) return std::nullopt;
    std::size_t pos = level_begin + level_lead.size();
    std::size_t digits = 0;
    int level = 0;
    while (pos + digits < plan_text.size() && std::isdigit(plan_text[pos + digits])) {
        level = level * 10 + (plan_text[pos + digits] - '0');
        ++digits;
    }
    if (digits == 0) return std::nullopt;
    return std::make_pair(name, level);
}

std::string apply_move(const std::string& kernel_source, const std::string& dimension, int level) {
    auto lines = split_lines(kernel_source);
    const std::string directive = "opt " + dimension + " " + std::to_string(level);
    bool replaced = false;
    for (auto& line : lines) {
        std::istringstream in(trim(line));
        std::string word, name;
        if (in >> word >> name && word == "opt" && name == dimension) {
            line = directive;
            replaced = true;
        }
    }
    if (!replaced) lines.push_back(directive);
    std::string out;
    for (const auto& line : lines) out += line + "\n";
    return out;
}

ExecutorResult MockExecutor::implement(const TaskSpec&, const OptimizationPlan& plan,
                                       const KernelArtifact& candidate, int k, std::uint64_t) {
    ExecutorResult result;
    const auto move = parse_move(plan.text);
    const std::string source =
        move ? apply_move(candidate.source, move->first, move->second) : candidate.source;
    for (int i = 0; i < k; ++i) {
        result.sources.push_back(source);
        result.usage.push_back(mock_usage(
            AgentRole::executor, plan.text.size() + candidate.source.size(), source.size()));
    }
    return result;
}

SummarizerOutcome MockSummarizer::summarize(const std::string& slow_source,
                                            const std::string& fast_source, double speedup,
                                            std::uint64_t) {
    SummarizerOutcome outcome;
    outcome.usage.push_back(mock_usage(AgentRole::summarizer,
                                       slow_source.size() + fast_source.size(), 64));
    if (trim(slow_source) == trim(fast_source)) {
        return outcome;  // No optimization found.
    }
    SummaryText summary;
    summary.strategy = "**Directive level change**\nMove the optimization directives from the "
                       "slow configuration to the fast one; measured speedup " +
                       format_double(speedup) + "x.";
    summary.slow_snippet = trim(slow_source);
    summary.fast_snippet = trim(fast_source);
    outcome.summary = std::move(summary);
    return outcome;
}

}  // namespace accelforge
