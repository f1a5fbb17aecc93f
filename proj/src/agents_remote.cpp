#include <iostream>

#include "accelforge/agents.hpp"
#include "accelforge/errors.hpp"

namespace accelforge {

namespace {

TokenUsage usage_of(AgentRole role, const ChatResponse& response) {
    TokenUsage usage;
    usage.role = to_string(role);
    usage.input_tokens = response.input_tokens;
    usage.output_tokens = response.output_tokens;
    return usage;
}

ChatRequest base_request(const AgentBackendConfig& config, PromptPair prompt) {
    ChatRequest request;
    request.model = config.model_name;
    request.system = std::move(prompt.system);
    request.user = std::move(prompt.user);
    request.temperature = config.sampling.temperature;
    request.max_tokens = config.sampling.max_tokens;
    return request;
}

}  // namespace

RemotePlanner::RemotePlanner(AgentBackendConfig config, std::shared_ptr<ChatClient> client,
                             std::shared_ptr<const PromptLibrary> prompts, RetryPolicy retry)
    : config_(std::move(config)), client_(std::move(client)), prompts_(std::move(prompts)),
      retry_(retry) {}

PlannerResult RemotePlanner::propose(const TaskSpec& task, const KernelArtifact& candidate,
                                     std::span<const ExperienceItem> memory, int n,
                                     std::uint64_t call_seed) {
    PlannerResult result;
    for (int i = 0; i < n; ++i) {
        // Independent samples: each gets its own profile-item ordering.
        Rng rng(seed_mix({call_seed, static_cast<std::uint64_t>(i), 0x9AULL}));
        ChatRequest request = base_request(config_, render_planner_prompt(task, candidate, memory, rng));
        const ChatResponse response = complete_with_retries(
            *client_, request, retry_, seed_mix({call_seed, static_cast<std::uint64_t>(i)}));
        result.usage.push_back(usage_of(AgentRole::planner, response));
        const std::string text = trim(response.content);
        if (text.empty()) {
            ++result.shortfall;
            std::cerr << "[planner] dropped empty response (sample " << i << ")\n";
            continue;
        }
        result.plans.push_back(make_plan(candidate.kernel_id, text));
    }
    return result;
}

RemoteExecutor::RemoteExecutor(AgentBackendConfig config, std::shared_ptr<ChatClient> client,
                               std::shared_ptr<const PromptLibrary> prompts, RetryPolicy retry)
    : config_(std::move(config)), client_(std::move(client)), prompts_(std::move(prompts)),
      retry_(retry) {}

ExecutorResult RemoteExecutor::implement(const TaskSpec& task, const OptimizationPlan& plan,
                                         const KernelArtifact& candidate, int k,
                                         std::uint64_t call_seed) {
    ExecutorResult result;
    const PromptPair prompt = render_executor_prompt(task, plan, candidate);
    for (int i = 0; i < k; ++i) {
        ChatRequest request = base_request(config_, prompt);
        const ChatResponse response = complete_with_retries(
            *client_, request, retry_, seed_mix({call_seed, static_cast<std::uint64_t>(i)}));
        result.usage.push_back(usage_of(AgentRole::executor, response));
        auto source = extract_last_code_block(response.content);
        if (!source || trim(*source).empty()) {
            ++result.dropped;
            std::cerr << "[executor] response without code block dropped (attempt " << i << ")\n";
            continue;
        }
        result.sources.push_back(std::move(*source));
    }
    return result;
}

RemoteSummarizer::RemoteSummarizer(AgentBackendConfig config, std::shared_ptr<ChatClient> client,
                                   std::shared_ptr<const PromptLibrary> prompts, RetryPolicy retry)
    : config_(std::move(config)), client_(std::move(client)), prompts_(std::move(prompts)),
      retry_(retry) {}

SummarizerOutcome RemoteSummarizer::summarize(const std::string& slow_source,
                                              const std::string& fast_source, double speedup,
                                              std::uint64_t call_seed) {
    SummarizerOutcome outcome;
    ChatRequest request =
        base_request(config_, render_summarizer_prompt(slow_source, fast_source, speedup));
    const ChatResponse response = complete_with_retries(*client_, request, retry_, call_seed);
    outcome.usage.push_back(usage_of(AgentRole::summarizer, response));
    outcome.summary = parse_summary(response.content);
    if (!outcome.summary && response.content.find("No optimization found") == std::string::npos) {
        std::cerr << "[summarizer] response did not match the output format; item skipped\n";
    }
    return outcome;
}

}  // namespace accelforge
