#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "accelforge/core.hpp"
#include "accelforge/synthetic.hpp"
#include "accelforge/util.hpp"

namespace accelforge {

// ---------------------------------------------------------------------------
// Roles, pricing, backend bindings.
// ---------------------------------------------------------------------------

enum class AgentRole { planner, executor, summarizer };

const char* to_string(AgentRole role);

struct SamplingParams {
    double temperature = 1.0;
    int max_tokens = 8192;
};

struct PriceSheet {
    double input_per_mtok = 0;    // $ per 1M input tokens
    double output_per_mtok = 0;   // $ per 1M output tokens
};

struct AgentBackendConfig {
    AgentRole role = AgentRole::planner;
    std::string model_name;
    std::string endpoint;         // chat-completion URL, or "mock"
    SamplingParams sampling;
    PriceSheet price;
    std::string api_key_env;      // environment variable holding the bearer key
    int max_in_flight = 8;
};

// Per-1M-token API prices for the models we track.
const std::map<std::string, PriceSheet>& known_model_prices();

// Sum over the ledger of input*input_price + output*output_price, in dollars.
// Throws MissingPrice when a ledger role has no price entry.
double cost(std::span<const TokenUsage> ledger, const std::map<std::string, PriceSheet>& prices_by_role);

// ---------------------------------------------------------------------------
// Prompt templates and rendering.
// ---------------------------------------------------------------------------

// Loads the template text assets. Resolution order for the directory:
// explicit argument, ACCELFORGE_PROMPT_DIR environment variable, the
// compiled-in default pointing at the source tree.
class PromptLibrary {
  public:
    explicit PromptLibrary(std::string dir = "");

    const std::string& nki_basics() const { return nki_basics_; }
    const std::string& profile_terminology() const { return profile_terminology_; }
    const std::string& planner_user() const { return planner_user_; }
    const std::string& program_guide_a() const { return program_guide_a_; }
    const std::string& program_guide_b() const { return program_guide_b_; }
    const std::string& kernel_usage() const { return kernel_usage_; }
    const std::string& summarizer() const { return summarizer_; }

  private:
    std::string nki_basics_, profile_terminology_, planner_user_, program_guide_a_,
        program_guide_b_, kernel_usage_, summarizer_;
};

struct PromptPair {
    std::string system;
    std::string user;
};

// Replaces each "{name}" placeholder with its value. Placeholders that are
// required but absent from the template raise TemplateFieldMissing; brace
// text not named in `fields` passes through untouched.
std::string instantiate_template(const std::string& tmpl,
                                 const std::map<std::string, std::string>& fields);

// Textual statement of the optimization problem fed to {problem_code}.
std::string render_problem_code(const TaskSpec& task);

// One "name: value" line per profile counter in rng-shuffled order, using
// the profiler's terminology names.
std::string render_profile_items(const ProfileReport& profile, Rng& rng);

// An experience item in the summarizer's output structure: bold strategy
// line, description, Original/Optimized code blocks.
std::string render_experience_item(const ExperienceItem& item);

// System = NKI basics + profile terminology. User = memory items
// (newest first, only when non-empty) above the instantiated template.
PromptPair render_planner_prompt(const TaskSpec& task, const KernelArtifact& kernel,
                                 std::span<const ExperienceItem> memory, Rng& rng);

// System = NKI basics + programming guide + kernel-usage harness. The plan
// text leads the user message verbatim, followed by the problem and the
// baseline kernel.
PromptPair render_executor_prompt(const TaskSpec& task, const OptimizationPlan& plan,
                                  const KernelArtifact& kernel);

PromptPair render_summarizer_prompt(const std::string& slow_source,
                                    const std::string& fast_source, double speedup);

// Last fenced code block of a model response, language tag stripped.
std::optional<std::string> extract_last_code_block(const std::string& text);

struct SummaryText {
    std::string strategy;       // bold headline + description, verbatim
    std::string slow_snippet;
    std::string fast_snippet;
};

// Parses the summarizer's mandated output format. nullopt for
// "No optimization found" or any response that misses the format.
std::optional<SummaryText> parse_summary(const std::string& text);

// ---------------------------------------------------------------------------
// Chat-completion transport.
// ---------------------------------------------------------------------------

struct ChatRequest {
    std::string model;
    std::string system;
    std::string user;
    double temperature = 1.0;
    int max_tokens = 8192;
    double timeout_s = 120.0;
};

struct ChatResponse {
    std::string content;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
};

class ChatClient {
  public:
    virtual ~ChatClient() = default;
    // Throws AgentUnavailable on transport failure.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Speaks the standard chat-completion JSON shape over HTTP. The URL is the
// full completions endpoint, e.g. http://host:8000/v1/chat/completions.
class HttpChatClient : public ChatClient {
  public:
    HttpChatClient(std::string url, std::string api_key = "");
    ChatResponse complete(const ChatRequest& request) override;

  private:
    std::string base_;
    std::string path_;
    std::string api_key_;
};

struct RetryPolicy {
    int retries = 2;
    int backoff_ms = 250;       // doubled per attempt, +/- jitter
};

// Bounded retries with jittered exponential backoff; rethrows
// AgentUnavailable once exhausted.
ChatResponse complete_with_retries(ChatClient& client, const ChatRequest& request,
                                   const RetryPolicy& policy, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Agent contracts. Implementations must be safe for concurrent calls; all
// call state is local and randomness comes from the caller's seed.
// ---------------------------------------------------------------------------

struct PlannerResult {
    std::vector<OptimizationPlan> plans;   // length <= n; empty responses dropped
    std::vector<TokenUsage> usage;         // one entry per request made
    int shortfall = 0;
};

class Planner {
  public:
    virtual ~Planner() = default;
    virtual PlannerResult propose(const TaskSpec& task, const KernelArtifact& candidate,
                                  std::span<const ExperienceItem> memory, int n,
                                  std::uint64_t call_seed) = 0;
};

struct ExecutorResult {
    std::vector<std::string> sources;      // length <= k; blockless responses dropped
    std::vector<TokenUsage> usage;
    int dropped = 0;
};

class Executor {
  public:
    virtual ~Executor() = default;
    virtual ExecutorResult implement(const TaskSpec& task, const OptimizationPlan& plan,
                                     const KernelArtifact& candidate, int k,
                                     std::uint64_t call_seed) = 0;
};

struct SummarizerOutcome {
    std::optional<SummaryText> summary;    // nullopt: no optimization found / parse failure
    std::vector<TokenUsage> usage;
};

class Summarizer {
  public:
    virtual ~Summarizer() = default;
    virtual SummarizerOutcome summarize(const std::string& slow_source,
                                        const std::string& fast_source, double speedup,
                                        std::uint64_t call_seed) = 0;
};

OptimizationPlan make_plan(const std::string& candidate_id, const std::string& text);

// ---------------------------------------------------------------------------
// Remote chat-completion agents.
// ---------------------------------------------------------------------------

class RemotePlanner : public Planner {
  public:
    RemotePlanner(AgentBackendConfig config, std::shared_ptr<ChatClient> client,
                  std::shared_ptr<const PromptLibrary> prompts, RetryPolicy retry = {});
    PlannerResult propose(const TaskSpec& task, const KernelArtifact& candidate,
                          std::span<const ExperienceItem> memory, int n,
                          std::uint64_t call_seed) override;

  private:
    AgentBackendConfig config_;
    std::shared_ptr<ChatClient> client_;
    std::shared_ptr<const PromptLibrary> prompts_;
    RetryPolicy retry_;
};

class RemoteExecutor : public Executor {
  public:
    RemoteExecutor(AgentBackendConfig config, std::shared_ptr<ChatClient> client,
                   std::shared_ptr<const PromptLibrary> prompts, RetryPolicy retry = {});
    ExecutorResult implement(const TaskSpec& task, const OptimizationPlan& plan,
                             const KernelArtifact& candidate, int k,
                             std::uint64_t call_seed) override;

  private:
    AgentBackendConfig config_;
    std::shared_ptr<ChatClient> client_;
    std::shared_ptr<const PromptLibrary> prompts_;
    RetryPolicy retry_;
};

class RemoteSummarizer : public Summarizer {
  public:
    RemoteSummarizer(AgentBackendConfig config, std::shared_ptr<ChatClient> client,
                     std::shared_ptr<const PromptLibrary> prompts, RetryPolicy retry = {});
    SummarizerOutcome summarize(const std::string& slow_source, const std::string& fast_source,
                                double speedup, std::uint64_t call_seed) override;

  private:
    AgentBackendConfig config_;
    std::shared_ptr<ChatClient> client_;
    std::shared_ptr<const PromptLibrary> prompts_;
    RetryPolicy retry_;
};

// ---------------------------------------------------------------------------
// Deterministic mock agents over the synthetic landscape. With these, every
// campaign is a pure function of its seed.
// ---------------------------------------------------------------------------

// Proposes one random legal move: "Set optimization dimension `d` to level L."
class MockPlanner : public Planner {
  public:
    explicit MockPlanner(std::shared_ptr<const SyntheticLandscape> landscape);
    PlannerResult propose(const TaskSpec& task, const KernelArtifact& candidate,
                          std::span<const ExperienceItem> memory, int n,
                          std::uint64_t call_seed) override;

  private:
    std::shared_ptr<const SyntheticLandscape> landscape_;
};

// Applies the move textually to the candidate source. Unparseable plans
// echo the kernel unchanged.
class MockExecutor : public Executor {
  public:
    ExecutorResult implement(const TaskSpec& task, const OptimizationPlan& plan,
                             const KernelArtifact& candidate, int k,
                             std::uint64_t call_seed) override;
};

// Emits a canned-format experience; identical inputs yield no optimization.
class MockSummarizer : public Summarizer {
  public:
    SummarizerOutcome summarize(const std::string& slow_source, const std::string& fast_source,
                                double speedup, std::uint64_t call_seed) override;
};

// Parses a mock plan sentence. Exposed for the executor and tests.
std::optional<std::pair<std::string, int>> parse_move(const std::string& plan_text);

// Sets or appends the directive in the mini-language source.
std::string apply_move(const std::string& kernel_source, const std::string& dimension, int level);

}  // namespace accelforge
