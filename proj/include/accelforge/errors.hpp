#pragma once

#include <stdexcept>
#include <string>

namespace accelforge {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Agent layer
struct AgentUnavailable : Error { using Error::Error; };
struct TemplateFieldMissing : Error { using Error::Error; };
struct MissingPrice : Error { using Error::Error; };

// Evaluator / profiling layer
struct EvaluatorUnavailable : Error { using Error::Error; };
struct BackendUnavailable : Error { using Error::Error; };
struct MeasurementFailure : Error { using Error::Error; };
struct TimedOut : Error { using Error::Error; };
struct CompileError : Error { using Error::Error; };
struct UnknownDimension : Error { using Error::Error; };
struct QueueFull : Error { using Error::Error; };

// Memory curation
struct UnresolvableProvenance : Error { using Error::Error; };
struct SummarizerUnavailable : Error { using Error::Error; };

// Metrics
struct EmptyHistory : Error { using Error::Error; };
struct NonPositiveInput : Error { using Error::Error; };
struct MissingTrafficCounters : Error { using Error::Error; };

// Storage
struct TaskNotFound : Error { using Error::Error; };
struct CorruptRecord : Error { using Error::Error; };
struct CampaignNotFound : Error { using Error::Error; };
struct IncompatibleConfig : Error { using Error::Error; };

// Campaign driver
struct InitialKernelIncorrect : Error { using Error::Error; };
struct IterationFailed : Error { using Error::Error; };

// CLI
struct ConfigError : Error { using Error::Error; };

}  // namespace accelforge
