#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "accelforge/core.hpp"
#include "accelforge/profiling.hpp"

namespace accelforge {

// ---------------------------------------------------------------------------
// Synthetic optimization landscape.
//
// Kernels are programs in a tiny directive language:
//
//     task <operator_name>
//     opt <dimension> <level>
//     ...
//
// Latency is base_latency times the product of one factor per dimension,
// looked up by level. Each table is unimodal with a unique best level, and
// selected dimension pairs interact: once the source dimension sits at its
// gate level or deeper, the target dimension switches to a shifted table
// with a deeper optimum. Reaching the global optimum therefore takes a
// chain of rewrites rather than one lucky sample. Cost is a pure function
// of the final directive map; a repeated dimension keeps its last level.
// ---------------------------------------------------------------------------

struct DimensionSpec {
    std::string name;
    int levels = 0;                 // legal levels are 0..levels-1; factor at 0 is 1.0
    std::vector<double> factors;    // base table
    int gate_dim = -1;              // index of the gating dimension, -1 when independent
    int gate_level = 0;             // shifted table active when gate dim level >= this
    std::vector<double> shifted;    // same length as factors when gated
};

class SyntheticLandscape {
  public:
    explicit SyntheticLandscape(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    const TaskSpec& task() const { return task_; }
    const HardwareSpec& hardware() const { return hardware_; }
    const std::vector<DimensionSpec>& dimensions() const { return dims_; }
    double base_latency_ms() const { return base_latency_ms_; }

    // Throws CompileError on malformed text or a wrong task header.
    std::map<std::string, int> parse_directives(const std::string& source) const;

    // Throws UnknownDimension for an unknown name or an out-of-range level.
    double latency_ms(const std::map<std::string, int>& levels) const;
    ProfileReport profile(const std::map<std::string, int>& levels) const;

    // Exhaustive minimum over every level assignment; the search-quality
    // oracle for small instances.
    double optimum_latency_ms() const;

    // Factor tables and derived constants, for debugging and test oracles.
    json tables() const;

  private:
    double factor(std::size_t dim, const std::map<std::string, int>& levels) const;

    std::uint64_t seed_;
    TaskSpec task_;
    HardwareSpec hardware_;
    std::vector<DimensionSpec> dims_;
    double base_latency_ms_ = 0;
    double traffic_redundancy_ = 2.0;   // baseline HBM traffic over traffic_min
};

// Evaluates a mini-language kernel directly against the seeded landscape.
// Throws CompileError (malformed source) and UnknownDimension (unknown
// dimension or out-of-range level); callers map these to compile_error and
// incorrect statuses respectively.
ProfileReport synthetic_evaluate(const std::string& kernel_source, std::uint64_t landscape_seed);

// EvalBackend over a landscape. Unknown dimensions surface as numerically
// wrong outputs so the artifact status comes out of the ordinary
// correctness path; measurement is exact, so the latency protocol settles
// in one round.
class SyntheticBackend : public EvalBackend {
  public:
    explicit SyntheticBackend(std::shared_ptr<const SyntheticLandscape> landscape);
    std::unique_ptr<KernelRunner> compile(const std::string& source) override;

  private:
    std::shared_ptr<const SyntheticLandscape> landscape_;
};

// Resolves "synthetic:<seed>" reference handles (TaskSpec.reference).
std::shared_ptr<const SyntheticLandscape> landscape_for_reference(const std::string& reference);

}  // namespace accelforge
