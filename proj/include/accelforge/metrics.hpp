#pragma once

#include <span>
#include <string>
#include <vector>

#include "accelforge/core.hpp"

namespace accelforge {

// ---------------------------------------------------------------------------
// Roofline analytics.
//
// The attainable-time bound is the max of three independent terms: minimal
// memory traffic over bandwidth, matmul FLOPs over the matmul-engine peak,
// and all other FLOPs over the combined vector+scalar peak.
// ---------------------------------------------------------------------------

struct RooflineBreakdown {
    double traffic_ms = 0;
    double matmul_ms = 0;
    double vector_ms = 0;
    double peak_ms = 0;       // max of the three terms

    const char* binding_term() const {
        if (peak_ms == matmul_ms) return "matmul";
        if (peak_ms == traffic_ms) return "traffic";
        return "vector";
    }
};

RooflineBreakdown roofline_breakdown(const TaskSpec& task, const HardwareSpec& hw);

// Attainable-time bound in milliseconds.
double peak_time(const TaskSpec& task, const HardwareSpec& hw);

// T / t. Values above 1 indicate a mis-specified task model; callers warn,
// we report as-is.
double percent_of_peak(double peak_ms, double measured_ms);

// Traffic_Min / (HBM_Read + HBM_Write). Throws MissingTrafficCounters when
// both counters are zero. May exceed 1 for a mis-specified traffic_min;
// never clamped.
double traffic_efficiency(const TaskSpec& task, const ProfileReport& profile);

// Fraction of all generated kernels that are correct with speedup strictly
// greater than p. Incorrect kernels count in the denominator. Throws
// EmptyHistory on an empty list.
double fast_at_p(std::span<const HistoryEntry> history, double p);
double fast_at_p(std::span<const KernelArtifact> kernels, double p);

// Geometric mean. Throws NonPositiveInput unless every input is > 0.
double aggregate_speedups(std::span<const double> per_task_best);

// ---------------------------------------------------------------------------
// Per-iteration report series.
// ---------------------------------------------------------------------------

struct IterationRow {
    int iteration = 0;
    int kernels_total = 0;        // generated this iteration
    int kernels_correct = 0;
    double best_speedup = 1.0;    // cumulative best over history
    double frontier_geomean = 1.0;
    std::vector<double> fast_at;  // one entry per requested p level, cumulative
    double traffic_eff_min = 0, traffic_eff_mean = 0, traffic_eff_max = 0;
    double tensor_util_max = 0, vector_util_max = 0, scalar_util_max = 0;
};

std::vector<IterationRow> report_series(const TaskSpec& task,
                                        std::span<const HistoryEntry> history,
                                        std::span<const std::vector<KernelArtifact>> frontiers,
                                        std::span<const double> p_levels);

// Tab-separated table with a header row; consumable by any plotting tool.
std::string render_series_tsv(std::span<const IterationRow> rows,
                              std::span<const double> p_levels);

}  // namespace accelforge
