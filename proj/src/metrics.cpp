#include "accelforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accelforge/errors.hpp"
#include "accelforge/util.hpp"

namespace accelforge {

RooflineBreakdown roofline_breakdown(const TaskSpec& task, const HardwareSpec& hw) {
    RooflineBreakdown b;
    b.traffic_ms = 1e3 * static_cast<double>(task.traffic_min) / hw.peak_bandwidth;
    b.matmul_ms = 1e3 * static_cast<double>(task.flops_mm) / hw.peak_mm;
    b.vector_ms = 1e3 * static_cast<double>(task.flops_vec) / hw.peak_vec;
    b.peak_ms = std::max({b.traffic_ms, b.matmul_ms, b.vector_ms});
    return b;
}

double peak_time(const TaskSpec& task, const HardwareSpec& hw) {
    return roofline_breakdown(task, hw).peak_ms;
}

double percent_of_peak(double peak_ms, double measured_ms) {
    return peak_ms / measured_ms;
}

double traffic_efficiency(const TaskSpec& task, const ProfileReport& profile) {
    const std::uint64_t moved = profile.hbm_read_bytes + profile.hbm_write_bytes;
    if (moved == 0) {
        throw MissingTrafficCounters("hbm_read_bytes + hbm_write_bytes is zero");
    }
    return static_cast<double>(task.traffic_min) / static_cast<double>(moved);
}

double fast_at_p(std::span<const KernelArtifact> kernels, double p) {
    if (kernels.empty()) throw EmptyHistory("Fast@p needs at least one generated kernel");
    std::size_t hits = 0;
    for (const auto& k : kernels) {
        if (k.correct() && k.speedup_vs_initial && *k.speedup_vs_initial > p) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(kernels.size());
}

double fast_at_p(std::span<const HistoryEntry> history, double p) {
    if (history.empty()) throw EmptyHistory("Fast@p needs at least one generated kernel");
    std::size_t hits = 0;
    for (const auto& e : history) {
        const auto& k = e.kernel;
        if (k.correct() && k.speedup_vs_initial && *k.speedup_vs_initial > p) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(history.size());
}

double aggregate_speedups(std::span<const double> per_task_best) {
    if (per_task_best.empty()) throw NonPositiveInput("geometric mean of an empty set");
    double log_sum = 0;
    for (double x : per_task_best) {
        if (!(x > 0)) throw NonPositiveInput("geometric mean requires strictly positive inputs");
        log_sum += std::log(x);
    }
    return std::exp(log_sum / static_cast<double>(per_task_best.size()));
}

std::vector<IterationRow> report_series(const TaskSpec& task,
                                        std::span<const HistoryEntry> history,
                                        std::span<const std::vector<KernelArtifact>> frontiers,
                                        std::span<const double> p_levels) {
    int max_iter = 0;
    for (const auto& e : history) max_iter = std::max(max_iter, e.iteration);
    max_iter = std::max(max_iter, static_cast<int>(frontiers.size()));

    std::vector<IterationRow> rows;
    std::vector<KernelArtifact> cumulative;
    double best = 1.0;
    for (int i = 1; i <= max_iter; ++i) {
        IterationRow row;
        row.iteration = i;
        std::vector<double> traffic_effs;
        for (const auto& e : history) {
            if (e.iteration != i) continue;
            ++row.kernels_total;
            cumulative.push_back(e.kernel);
            if (e.kernel.correct()) {
                ++row.kernels_correct;
                best = std::max(best, e.kernel.speedup_vs_initial.value_or(1.0));
                const auto& p = *e.kernel.profile;
                if (p.hbm_read_bytes + p.hbm_write_bytes > 0) {
                    traffic_effs.push_back(traffic_efficiency(task, p));
                }
                row.tensor_util_max = std::max(row.tensor_util_max, p.tensor_util);
                row.vector_util_max = std::max(row.vector_util_max, p.vector_util);
                row.scalar_util_max = std::max(row.scalar_util_max, p.scalar_util);
            }
        }
        row.best_speedup = best;
        if (i <= static_cast<int>(frontiers.size())) {
            std::vector<double> speedups;
            for (const auto& k : frontiers[i - 1]) {
                speedups.push_back(k.speedup_vs_initial.value_or(1.0));
            }
            if (!speedups.empty()) row.frontier_geomean = aggregate_speedups(speedups);
        }
        for (double p : p_levels) {
            row.fast_at.push_back(cumulative.empty() ? 0.0 : fast_at_p(cumulative, p));
        }
        if (!traffic_effs.empty()) {
            row.traffic_eff_min = *std::min_element(traffic_effs.begin(), traffic_effs.end());
            row.traffic_eff_max = *std::max_element(traffic_effs.begin(), traffic_effs.end());
            double sum = 0;
            for (double t : traffic_effs) sum += t;
            row.traffic_eff_mean = sum / static_cast<double>(traffic_effs.size());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_series_tsv(std::span<const IterationRow> rows,
                              std::span<const double> p_levels) {
    std::ostringstream out;
    out << "iteration\tkernels_total\tkernels_correct\tbest_speedup\tfrontier_geomean";
    for (double p : p_levels) out << "\tfast_at_" << format_double(p);
    out << "\ttraffic_eff_min\ttraffic_eff_mean\ttraffic_eff_max"
        << "\ttensor_util_max\tvector_util_max\tscalar_util_max\n";
    for (const auto& row : rows) {
        out << row.iteration << '\t' << row.kernels_total << '\t' << row.kernels_correct << '\t'
            << format_double(row.best_speedup) << '\t' << format_double(row.frontier_geomean);
        for (double f : row.fast_at) out << '\t' << format_double(f);
        out << '\t' << format_double(row.traffic_eff_min) << '\t'
            << format_double(row.traffic_eff_mean) << '\t' << format_double(row.traffic_eff_max)
            << '\t' << format_double(row.tensor_util_max) << '\t'
            << format_double(row.vector_util_max) << '\t' << format_double(row.scalar_util_max)
            << '\n';
    }
    return out.str();
}

}  // namespace accelforge
