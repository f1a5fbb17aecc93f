#include "accelforge/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accelforge/errors.hpp"
#include "accelforge/metrics.hpp"
#include "accelforge/util.hpp"

namespace accelforge {

namespace {

const char* kDimensionPool[] = {"tile_m",       "tile_n",   "tile_k", "unroll",
                                "vector_width", "layout",   "prefetch", "fusion",
                                "pipeline",     "buffer_depth"};

// Strictly decreasing from 1.0 at level 0 to `floor_factor` at level `best`,
// then strictly increasing toward `end_factor`.
std::vector<double> unimodal_table(Rng& rng, int levels, int best, double floor_factor,
                                   double end_factor) {
    std::vector<double> t(static_cast<std::size_t>(levels), 1.0);
    const double descent_shape = rng.uniform(0.8, 1.6);
    for (int l = 1; l <= best; ++l) {
        const double frac = std::pow(static_cast<double>(l) / best, descent_shape);
        t[l] = 1.0 - (1.0 - floor_factor) * frac;
    }
    const int tail = levels - 1 - best;
    const double rise_shape = rng.uniform(0.8, 1.6);
    for (int l = best + 1; l < levels; ++l) {
        const double frac = std::pow(static_cast<double>(l - best) / tail, rise_shape);
        t[l] = floor_factor + (end_factor - floor_factor) * frac;
    }
    return t;
}

}  // namespace

SyntheticLandscape::SyntheticLandscape(std::uint64_t seed) : seed_(seed) {
    Rng rng(seed_mix({seed, 0x5CA1EDULL}));

    const int num_dims = 3 + static_cast<int>(rng.below(3));  // 3..5
    std::vector<std::string> pool(std::begin(kDimensionPool), std::end(kDimensionPool));
    rng.shuffle(pool);

    dims_.reserve(num_dims);
    for (int d = 0; d < num_dims; ++d) {
        DimensionSpec dim;
        dim.name = pool[d];
        dim.levels = 4 + static_cast<int>(rng.below(3));  // 4..6
        const int best = 1 + static_cast<int>(rng.below(dim.levels - 1));
        const double floor_factor = rng.uniform(0.45, 0.85);
        const double end_factor = rng.uniform(0.95, 1.30);
        dim.factors = unimodal_table(rng, dim.levels, best, floor_factor, end_factor);
        dims_.push_back(std::move(dim));
    }

    // Pair up dimensions: the second of each pair deepens once the first
    // reaches its own best level.
    for (int p = 0; p + 1 < num_dims; p += 2) {
        DimensionSpec& src = dims_[p];
        DimensionSpec& dst = dims_[p + 1];
        const int src_best = static_cast<int>(
            std::min_element(src.factors.begin(), src.factors.end()) - src.factors.begin());
        dst.gate_dim = p;
        dst.gate_level = src_best;
        const double base_floor = *std::min_element(dst.factors.begin(), dst.factors.end());
        const int best = 1 + static_cast<int>(rng.below(dst.levels - 1));
        const double floor_factor = rng.uniform(0.35, std::max(0.36, base_floor - 0.05));
        const double end_factor = rng.uniform(0.95, 1.30);
        dst.shifted = unimodal_table(rng, dst.levels, best, floor_factor, end_factor);
    }

    int max_levels = 0;
    for (const auto& d : dims_) max_levels = std::max(max_levels, d.levels);

    task_.operator_name = "synth_" + sha256_hex(std::to_string(seed), 8);
    task_.config = {{"dims", static_cast<std::uint64_t>(num_dims)},
                    {"levels", static_cast<std::uint64_t>(max_levels)}};
    task_.traffic_min = (1ULL << 27) + rng.below((1ULL << 29) - (1ULL << 27));
    task_.flops_mm = 50'000'000'000ULL + rng.below(450'000'000'000ULL);
    task_.flops_vec = 100'000'000ULL + rng.below(4'900'000'000ULL);
    task_.tolerance = 1e-4;
    task_.num_seeds = 3;
    task_.reference = "synthetic:" + std::to_string(seed);
    task_.initial_kernel = "task " + task_.operator_name + "\n";

    hardware_.name = "synth_hw_" + sha256_hex(std::to_string(seed), 8);
    hardware_.peak_bandwidth = rng.uniform(200e9, 800e9);
    hardware_.peak_mm = rng.uniform(10e12, 30e12);
    hardware_.peak_vec = rng.uniform(200e9, 600e9);
    hardware_.fluctuation_threshold = 0.01;

    base_latency_ms_ = peak_time(task_, hardware_) * rng.uniform(2.0, 3.5);
    traffic_redundancy_ = rng.uniform(1.8, 3.0);
}

std::map<std::string, int> SyntheticLandscape::parse_directives(const std::string& source) const {
    std::map<std::string, int> levels;
    bool saw_header = false;
    int line_no = 0;
    for (const auto& raw : split_lines(source)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream in(line);
        std::string word;
        in >> word;
        if (!saw_header) {
            std::string name;
            if (word != "task" || !(in >> name) || name != task_.operator_name) {
                throw CompileError("line " + std::to_string(line_no) +
                                   ": expected header 'task " + task_.operator_name + "'");
            }
            saw_header = true;
            continue;
        }
        if (word != "opt") {
            throw CompileError("line " + std::to_string(line_no) + ": expected 'opt <dimension> <level>'");
        }
        std::string dim;
        long long level = 0;
        if (!(in >> dim >> level)) {
            throw CompileError("line " + std::to_string(line_no) + ": malformed opt directive");
        }
        std::string rest;
        if (in >> rest) {
            throw CompileError("line " + std::to_string(line_no) + ": trailing tokens after directive");
        }
        levels[dim] = static_cast<int>(level);  // repeated dimension: last one wins
    }
    if (!saw_header) throw CompileError("missing 'task' header line");
    return levels;
}

double SyntheticLandscape::factor(std::size_t dim, const std::map<std::string, int>& levels) const {
    const DimensionSpec& d = dims_[dim];
    auto it = levels.find(d.name);
    const int level = it == levels.end() ? 0 : it->second;
    const std::vector<double>* table = &d.factors;
    if (d.gate_dim >= 0) {
        const DimensionSpec& gate = dims_[static_cast<std::size_t>(d.gate_dim)];
        auto git = levels.find(gate.name);
        const int gate_level = git == levels.end() ? 0 : git->second;
        if (gate_level >= d.gate_level) table = &d.shifted;
    }
    return (*table)[static_cast<std::size_t>(level)];
}

double SyntheticLandscape::latency_ms(const std::map<std::string, int>& levels) const {
    for (const auto& [name, level] : levels) {
        auto it = std::find_if(dims_.begin(), dims_.end(),
                               [&](const DimensionSpec& d) { return d.name == name; });
        if (it == dims_.end()) throw UnknownDimension("unknown dimension: " + name);
        if (level < 0 || level >= it->levels) {
            throw UnknownDimension("level " + std::to_string(level) + " out of range for " + name);
        }
    }
    double latency = base_latency_ms_;
    for (std::size_t d = 0; d < dims_.size(); ++d) latency *= factor(d, levels);
    return latency;
}

ProfileReport SyntheticLandscape::profile(const std::map<std::string, int>& levels) const {
    const double latency = latency_ms(levels);

    // Traffic redundancy shrinks as each dimension approaches its best
    // factor, so traffic efficiency tracks optimization progress.
    double redundancy_scale = 1.0;
    double tightness_sum = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const double f = factor(d, levels);
        const double floor_factor = *std::min_element(dims_[d].factors.begin(), dims_[d].factors.end());
        double tightness = (f - floor_factor) / (1.0 - floor_factor);
        tightness = std::clamp(0.1 + 0.9 * tightness, 0.05, 1.5);
        redundancy_scale *= tightness;
        tightness_sum += tightness;
    }
    const double traffic_scale = 1.0 + (traffic_redundancy_ - 1.0) * redundancy_scale;
    const double traffic = static_cast<double>(task_.traffic_min) * traffic_scale;
    const double spilled = std::max(0.0, (traffic_scale - 1.0) * static_cast<double>(task_.traffic_min) * 0.5);

    ProfileReport p;
    p.latency = latency;
    p.hbm_read_bytes = static_cast<std::uint64_t>(std::llround(traffic * 0.6));
    p.hbm_write_bytes = static_cast<std::uint64_t>(std::llround(traffic * 0.4));
    p.spill_save_bytes = static_cast<std::uint64_t>(std::llround(spilled * 0.5));
    p.spill_reload_bytes = static_cast<std::uint64_t>(std::llround(spilled * 0.5));
    p.sbuf_read_bytes = static_cast<std::uint64_t>(std::llround(traffic * 2.0));
    p.sbuf_write_bytes = static_cast<std::uint64_t>(std::llround(traffic * 1.5));
    p.psum_read_bytes = task_.flops_mm / 8;
    p.psum_write_bytes = task_.flops_mm / 8;

    const double transpose_share = 0.02 + 0.08 * (tightness_sum / static_cast<double>(dims_.size()));
    p.hardware_flops = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(task_.flops_mm) * (1.0 + transpose_share)));
    p.transpose_flops = p.hardware_flops - task_.flops_mm;

    const double latency_s = latency / 1e3;
    p.tensor_util = std::clamp(
        static_cast<double>(p.hardware_flops) / hardware_.peak_mm / latency_s, 0.0, 1.0);
    p.vector_util = std::clamp(
        static_cast<double>(task_.flops_vec) / hardware_.peak_vec / latency_s, 0.0, 1.0);
    p.scalar_util = 0.5 * p.vector_util;
    p.gpsimd_util = 0.01;
    p.mm_arithmetic_intensity = static_cast<double>(p.hardware_flops - p.transpose_flops) /
                                static_cast<double>(p.hbm_read_bytes + p.hbm_write_bytes);
    p.peak_flops_bandwidth_ratio = hardware_.peak_mm / hardware_.peak_bandwidth;
    return p;
}

double SyntheticLandscape::optimum_latency_ms() const {
    std::map<std::string, int> levels;
    double best = latency_ms(levels);
    std::vector<int> cursor(dims_.size(), 0);
    for (;;) {
        std::size_t d = 0;
        while (d < dims_.size()) {
            if (++cursor[d] < dims_[d].levels) break;
            cursor[d] = 0;
            ++d;
        }
        if (d == dims_.size()) break;
        for (std::size_t i = 0; i < dims_.size(); ++i) levels[dims_[i].name] = cursor[i];
        best = std::min(best, latency_ms(levels));
    }
    return best;
}

json SyntheticLandscape::tables() const {
    json dims = json::array();
    for (const auto& d : dims_) {
        json entry{{"name", d.name}, {"levels", d.levels}, {"factors", d.factors}};
        if (d.gate_dim >= 0) {
            entry["gate_dim"] = dims_[static_cast<std::size_t>(d.gate_dim)].name;
            entry["gate_level"] = d.gate_level;
            entry["shifted"] = d.shifted;
        }
        dims.push_back(std::move(entry));
    }
    return json{{"seed", seed_},
                {"base_latency_ms", base_latency_ms_},
                {"traffic_redundancy", traffic_redundancy_},
                {"dimensions", std::move(dims)}};
}

ProfileReport synthetic_evaluate(const std::string& kernel_source, std::uint64_t landscape_seed) {
    SyntheticLandscape landscape(landscape_seed);
    return landscape.profile(landscape.parse_directives(kernel_source));
}

// ---------------------------------------------------------------------------
// Backend
// ---------------------------------------------------------------------------

namespace {

class SyntheticRunner : public KernelRunner {
  public:
    SyntheticRunner(std::shared_ptr<const SyntheticLandscape> landscape,
                    std::map<std::string, int> levels)
        : landscape_(std::move(landscape)), levels_(std::move(levels)) {
        try {
            latency_ = landscape_->latency_ms(levels_);
            valid_ = true;
        } catch (const UnknownDimension&) {
            valid_ = false;
        }
    }

    Tensor reference(int seed) override {
        Tensor t;
        t.shape = {16};
        t.data.resize(16);
        Rng rng(seed_mix({landscape_->seed(), 0x7E45ULL, static_cast<std::uint64_t>(seed)}));
        for (auto& x : t.data) x = rng.uniform(-1.0, 1.0);
        return t;
    }

    Tensor run(int seed) override {
        Tensor t = reference(seed);
        if (!valid_) {
            // Semantically wrong program: perturb well past any tolerance.
            for (auto& x : t.data) x += 1.0;
        }
        return t;
    }

    double time_once() override { return latency_; }

    ProfileReport counters(double) override { return landscape_->profile(levels_); }

  private:
    std::shared_ptr<const SyntheticLandscape> landscape_;
    std::map<std::string, int> levels_;
    double latency_ = 0;
    bool valid_ = false;
};

}  // namespace

SyntheticBackend::SyntheticBackend(std::shared_ptr<const SyntheticLandscape> landscape)
    : landscape_(std::move(landscape)) {}

std::unique_ptr<KernelRunner> SyntheticBackend::compile(const std::string& source) {
    return std::make_unique<SyntheticRunner>(landscape_, landscape_->parse_directives(source));
}

std::shared_ptr<const SyntheticLandscape> landscape_for_reference(const std::string& reference) {
    const std::string prefix = "synthetic:";
    if (!starts_with(reference, prefix)) return nullptr;
    const std::uint64_t seed = std::stoull(reference.substr(prefix.size()));
    return std::make_shared<SyntheticLandscape>(seed);
}

}  // namespace accelforge
