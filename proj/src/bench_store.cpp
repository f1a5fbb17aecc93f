#include "accelforge/bench_store.hpp"

#include <algorithm>
#include <cstdio>

#include "accelforge/errors.hpp"
#include "accelforge/util.hpp"

namespace accelforge {

namespace fs = std::filesystem;

void to_json(json& j, const IterationRecord& v) {
    j = json{{"iteration", v.iteration},
             {"kernels", v.kernels},
             {"frontier", v.frontier},
             {"memory", v.memory},
             {"cost_ledger", v.cost_ledger}};
}

void from_json(const json& j, IterationRecord& v) {
    j.at("iteration").get_to(v.iteration);
    j.at("kernels").get_to(v.kernels);
    j.at("frontier").get_to(v.frontier);
    j.at("memory").get_to(v.memory);
    j.at("cost_ledger").get_to(v.cost_ledger);
}

void to_json(json& j, const CampaignMeta& v) {
    j = json{{"campaign_id", v.campaign_id},
             {"task_ref", v.task_ref},
             {"hardware", v.hardware},
             {"config", v.config},
             {"initial", v.initial},
             {"p_levels", v.p_levels}};
}

void from_json(const json& j, CampaignMeta& v) {
    j.at("campaign_id").get_to(v.campaign_id);
    j.at("task_ref").get_to(v.task_ref);
    j.at("hardware").get_to(v.hardware);
    j.at("config").get_to(v.config);
    j.at("initial").get_to(v.initial);
    j.at("p_levels").get_to(v.p_levels);
}

std::string task_ref_of(const TaskSpec& task) {
    return task.operator_name + "/" + config_key(task);
}

BenchStore::BenchStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "tasks");
    fs::create_directories(root_ / "campaigns");
}

fs::path BenchStore::store_task(const TaskSpec& task) {
    const fs::path dir = root_ / "tasks" / task.operator_name / config_key(task);
    fs::create_directories(dir / "kernels");
    write_file_atomic(dir / "task", canonical_json(task));
    return dir;
}

bool BenchStore::task_exists(const std::string& task_ref) const {
    return fs::exists(root_ / "tasks" / task_ref / "task");
}

TaskSpec BenchStore::load_task(const std::string& operator_name, const std::string& key) const {
    return load_task(operator_name + "/" + key);
}

TaskSpec BenchStore::load_task(const std::string& task_ref) const {
    const fs::path path = root_ / "tasks" / task_ref / "task";
    if (!fs::exists(path)) throw TaskNotFound("no task at " + path.string());
    try {
        return parse_json<TaskSpec>(read_file(path));
    } catch (const json::exception& e) {
        throw CorruptRecord("task record " + path.string() + ": " + e.what());
    }
}

void BenchStore::store_kernel(const std::string& task_ref, const KernelArtifact& kernel) {
    const fs::path dir = root_ / "tasks" / task_ref / "kernels";
    fs::create_directories(dir);
    // Kernel records are immutable; the id is content-addressed, so a
    // rewrite of an existing id is byte-identical and harmless.
    write_file_atomic(dir / kernel.kernel_id, canonical_json(kernel));
}

std::vector<KernelArtifact> BenchStore::list_kernels(const std::string& task_ref) const {
    const fs::path dir = root_ / "tasks" / task_ref / "kernels";
    std::vector<KernelArtifact> kernels;
    if (!fs::exists(dir)) return kernels;
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
        try {
            kernels.push_back(parse_json<KernelArtifact>(read_file(path)));
        } catch (const json::exception& e) {
            throw CorruptRecord("kernel record " + path.string() + ": " + e.what());
        }
    }
    return kernels;
}

fs::path BenchStore::campaign_dir(const std::string& campaign_id) const {
    return root_ / "campaigns" / campaign_id;
}

bool BenchStore::campaign_exists(const std::string& campaign_id) const {
    return fs::exists(campaign_dir(campaign_id) / "meta.json");
}

std::vector<std::string> BenchStore::list_campaigns() const {
    std::vector<std::string> ids;
    const fs::path dir = root_ / "campaigns";
    if (!fs::exists(dir)) return ids;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) {
            ids.push_back(entry.path().filename().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

void BenchStore::create_campaign(const CampaignMeta& meta) {
    const fs::path dir = campaign_dir(meta.campaign_id);
    if (fs::exists(dir / "meta.json")) {
        throw Error("campaign already exists: " + meta.campaign_id);
    }
    fs::create_directories(dir / "iterations");
    write_file_atomic(dir / "meta.json", canonical_json(meta));
}

CampaignMeta BenchStore::load_campaign_meta(const std::string& campaign_id) const {
    const fs::path path = campaign_dir(campaign_id) / "meta.json";
    if (!fs::exists(path)) throw CampaignNotFound("no campaign " + campaign_id);
    try {
        return parse_json<CampaignMeta>(read_file(path));
    } catch (const json::exception& e) {
        throw CorruptRecord("campaign meta " + path.string() + ": " + e.what());
    }
}

namespace {

std::string iteration_file_name(int iteration) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.json", iteration);
    return buf;
}

}  // namespace

void BenchStore::append_iteration(const std::string& campaign_id, const IterationRecord& record) {
    const fs::path dir = campaign_dir(campaign_id) / "iterations";
    if (!fs::exists(campaign_dir(campaign_id) / "meta.json")) {
        throw CampaignNotFound("no campaign " + campaign_id);
    }
    fs::create_directories(dir);
    write_file_atomic(dir / iteration_file_name(record.iteration), canonical_json(record));
}

std::vector<IterationRecord> BenchStore::load_iterations(const std::string& campaign_id) const {
    if (!campaign_exists(campaign_id)) throw CampaignNotFound("no campaign " + campaign_id);
    const fs::path dir = campaign_dir(campaign_id) / "iterations";
    std::vector<IterationRecord> records;
    for (int i = 1;; ++i) {
        const fs::path path = dir / iteration_file_name(i);
        if (!fs::exists(path)) break;
        try {
            records.push_back(parse_json<IterationRecord>(read_file(path)));
        } catch (const json::exception&) {
            break;  // partially written final record: discard and stop
        }
    }
    return records;
}

CampaignState BenchStore::resume_state(const std::string& campaign_id) const {
    const CampaignMeta meta = load_campaign_meta(campaign_id);
    const auto records = load_iterations(campaign_id);

    CampaignState state;
    state.iteration = static_cast<int>(records.size());
    state.candidates = {meta.initial};
    for (const auto& record : records) {
        for (const auto& kernel : record.kernels) {
            state.history.push_back({record.iteration, kernel});
        }
    }
    if (!records.empty()) {
        const IterationRecord& last = records.back();
        if (!last.frontier.empty()) state.candidates = last.frontier;
        state.memory = last.memory;
        state.cost_ledger = last.cost_ledger;
    }
    return state;
}

}  // namespace accelforge
