#pragma once

// Helpers for driving the hsi binary from tests: process launch, scratch
// directories and run-report schema checks.

#include "json.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace clitest {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct RunResult {
    int code = -1;
    std::string out;
};

// Runs `hsi args` inside `dir` with HSI_THREADS set; stderr is discarded.
inline RunResult run(const std::string& exe, const std::string& args, const fs::path& dir, int threads = 1) {
    const std::string cmd = "cd '" + dir.string() + "' && HSI_THREADS=" + std::to_string(threads) + " '" + exe +
                            "' " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("popen failed");
    RunResult r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline json load(const fs::path& p) { return json::parse(slurp(p)); }

// Fresh directory under the system temp path, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("hsi_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

// Drops the fields the schema marks as timing-dependent.
inline json strip_timings(json report, const json& schema) {
    for (const auto& k : schema.at("timing_fields")) report.erase(k.get<std::string>());
    return report;
}

inline bool has_type(const json& v, const std::string& type) {
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "object") return v.is_object();
    if (type == "boolean") return v.is_boolean();
    return false;
}

inline bool all_numbers_finite(const json& j) {
    if (j.is_number_float()) return std::isfinite(j.get<double>());
    if (j.is_structured())
        for (const auto& v : j)
            if (!all_numbers_finite(v)) return false;
    return true;
}

// Empty when the report conforms, otherwise a description of the first problem.
inline std::string schema_problem(const json& report, const json& schema) {
    if (!report.is_object()) return "report is not an object";
    for (const auto& [key, type] : schema.at("required").items()) {
        if (!report.contains(key)) return "missing " + key;
        if (!has_type(report.at(key), type.get<std::string>())) return key + " should be " + type.get<std::string>();
    }
    if (report.at("schema") != schema.at("schema")) return "unexpected schema tag";
    bool known = false;
    for (const auto& c : schema.at("commands")) known = known || c == report.at("command");
    if (!known) return "unknown command";
    for (const auto& [key, type] : schema.at("timings_required").items())
        if (!report.at("timings").contains(key) || !has_type(report.at("timings").at(key), type.get<std::string>()))
            return "timings." + key;
    if (!all_numbers_finite(report)) return "non-finite number";
    return {};
}

}  // namespace clitest
