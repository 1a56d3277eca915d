#include "obliq/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace obliq {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void RunManifest::add_input(const std::string& label, const std::string& path) {
    nlohmann::ordered_json entry;
    entry["path"] = path;
    entry["fnv1a64"] = fnv1a64_hex(read_file(path));
    inputs[label] = entry;
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["seed"] = seed;
    j["workers"] = workers;
    j["rng"] = "splitmix64";
    j["inputs"] = inputs;
    return j;
}

nlohmann::ordered_json make_report(const RunManifest& manifest,
                                   const nlohmann::ordered_json& results, double wall_ms) {
    nlohmann::ordered_json rep;
    rep["manifest"] = manifest.to_json();
    rep["results"] = results;
    rep["metadata"] = {{"wall_time_ms", wall_ms}};
    return rep;
}

void write_report(const std::string& out_path, const nlohmann::ordered_json& report) {
    if (out_path.empty()) return;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << report.dump(2) << "\n";
}

}  // namespace obliq
