#pragma once
// Run manifests and deterministic JSON report emission. The manifest plus
// results sections are byte-stable for identical configurations; wall time
// lives in a metadata-only section.

#include <cstdint>
#include <string>

#include <json.hpp>

namespace obliq {

inline constexpr const char* kToolName = "obliq";
inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);
std::string read_file(const std::string& path);

struct RunManifest {
    std::string subcommand;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
    int workers = 1;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();

    void add_input(const std::string& label, const std::string& path);
    nlohmann::ordered_json to_json() const;
};

// Assembles {"manifest":..., "results":..., "metadata":...}; when out_path
// is empty the report is not written, only returned.
nlohmann::ordered_json make_report(const RunManifest& manifest,
                                   const nlohmann::ordered_json& results, double wall_ms);
void write_report(const std::string& out_path, const nlohmann::ordered_json& report);

}  // namespace obliq
