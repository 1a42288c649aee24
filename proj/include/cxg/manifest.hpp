#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxg/digest.hpp"
#include "cxg/error.hpp"

namespace cxg {

inline constexpr const char* kToolVersion = "0.1.0";

// Reproducibility record written next to every CLI output as
// <output>.manifest.json: the command, resolved parameters, content digests
// of every input, and the produced files.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 13;
    nlohmann::json params = nlohmann::json::object();
    std::map<std::string, std::string> input_digests;
    std::vector<std::string> outputs;

    void add_input(const std::filesystem::path& path) {
        input_digests[path.string()] = digest_file(path.string());
    }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"command", command},       {"tool_version", tool_version},
            {"seed", seed},             {"params", params},
            {"inputs", input_digests},  {"outputs", outputs},
        };
    }

    void write(const std::filesystem::path& output_path) const {
        std::filesystem::path path = output_path;
        path += ".manifest.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ParseError("cannot write manifest: " + path.string());
        std::string text = to_json().dump(2);
        text += '\n';
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw ParseError("write failed: " + path.string());
    }
};

}  // namespace cxg
