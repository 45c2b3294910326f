#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace relext::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// manifest.json for one run: command line, effective configuration, seed,
/// and hashes of every input and output file.
class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> argv);

    void set_config(const std::vector<std::pair<std::string, std::string>>& key_values, std::uint64_t seed);
    void add_input(const std::filesystem::path& path);
    /// Recorded relative to the output directory.
    void add_artifact(const std::filesystem::path& path);
    void set_result(nlohmann::json result) { result_ = std::move(result); }

    /// Writes <out_dir>/manifest.json.
    void write(const std::filesystem::path& out_dir) const;

private:
    std::string command_;
    std::vector<std::string> argv_;
    nlohmann::json config_ = nlohmann::json::object();
    std::uint64_t seed_ = 0;
    std::vector<std::filesystem::path> inputs_;
    std::vector<std::filesystem::path> artifacts_;
    nlohmann::json result_;
};

}  // namespace relext::cli
