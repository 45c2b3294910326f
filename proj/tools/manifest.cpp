#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace relext::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 init failed");
    }
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md;
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

Manifest::Manifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)) {}

void Manifest::set_config(const std::vector<std::pair<std::string, std::string>>& key_values, std::uint64_t seed) {
    config_ = nlohmann::json::object();
    for (const auto& [k, v] : key_values) config_[k] = v;
    seed_ = seed;
}

void Manifest::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }

void Manifest::add_artifact(const std::filesystem::path& path) { artifacts_.push_back(path); }

void Manifest::write(const std::filesystem::path& out_dir) const {
    nlohmann::json j;
    j["command"] = command_;
    j["argv"] = argv_;
    j["seed"] = seed_;
    j["config"] = config_;
    auto files = [](const std::vector<std::filesystem::path>& paths, const std::filesystem::path* base) {
        auto arr = nlohmann::json::array();
        for (const auto& p : paths) {
            const auto shown = base ? p.lexically_relative(*base) : p;
            arr.push_back({{"path", shown.generic_string()},
                           {"bytes", std::filesystem::file_size(p)},
                           {"sha256", sha256_file(p)}});
        }
        return arr;
    };
    j["inputs"] = files(inputs_, nullptr);
    j["artifacts"] = files(artifacts_, &out_dir);
    if (!result_.is_null()) j["result"] = result_;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "manifest.json").string());
    out << j.dump(2) << "\n";
}

}  // namespace relext::cli
