#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bigmas/model_gateway.hpp"

namespace test_support {

/// Wraps any backend and records every call so tests can assert on the
/// exact prompts and caps the code under test issued.
struct CapturedCall {
    bigmas::Phase phase;
    std::string system;
    std::string user;
    int max_tokens = 0;
};

class RecordingBackend : public bigmas::ModelBackend {
public:
    explicit RecordingBackend(bigmas::ModelBackend& inner) : inner_(inner) {}

    std::string name() const override { return inner_.name(); }
    std::string generate(bigmas::Phase phase, const std::string& system,
                         const std::string& user, int max_tokens) override {
        calls.push_back(CapturedCall{phase, system, user, max_tokens});
        return inner_.generate(phase, system, user, max_tokens);
    }

    std::vector<CapturedCall> calls;

private:
    bigmas::ModelBackend& inner_;
};

/// Fresh directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

} // namespace test_support
