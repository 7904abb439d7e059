#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "proverb/corpus.hpp"
#include "proverb/fsutil.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path test_dir() { return fs::path(PROVERB_TEST_DIR); }
inline fs::path fixture(const std::string& rel) { return test_dir() / "fixtures" / rel; }
inline fs::path golden(const std::string& rel) { return test_dir() / "golden" / rel; }

inline nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(proverb::read_file(p)); }

inline proverb::Corpus fixture_corpus() { return proverb::load_corpus(fixture("corpus.jsonl")); }

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = fs::temp_directory_path() /
                ("proverb-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

// Compares against a frozen golden file. PROVERB_REGEN_GOLDEN=1 rewrites it.
inline bool matches_golden(const std::string& name, const std::string& actual) {
    const fs::path p = golden(name);
    if (const char* regen = std::getenv("PROVERB_REGEN_GOLDEN"); regen && std::string(regen) == "1") {
        proverb::write_file_atomic(p, actual);
        return true;
    }
    std::error_code ec;
    if (!fs::exists(p, ec)) return false;
    return proverb::read_file(p) == actual;
}

}  // namespace testsupport
