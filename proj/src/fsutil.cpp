#include "proverb/fsutil.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "proverb/error.hpp"

namespace proverb {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
    return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    static std::atomic<uint64_t> counter{0};
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(tid) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "rename failed for " + path.string());
    }
}

}  // namespace proverb
