#include "sizenet/files.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include "sizenet/error.hpp"

namespace fs = std::filesystem;

namespace sizenet {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw ValidationError("failed reading file: " + path.string());
    return buf.str();
}

void atomic_write_file(const fs::path& path, const std::string& content) {
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    std::random_device rd;
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot create temp file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out.good()) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("failed writing temp file: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw std::runtime_error("failed renaming " + tmp.string() + " -> " + path.string() +
                                 ": " + ec.message());
    }
}

void require_writable_file(const fs::path& path, bool force) {
    if (fs::exists(path) && !force) {
        throw ValidationError("output exists, pass --force to overwrite: " + path.string());
    }
}

void require_writable_dir(const fs::path& dir, bool force) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) {
            throw ValidationError("output path exists and is not a directory: " + dir.string());
        }
        if (!fs::is_empty(dir) && !force) {
            throw ValidationError("output directory not empty, pass --force to overwrite: " +
                                  dir.string());
        }
    } else {
        fs::create_directories(dir);
    }
}

} // namespace sizenet
