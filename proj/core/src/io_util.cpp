#include "pathnet/io_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace pathnet {

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open \"" + tmp.string() + "\" for writing");
        out << content;
        if (!out) throw std::runtime_error("write to \"" + tmp.string() + "\" failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        throw std::runtime_error("rename \"" + tmp.string() + "\" -> \"" + target.string() +
                                 "\" failed: " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace pathnet
