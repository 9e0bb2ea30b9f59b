#include "probmotion/fileio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "probmotion/error.hpp"

namespace probmotion {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open '" + path + "' for reading");
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) raise(Errc::io, "read failed for '" + path + "'");
    return out.str();
}

namespace {

void write_via_temp(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::io, "cannot open '" + tmp + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) raise(Errc::io, "write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        raise(Errc::io, "cannot move '" + tmp + "' into place at '" + path + "'");
    }
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
    write_via_temp(path, content);
}

void atomic_write_bytes(const std::string& path, const std::string& bytes) {
    write_via_temp(path, bytes);
}

bool file_exists(const std::string& path) {
    std::ifstream in(path);
    return static_cast<bool>(in);
}

}  // namespace probmotion
