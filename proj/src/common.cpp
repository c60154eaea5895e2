#include "cyclesem/common.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace cyclesem {

std::string to_hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void append_f32le(std::vector<unsigned char>& out, float v) {
    const uint32_t u = std::bit_cast<uint32_t>(v);
    out.push_back(static_cast<unsigned char>(u & 0xff));
    out.push_back(static_cast<unsigned char>((u >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((u >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((u >> 24) & 0xff));
}

float read_f32le(const unsigned char* p) {
    const uint32_t u = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                       static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
    return std::bit_cast<float>(u);
}

void write_file_atomic(const std::string& path, const void* data, size_t len) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + tmp);
        f.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        if (!f) throw IoError("short write: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp + " -> " + path + ": " + ec.message());
}

void write_file_atomic(const std::string& path, const std::string& text) {
    write_file_atomic(path, text.data(), text.size());
}

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file: " + path);
    f.seekg(0, std::ios::end);
    const auto len = f.tellg();
    f.seekg(0, std::ios::beg);
    std::vector<unsigned char> out(static_cast<size_t>(len));
    if (len > 0) f.read(reinterpret_cast<char*>(out.data()), len);
    if (!f) throw IoError("short read: " + path);
    return out;
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory: " + path + ": " + ec.message());
}

std::vector<unsigned char> floats_to_le_bytes(const float* v, size_t n) {
    std::vector<unsigned char> bytes;
    bytes.reserve(n * 4);
    for (size_t i = 0; i < n; ++i) append_f32le(bytes, v[i]);
    return bytes;
}

std::vector<float> le_bytes_to_floats(const std::vector<unsigned char>& bytes) {
    if (bytes.size() % 4 != 0) throw IoError("float payload length not a multiple of 4");
    std::vector<float> out(bytes.size() / 4);
    for (size_t i = 0; i < out.size(); ++i) out[i] = read_f32le(bytes.data() + i * 4);
    return out;
}

}  // namespace cyclesem
