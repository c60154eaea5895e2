#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyclesem {

inline constexpr const char* kVersion = "cyclesem 0.1.0";

// Error taxonomy mirrored by the C API status codes and CLI exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad function argument / contract violation (shape mismatch, bad enum, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

// Config file problem; message starts with the offending field path.
struct ConfigError : Error {
    using Error::Error;
};

// A prerequisite artifact (checkpoint, residual dir, dataset) is absent.
struct MissingArtifact : Error {
    using Error::Error;
};

// Filesystem / serialization failure.
struct IoError : Error {
    using Error::Error;
};

// Training diverged or hit a non-finite loss.
struct TrainingError : Error {
    using Error::Error;
};

// FNV-1a 64-bit, used for file checksums and config fingerprints.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string to_hex(uint64_t v);

// Little-endian float32 (de)serialization, independent of host byte order.
void append_f32le(std::vector<unsigned char>& out, float v);
float read_f32le(const unsigned char* p);

// Whole-file helpers. Writers are atomic: write to "<path>.tmp", then rename.
void write_file_atomic(const std::string& path, const void* data, size_t len);
void write_file_atomic(const std::string& path, const std::string& text);
std::vector<unsigned char> read_file(const std::string& path);
bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);

std::vector<unsigned char> floats_to_le_bytes(const float* v, size_t n);
std::vector<float> le_bytes_to_floats(const std::vector<unsigned char>& bytes);

}  // namespace cyclesem
