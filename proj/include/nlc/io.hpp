#pragma once

#include <cstdint>
#include <string>

#include "nlc/error.hpp"

namespace nlc {

// --- little-endian byte buffer helpers ---

void put_u8(std::string& buf, uint8_t v);
void put_u32(std::string& buf, uint32_t v);
void put_u64(std::string& buf, uint64_t v);
void put_f64(std::string& buf, double v);

// Cursor over an in-memory byte buffer; reads throw CorruptPayload on
// truncation.
class ByteReader {
public:
    explicit ByteReader(const std::string& buf) : buf_(buf) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    double f64();
    std::string bytes(size_t n);

    size_t offset() const { return pos_; }
    size_t remaining() const { return buf_.size() - pos_; }

private:
    const std::string& buf_;
    size_t pos_ = 0;
};

// IEEE CRC-32 (reflected, poly 0xEDB88320)
uint32_t crc32(const std::string& bytes, size_t len);
inline uint32_t crc32(const std::string& bytes) { return crc32(bytes, bytes.size()); }

// Writes to <path>.tmp then renames, so --out targets are never left in a
// partially written state.
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);
bool file_exists(const std::string& path);

// --- logging (stderr, controlled by NLC_LOG in {quiet, info, debug}) ---

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);

// Deterministic decimal formatting used by every CSV/JSON emitter: shortest
// representation that round-trips a double.
std::string format_double(double v);

}  // namespace nlc
