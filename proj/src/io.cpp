#include "nlc/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

namespace nlc {

void put_u8(std::string& buf, uint8_t v) {
    buf.push_back(static_cast<char>(v));
}

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_f64(std::string& buf, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(buf, bits);
}

uint8_t ByteReader::u8() {
    require(pos_ + 1 <= buf_.size(), ErrorKind::corrupt_payload, "truncated input");
    return static_cast<uint8_t>(buf_[pos_++]);
}

uint32_t ByteReader::u32() {
    require(pos_ + 4 <= buf_.size(), ErrorKind::corrupt_payload, "truncated input");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<uint32_t>(static_cast<uint8_t>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64() {
    require(pos_ + 8 <= buf_.size(), ErrorKind::corrupt_payload, "truncated input");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<uint64_t>(static_cast<uint8_t>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
}

double ByteReader::f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::string ByteReader::bytes(size_t n) {
    require(pos_ + n <= buf_.size(), ErrorKind::corrupt_payload, "truncated input");
    std::string out = buf_.substr(pos_, n);
    pos_ += n;
    return out;
}

namespace {

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
        }
        table[i] = c;
    }
    return table;
}

}  // namespace

uint32_t crc32(const std::string& bytes, size_t len) {
    static const std::array<uint32_t, 256> table = make_crc_table();
    uint32_t c = 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i) {
        c = table[(c ^ static_cast<uint8_t>(bytes[i])) & 0xFF] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), ErrorKind::io, "cannot open for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        require(out.good(), ErrorKind::io, "short write: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorKind::io, "rename failed for " + path);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::io, "cannot open: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(!in.bad(), ErrorKind::io, "read failed: " + path);
    return bytes;
}

bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::exists(path, ec);
}

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("NLC_LOG");
        if (env == nullptr) {
            return LogLevel::info;
        }
        const std::string v(env);
        if (v == "quiet") {
            return LogLevel::quiet;
        }
        if (v == "debug") {
            return LogLevel::debug;
        }
        return LogLevel::info;
    }();
    return level;
}

namespace {
std::mutex log_mutex;
}

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::info) {
        std::scoped_lock lock(log_mutex);
        std::cerr << "[nlc] " << message << "\n";
    }
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::debug) {
        std::scoped_lock lock(log_mutex);
        std::cerr << "[nlc:debug] " << message << "\n";
    }
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    // %.17g always round-trips; try shorter forms first
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) {
            break;
        }
    }
    return buf;
}

}  // namespace nlc
