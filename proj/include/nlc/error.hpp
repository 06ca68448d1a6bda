#pragma once

#include <stdexcept>
#include <string>

namespace nlc {

enum class ErrorKind {
    dim_mismatch,
    rank_deficient,
    invalid_range,
    non_finite_gradient,
    io,
    version_mismatch,
    corrupt_payload,
    empty_records,
    zero_direction,
    schedule_exhausted,
    shape_mismatch,
    config_invalid,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        fail(kind, message);
    }
}

}  // namespace nlc
