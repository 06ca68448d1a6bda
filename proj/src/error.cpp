#include "nlc/error.hpp"

namespace nlc {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::dim_mismatch: return "DimMismatch";
        case ErrorKind::rank_deficient: return "RankDeficient";
        case ErrorKind::invalid_range: return "InvalidRange";
        case ErrorKind::non_finite_gradient: return "NonFiniteGradient";
        case ErrorKind::io: return "Io";
        case ErrorKind::version_mismatch: return "VersionMismatch";
        case ErrorKind::corrupt_payload: return "CorruptPayload";
        case ErrorKind::empty_records: return "EmptyRecords";
        case ErrorKind::zero_direction: return "ZeroDirection";
        case ErrorKind::schedule_exhausted: return "ScheduleExhausted";
        case ErrorKind::shape_mismatch: return "ShapeMismatch";
        case ErrorKind::config_invalid: return "ConfigInvalid";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace nlc
