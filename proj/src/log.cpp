#include "tsemos/log.hpp"
#include "tsemos/error.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace tsemos {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidEnsemble: return "InvalidEnsemble";
    case ErrorCode::ImputationFailure: return "ImputationFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::HistoryTooShort: return "HistoryTooShort";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidReference: return "InvalidReference";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::DegenerateDifferential: return "DegenerateDifferential";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::InvalidPIT: return "InvalidPIT";
    case ErrorCode::IOError: return "IOError";
    }
    return "Unknown";
}

namespace log {
namespace {
std::atomic<std::size_t> g_warnings{0};
std::atomic<bool> g_quiet{false};
std::mutex g_stream_mutex;
}  // namespace

void warn(std::string_view message) {
    ++g_warnings;
    if (g_quiet.load()) {
        return;
    }
    std::lock_guard<std::mutex> lock(g_stream_mutex);
    std::cerr << "warning: " << message << '\n';
}

std::size_t warning_count() noexcept { return g_warnings.load(); }
void reset_warning_count() noexcept { g_warnings = 0; }
void set_quiet(bool quiet) noexcept { g_quiet = quiet; }

}  // namespace log
}  // namespace tsemos
