#include "clutterpush/error.hpp"

namespace cpush {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_scenario: return "invalid_scenario";
    case ErrorCode::unknown_suite: return "unknown_suite";
    case ErrorCode::no_valid_placement: return "no_valid_placement";
    case ErrorCode::degenerate_contact: return "degenerate_contact";
    case ErrorCode::malformed_encoder: return "malformed_encoder";
    case ErrorCode::no_path: return "no_path";
    case ErrorCode::start_occupied: return "start_occupied";
    case ErrorCode::goal_occupied: return "goal_occupied";
    case ErrorCode::empty_path: return "empty_path";
    case ErrorCode::reset_failed: return "reset_failed";
    case ErrorCode::episode_finished: return "episode_finished";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::insufficient_entries: return "insufficient_entries";
    case ErrorCode::degenerate_geometry: return "degenerate_geometry";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::policy_timeout: return "policy_timeout";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::protocol_error: return "protocol_error";
    }
    return "unknown";
}

} // namespace cpush
