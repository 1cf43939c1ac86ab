#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpush {

enum class ErrorCode {
    invalid_argument,
    invalid_scenario,
    unknown_suite,
    no_valid_placement,
    degenerate_contact,
    malformed_encoder,
    no_path,
    start_occupied,
    goal_occupied,
    empty_path,
    reset_failed,
    episode_finished,
    length_mismatch,
    insufficient_entries,
    degenerate_geometry,
    empty_input,
    policy_timeout,
    io_failure,
    protocol_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace cpush
