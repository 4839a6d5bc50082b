#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace stentx {

/// Malformed or inconsistent input data (bad files, invariant violations).
/// Carries the offending frame index and field name when known.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& message,
                       std::optional<int> frame = std::nullopt,
                       std::string field = {})
        : std::runtime_error(message), frame_(frame), field_(std::move(field)) {}

    std::optional<int> frame() const noexcept { return frame_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::optional<int> frame_;
    std::string field_;
};

/// Wraps an error with the pipeline stage in which it surfaced.
class StageError : public DataError {
public:
    StageError(const std::string& stage, const std::string& message)
        : DataError(stage + ": " + message), stage_(stage) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace stentx
