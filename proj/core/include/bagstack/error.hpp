#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bagstack {

enum class ErrorKind {
    schema,
    parse,
    label_consistency,
    empty_input,
    split_infeasible,
    config,
    invalid_feature,
    shape,
    fold,
    invalid_score,
    no_positives,
    io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace bagstack
