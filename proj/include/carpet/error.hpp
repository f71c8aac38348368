#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace carpet {

enum class ErrorCode {
    DegenerateGrid,
    ThinDigitSet,
    BadProbabilities,
    DuplicateCell,
    CellNotInG,
    NoBracket,
    EmptyWord,
    EmptyPair,
    BadTau,
    BadK,
    CapExceeded,
    Overflow,
    Config,
};

std::string_view error_code_name(ErrorCode code);

// Every library failure is reported through this type; `code()` identifies
// the violated precondition and `what()` carries a human-readable message.
class CarpetError : public std::runtime_error {
public:
    CarpetError(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised when an enumeration would exceed its cardinality cap. `found` is the
// number of elements collected before stopping, a lower bound on the true size.
class CapExceeded : public CarpetError {
public:
    CapExceeded(std::size_t found, std::size_t cap, const std::string& what)
        : CarpetError(ErrorCode::CapExceeded,
                      what + " exceeded cap " + std::to_string(cap) + " (found >= " + std::to_string(found) + ")"),
          found_(found) {}

    std::size_t found() const noexcept { return found_; }

private:
    std::size_t found_;
};

}  // namespace carpet
