#pragma once

#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heart {

enum class ErrorKind {
    Parse,
    Range,
    Validation,
    Config,
    Coverage,
    Saturation,
    Internal,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Range: return "range error";
        case ErrorKind::Validation: return "validation error";
        case ErrorKind::Config: return "configuration error";
        case ErrorKind::Coverage: return "coverage error";
        case ErrorKind::Saturation: return "saturation error";
        case ErrorKind::Internal: return "internal error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Process exit codes used by the command-line front end.
inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Internal: return 4;
        default: return 3;
    }
}

namespace log {

inline bool& quiet() {
    static bool flag = false;
    return flag;
}

inline void warn(std::string_view msg) {
    if (!quiet()) std::clog << "warning: " << msg << '\n';
}

}  // namespace log
}  // namespace heart
