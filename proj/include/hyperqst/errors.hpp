#pragma once

#include <stdexcept>
#include <string>

namespace hyperqst {

// invalid arguments, malformed configs, inconsistent inputs (CLI exit code 1)
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// numerical failures and model-mismatch diagnostics (CLI exit code 2)
struct DiagnosticError : std::runtime_error {
    explicit DiagnosticError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hyperqst
