#pragma once

#include <stdexcept>
#include <string>

namespace supermap {

// Error taxonomy shared by the library and the CLI. Exit codes: 0 ok,
// 2 config error, 3 numerical/analysis error, 4 capacity error.
enum class ErrorKind {
    config,
    structural,
    analysis,
    domain,
    degenerate_variance,
    capacity,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::config: return 2;
            case ErrorKind::io: return 2;
            case ErrorKind::capacity: return 4;
            default: return 3;
        }
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void throw_structural(const std::string& msg) { throw Error(ErrorKind::structural, msg); }
[[noreturn]] inline void throw_analysis(const std::string& msg) { throw Error(ErrorKind::analysis, msg); }
[[noreturn]] inline void throw_domain(const std::string& msg) { throw Error(ErrorKind::domain, msg); }
[[noreturn]] inline void throw_degenerate(const std::string& msg) { throw Error(ErrorKind::degenerate_variance, msg); }
[[noreturn]] inline void throw_capacity(const std::string& msg) { throw Error(ErrorKind::capacity, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::io, msg); }

}  // namespace supermap
