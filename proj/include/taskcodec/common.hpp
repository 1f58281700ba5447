#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace taskcodec {

inline constexpr const char* kToolVersion = "0.1.0";

// Error categories map 1:1 onto CLI exit codes (see tools/).
enum class ErrorKind {
    Config,           // bad config file / bad arguments
    Data,             // dataset, annotation, or file-content problems
    Shape,            // tensor dimension contract violated
    Coding,           // bitstream / entropy coding failures
    FrozenViolation,  // task-network weights changed during finetuning
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) fail(kind, msg);
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Smallest multiple of m that is >= v.
inline int round_up(int v, int m) { return ceil_div(v, m) * m; }

}  // namespace taskcodec
