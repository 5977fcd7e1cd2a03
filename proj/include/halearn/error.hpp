#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace halearn {

/// Broad failure classes. The CLI maps each one to a distinct exit status.
enum class ErrorKind {
    invalid_argument,
    parse,
    io,
    schema,
    numeric,
    pipeline,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::pipeline: return "pipeline";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::invalid_argument, what);
}

} // namespace halearn
