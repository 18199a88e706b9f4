#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lancekit {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LANCEKIT_DEFINE_ERROR(Name)          \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    }

LANCEKIT_DEFINE_ERROR(IoError);
LANCEKIT_DEFINE_ERROR(EmptyRepoError);
LANCEKIT_DEFINE_ERROR(UnsupportedLanguageError);
LANCEKIT_DEFINE_ERROR(EmptyTextError);
LANCEKIT_DEFINE_ERROR(InvalidVectorError);
LANCEKIT_DEFINE_ERROR(DimensionMismatchError);
LANCEKIT_DEFINE_ERROR(ServiceError);
LANCEKIT_DEFINE_ERROR(AuthError);
LANCEKIT_DEFINE_ERROR(BudgetExceededError);
LANCEKIT_DEFINE_ERROR(ParseSiteError);
LANCEKIT_DEFINE_ERROR(EmptyModuleError);
LANCEKIT_DEFINE_ERROR(QueryParseError);
LANCEKIT_DEFINE_ERROR(NoEntitiesError);
LANCEKIT_DEFINE_ERROR(EmptyContextError);
LANCEKIT_DEFINE_ERROR(NoCallFoundError);

#undef LANCEKIT_DEFINE_ERROR

/// Error tied to a 1-based line of a line-delimited input file.
class LineError : public Error {
public:
    LineError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public LineError {
public:
    using LineError::LineError;
};

class TaskSchemaError : public LineError {
public:
    using LineError::LineError;
};

/// Raised when a completion receiver matches neither an import nor a typed local.
/// `candidates` lists the bindings that were consulted, rendered as `local -> target`.
class UnresolvedReceiverError : public Error {
public:
    UnresolvedReceiverError(const std::string& receiver, std::vector<std::string> candidates)
        : Error("unresolved receiver '" + receiver + "'"),
          receiver_(receiver),
          candidates_(std::move(candidates)) {}

    const std::string& receiver() const noexcept { return receiver_; }
    const std::vector<std::string>& candidates() const noexcept { return candidates_; }

private:
    std::string receiver_;
    std::vector<std::string> candidates_;
};

}  // namespace lancekit
