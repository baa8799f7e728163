#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nullgeo {

// Exit-code categories used by the CLI:
//   1 = input could not be parsed, 2 = a module precondition failed,
//   3 = a tolerance/assertion check failed.
enum class ErrorKind { Parse = 1, Precondition = 2, Tolerance = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(ErrorKind::Parse, msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& msg) : Error(ErrorKind::Precondition, msg) {}
};

// Evaluation hit a non-finite intermediate (log of a negative number, 1/0, ...).
class EvalDomainError : public PreconditionError {
public:
    EvalDomainError(const std::string& msg, std::vector<double> point)
        : PreconditionError(msg), point_(std::move(point)) {}
    const std::vector<double>& point() const { return point_; }

private:
    std::vector<double> point_;
};

class ToleranceError : public Error {
public:
    explicit ToleranceError(const std::string& msg) : Error(ErrorKind::Tolerance, msg) {}
};

}  // namespace nullgeo
