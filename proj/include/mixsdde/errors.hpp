#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixsdde {

// Exit codes used by the command line tool. Library code throws; the CLI maps
// the exception category onto one of these.
enum class ExitCode : int {
    kOk = 0,
    kCriteriaFailed = 1,
    kParseError = 2,
    kConstraintViolation = 3,
    kSolverExplosion = 4,
    kIoError = 5,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::kConstraintViolation; }
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Configuration or parameter constraint violated (exit 3).
class ConstraintError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::kParseError; }
};

class IoError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::kIoError; }
};

// Factorization or quadrature breakdown. `index` locates the failure
// (e.g. the pivot at which a Cholesky factorization lost definiteness).
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class ExplosionError : public Error {
public:
    ExplosionError(const std::string& what, std::size_t step, double time)
        : Error(what), step_(step), time_(time) {}
    ExitCode exit_code() const noexcept override { return ExitCode::kSolverExplosion; }
    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

// A drift evaluator tried to read driver values beyond the current time.
class AdaptednessError : public Error {
public:
    using Error::Error;
};

}  // namespace mixsdde
