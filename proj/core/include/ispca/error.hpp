#pragma once

#include <stdexcept>
#include <string>

namespace ispca {

// Error classes map onto the CLI exit codes: usage -> 2, data -> 3,
// numerical -> 4.
enum class ErrorKind { Usage, Data, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(ErrorKind::Usage, msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(ErrorKind::Data, msg) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(ErrorKind::Numerical, msg) {}
};

}  // namespace ispca
