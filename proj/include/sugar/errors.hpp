#pragma once

#include <stdexcept>
#include <string>

namespace sugar {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class SingularGramError : public DataError {
public:
    SingularGramError() : DataError("scale range has J < 2: Gram matrix Phi*Phi is singular") {}
};

class ZeroVarianceError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateDataError : public DataError {
public:
    using DataError::DataError;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, long iteration)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
    long iteration() const { return iteration_; }

private:
    long iteration_;
};

class TunerError : public Error {
public:
    using Error::Error;
};

}  // namespace sugar
