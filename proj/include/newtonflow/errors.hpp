#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace newtonflow {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf produced or supplied where finite values are required.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Point outside the domain of a map.
class DomainError : public Error {
public:
    using Error::Error;
};

class UnknownMapError : public Error {
public:
    explicit UnknownMapError(const std::string& key) : Error("unknown map: " + key) {}
};

/// Raised by LU factorization when a pivot falls below the relative threshold.
class SingularError : public Error {
public:
    SingularError(std::size_t column, double pivot)
        : Error("singular matrix: pivot " + std::to_string(pivot) + " in column " + std::to_string(column)),
          column_(column),
          pivot_(pivot) {}

    std::size_t column() const noexcept { return column_; }
    double pivot() const noexcept { return pivot_; }

private:
    std::size_t column_;
    double pivot_;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

}  // namespace newtonflow
