#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbmavg {

// Invalid argument outside an operation's domain (negative time, bad Hurst index, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(const std::string& what, std::size_t pivot)
        : std::runtime_error(what), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// Circulant embedding produced a significantly negative eigenvalue.
class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solver state became non-finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

// Monte Carlo experiment failed as a whole (e.g. too many divergent replicates).
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fbmavg
