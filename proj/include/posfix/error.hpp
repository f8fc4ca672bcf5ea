#pragma once

#include <stdexcept>
#include <string>

namespace posfix {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// An iterative routine ran out of its iteration budget.
class BudgetExceededError : public Error {
public:
    BudgetExceededError(const std::string& what, double lower, double upper)
        : Error(what), lower_(lower), upper_(upper) {}
    double lower_bound() const noexcept { return lower_; }
    double upper_bound() const noexcept { return upper_; }

private:
    double lower_;
    double upper_;
};

/// F produced a non-positive or non-finite coordinate.
class ModelEvaluationError : public Error {
public:
    ModelEvaluationError(const std::string& what, std::string label)
        : Error(what), label_(std::move(label)) {}
    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

class DifferentiationError : public Error {
public:
    using Error::Error;
};

/// The eigenvalue-1 eigenspace of the elasticity matrix is not one-dimensional.
class AmbiguityError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ImpossibleNormalizationError : public Error {
public:
    using Error::Error;
};

/// Outcomes were requested for a state that is not an equilibrium.
class StaleStateError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace posfix
