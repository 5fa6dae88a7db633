#pragma once

#include <exception>
#include <optional>
#include <string>
#include <utility>

namespace dupc
{

/// Base of every error raised by the library. Tracker loops attach the time
/// step at which a failure happened before rethrowing.
class Error : public std::exception
{
public:
    explicit Error(std::string message) : message_(std::move(message)) {}

    const char* what() const noexcept override { return message_.c_str(); }

    void attach_step(int k)
    {
        if (step_) return;
        step_ = k;
        message_ = "step " + std::to_string(k) + ": " + message_;
    }

    [[nodiscard]] std::optional<int> step() const { return step_; }

private:
    std::string message_;
    std::optional<int> step_;
};

class InvalidArgument : public Error
{
    using Error::Error;
};

class ConfigError : public Error
{
    using Error::Error;
};

class ZeroMatrix : public Error
{
    using Error::Error;
};

class InfeasibleRHS : public Error
{
public:
    InfeasibleRHS(std::string message, double residual)
        : Error(std::move(message)), residual_(residual) {}
    [[nodiscard]] double residual() const { return residual_; }

private:
    double residual_;
};

class NoConvergence : public Error
{
public:
    NoConvergence(std::string message, double residual)
        : Error(std::move(message)), residual_(residual) {}
    [[nodiscard]] double residual() const { return residual_; }

private:
    double residual_;
};

class SingularKKT : public Error
{
    using Error::Error;
};

class SingularHessian : public Error
{
    using Error::Error;
};

class ZeroSamplingPeriod : public Error
{
    using Error::Error;
};

class NotContractive : public Error
{
    using Error::Error;
};

class DisconnectedGraph : public Error
{
    using Error::Error;
};

class DegenerateFit : public Error
{
    using Error::Error;
};

}  // namespace dupc
