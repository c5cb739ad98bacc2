#pragma once

#include <stdexcept>
#include <string>

namespace defcon {

/// |Z1γ_i| reached k_c,i (or k_c,i² − z² fell below the numerical guard).
class ConstraintViolation : public std::runtime_error {
public:
    ConstraintViolation(int joint, double time, double error, double bound,
                        const std::string& what)
        : std::runtime_error(what), joint_(joint), time_(time), error_(error), bound_(bound) {}

    int joint() const { return joint_; }
    double time() const { return time_; }
    double error() const { return error_; }
    double bound() const { return bound_; }

    // The time is not known inside the pure barrier functions; the sim layer
    // rethrows with it filled in.
    ConstraintViolation at_time(double t) const {
        return ConstraintViolation(joint_, t, error_, bound_, what());
    }

private:
    int joint_;
    double time_;
    double error_;
    double bound_;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double time, const std::string& what)
        : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// Invalid parameters or a malformed config file. `line` is 0 when the error
/// is not tied to a line of the input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace defcon
