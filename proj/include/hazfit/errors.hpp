#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hazfit {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs: malformed data, precondition violations, inconsistent flags.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& msg, long line)
      : ValidationError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical failures: quadrature that cannot meet the tolerance, inversion failure.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg, double achieved_error = 0.0)
      : Error(msg), achieved_error_(achieved_error) {}
  double achieved_error() const { return achieved_error_; }

 private:
  double achieved_error_;
};

class SingularMatrixError : public NumericError {
 public:
  explicit SingularMatrixError(const std::string& msg) : NumericError(msg) {}
};

// Solver gave up; carries the iteration trace for diagnosis.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> last_theta,
                   std::vector<std::string> trace = {})
      : Error(msg), last_theta_(std::move(last_theta)), trace_(std::move(trace)) {}
  const std::vector<double>& last_theta() const { return last_theta_; }
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  std::vector<double> last_theta_;
  std::vector<std::string> trace_;
};

}  // namespace hazfit
