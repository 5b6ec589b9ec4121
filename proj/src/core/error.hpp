// Error taxonomy for the core library. The C API maps ErrorCode onto its
// status enum one-to-one, so every throw site picks the code deliberately.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

enum class ErrorCode {
  Argument = 1,      // caller passed something malformed
  Parse = 2,         // JSON / config could not be read
  Domain = 3,        // input outside the mathematical domain of the operation
  Numeric = 4,       // computation failed (singularity, non-convergence, ...)
  Inconclusive = 5,  // a verdict could not be reached within budget
  Internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& m) : Error(ErrorCode::Argument, m) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorCode::Parse, m) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(ErrorCode::Domain, m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorCode::Numeric, m) {}
};

struct InconclusiveError : Error {
  explicit InconclusiveError(const std::string& m) : Error(ErrorCode::Inconclusive, m) {}
};

// Strong-convexity violation; the offending evaluation point travels with it.
struct ConvexityError : Error {
  ConvexityError(const std::string& m, std::vector<double> x, std::vector<double> y)
      : Error(ErrorCode::Numeric, m), x(std::move(x)), y(std::move(y)) {}
  std::vector<double> x, y;
};

// Step-size underflow or similar integrator failure; carries the last good state.
struct IntegrationError : Error {
  IntegrationError(const std::string& m, double t, std::vector<double> state)
      : Error(ErrorCode::Numeric, m), t(t), state(std::move(state)) {}
  double t;
  std::vector<double> state;
};

}  // namespace finsler
