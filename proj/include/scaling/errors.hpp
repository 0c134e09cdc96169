#pragma once

#include <stdexcept>
#include <string>

namespace scaling {

// Base for every error raised by the library. Callers that only care about
// "something in the model went wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input vector dimension does not match the network.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Stick-breaking hit the atom cap before the residual fell below tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

// Width or budget that cannot satisfy d*n*T <= C.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Regression could not be fitted (too few points, degenerate x-range).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Hypothesis space exceeds the enumeration cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Log-space posterior collapsed (all hypotheses at -inf).
class NumericError : public Error {
 public:
  using Error::Error;
};

// A Monte Carlo check contradicted a bound it is supposed to respect.
class LemmaViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace scaling
