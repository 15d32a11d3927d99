#pragma once

#include <stdexcept>
#include <string>

namespace pertkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (bad mask, non-diagonal H0, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class OrderNotSolved : public Error {
 public:
  using Error::Error;
};

// A masked entry with nonzero target sits on a vanishing denominator
// E_j - E_i - hbar k omega_d.
class ResonantDenominator : public Error {
 public:
  ResonantDenominator(int row, int col, int harmonic, double denominator)
      : Error("resonant denominator at (" + std::to_string(row) + ", " + std::to_string(col) +
              ") harmonic " + std::to_string(harmonic) + ": |E_j - E_i - hbar k omega_d| = " +
              std::to_string(denominator)),
        row_(row),
        col_(col),
        harmonic_(harmonic) {}

  int row() const { return row_; }
  int col() const { return col_; }
  int harmonic() const { return harmonic_; }

 private:
  int row_;
  int col_;
  int harmonic_;
};

class DegenerateSpectrum : public Error {
 public:
  DegenerateSpectrum(int row, int col)
      : Error("degenerate coupled levels " + std::to_string(row) + " and " + std::to_string(col)),
        row_(row),
        col_(col) {}

  int row() const { return row_; }
  int col() const { return col_; }

 private:
  int row_;
  int col_;
};

class IllConditionedBlocks : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace pertkit
