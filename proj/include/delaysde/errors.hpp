#pragma once

#include <stdexcept>
#include <string>

namespace delaysde {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed measures, violated preconditions, unreadable configs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver a result meeting its contract.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class OrderExceeded : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class GridAlignmentError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class WrongRegime : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class RegionTooLarge : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class NonConvergence : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class InconsistentMultiplicity : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class DegenerateDenominator : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace delaysde
