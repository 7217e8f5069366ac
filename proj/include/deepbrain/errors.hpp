// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace deepbrain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Tensor or parameter shapes do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be analysed (single-class ROC, constant series...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or record contents.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or another numeric failure during optimisation.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// An API was used out of order (e.g. backward without a matching trace).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace deepbrain
