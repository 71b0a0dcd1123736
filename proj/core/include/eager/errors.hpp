#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <stdexcept>
#include <string>

namespace eager {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on the inputs was violated.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// A distribution has no usable probability mass.
class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

/// Fewer log-probabilities available than an operation requires.
class InsufficientLogprobsError : public Error {
 public:
  using Error::Error;
};

/// Context grew past the model's context window.
class ContextOverflowError : public Error {
 public:
  using Error::Error;
};

/// A remote source could not be reached after exhausting retries.
class SourceUnavailableError : public Error {
 public:
  using Error::Error;
};

/// A remote endpoint answered with a non-2xx status.
class EndpointError : public Error {
 public:
  EndpointError(int status, const std::string& what)
      : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// A remote response could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An operation that requires a finished tree saw active nodes.
class NotFinishedError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for this kind of task or source.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Correlation is undefined (zero variance in one coordinate).
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace eager
