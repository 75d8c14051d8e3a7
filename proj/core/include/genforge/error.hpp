#pragma once

#include <stdexcept>
#include <string>

namespace genforge {

/// Base class for every domain error raised by the library. The CLI maps
/// these to exit status 1; anything else is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a function argument was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what),
        detail_(what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }
  /// The message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that breaks a data invariant (duplicate ids, empty
/// references, reserved tokens).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unknown metric, unknown config key, bad option value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A corruption pair whose input, target and plan disagree.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Two collections that must line up by id or by key do not.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// A metric with no defined value on the given input.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration refused because the search space is too large.
class SizeError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

/// Failure inside one stage of an experiment pipeline; the stage name is
/// prefixed to the message.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace genforge
