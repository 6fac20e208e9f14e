#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stratevo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an archive operation would break an entry or capacity invariant.
class ArchiveError : public Error {
 public:
  using Error::Error;
};

/// A run log could not be replayed. `line` is 1-based; 0 means "not line specific".
class LogError : public Error {
 public:
  LogError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The log ends in a partial record. `salvageable` complete records precede it.
class TruncatedLogError : public LogError {
 public:
  TruncatedLogError(const std::string& what, std::size_t line, std::size_t salvageable)
      : LogError(what, line), salvageable_(salvageable) {}
  std::size_t salvageable() const noexcept { return salvageable_; }

 private:
  std::size_t salvageable_;
};

/// An LLM response did not contain the required tagged sections.
class ParseFailure : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Retry budget spent. Carries the HTTP status of the final attempt (0 for transport errors).
class ProviderExhausted : public ProviderError {
 public:
  ProviderExhausted(const std::string& what, int last_status)
      : ProviderError(what), last_status_(last_status) {}
  int last_status() const noexcept { return last_status_; }

 private:
  int last_status_;
};

class ScenarioExhausted : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class TaskError : public Error {
 public:
  using Error::Error;
};

}  // namespace stratevo
