#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lorhol {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Raised by evaluation; carries the printed form of the subexpression that failed.
class DomainError : public Error {
 public:
  DomainError(const std::string& message, std::string subexpression)
      : Error(message + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

class SignatureError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class FixtureError : public Error {
 public:
  using Error::Error;
};

class SpecFileError : public Error {
 public:
  using Error::Error;
};

}  // namespace lorhol
