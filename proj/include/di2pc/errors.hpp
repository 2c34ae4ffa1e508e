#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace di2pc {

// Machine-readable error categories; the CLI maps these onto exit codes.
enum class ErrorKind {
  shape,
  domain,
  dimension_cap,
  round_cap,
  arity,
  nonphysical_violation,
  parse,
  verification,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& detail) : Error(ErrorKind::shape, detail) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& detail) : Error(ErrorKind::domain, detail) {}
};

class DimensionCapError : public Error {
 public:
  explicit DimensionCapError(const std::string& detail)
      : Error(ErrorKind::dimension_cap, detail) {}
};

class RoundCapError : public Error {
 public:
  explicit RoundCapError(const std::string& detail) : Error(ErrorKind::round_cap, detail) {}
};

class ArityError : public Error {
 public:
  explicit ArityError(const std::string& detail) : Error(ErrorKind::arity, detail) {}
};

class NonphysicalViolationError : public Error {
 public:
  explicit NonphysicalViolationError(const std::string& detail)
      : Error(ErrorKind::nonphysical_violation, detail) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& detail) : Error(ErrorKind::parse, detail) {}
};

}  // namespace di2pc
