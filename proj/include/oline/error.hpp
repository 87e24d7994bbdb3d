#pragma once

#include "oline/common.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oline {

enum class ErrorCode {
  ZeroDirection,
  ChartDomain,
  NoIntersection,
  Tangential,
  DegenerateGradient,
  OffSurface,
  Grazing,
  TotalInternalReflection,
  InvalidArgument,
  DomainBoundary,
  ImmersionFailure,
  NotRectangular,
  NonRegular,
  NoConvergence,
  NoRoot,
  IllConditionedFit,
  SyntaxError,
  UnknownSurface,
  BadMediaChain,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::ChartDomain: return "ChartDomain";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::Tangential: return "Tangential";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::OffSurface: return "OffSurface";
    case ErrorCode::Grazing: return "Grazing";
    case ErrorCode::TotalInternalReflection: return "TotalInternalReflection";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DomainBoundary: return "DomainBoundary";
    case ErrorCode::ImmersionFailure: return "ImmersionFailure";
    case ErrorCode::NotRectangular: return "NotRectangular";
    case ErrorCode::NonRegular: return "NonRegular";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownSurface: return "UnknownSurface";
    case ErrorCode::BadMediaChain: return "BadMediaChain";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure,
/// the optional annotations locate it inside a system or a family sweep.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<int> interface_index() const noexcept { return interface_; }
  std::optional<Vec2> parameter() const noexcept { return k_; }
  std::optional<int> line() const noexcept { return line_; }
  std::optional<int> column() const noexcept { return column_; }

  Error at_interface(int index) const {
    Error e(code_, "interface " + std::to_string(index) + ": " + detail_);
    e.copy_annotations(*this);
    e.interface_ = index;
    return e;
  }

  Error at_parameter(const Vec2& k) const {
    Error e(code_, "k=(" + format_real(k.x()) + "," + format_real(k.y()) + "): " + detail_);
    e.copy_annotations(*this);
    e.k_ = k;
    return e;
  }

  static Error syntax(int line, int column, const std::string& what) {
    Error e(ErrorCode::SyntaxError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
    e.line_ = line;
    e.column_ = column;
    return e;
  }

 private:
  void copy_annotations(const Error& other) {
    interface_ = other.interface_;
    k_ = other.k_;
    line_ = other.line_;
    column_ = other.column_;
  }

  ErrorCode code_;
  std::string detail_;
  std::optional<int> interface_;
  std::optional<Vec2> k_;
  std::optional<int> line_;
  std::optional<int> column_;
};

}  // namespace oline
