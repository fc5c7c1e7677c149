#pragma once

#include <stdexcept>
#include <string>

namespace rham {

enum class ErrorCode {
  invalid_resolution,
  invalid_geometry,
  invalid_parameter,
  invalid_time,
  invalid_window,
  invalid_config,
  shape_error,
  corrupted_state,
  cfl_error,
  blowup_error,
  interpolation_error,
  positivity_error,
  domain_error,
  wrong_equation,
  resolution_error,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_resolution: return "invalid-resolution";
    case ErrorCode::invalid_geometry: return "invalid-geometry";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::invalid_time: return "invalid-time";
    case ErrorCode::invalid_window: return "invalid-window";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::shape_error: return "shape-error";
    case ErrorCode::corrupted_state: return "corrupted-state";
    case ErrorCode::cfl_error: return "cfl-error";
    case ErrorCode::blowup_error: return "blowup-error";
    case ErrorCode::interpolation_error: return "interpolation-error";
    case ErrorCode::positivity_error: return "positivity-error";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::wrong_equation: return "wrong-equation";
    case ErrorCode::resolution_error: return "resolution-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rham
