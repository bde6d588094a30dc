#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fogcast {

enum class ErrorCode {
  EmptyResult,
  UnknownSegment,
  InvalidDemand,
  TooLarge,
  PointOutOfBounds,
  InvalidOccupancy,
  DepthMismatch,
  ParameterMismatch,
  InvalidNetwork,
  InvalidPlan,
  ScenarioInvalid,
  DisconnectedNetwork,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All domain failures surface as this exception. The CLI maps it to exit code 1
// and prints `error: <Code>: <message>` on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fogcast
