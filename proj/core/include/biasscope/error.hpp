#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace biasscope {

// Every failure the library reports carries one of these codes.
enum class Errc {
  // taxonomy
  UnknownBias,
  MalformedProfile,
  // corpus
  EmptyDocument,
  InvalidEncoding,
  Io,
  Malformed,
  DuplicateDocument,
  InvalidConfig,
  // promptkit
  EmptyText,
  // backend
  Timeout,
  HttpStatus,
  MissingApiKey,
  FixtureMiss,
  MalformedWireResponse,
  Unparseable,
  Transport,
  // runner
  DuplicateArm,
  InvalidPlan,
  CorruptStore,
  // evaluation
  EmptyInput,
  ArmSampleMismatch,
  // annotation
  WrongArmCount,
  UnknownTask,
  LeaseConflict,
  ValidationFailed,
  AlreadyAnnotated,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  // The message without the leading code name.
  std::string_view detail() const noexcept;

  // Source line (1-based) for file-format errors, 0 when not applicable.
  std::size_t line() const noexcept { return line_; }
  Error& at_line(std::size_t line);

 private:
  Errc code_;
  std::size_t line_ = 0;
};

}  // namespace biasscope
