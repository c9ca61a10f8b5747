#include "biasscope/error.hpp"

namespace biasscope {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownBias: return "UnknownBias";
    case Errc::MalformedProfile: return "MalformedProfile";
    case Errc::EmptyDocument: return "EmptyDocument";
    case Errc::InvalidEncoding: return "InvalidEncoding";
    case Errc::Io: return "Io";
    case Errc::Malformed: return "Malformed";
    case Errc::DuplicateDocument: return "DuplicateDocument";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyText: return "EmptyText";
    case Errc::Timeout: return "Timeout";
    case Errc::HttpStatus: return "HttpStatus";
    case Errc::MissingApiKey: return "MissingApiKey";
    case Errc::FixtureMiss: return "FixtureMiss";
    case Errc::MalformedWireResponse: return "MalformedWireResponse";
    case Errc::Unparseable: return "Unparseable";
    case Errc::Transport: return "Transport";
    case Errc::DuplicateArm: return "DuplicateArm";
    case Errc::InvalidPlan: return "InvalidPlan";
    case Errc::CorruptStore: return "CorruptStore";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ArmSampleMismatch: return "ArmSampleMismatch";
    case Errc::WrongArmCount: return "WrongArmCount";
    case Errc::UnknownTask: return "UnknownTask";
    case Errc::LeaseConflict: return "LeaseConflict";
    case Errc::ValidationFailed: return "ValidationFailed";
    case Errc::AlreadyAnnotated: return "AlreadyAnnotated";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

std::string_view Error::detail() const noexcept {
  std::string_view all = what();
  return all.substr(errc_name(code_).size() + 2);
}

Error& Error::at_line(std::size_t line) {
  line_ = line;
  return *this;
}

}  // namespace biasscope
