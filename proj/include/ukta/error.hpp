#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ukta {

enum class ErrorCode {
  UnknownTag,
  EmptySentence,
  MalformedRecord,
  Precondition,
  Unreachable,
  Timeout,
  InvalidResponse,
  UndefinedFeature,
  RegistryMismatch,
  ProviderUnavailable,
  NoCandidates,
  InsufficientData,
  ShapeMismatch,
  EmptyEssay,
  NoLabels,
  DivergedLoss,
  LengthMismatch,
  DegenerateMarginals,
  Io,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::EmptySentence: return "EmptySentence";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::InvalidResponse: return "InvalidResponse";
    case ErrorCode::UndefinedFeature: return "UndefinedFeature";
    case ErrorCode::RegistryMismatch: return "RegistryMismatch";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyEssay: return "EmptyEssay";
    case ErrorCode::NoLabels: return "NoLabels";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Every failure raised by the library. `location` names the offending
// place in the input (a line number, JSON pointer or endpoint) when known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string location = {})
      : std::runtime_error(compose(code, message, location)),
        code_(code),
        message_(std::move(message)),
        location_(std::move(location)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& location() const noexcept { return location_; }

 private:
  static std::string compose(ErrorCode code, const std::string& message,
                             const std::string& location) {
    std::string out(to_string(code));
    out += ": ";
    out += message;
    if (!location.empty()) {
      out += " (at ";
      out += location;
      out += ")";
    }
    return out;
  }

  ErrorCode code_;
  std::string message_;
  std::string location_;
};

}  // namespace ukta
