#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wqrf {

// Every failure the library reports. The CLI maps these onto exit statuses.
enum class Errc {
  // ingestion
  MissingColumn,
  UnknownColumn,
  MalformedValue,
  UnknownLabel,
  EmptyDataset,
  MissingDate,
  InvalidDistribution,
  InvalidArgument,
  DegenerateSplit,
  // training and evaluation
  EmptyCounts,
  SingleClassDataset,
  InsufficientClassMembers,
  DegenerateFold,
  LengthMismatch,
  UnknownClass,
  OutOfRange,
  // model files
  FormatVersionMismatch,
  CorruptModel,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::MalformedValue: return "MalformedValue";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::MissingDate: return "MissingDate";
    case Errc::InvalidDistribution: return "InvalidDistribution";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::EmptyCounts: return "EmptyCounts";
    case Errc::SingleClassDataset: return "SingleClassDataset";
    case Errc::InsufficientClassMembers: return "InsufficientClassMembers";
    case Errc::DegenerateFold: return "DegenerateFold";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::FormatVersionMismatch: return "FormatVersionMismatch";
    case Errc::CorruptModel: return "CorruptModel";
  }
  return "Unknown";
}

}  // namespace wqrf
