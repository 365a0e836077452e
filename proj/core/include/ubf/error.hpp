#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ubf {

// Data errors come from inputs (files, datasets, arguments); internal errors
// mean one of our own invariants broke.
enum class ErrorKind { Data, Internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(ErrorKind::Internal, what) {}
};

class MalformedRecord : public DataError {
 public:
  MalformedRecord(std::size_t line, const std::string& reason)
      : DataError("malformed record at line " + std::to_string(line) + ": " +
                  reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

#define UBF_DATA_ERROR(Name)                                          \
  class Name : public DataError {                                     \
   public:                                                            \
    explicit Name(const std::string& what) : DataError(what) {}       \
  }

UBF_DATA_ERROR(EmptyCorpus);
UBF_DATA_ERROR(NoBotFound);
UBF_DATA_ERROR(NotFlagged);
UBF_DATA_ERROR(DivisionByZero);
UBF_DATA_ERROR(NegativeLatency);
UBF_DATA_ERROR(LengthMismatch);
UBF_DATA_ERROR(DegenerateLabels);
UBF_DATA_ERROR(FeatureMismatch);
UBF_DATA_ERROR(EmptyHoldout);
UBF_DATA_ERROR(InsufficientPositives);
UBF_DATA_ERROR(DegenerateG);
UBF_DATA_ERROR(TooFewSamples);
UBF_DATA_ERROR(OverlapError);
UBF_DATA_ERROR(FoldTooSmall);
UBF_DATA_ERROR(MissingEventLinkage);
UBF_DATA_ERROR(FeatureSchemaMismatch);
UBF_DATA_ERROR(BadSpec);
UBF_DATA_ERROR(ParseError);

#undef UBF_DATA_ERROR

}  // namespace ubf
