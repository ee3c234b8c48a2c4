#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fdpenv {

enum class Errc {
  // numerics / bound constants
  NoRoot,
  NonConvergence,
  QuadratureFailure,
  AlphaOutOfProvenRange,
  DomainError,
  InvalidAccumulationFn,
  // paths
  EmptyInput,
  InvalidPermutation,
  LambdaBelowPstar,
  AllZeroStats,
  // envelopes
  FamilyMismatch,
  AlphaTooLargeForDkw,
  LengthMismatch,
  // online monitor
  MissingBCap,
  MissingLambda,
  TicketOutstanding,
  BCapExceeded,
  LambdaBelowAlpha,
  StaleTicket,
  // interactive session
  ConfigInvalid,
  AlreadySelected,
  UnknownId,
  // io
  ParseError,
  DuplicateId,
  ValueOutOfRange,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Parse/validation failure tied to a 1-based line of an input file.
class LineError : public Error {
 public:
  LineError(Errc code, std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fdpenv
