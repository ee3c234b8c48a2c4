#include "fdpenv/error.hpp"

namespace fdpenv {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NoRoot: return "NoRoot";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::AlphaOutOfProvenRange: return "AlphaOutOfProvenRange";
    case Errc::DomainError: return "DomainError";
    case Errc::InvalidAccumulationFn: return "InvalidAccumulationFn";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidPermutation: return "InvalidPermutation";
    case Errc::LambdaBelowPstar: return "LambdaBelowPstar";
    case Errc::AllZeroStats: return "AllZeroStats";
    case Errc::FamilyMismatch: return "FamilyMismatch";
    case Errc::AlphaTooLargeForDkw: return "AlphaTooLargeForDKW";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::MissingBCap: return "MissingBCap";
    case Errc::MissingLambda: return "MissingLambda";
    case Errc::TicketOutstanding: return "TicketOutstanding";
    case Errc::BCapExceeded: return "BCapExceeded";
    case Errc::LambdaBelowAlpha: return "LambdaBelowAlpha";
    case Errc::StaleTicket: return "StaleTicket";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::AlreadySelected: return "AlreadySelected";
    case Errc::UnknownId: return "UnknownId";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::ValueOutOfRange: return "ValueOutOfRange";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

LineError::LineError(Errc code, std::size_t line, const std::string& message)
    : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace fdpenv
