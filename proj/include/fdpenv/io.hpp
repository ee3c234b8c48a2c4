#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdpenv/envelopes.hpp"
#include "json.hpp"

namespace fdpenv::io {

enum class DatasetKind { PValues, KnockoffW, OnlineStream };

struct PValueRow {
  std::string id;
  double p = 0.0;
  /// Extra columns keyed by header name; numeric cells become numbers.
  nlohmann::json x = nlohmann::json::object();
};

struct KnockoffRow {
  std::string id;
  double w = 0.0;
};

struct StreamRecord {
  std::int64_t j = 0;
  double alpha = 0.0;
  std::optional<double> lambda;
  double p = 0.0;
};

struct InputDataset {
  DatasetKind kind = DatasetKind::PValues;
  std::string source;
  std::vector<PValueRow> pvalues;
  std::vector<KnockoffRow> knockoffs;
  std::vector<StreamRecord> stream;

  std::size_t rows() const noexcept;
  std::vector<double> p() const;
};

struct CsvColumns {
  /// Column holding the identifier (matched case-insensitively).
  std::string id = "id";
  /// Column holding the value: "p" for p-values, "w" for knockoff statistics.
  std::string value;
};

/// Delimited text with a header row (comma or tab, detected from the header),
/// or JSON Lines for streams. Errors carry 1-based line numbers:
/// LineError{ParseError}, LineError{DuplicateId}, LineError{ValueOutOfRange}.
InputDataset parse_dataset(std::istream& in, DatasetKind kind, const CsvColumns& columns = {},
                           std::string source = "<stream>");
InputDataset parse_dataset(const std::filesystem::path& path, DatasetKind kind, const CsvColumns& columns = {});

/// One JSON Lines record: {"j":int,"alpha":float,"lambda":float|null,"p":float}.
StreamRecord parse_stream_record(std::string_view line, std::size_t line_no);

/// %.17g, which round-trips every double.
std::string format_double(double value);

inline constexpr std::string_view kEnvelopeHeader = "k,size,v_hat,v_bar,fdp_bar_raw,fdp_bar";

void write_envelope_header(std::ostream& out);
void write_envelope_row(std::ostream& out, const EnvelopeRecord& record);
void write_envelope_csv(std::ostream& out, const EnvelopeCurve& curve);
std::string envelope_csv(const EnvelopeCurve& curve);
/// Inverse of write_envelope_csv. Throws LineError{ParseError} on a header mismatch or bad row.
std::vector<EnvelopeRecord> parse_envelope_csv(std::istream& in);

nlohmann::json metadata_json(const EnvelopeMetadata& meta);

}  // namespace fdpenv::io
