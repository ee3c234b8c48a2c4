#include "fdpenv/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fdpenv/error.hpp"

namespace fdpenv::io {

using nlohmann::json;

std::size_t InputDataset::rows() const noexcept {
  switch (kind) {
    case DatasetKind::PValues: return pvalues.size();
    case DatasetKind::KnockoffW: return knockoffs.size();
    case DatasetKind::OnlineStream: return stream.size();
  }
  return 0;
}

std::vector<double> InputDataset::p() const {
  std::vector<double> out;
  if (kind == DatasetKind::OnlineStream) {
    out.reserve(stream.size());
    for (const StreamRecord& rec : stream) out.push_back(rec.p);
    return out;
  }
  out.reserve(pvalues.size());
  for (const PValueRow& row : pvalues) out.push_back(row.p);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> to_double(std::string_view cell) {
  double value = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return value;
}

double parse_number(std::string_view cell, std::size_t line, std::string_view what) {
  const auto value = to_double(cell);
  if (!value) throw LineError(Errc::ParseError, line, "cannot parse " + std::string(what) + " '" + std::string(cell) + "'");
  if (!std::isfinite(*value)) throw LineError(Errc::ValueOutOfRange, line, std::string(what) + " is not finite");
  return *value;
}

bool getline_stripped(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void parse_table(std::istream& in, InputDataset& out, const CsvColumns& columns) {
  const bool knockoff = out.kind == DatasetKind::KnockoffW;
  const std::string value_name = lower(columns.value.empty() ? (knockoff ? "w" : "p") : columns.value);
  const std::string id_name = lower(columns.id);

  std::string header_line;
  std::size_t line_no = 0;
  do {
    if (!getline_stripped(in, header_line)) throw LineError(Errc::ParseError, line_no + 1, "missing header row");
    ++line_no;
  } while (trim(header_line).empty());

  const char delim = header_line.find('\t') != std::string::npos && header_line.find(',') == std::string::npos ? '\t' : ',';
  const std::vector<std::string_view> header = split(header_line, delim);
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> value_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    if (name == id_name && !id_col) id_col = i;
    if (name == value_name && !value_col) value_col = i;
  }
  if (!id_col || !value_col) {
    throw LineError(Errc::ParseError, line_no,
                    "header needs columns '" + columns.id + "' and '" + value_name + "'");
  }

  std::unordered_set<std::string> seen;
  std::string line;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> cells = split(line, delim);
    if (cells.size() != header.size()) {
      throw LineError(Errc::ParseError, line_no,
                      "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    std::string id(cells[*id_col]);
    if (id.empty()) throw LineError(Errc::ParseError, line_no, "empty id");
    if (!seen.insert(id).second) throw LineError(Errc::DuplicateId, line_no, "duplicate id '" + id + "'");

    if (knockoff) {
      out.knockoffs.push_back({std::move(id), parse_number(cells[*value_col], line_no, "statistic")});
      continue;
    }
    const double p = parse_number(cells[*value_col], line_no, "p-value");
    if (!(p >= 0.0 && p <= 1.0)) {
      throw LineError(Errc::ValueOutOfRange, line_no, "p-value " + std::string(cells[*value_col]) + " outside [0, 1]");
    }
    PValueRow row{std::move(id), p, json::object()};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == *id_col || i == *value_col) continue;
      const auto number = to_double(cells[i]);
      if (number && std::isfinite(*number)) {
        row.x[std::string(header[i])] = *number;
      } else {
        row.x[std::string(header[i])] = std::string(cells[i]);
      }
    }
    out.pvalues.push_back(std::move(row));
  }
}

}  // namespace

StreamRecord parse_stream_record(std::string_view line, std::size_t line_no) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw LineError(Errc::ParseError, line_no, e.what());
  }
  if (!doc.is_object()) throw LineError(Errc::ParseError, line_no, "record is not a JSON object");
  auto number = [&](const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_number()) {
      throw LineError(Errc::ParseError, line_no, std::string("field '") + key + "' missing or not a number");
    }
    return it->get<double>();
  };
  StreamRecord rec;
  const auto j = doc.find("j");
  if (j == doc.end() || !j->is_number_integer()) throw LineError(Errc::ParseError, line_no, "field 'j' missing or not an integer");
  rec.j = j->get<std::int64_t>();
  rec.alpha = number("alpha");
  rec.p = number("p");
  if (const auto lam = doc.find("lambda"); lam != doc.end() && !lam->is_null()) {
    if (!lam->is_number()) throw LineError(Errc::ParseError, line_no, "field 'lambda' is not a number");
    rec.lambda = lam->get<double>();
  }
  if (!(rec.p >= 0.0 && rec.p <= 1.0)) throw LineError(Errc::ValueOutOfRange, line_no, "p outside [0, 1]");
  if (!(rec.alpha > 0.0 && rec.alpha < 1.0)) throw LineError(Errc::ValueOutOfRange, line_no, "alpha outside (0, 1)");
  if (rec.lambda && !(*rec.lambda >= 0.0 && *rec.lambda < 1.0)) {
    throw LineError(Errc::ValueOutOfRange, line_no, "lambda outside [0, 1)");
  }
  return rec;
}

InputDataset parse_dataset(std::istream& in, DatasetKind kind, const CsvColumns& columns, std::string source) {
  InputDataset out;
  out.kind = kind;
  out.source = std::move(source);
  if (kind != DatasetKind::OnlineStream) {
    parse_table(in, out, columns);
    return out;
  }
  std::string line;
  std::size_t line_no = 0;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    out.stream.push_back(parse_stream_record(line, line_no));
  }
  return out;
}

InputDataset parse_dataset(const std::filesystem::path& path, DatasetKind kind, const CsvColumns& columns) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  return parse_dataset(in, kind, columns, path.string());
}

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_envelope_header(std::ostream& out) { out << kEnvelopeHeader << '\n'; }

void write_envelope_row(std::ostream& out, const EnvelopeRecord& r) {
  out << r.k << ',' << r.size << ',' << format_double(r.v_hat) << ',' << r.v_bar << ','
      << format_double(r.fdp_bar_raw) << ',' << format_double(r.fdp_bar) << '\n';
}

void write_envelope_csv(std::ostream& out, const EnvelopeCurve& curve) {
  write_envelope_header(out);
  for (const EnvelopeRecord& r : curve.records) write_envelope_row(out, r);
}

std::string envelope_csv(const EnvelopeCurve& curve) {
  std::ostringstream out;
  write_envelope_csv(out, curve);
  return out.str();
}

std::vector<EnvelopeRecord> parse_envelope_csv(std::istream& in) {
  std::string line;
  if (!getline_stripped(in, line) || line != kEnvelopeHeader) {
    throw LineError(Errc::ParseError, 1, "envelope header must be '" + std::string(kEnvelopeHeader) + "'");
  }
  std::vector<EnvelopeRecord> records;
  std::size_t line_no = 1;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw LineError(Errc::ParseError, line_no, "expected 6 fields");
    auto integer = [&](std::string_view cell) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw LineError(Errc::ParseError, line_no, "bad integer '" + std::string(cell) + "'");
      }
      return v;
    };
    EnvelopeRecord r;
    r.k = static_cast<std::size_t>(integer(cells[0]));
    r.size = static_cast<std::size_t>(integer(cells[1]));
    r.v_hat = parse_number(cells[2], line_no, "v_hat");
    r.v_bar = integer(cells[3]);
    r.fdp_bar_raw = parse_number(cells[4], line_no, "fdp_bar_raw");
    r.fdp_bar = parse_number(cells[5], line_no, "fdp_bar");
    records.push_back(r);
  }
  return records;
}

json metadata_json(const EnvelopeMetadata& meta) {
  json blocks = json::array();
  for (const TieBlock& b : meta.tie_blocks) blocks.push_back({b.first_k, b.last_k});
  json out = {{"family", meta.family},
              {"alpha", meta.alpha},
              {"a", meta.a},
              {"c", meta.c},
              {"tie_blocks", blocks},
              {"dropped_zero_stats", meta.dropped_zero_stats}};
  if (!meta.warning.empty()) out["warning"] = meta.warning;
  return out;
}

}  // namespace fdpenv::io
