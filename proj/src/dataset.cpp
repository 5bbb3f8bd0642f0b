#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "tinycompress/data.hpp"
#include "tinycompress/errors.hpp"

namespace tc::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string measurement_name(std::size_t j) { return "meas_" + std::to_string(j + 1); }

}  // namespace

Dataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  // Header
  do {
    if (!std::getline(in, line)) throw ParseError(1, 0, "missing header row");
    ++line_no;
  } while (trim(line).empty());

  const auto header = split_fields(line);
  std::vector<std::optional<std::size_t>> meas_col(kMeasurements);
  std::optional<std::size_t> fault_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = header[c];
    if (name == "faultNumber") {
      fault_col = c;
      continue;
    }
    if (name.starts_with("meas_")) {
      std::size_t idx = 0;
      const auto digits = name.substr(5);
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && idx >= 1 && idx <= kMeasurements) {
        if (meas_col[idx - 1]) throw ParseError(line_no, c + 1, "duplicate column " + std::string(name));
        meas_col[idx - 1] = c;
      }
    }
  }
  for (std::size_t j = 0; j < kMeasurements; ++j)
    if (!meas_col[j]) throw ParseError(line_no, 0, "missing column " + measurement_name(j));
  if (!fault_col) throw ParseError(line_no, 0, "missing column faultNumber");

  std::vector<float> values;
  Dataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, 0,
                       "expected " + std::to_string(header.size()) + " columns, found " + std::to_string(fields.size()));
    const auto fault = parse_number(fields[*fault_col]);
    if (!fault || *fault != std::floor(*fault) || *fault < 0 || *fault >= kFaultCount)
      throw ParseError(line_no, *fault_col + 1, "faultNumber must be an integer in [0, 20]");
    const int label = static_cast<int>(*fault);
    std::array<float, kMeasurements> row{};
    for (std::size_t j = 0; j < kMeasurements; ++j) {
      const auto v = parse_number(fields[*meas_col[j]]);
      if (!v) throw ParseError(line_no, *meas_col[j] + 1, measurement_name(j) + " is not a finite number");
      row[j] = static_cast<float>(*v);
    }
    if (is_excluded(label)) {
      ++ds.dropped_excluded;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ds.fault_labels.push_back(label);
  }
  ds.features = Matrix(ds.fault_labels.size(), kMeasurements, std::move(values));
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t j = 0; j < kMeasurements; ++j) out << measurement_name(j) << ',';
  out << "faultNumber\n";
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (float v : ds.features.row(r)) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << ds.fault_labels[r] << '\n';
  }
}

}  // namespace tc::data
