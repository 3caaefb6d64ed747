#include "spc/csv.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace spc {

CsvSchema parse_csv_schema(std::string_view name) {
  if (name == "auto") return CsvSchema::Auto;
  if (name == "iid") return CsvSchema::Iid;
  if (name == "grouped") return CsvSchema::Grouped;
  if (name == "timeseries") return CsvSchema::TimeSeries;
  throw Error(ErrorCode::InvalidParameter, "unknown csv schema: " + std::string(name));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
      field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    out.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad number '" + s + "'", line_no);
  }
}

}  // namespace

Dataset read_csv_dataset(const std::string& path, CsvSchema schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing header row", 0);
  const auto header = split_line(line);
  int value_col = -1, group_col = -1, time_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "value") value_col = static_cast<int>(i);
    else if (header[i] == "group") group_col = static_cast<int>(i);
    else if (header[i] == "time") time_col = static_cast<int>(i);
    else throw Error(ErrorCode::SchemaMismatch, "unknown column '" + header[i] + "'");
  }
  if (value_col < 0) throw Error(ErrorCode::SchemaMismatch, "missing required column 'value'");
  if (group_col >= 0 && time_col >= 0)
    throw Error(ErrorCode::SchemaMismatch, "group and time columns cannot be combined");

  if (schema == CsvSchema::Iid && (group_col >= 0 || time_col >= 0))
    throw Error(ErrorCode::SchemaMismatch, "expected a plain value column only");
  if (schema == CsvSchema::Grouped && group_col < 0)
    throw Error(ErrorCode::SchemaMismatch, "expected a group column");
  if (schema == CsvSchema::TimeSeries && time_col < 0)
    throw Error(ErrorCode::SchemaMismatch, "expected a time column");

  std::vector<double> values, times;
  std::vector<std::vector<double>> groups;
  std::map<std::string, std::size_t> group_index;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::ParseError, "wrong field count", line_no);
    const double v = parse_double(fields[static_cast<std::size_t>(value_col)], line_no);
    if (group_col >= 0) {
      const std::string& key = fields[static_cast<std::size_t>(group_col)];
      auto [it, inserted] = group_index.try_emplace(key, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(v);
    } else if (time_col >= 0) {
      const double t = parse_double(fields[static_cast<std::size_t>(time_col)], line_no);
      if (!times.empty() && !(t > times.back()))
        throw Error(ErrorCode::ParseError, "time column not strictly increasing", line_no);
      times.push_back(t);
      values.push_back(v);
    } else {
      values.push_back(v);
    }
  }

  Dataset data;
  if (group_col >= 0) data = GroupedDataset{std::move(groups)};
  else if (time_col >= 0) data = TimeSeriesDataset{std::move(values), std::move(times)};
  else data = IidDataset{std::move(values)};
  validate(data);
  return data;
}

}  // namespace spc
