#pragma once

#include <string>

#include "spc/dataset.hpp"

namespace spc {

enum class CsvSchema { Auto, Iid, Grouped, TimeSeries };

CsvSchema parse_csv_schema(std::string_view name);

/// Read a dataset from CSV. Header row required; column `value` required,
/// `group` (string/int key, groups ordered by first appearance) and `time`
/// (real, strictly increasing) optional. UTF-8, '.' decimal separator.
/// Throws ParseError(line) on malformed rows and SchemaMismatch when the file
/// columns do not match the requested schema.
Dataset read_csv_dataset(const std::string& path, CsvSchema schema);

}  // namespace spc
