#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace skiprun {

enum class CsvKind { Profile, Bench, Eval };

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Plain comma-separated, no quoting (the reports never emit commas in cells).
CsvTable parse_csv(std::string_view text);

// Re-parses an emitted report and checks header, column count and cell
// types. Throws InputError describing the first violation.
CsvTable validate_csv(CsvKind kind, std::string_view text);

CsvKind parse_csv_kind(std::string_view name);

}  // namespace skiprun
