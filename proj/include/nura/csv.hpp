#ifndef NURA_CSV_HPP
#define NURA_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "nura/runner.hpp"

namespace nura {

enum class CsvKind { Allocations, AppAllocations, Trace };

/// 9 significant digits, '.' as decimal separator whatever the global locale.
std::string format_number(double x);

/// CSV text with a header row. Records are ordered by capacity, then users in
/// declaration order, then app index.
std::string allocations_csv(const std::vector<RunRecord>& records);
std::string app_allocations_csv(const std::vector<RunRecord>& records);
std::string trace_csv(const IterationTrace& trace, const std::vector<std::string>& user_ids);
std::string schedule_csv(const std::vector<EpochRecord>& epochs);
std::string schedule_apps_csv(const std::vector<EpochRecord>& epochs);

/// Writes `records` (or the trace of the single record for CsvKind::Trace).
/// Throws IoError when the file cannot be written, ContractError on empty input.
void emit_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path,
              CsvKind kind);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace nura

#endif  // NURA_CSV_HPP
