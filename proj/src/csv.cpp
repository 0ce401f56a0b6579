#include "nura/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nura/errors.hpp"

namespace nura {

namespace {

std::vector<const RunRecord*> by_capacity(const std::vector<RunRecord>& records) {
  std::vector<const RunRecord*> out;
  for (const auto& r : records) {
    out.push_back(&r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RunRecord* a, const RunRecord* b) { return a->capacity < b->capacity; });
  return out;
}

// snprintf honors LC_NUMERIC, so swap any comma back to a dot.
std::string dotted(std::string s) {
  std::replace(s.begin(), s.end(), ',', '.');
  return s;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return dotted(buf);
}

std::string allocations_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "R,case,user_id,rate,rounds,final_price\n";
  for (const RunRecord* r : by_capacity(records)) {
    for (std::size_t i = 0; i < r->user_ids.size(); ++i) {
      out << format_number(r->capacity) << ',' << to_string(r->flag) << ',' << r->user_ids[i] << ','
          << format_number(r->user_rates[i]) << ',' << r->rounds << ','
          << format_number(r->final_price) << '\n';
    }
  }
  return out.str();
}

std::string app_allocations_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "R,user_id,app_index,rate\n";
  for (const RunRecord* r : by_capacity(records)) {
    for (std::size_t i = 0; i < r->user_ids.size(); ++i) {
      for (std::size_t j = 0; j < r->app_rates[i].size(); ++j) {
        out << format_number(r->capacity) << ',' << r->user_ids[i] << ',' << j << ','
            << format_number(r->app_rates[i][j]) << '\n';
      }
    }
  }
  return out.str();
}

std::string trace_csv(const IterationTrace& trace, const std::vector<std::string>& user_ids) {
  std::ostringstream out;
  out << "round,user_id,bid,price\n";
  for (const auto& rec : trace.records()) {
    out << rec.round << ',' << user_ids.at(rec.user) << ',' << format_number(rec.bid) << ','
        << format_number(rec.price) << '\n';
  }
  return out.str();
}

std::string schedule_csv(const std::vector<EpochRecord>& epochs) {
  std::ostringstream out;
  out << "epoch,start_time,end_time,user_id,rate\n";
  for (const auto& e : epochs) {
    for (std::size_t i = 0; i < e.record.user_ids.size(); ++i) {
      out << e.epoch << ',' << format_number(e.start_time) << ',' << format_number(e.end_time)
          << ',' << e.record.user_ids[i] << ',' << format_number(e.record.user_rates[i]) << '\n';
    }
  }
  return out.str();
}

std::string schedule_apps_csv(const std::vector<EpochRecord>& epochs) {
  std::ostringstream out;
  out << "epoch,user_id,app_index,rate\n";
  for (const auto& e : epochs) {
    for (std::size_t i = 0; i < e.record.user_ids.size(); ++i) {
      for (std::size_t j = 0; j < e.record.app_rates[i].size(); ++j) {
        out << e.epoch << ',' << e.record.user_ids[i] << ',' << j << ','
            << format_number(e.record.app_rates[i][j]) << '\n';
      }
    }
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

void emit_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path,
              CsvKind kind) {
  if (records.empty()) {
    throw ContractError("emit_csv: nothing to write");
  }
  switch (kind) {
    case CsvKind::Allocations:
      write_text(path, allocations_csv(records));
      break;
    case CsvKind::AppAllocations:
      write_text(path, app_allocations_csv(records));
      break;
    case CsvKind::Trace:
      if (records.size() != 1) {
        throw ContractError("emit_csv: a trace file holds exactly one run");
      }
      write_text(path, trace_csv(records.front().trace, records.front().user_ids));
      break;
  }
}

}  // namespace nura
