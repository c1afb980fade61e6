#pragma once

#include "carnot/algebra.hpp"
#include "carnot/classify.hpp"
#include "carnot/coarea.hpp"
#include "carnot/group.hpp"
#include "carnot/measures.hpp"
#include "carnot/metrics.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace carnot {

using Json = nlohmann::ordered_json;

/// Tags every emitted record carries: convention, metric, g convention, omega normalization, seed, version.
Json record_header(const MeasureConvention& conv, std::uint64_t seed);

Json to_json(const ValidationReport& rep);
Json to_json(const GroupSelfTest& st);
Json to_json(const TriangleProbe& probe);
Json to_json(const ScanCensus& census);
Json to_json(const AsymptoticFit& fit);
Json to_json(const VerificationReport& rep);
Json to_json(const TubeMass& mass);

/// %.17g; nan and inf as strings so the document stays valid JSON.
Json number(double v);

/// Tabular output: one `#` line with a UTC timestamp, then a header row and the body.
struct CsvTable
{
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// Header row and body, without the timestamp line.
  std::string body() const;
  void write(std::ostream& os) const;
  void write(const std::string& path) const;
};

/// printf %.17g.
std::string format_number(double v);

CsvTable slice_table(const VerificationReport& rep);

/// Drops `#` lines; used to compare CSV bodies across runs.
std::string strip_comment_lines(const std::string& text);

void write_text(const std::string& path, const std::string& text);

}  // namespace carnot
