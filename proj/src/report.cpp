#include "carnot/report.hpp"

#include "carnot/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace carnot {

std::string format_number(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json number(double v)
{
  if (std::isfinite(v)) return v;
  return format_number(v);
}

Json record_header(const MeasureConvention& conv, std::uint64_t seed)
{
  Json h;
  h["tool_version"] = kToolVersion;
  h["convention"] = to_string(conv.mode);
  h["omega_normalization"] = to_string(conv.omega);
  h["hausdorff_metric"] = kHausdorffMetric;
  h["g_convention"] = kGConvention;
  h["omega_zero"] = 1;
  h["seed"] = seed;
  return h;
}

Json to_json(const ValidationReport& rep)
{
  Json out;
  out["valid"] = rep.ok();
  Json list = Json::array();
  for (const auto& v : rep.violations) {
    list.push_back({{"kind", to_string(v.kind)},
                    {"indices", {v.indices[0] + 1, v.indices[1] + 1, v.indices[2] + 1}},
                    {"residual", number(v.residual)},
                    {"message", v.message}});
  }
  out["violations"] = list;
  return out;
}

Json to_json(const GroupSelfTest& st)
{
  return {{"algebra", st.algebra},
          {"samples", st.samples},
          {"associativity_residual", number(st.associativity_residual)},
          {"inverse_residual", number(st.inverse_residual)},
          {"dilation_residual", number(st.dilation_residual)},
          {"frame_identity_residual", number(st.frame_identity_residual)},
          {"homogeneous", st.homogeneous},
          {"frame_brackets_exact", st.frame_brackets_exact},
          {"passed", st.passed()}};
}

Json to_json(const TriangleProbe& probe)
{
  return {{"C_estimate", number(probe.c_estimate)}, {"samples", probe.samples}, {"seed", probe.seed}, {"r0", number(probe.r0)}};
}

Json to_json(const ScanCensus& c)
{
  return {{"total", c.total},
          {"degenerate", c.degenerate},
          {"characteristic", c.characteristic},
          {"regular", c.regular},
          {"marginal", c.marginal},
          {"disagreements", c.disagreements},
          {"marginal_disagreements", c.marginal_disagreements},
          {"nu0_below_target_failures", c.lemma_sum_i_failures},
          {"low_degree_witness_failures", c.lemma_sum_ii_failures},
          {"first_block_failures", c.first_block_failures},
          {"block_propagation_failures", c.block_propagation_failures}};
}

Json to_json(const AsymptoticFit& fit)
{
  Json radii = Json::array(), values = Json::array();
  for (double r : fit.radii) radii.push_back(number(r));
  for (double v : fit.values) values.push_back(number(v));
  return {{"radii", radii},
          {"values", values},
          {"exponent", number(fit.exponent)},
          {"constant", number(fit.constant)},
          {"r2", number(fit.r2)}};
}

Json to_json(const VerificationReport& rep)
{
  const CoareaIntegrals& raw = rep.raw;
  Json center = Json::array();
  for (int i = 0; i < raw.center.size(); ++i) center.push_back(number(raw.center(i)));
  Json out;
  out["map"] = raw.map_name;
  out["domain"] = {{"center", center}, {"radius", number(raw.radius)}};
  out["lhs"] = number(rep.lhs);
  out["rhs"] = number(rep.rhs);
  out["ratio"] = number(rep.ratio);
  out["lhs_error"] = number(rep.lhs_error);
  out["rhs_error"] = number(rep.rhs_error);
  out["band"] = number(rep.band);
  out["passed"] = rep.passed();
  out["constants"] = {{"jsr", number(rep.jsr)},
                      {"kappa_source", number(rep.kappa)},
                      {"kappa_target", number(rep.kappa_target)},
                      {"alpha", number(rep.alpha)}};
  out["fubini"] = {{"pivot_rhs", number(rep.fubini_rhs)}, {"relative_difference", number(rep.fubini_difference)}};
  out["nodes"] = {{"lhs", raw.lhs_nodes}, {"rhs", raw.rhs_nodes}};
  out["converged"] = {{"lhs", raw.lhs_converged}, {"rhs", raw.rhs_converged}};
  out["newton_failures"] = raw.newton_failures;
  out["dependent_coordinates"] = Json::array();
  for (int d : raw.dependent) out["dependent_coordinates"].push_back(d + 1);
  Json tlo = Json::array(), thi = Json::array();
  for (double v : raw.t_lo) tlo.push_back(number(v));
  for (double v : raw.t_hi) thi.push_back(number(v));
  out["t_range"] = {{"lo", tlo}, {"hi", thi}};
  out["excision"] = {{"epsilon", number(raw.chi_epsilon)},
                     {"characteristic_samples", raw.chi_samples},
                     {"excised_volume", number(raw.chi_excised_volume)},
                     {"domain_volume", number(raw.domain_volume)},
                     {"excised_level_mass", number(raw.slice_excised)},
                     {"degenerate_lattice_fraction", number(raw.z_fraction)}};
  out["census"] = {{"total", raw.census_total},
                   {"characteristic", raw.census_characteristic},
                   {"degenerate", raw.census_degenerate}};
  return out;
}

Json to_json(const TubeMass& m)
{
  return {{"epsilon", number(m.epsilon)}, {"lhs_mass", number(m.lhs_mass)}, {"rhs_mass", number(m.rhs_mass)}, {"samples", m.samples}};
}

void CsvTable::add_row(std::vector<std::string> row)
{
  if (row.size() != columns.size()) throw std::invalid_argument("csv row width differs from header");
  rows.push_back(std::move(row));
}

std::string CsvTable::body() const
{
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

void CsvTable::write(std::ostream& os) const
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  os << "# generated " << stamp << " carnot " << kToolVersion << '\n' << body();
}

void CsvTable::write(const std::string& path) const
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write(out);
}

CsvTable slice_table(const VerificationReport& rep)
{
  CsvTable table;
  const std::size_t dim = rep.raw.t_lo.size();
  if (dim <= 1) {
    table.columns.push_back("t");
  } else {
    for (std::size_t i = 0; i < dim; ++i) table.columns.push_back("t" + std::to_string(i + 1));
  }
  for (const char* c : {"level_measure_sr", "level_measure_riem", "excised_mass"}) table.columns.push_back(c);
  for (const auto& row : rep.raw.slices) {
    std::vector<std::string> cells;
    for (double t : row.t) cells.push_back(format_number(t));
    cells.push_back(format_number(row.level_measure_sr));
    cells.push_back(format_number(row.level_measure_riem));
    cells.push_back(format_number(row.excised_mass));
    table.add_row(std::move(cells));
  }
  return table;
}

std::string strip_comment_lines(const std::string& text)
{
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace carnot
