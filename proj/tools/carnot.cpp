#include "carnot/classify.hpp"
#include "carnot/coarea.hpp"
#include "carnot/config.hpp"
#include "carnot/measures.hpp"
#include "carnot/parallel.hpp"
#include "carnot/report.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace carnot;

namespace {

class UsageError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

struct Common
{
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  std::string convention;
  std::string map;
};

int diagnose(const std::string& kind, const std::string& message, const std::string& location, int code)
{
  Json err;
  err["error"] = {{"kind", kind}, {"message", message}};
  if (!location.empty()) err["error"]["location"] = location;
  err["error"]["exit_code"] = code;
  std::cerr << err.dump() << '\n';
  return code;
}

RunConfig load(const Common& c, bool validate = true)
{
  if (c.config.empty()) throw UsageError("--config is required");
  return load_config(c.config, validate);
}

MeasureConvention convention(const Common& c, const RunConfig& cfg)
{
  MeasureConvention conv;
  conv.mode = cfg.convention;
  if (!c.convention.empty()) conv.mode = constant_mode_from_string(c.convention);
  return conv;
}

std::uint64_t seed_of(const Common& c, const RunConfig& cfg) { return c.seed ? *c.seed : cfg.seed; }

/// Output base path: --out, then the configured output, then the subcommand name; a .json suffix is dropped.
std::string out_base(const Common& c, const RunConfig* cfg, const std::string& fallback)
{
  std::string base = !c.out.empty() ? c.out : (cfg && !cfg->output.empty() ? cfg->output : fallback);
  if (base.size() > 5 && base.substr(base.size() - 5) == ".json") base.resize(base.size() - 5);
  return base;
}

void emit(const Json& doc, const std::string& base)
{
  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  write_text(base + ".json", text);
}

GroupPtr algebra_argument(const std::string& arg, const Common& c)
{
  if (!c.config.empty()) {
    RunConfig cfg = load(c);
    auto it = cfg.groups.find(arg);
    if (it != cfg.groups.end()) return it->second;
  }
  if (std::filesystem::is_regular_file(arg)) {
    RunConfig cfg = load_config(arg);
    if (cfg.algebra_definitions.empty()) throw ConfigError("'" + arg + "' defines no algebras", "/algebras");
    return cfg.group(cfg.algebra_definitions.front().name);
  }
  if (arg.size() == 2 && arg[0] == 'R' && arg[1] >= '1' && arg[1] <= '9')
    return CarnotGroup::create(GradedNilpotentAlgebra::abelian(arg[1] - '0', arg));
  throw ConfigError("unknown algebra '" + arg + "' (neither a configured name nor a readable file)", "");
}

std::optional<RunConfig> optional_config(const Common& c)
{
  if (c.config.empty()) return std::nullopt;
  return load(c);
}

std::uint64_t seed_of(const Common& c, const std::optional<RunConfig>& cfg)
{
  return c.seed ? *c.seed : (cfg ? cfg->seed : 1);
}

int algebra_check(const Common& c)
{
  RunConfig cfg = load(c, false);
  Json doc = record_header(MeasureConvention{}, seed_of(c, cfg));
  Json list = Json::array();
  bool ok = true;
  for (const auto& def : cfg.algebra_definitions) {
    Json entry;
    entry["name"] = def.name;
    try {
      const ValidationReport rep = validate(def);
      entry["report"] = to_json(rep);
      ok = ok && rep.ok();
    } catch (const std::invalid_argument& e) {
      entry["report"] = {{"valid", false}, {"malformed", e.what()}};
      ok = false;
    }
    list.push_back(entry);
  }
  const RunConfig again = parse_config(algebras_to_document(cfg.algebra_definitions), false);
  bool round_trip = again.algebra_definitions.size() == cfg.algebra_definitions.size();
  for (std::size_t a = 0; round_trip && a < again.algebra_definitions.size(); ++a) {
    const auto &x = again.algebra_definitions[a], &y = cfg.algebra_definitions[a];
    round_trip = x.name == y.name && x.layer_dims == y.layer_dims && x.brackets.size() == y.brackets.size();
    for (std::size_t b = 0; round_trip && b < x.brackets.size(); ++b)
      round_trip = x.brackets[b].i == y.brackets[b].i && x.brackets[b].j == y.brackets[b].j &&
                   x.brackets[b].k == y.brackets[b].k && x.brackets[b].c == y.brackets[b].c;
  }
  doc["algebras"] = list;
  doc["round_trip"] = round_trip;
  doc["passed"] = ok && round_trip;
  emit(doc, out_base(c, &cfg, "algebra_check"));
  return ok && round_trip ? 0 : 1;
}

int group_selftest(const Common& c, const std::string& algebra, int samples)
{
  const GroupPtr g = algebra_argument(algebra, c);
  const auto cfg = optional_config(c);
  const std::uint64_t seed = seed_of(c, cfg);
  const GroupSelfTest st = run_group_selftest(*g, samples, seed);
  Json doc = record_header(MeasureConvention{}, seed);
  doc["selftest"] = to_json(st);
  emit(doc, out_base(c, cfg ? &*cfg : nullptr, "group_selftest"));
  return st.passed() ? 0 : 1;
}

int probe_triangle(const Common& c, const std::string& algebra, double r0, std::size_t samples)
{
  if (!(r0 > 0.0)) throw UsageError("--r0 must be positive");
  const GroupPtr g = algebra_argument(algebra, c);
  const auto cfg = optional_config(c);
  const std::uint64_t seed = seed_of(c, cfg);
  const TriangleProbe probe = quasi_triangle_probe(g, r0, samples, seed);
  Json doc = record_header(MeasureConvention{}, seed);
  doc["algebra"] = g->algebra().name();
  doc["probe"] = to_json(probe);
  emit(doc, out_base(c, cfg ? &*cfg : nullptr, "probe_triangle"));
  return 0;
}

int classify(const Common& c, std::optional<int> resolution)
{
  RunConfig cfg = load(c);
  const PolynomialContactMap& map = cfg.map_or_first(c.map);
  const int res = resolution.value_or(cfg.resolution);
  if (res < 2) throw UsageError("--resolution must be at least 2");
  const ScanCensus census = scan_grid(map, cfg.domain_for(map.source()), res);

  CsvTable table;
  for (int i = 0; i < map.source_dim(); ++i) table.columns.push_back("u" + std::to_string(i + 1));
  table.columns.push_back("kind");
  table.columns.push_back("nu0");
  auto add = [&](const Vec& x, const char* kind, std::optional<int> nu) {
    std::vector<std::string> row;
    for (int i = 0; i < x.size(); ++i) row.push_back(format_number(x(i)));
    row.push_back(kind);
    row.push_back(nu ? std::to_string(*nu) : "");
    table.add_row(std::move(row));
  };
  for (std::size_t p = 0; p < census.characteristic_points.size(); ++p)
    add(census.characteristic_points[p], "characteristic", census.characteristic_nu0[p]);
  for (const Vec& x : census.degenerate_points) add(x, "degenerate", std::nullopt);

  const bool ok = census.disagreements == 0 && census.lemma_sum_i_failures == 0;
  Json doc = record_header(convention(c, cfg), seed_of(c, cfg));
  doc["map"] = map.name();
  doc["resolution"] = res;
  doc["census"] = to_json(census);
  doc["passed"] = ok;
  const std::string base = out_base(c, &cfg, "classify");
  table.write(base + ".csv");
  emit(doc, base);
  return ok ? 0 : 1;
}

int measure_fit(const Common& c, std::vector<double> point, std::vector<double> radii)
{
  RunConfig cfg = load(c);
  const PolynomialContactMap& map = cfg.map_or_first(c.map);
  if (radii.empty()) radii = cfg.radii;
  if (radii.size() < 4) throw UsageError("measure fit needs at least 4 radii");
  for (double r : radii)
    if (!(r > 0.0)) throw UsageError("radii must be positive");
  const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
  if (*hi / *lo < 8.0) throw UsageError("radii must span a factor of at least 8");
  if (static_cast<int>(point.size()) != map.source_dim())
    throw UsageError("--point needs " + std::to_string(map.source_dim()) + " coordinates");
  Vec x(map.source_dim());
  for (int i = 0; i < x.size(); ++i) x(i) = point[static_cast<std::size_t>(i)];

  const MeasureConvention conv = convention(c, cfg);
  const PointClass pc = classify_point(map, x);
  const MapDimensions dims = MapDimensions::of(map.source()->algebra(), map.target()->algebra());
  std::optional<int> expected;
  if (pc.kind == PointKind::Regular) expected = dims.nu - dims.target_nu;
  if (pc.kind == PointKind::Characteristic && pc.nu0) expected = dims.nu - *pc.nu0;

  CsvTable table;
  table.columns = {"r", "tangent_measure", "level_measure", "theorem_prediction"};
  std::vector<double> tangent, level;
  for (double r : radii) {
    const double t = tangent_plane_box_measure(map, x, r).value;
    const double l = level_set_box_measure(map, x, r).value;
    const double pred = pc.kind == PointKind::Regular ? level_set_prediction(map, x, r, conv.omega) : std::nan("");
    tangent.push_back(t);
    level.push_back(l);
    table.add_row({format_number(r), format_number(t), format_number(l), format_number(pred)});
  }

  Json doc = record_header(conv, seed_of(c, cfg));
  doc["map"] = map.name();
  doc["point"] = point;
  doc["kind"] = to_string(pc.kind);
  bool ok = true;
  try {
    const AsymptoticFit tf = exponent_fit(radii, tangent);
    doc["tangent_fit"] = to_json(tf);
    if (expected) {
      doc["expected_exponent"] = *expected;
      ok = std::abs(tf.exponent - *expected) <= 0.05;
    }
  } catch (const std::invalid_argument& e) {
    doc["tangent_fit"] = {{"error", e.what()}};
    ok = false;
  }
  try {
    doc["level_fit"] = to_json(exponent_fit(radii, level));
  } catch (const std::invalid_argument& e) {
    doc["level_fit"] = {{"error", e.what()}};
  }
  doc["passed"] = ok;
  const std::string base = out_base(c, &cfg, "measure_fit");
  table.write(base + ".csv");
  emit(doc, base);
  return ok ? 0 : 1;
}

int coarea_verify(const Common& c)
{
  RunConfig cfg = load(c);
  const PolynomialContactMap& map = cfg.map_or_first(c.map);
  const MeasureConvention conv = convention(c, cfg);
  const std::uint64_t seed = seed_of(c, cfg);
  const VerificationReport rep = verify(map, cfg.domain_for(map.source()), conv, seed);
  Json doc = record_header(conv, seed);
  doc["report"] = to_json(rep);
  const std::string base = out_base(c, &cfg, "coarea_verify");
  slice_table(rep).write(base + ".csv");
  emit(doc, base);
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Numerical toolkit for polynomial contact maps between Carnot groups"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "configuration document");
    sub->add_option("--seed", common.seed, "64-bit seed, overrides the configured one");
    sub->add_option("--threads", common.threads, "worker threads (default: hardware parallelism)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", common.out, "output base path; .json and .csv are appended");
    sub->add_option("--convention", common.convention, "paper or balanced")->check(CLI::IsMember({"paper", "balanced"}));
    sub->add_option("--map", common.map, "map name (default: first map of the configuration)");
  };

  auto* algebra = app.add_subcommand("algebra", "algebra tools");
  algebra->require_subcommand(1);
  auto* check = algebra->add_subcommand("check", "validate every configured algebra");
  add_common(check);

  auto* group = app.add_subcommand("group", "group tools");
  group->require_subcommand(1);
  auto* selftest = group->add_subcommand("selftest", "group-law invariant suite");
  add_common(selftest);
  std::string algebra_arg;
  int selftest_samples = 1000;
  selftest->add_option("--algebra", algebra_arg, "configured algebra name or configuration file")->required();
  selftest->add_option("--samples", selftest_samples, "random samples")->check(CLI::PositiveNumber);

  auto* probe = app.add_subcommand("probe", "metric probes");
  probe->require_subcommand(1);
  auto* triangle = probe->add_subcommand("triangle", "quasi-triangle constant estimate");
  add_common(triangle);
  double r0 = 1.0;
  std::size_t probe_samples = 10000;
  triangle->add_option("--algebra", algebra_arg, "configured algebra name or configuration file")->required();
  triangle->add_option("--r0", r0, "largest radius")->required();
  triangle->add_option("--samples", probe_samples, "sample count")->required();

  auto* cls = app.add_subcommand("classify", "lattice census of point kinds");
  add_common(cls);
  std::optional<int> resolution;
  cls->add_option("--resolution", resolution, "lattice nodes per axis");

  auto* measure = app.add_subcommand("measure", "measure tools");
  measure->require_subcommand(1);
  auto* fit = measure->add_subcommand("fit", "tangent and level-set measure asymptotics");
  add_common(fit);
  std::vector<double> point, radii;
  fit->add_option("--point", point, "source point, comma separated")->delimiter(',')->required();
  fit->add_option("--radii", radii, "radii, comma separated")->delimiter(',');

  auto* coarea = app.add_subcommand("coarea", "coarea formula");
  coarea->require_subcommand(1);
  auto* cverify = coarea->add_subcommand("verify", "both sides of the coarea formula");
  add_common(cverify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return diagnose("usage", e.what(), "", 2);
  }

  try {
    set_thread_count(common.threads);
    if (check->parsed()) return algebra_check(common);
    if (selftest->parsed()) return group_selftest(common, algebra_arg, selftest_samples);
    if (triangle->parsed()) return probe_triangle(common, algebra_arg, r0, probe_samples);
    if (cls->parsed()) return classify(common, resolution);
    if (fit->parsed()) return measure_fit(common, point, radii);
    if (cverify->parsed()) return coarea_verify(common);
    return diagnose("usage", "no subcommand", "", 2);
  } catch (const UsageError& e) {
    return diagnose("usage", e.what(), "", 2);
  } catch (const ConfigError& e) {
    return diagnose("config", e.what(), e.location(), 2);
  } catch (const std::exception& e) {
    return diagnose("module", e.what(), "", 1);
  }
}
