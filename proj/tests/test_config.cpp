#include "carnot/config.hpp"
#include "carnot/report.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

using namespace carnot;

namespace {

std::string fixture(const std::string& name) { return std::string(CARNOT_FIXTURE_DIR) + "/" + name; }

std::string location_of(const std::string& text)
{
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.location();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("bundled fixtures parse with valid algebras")
{
  for (const char* f : {"heisenberg1.cfg", "heisenberg2.cfg", "engel.cfg", "projection.cfg"}) {
    CAPTURE(f);
    const RunConfig cfg = load_config(fixture(f));
    CHECK_FALSE(cfg.algebra_definitions.empty());
    CHECK_FALSE(cfg.maps.empty());
    CHECK(cfg.radii.size() == 4);
  }
  const RunConfig h = load_config(fixture("heisenberg1.cfg"));
  CHECK(h.group("H1")->dimension() == 3);
  CHECK(h.group("H1")->algebra().constant(0, 1, 2) == 1.0);
  CHECK(h.map("x3").target()->dimension() == 1);
  CHECK(h.map_or_first("").name() == "x1");
  CHECK(h.seed == 20240601u);
  CHECK(h.convention == ConstantMode::Balanced);
}

TEST_CASE("undefined algebra reference names the algebra")
{
  const std::string doc = R"({"maps": [{"name": "m", "source": "H9", "target": "R1", "components": ["u1"]}]})";
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("H9") != std::string::npos);
    CHECK(e.location() == "/maps/0/source");
  }
}

TEST_CASE("bracket with i = j and nonzero value is rejected at the record")
{
  const std::string bad = R"({"algebras": [{"name": "A", "layer_dims": [2, 1],
    "brackets": [{"i": 1, "j": 2, "k": 3, "c": 1}, {"i": 2, "j": 2, "k": 3, "c": 0.5}]}]})";
  CHECK(location_of(bad) == "/algebras/0/brackets/1");
  const std::string zero = R"({"algebras": [{"name": "A", "layer_dims": [2, 1],
    "brackets": [{"i": 1, "j": 2, "k": 3, "c": 1}, {"i": 2, "j": 2, "k": 3, "c": 0}]}]})";
  CHECK_NOTHROW(parse_config(zero));
}

TEST_CASE("diagnostics carry document locations")
{
  CHECK(location_of(R"cfg({"maps": [{"name": "m", "source": "R2", "target": "R1", "components": ["sin(u1)"]}]})cfg") ==
        "/maps/0/components/0");
  CHECK(location_of(R"({"maps": [{"name": "m", "source": "R2", "target": "R1"}]})") == "/maps/0");
  CHECK(location_of(R"({"domain": {"radius": -1}})") == "/domain/radius");
  CHECK(location_of(R"({"seed": -3})") == "/seed");
  CHECK(location_of(R"({"seed": 1.5})") == "/seed");
  CHECK(location_of(R"({"convention": "other"})") == "/convention");
  CHECK(location_of(R"({"radii": [0.1, 0]})") == "/radii/1");
  CHECK(location_of(R"({"algebras": [{"name": "A", "layer_dims": "x"}]})") == "/algebras/0/layer_dims");
  CHECK(location_of(R"({"algebras": [{"name": "A", "layer_dims": [2, 1], "brackets": []}]})") == "/algebras/0");
  CHECK(location_of("{not json").rfind("byte", 0) == 0);
}

TEST_CASE("seed accepts the full unsigned 64-bit range")
{
  const RunConfig cfg = parse_config(R"({"seed": 18446744073709551615})");
  CHECK(cfg.seed == 18446744073709551615ull);
}

TEST_CASE("algebra definitions round-trip through the document form")
{
  const RunConfig cfg = load_config(fixture("engel.cfg"));
  const RunConfig again = parse_config(algebras_to_document(cfg.algebra_definitions));
  REQUIRE(again.algebra_definitions.size() == cfg.algebra_definitions.size());
  const auto& a = cfg.algebra_definitions[0];
  const auto& b = again.algebra_definitions[0];
  CHECK(a.name == b.name);
  CHECK(a.layer_dims == b.layer_dims);
  REQUIRE(a.brackets.size() == b.brackets.size());
  for (std::size_t i = 0; i < a.brackets.size(); ++i) {
    CHECK(a.brackets[i].i == b.brackets[i].i);
    CHECK(a.brackets[i].j == b.brackets[i].j);
    CHECK(a.brackets[i].k == b.brackets[i].k);
    CHECK(a.brackets[i].c == b.brackets[i].c);
  }
}

TEST_CASE("unvalidated parse keeps invalid algebras for checking")
{
  const std::string bad = R"({"algebras": [{"name": "A", "layer_dims": [2, 1], "brackets": []}]})";
  const RunConfig cfg = parse_config(bad, false);
  REQUIRE(cfg.algebra_definitions.size() == 1);
  CHECK(cfg.groups.empty());
  CHECK_FALSE(validate(cfg.algebra_definitions[0]).ok());
}

TEST_CASE("records carry every convention tag")
{
  const Json h = record_header({ConstantMode::PaperLiteral, OmegaNormalization::PowerOfTwo}, 42);
  CHECK(h["convention"] == "paper");
  CHECK(h["omega_normalization"] == "power-of-two");
  CHECK(h["g_convention"] == kGConvention);
  CHECK(h["hausdorff_metric"] == kHausdorffMetric);
  CHECK(h["seed"] == 42);
  CHECK(h["tool_version"] == kToolVersion);
}

TEST_CASE("csv output has one timestamp line before the body")
{
  CsvTable t;
  t.columns = {"a", "b"};
  t.add_row({format_number(0.1), format_number(2.0)});
  CHECK(t.body() == "a,b\n0.10000000000000001,2\n");
  CHECK_THROWS_AS(t.add_row({"1"}), std::invalid_argument);
  std::ostringstream os;
  t.write(os);
  CHECK(os.str().rfind("# generated ", 0) == 0);
  CHECK(strip_comment_lines(os.str()) == t.body());
  CHECK(number(std::nan("")) == "nan");
}
