#include "carnot/config.hpp"

#include "carnot/metrics.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace carnot {

using nlohmann::json;

namespace {

std::string ptr(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string ptr(const std::string& base, std::size_t index) { return base + "/" + std::to_string(index); }

const json& require(const json& obj, const char* key, const std::string& where)
{
  if (!obj.is_object()) throw ConfigError("expected an object", where);
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(std::string("missing field '") + key + "'", where);
  return *it;
}

template <class T>
T as(const json& j, const std::string& where, const char* what)
{
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("expected ") + what, where);
  }
}

AlgebraDefinition read_algebra(const json& j, const std::string& where)
{
  AlgebraDefinition def;
  def.name = as<std::string>(require(j, "name", where), ptr(where, "name"), "a string");
  def.layer_dims = as<std::vector<int>>(require(j, "layer_dims", where), ptr(where, "layer_dims"), "an integer list");
  const std::string bw = ptr(where, "brackets");
  const json& br = j.contains("brackets") ? j.at("brackets") : json::array();
  if (!br.is_array()) throw ConfigError("expected a list of bracket records", bw);
  for (std::size_t b = 0; b < br.size(); ++b) {
    const std::string rw = ptr(bw, b);
    BracketRecord rec;
    rec.i = as<int>(require(br[b], "i", rw), ptr(rw, "i"), "an integer") - 1;
    rec.j = as<int>(require(br[b], "j", rw), ptr(rw, "j"), "an integer") - 1;
    rec.k = as<int>(require(br[b], "k", rw), ptr(rw, "k"), "an integer") - 1;
    rec.c = as<double>(require(br[b], "c", rw), ptr(rw, "c"), "a number");
    def.brackets.push_back(rec);
  }
  return def;
}

/// Location of the first bracket record mentioned by a violation, else the algebra itself.
std::string violation_location(const AlgebraDefinition& def, const Violation& v, const std::string& where)
{
  if (v.kind == ViolationKind::Jacobi || v.kind == ViolationKind::Generation) return where;
  for (std::size_t b = 0; b < def.brackets.size(); ++b) {
    const auto& r = def.brackets[b];
    if ((r.i == v.indices[0] && r.j == v.indices[1]) || (r.i == v.indices[1] && r.j == v.indices[0]))
      return ptr(ptr(where, "brackets"), b);
  }
  return where;
}

}  // namespace

GroupPtr RunConfig::group(const std::string& name) const
{
  auto it = groups.find(name);
  if (it != groups.end()) return it->second;
  throw ConfigError("unknown algebra '" + name + "'", "");
}

const PolynomialContactMap& RunConfig::map(const std::string& name) const
{
  auto it = maps.find(name);
  if (it == maps.end()) throw ConfigError("unknown map '" + name + "'", "");
  return it->second;
}

const PolynomialContactMap& RunConfig::map_or_first(const std::string& name) const
{
  if (!name.empty()) return map(name);
  if (map_definitions.empty()) throw ConfigError("the configuration defines no maps", "/maps");
  return map(map_definitions.front().name);
}

Box2Ball RunConfig::domain_for(const GroupPtr& g) const
{
  Vec c = Vec::Zero(g->dimension());
  if (domain.center) {
    if (static_cast<int>(domain.center->size()) != g->dimension())
      throw ConfigError("domain center has " + std::to_string(domain.center->size()) + " coordinates but " +
                            g->algebra().name() + " has dimension " + std::to_string(g->dimension()),
                        "/domain/center");
    for (int i = 0; i < g->dimension(); ++i) c(i) = (*domain.center)[static_cast<std::size_t>(i)];
  }
  return Box2Ball(GroupPoint(g, c), domain.radius);
}

RunConfig parse_config(const std::string& text, bool validate_algebras)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed document: ") + e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ConfigError("top level must be an object", "");

  RunConfig cfg;
  if (doc.contains("algebras")) {
    const json& algs = doc.at("algebras");
    if (!algs.is_array()) throw ConfigError("expected a list of algebras", "/algebras");
    for (std::size_t a = 0; a < algs.size(); ++a) {
      const std::string where = ptr("/algebras", a);
      AlgebraDefinition def = read_algebra(algs[a], where);
      for (const auto& prev : cfg.algebra_definitions)
        if (prev.name == def.name) throw ConfigError("algebra '" + def.name + "' defined twice", where);
      if (validate_algebras) {
        ValidationReport rep;
        try {
          rep = validate(def);
        } catch (const std::invalid_argument& e) {
          throw ConfigError("algebra '" + def.name + "': " + e.what(), where);
        }
        if (!rep.ok())
          throw ConfigError("algebra '" + def.name + "' is invalid: " + rep.summary(),
                            violation_location(def, rep.violations.front(), where));
        cfg.groups[def.name] = CarnotGroup::create(GradedNilpotentAlgebra::build(def));
      }
      cfg.algebra_definitions.push_back(std::move(def));
    }
  }
  if (validate_algebras)
    for (int k = 1; k <= 9; ++k) {
      const std::string name = "R" + std::to_string(k);
      if (!cfg.groups.count(name)) cfg.groups[name] = CarnotGroup::create(GradedNilpotentAlgebra::abelian(k, name));
    }

  if (doc.contains("maps")) {
    const json& maps = doc.at("maps");
    if (!maps.is_array()) throw ConfigError("expected a list of maps", "/maps");
    for (std::size_t m = 0; m < maps.size(); ++m) {
      const std::string where = ptr("/maps", m);
      MapDefinition def;
      def.name = as<std::string>(require(maps[m], "name", where), ptr(where, "name"), "a string");
      def.source = as<std::string>(require(maps[m], "source", where), ptr(where, "source"), "a string");
      def.target = as<std::string>(require(maps[m], "target", where), ptr(where, "target"), "a string");
      def.components =
          as<std::vector<std::string>>(require(maps[m], "components", where), ptr(where, "components"), "a string list");
      if (cfg.maps.count(def.name)) throw ConfigError("map '" + def.name + "' defined twice", where);
      if (validate_algebras) {
        auto resolve = [&](const std::string& name, const char* field) {
          auto it = cfg.groups.find(name);
          if (it == cfg.groups.end()) throw ConfigError("map '" + def.name + "' references undefined algebra '" + name + "'", ptr(where, field));
          return it->second;
        };
        const GroupPtr src = resolve(def.source, "source"), tgt = resolve(def.target, "target");
        std::vector<Polynomial<double>> comps;
        for (std::size_t c = 0; c < def.components.size(); ++c) {
          try {
            comps.push_back(parse_polynomial(def.components[c], static_cast<std::size_t>(src->dimension())));
          } catch (const ParseError& e) {
            throw ConfigError(std::string("component of map '") + def.name + "': " + e.what(), ptr(ptr(where, "components"), c));
          }
        }
        try {
          cfg.maps.emplace(def.name, PolynomialContactMap(def.name, src, tgt, std::move(comps)));
        } catch (const std::exception& e) {
          throw ConfigError("map '" + def.name + "': " + e.what(), where);
        }
      }
      cfg.map_definitions.push_back(std::move(def));
    }
  }

  if (doc.contains("domain")) {
    const json& d = doc.at("domain");
    if (d.contains("center")) cfg.domain.center = as<std::vector<double>>(d.at("center"), "/domain/center", "a number list");
    if (d.contains("radius")) cfg.domain.radius = as<double>(d.at("radius"), "/domain/radius", "a number");
    if (!(cfg.domain.radius > 0.0) || !std::isfinite(cfg.domain.radius))
      throw ConfigError("domain radius must be positive", "/domain/radius");
  }
  if (doc.contains("radii")) {
    cfg.radii = as<std::vector<double>>(doc.at("radii"), "/radii", "a number list");
    for (std::size_t i = 0; i < cfg.radii.size(); ++i)
      if (!(cfg.radii[i] > 0.0)) throw ConfigError("radii must be positive", ptr("/radii", i));
  }
  if (doc.contains("resolution")) {
    cfg.resolution = as<int>(doc.at("resolution"), "/resolution", "an integer");
    if (cfg.resolution < 2) throw ConfigError("resolution must be at least 2", "/resolution");
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("seed must be an unsigned 64-bit integer", "/seed");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("convention")) {
    try {
      cfg.convention = constant_mode_from_string(as<std::string>(doc.at("convention"), "/convention", "a string"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "/convention");
    }
  }
  if (doc.contains("output")) cfg.output = as<std::string>(doc.at("output"), "/output", "a string");
  return cfg;
}

RunConfig load_config(const std::string& path, bool validate_algebras)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'", "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), validate_algebras);
}

std::string algebras_to_document(const std::vector<AlgebraDefinition>& defs)
{
  json algs = json::array();
  for (const auto& d : defs) {
    json br = json::array();
    for (const auto& b : d.brackets) br.push_back({{"i", b.i + 1}, {"j", b.j + 1}, {"k", b.k + 1}, {"c", b.c}});
    algs.push_back({{"name", d.name}, {"layer_dims", d.layer_dims}, {"brackets", br}});
  }
  return json{{"algebras", algs}}.dump(2);
}

}  // namespace carnot
