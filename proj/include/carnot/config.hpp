#pragma once

#include "carnot/algebra.hpp"
#include "carnot/group.hpp"
#include "carnot/maps.hpp"
#include "carnot/measures.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace carnot {

inline constexpr const char* kToolVersion = "1.0.0";

/// Configuration problem; `location` is a JSON pointer into the document.
class ConfigError : public std::runtime_error
{
 public:
  ConfigError(const std::string& what, std::string location)
      : std::runtime_error(location.empty() ? what : what + " (at " + location + ")"), location_(std::move(location))
  {
  }
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

struct MapDefinition
{
  std::string name;
  std::string source;
  std::string target;
  std::vector<std::string> components;
};

struct DomainDefinition
{
  std::optional<std::vector<double>> center;  ///< origin of the source when absent
  double radius = 1.0;
};

/**
 * @brief Parsed run configuration.
 *
 * Algebra names R1..R9 resolve to abelian algebras unless the document defines them.
 * Bracket indices are 1-based in the document and 0-based here.
 */
struct RunConfig
{
  std::vector<AlgebraDefinition> algebra_definitions;
  std::map<std::string, GroupPtr> groups;
  std::vector<MapDefinition> map_definitions;
  std::map<std::string, PolynomialContactMap> maps;
  DomainDefinition domain;
  std::vector<double> radii;
  int resolution = 21;
  std::uint64_t seed = 1;
  ConstantMode convention = ConstantMode::Balanced;
  std::string output;

  GroupPtr group(const std::string& name) const;
  const PolynomialContactMap& map(const std::string& name) const;
  /// The named map, or the first one in the document when name is empty.
  const PolynomialContactMap& map_or_first(const std::string& name) const;
  Box2Ball domain_for(const GroupPtr& group) const;
};

/// With validate_algebras false, algebra definitions are read but not built (for `algebra check`).
RunConfig parse_config(const std::string& text, bool validate_algebras = true);
RunConfig load_config(const std::string& path, bool validate_algebras = true);

/// JSON text of the algebra part; parse_config of the result reproduces the definitions.
std::string algebras_to_document(const std::vector<AlgebraDefinition>& defs);

}  // namespace carnot
