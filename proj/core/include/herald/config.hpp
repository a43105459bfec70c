#pragma once

#include <string>
#include <string_view>

#include "herald/opo.hpp"

namespace herald {

/// Parameter bundles of the source model. Missing keys keep their defaults,
/// which are the experiment's values.
struct SourceConfig {
  OpoParams opo;
  EfficiencyBudget budget;
  ConditioningPath conditioning;
  FilterSpec filters;
};

/// Reads the "opo", "budget", "conditioning" and "filters" sections of a JSON
/// document; other top-level sections are ignored. Unknown keys inside these
/// sections and invalid values raise ConfigError.
SourceConfig parse_source_config(std::string_view json_text);

std::string to_json(const SourceConfig& config);

}  // namespace herald
