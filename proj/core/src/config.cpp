#include "herald/config.hpp"

#include <functional>
#include <map>

#include <json.hpp>

#include "herald/errors.hpp"

namespace herald {
namespace {

using nlohmann::json;
using Fields = std::map<std::string, double*>;

void read_section(const json& doc, const char* name, const Fields& fields) {
  if (!doc.contains(name)) return;
  const json& section = doc.at(name);
  if (!section.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError(std::string("unknown key '") + name + "." + key + "'");
    if (!value.is_number()) throw ConfigError(std::string("'") + name + "." + key + "' must be a number");
    *it->second = value.get<double>();
  }
}

}  // namespace

SourceConfig parse_source_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");

  SourceConfig c;
  read_section(doc, "opo",
               {{"t_out", &c.opo.t_out},
                {"l_intra", &c.opo.l_intra},
                {"gamma", &c.opo.gamma},
                {"delta_fsr", &c.opo.delta_fsr},
                {"pump_ratio", &c.opo.pump_ratio},
                {"pair_exponent", &c.opo.pair_exponent}});
  read_section(doc, "budget",
               {{"eta_noise", &c.budget.eta_noise},
                {"eta_phot", &c.budget.eta_phot},
                {"eta_prop", &c.budget.eta_prop},
                {"visibility", &c.budget.visibility}});
  read_section(doc, "conditioning",
               {{"eta_det", &c.conditioning.eta_det},
                {"transmission", &c.conditioning.transmission},
                {"dark_rate", &c.conditioning.dark_rate},
                {"herald_rate", &c.conditioning.herald_rate}});
  read_section(doc, "filters",
               {{"if_bandwidth", &c.filters.if_bandwidth},
                {"fp_fsr", &c.filters.fp_fsr},
                {"fp_bandwidth", &c.filters.fp_bandwidth}});

  try {
    c.opo.validate();
    c.budget.validate();
    c.conditioning.validate();
    c.filters.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string to_json(const SourceConfig& c) {
  const json doc = {
      {"opo",
       {{"t_out", c.opo.t_out},
        {"l_intra", c.opo.l_intra},
        {"gamma", c.opo.gamma},
        {"delta_fsr", c.opo.delta_fsr},
        {"pump_ratio", c.opo.pump_ratio},
        {"pair_exponent", c.opo.pair_exponent}}},
      {"budget",
       {{"eta_noise", c.budget.eta_noise},
        {"eta_phot", c.budget.eta_phot},
        {"eta_prop", c.budget.eta_prop},
        {"visibility", c.budget.visibility}}},
      {"conditioning",
       {{"eta_det", c.conditioning.eta_det},
        {"transmission", c.conditioning.transmission},
        {"dark_rate", c.conditioning.dark_rate},
        {"herald_rate", c.conditioning.herald_rate}}},
      {"filters",
       {{"if_bandwidth", c.filters.if_bandwidth},
        {"fp_fsr", c.filters.fp_fsr},
        {"fp_bandwidth", c.filters.fp_bandwidth}}},
  };
  return doc.dump(2);
}

}  // namespace herald
