#include "app_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "herald/errors.hpp"

namespace herald::cli {
namespace {

using nlohmann::json;

void check_keys(const json& section, const std::string& name, const std::set<std::string>& allowed) {
  if (!section.is_object()) throw ConfigError("section '" + name + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + name + "." + key + "'");
  }
}

double number(const json& section, const std::string& section_name, const std::string& key, double fallback) {
  if (!section.contains(key)) return fallback;
  const json& v = section.at(key);
  if (!v.is_number()) throw ConfigError("'" + section_name + "." + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& section, const std::string& section_name, const std::string& key,
                  std::size_t fallback) {
  if (!section.contains(key)) return fallback;
  const json& v = section.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError("'" + section_name + "." + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool boolean(const json& section, const std::string& section_name, const std::string& key, bool fallback) {
  if (!section.contains(key)) return fallback;
  const json& v = section.at(key);
  if (!v.is_boolean()) throw ConfigError("'" + section_name + "." + key + "' must be true or false");
  return v.get<bool>();
}

Band band(const json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError("'expected." + name + "' must be a [lo, hi] pair");
  }
  Band b{v[0].get<double>(), v[1].get<double>()};
  if (!(b.lo <= b.hi)) throw ConfigError("'expected." + name + "' has lo > hi");
  return b;
}

const json& section_or_empty(const json& doc, const char* name) {
  static const json empty = json::object();
  return doc.contains(name) ? doc.at(name) : empty;
}

json band_json(const std::optional<Band>& b) {
  if (!b) return nullptr;
  return json::array({b->lo, b->hi});
}

}  // namespace

GammaRange parse_gamma_range(const std::string& text) {
  GammaRange r;
  std::istringstream in(text);
  char c1 = 0, c2 = 0;
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw ConfigError("gamma scan must look like lo:hi:step, got '" + text + "'");
  }
  if (!(r.lo > 0.0) || !(r.hi >= r.lo) || !(r.step > 0.0)) {
    throw ConfigError("gamma scan needs 0 < lo <= hi and step > 0, got '" + text + "'");
  }
  return r;
}

bool ExpectedValues::empty() const {
  return !rho00 && !rho11 && !rho22 && !rho11_corrected && !gamma_star && !wigner_origin_max;
}

AppConfig parse_app_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  check_keys(doc, "<root>",
             {"opo", "budget", "conditioning", "filters", "acquisition", "extraction", "reconstruction", "heralding",
              "reference", "expected", "seed"});

  AppConfig c;
  json source = json::object();
  for (const char* key : {"opo", "budget", "conditioning", "filters"}) {
    if (doc.contains(key)) source[key] = doc.at(key);
  }
  c.source = parse_source_config(source.dump());

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }

  const json& acq = section_or_empty(doc, "acquisition");
  check_keys(acq, "acquisition",
             {"n_events", "n_vacuum", "n_samples", "dt", "electronic_ratio", "electronic_noise_db", "phase_schedule",
              "ramp_period"});
  c.acquisition.n_events = count(acq, "acquisition", "n_events", c.acquisition.n_events);
  c.acquisition.n_vacuum = count(acq, "acquisition", "n_vacuum", c.acquisition.n_vacuum);
  c.acquisition.n_samples = count(acq, "acquisition", "n_samples", c.acquisition.n_samples);
  c.acquisition.dt = number(acq, "acquisition", "dt", c.acquisition.dt);
  if (acq.contains("electronic_ratio") && acq.contains("electronic_noise_db")) {
    throw ConfigError("give either acquisition.electronic_ratio or acquisition.electronic_noise_db, not both");
  }
  c.acquisition.electronic_ratio = number(acq, "acquisition", "electronic_ratio", c.acquisition.electronic_ratio);
  if (acq.contains("electronic_noise_db")) {
    c.acquisition.electronic_ratio = NoiseModel::ratio_from_db(number(acq, "acquisition", "electronic_noise_db", 0));
  }
  if (acq.contains("phase_schedule")) {
    if (!acq.at("phase_schedule").is_string()) throw ConfigError("'acquisition.phase_schedule' must be a string");
    try {
      c.acquisition.schedule.kind = phase_schedule_kind(acq.at("phase_schedule").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  c.acquisition.schedule.ramp_period =
      count(acq, "acquisition", "ramp_period", c.acquisition.schedule.ramp_period);
  if (!(c.acquisition.dt > 0.0)) throw ConfigError("acquisition.dt must be positive");
  if (c.acquisition.n_samples == 0) throw ConfigError("acquisition.n_samples must be positive");
  if (!(c.acquisition.electronic_ratio >= 0.0)) throw ConfigError("acquisition.electronic_ratio must be >= 0");
  if (c.acquisition.schedule.ramp_period == 0) throw ConfigError("acquisition.ramp_period must be positive");

  const json& ext = section_or_empty(doc, "extraction");
  check_keys(ext, "extraction", {"gamma", "scan", "calibrate"});
  c.extraction.gamma = number(ext, "extraction", "gamma", c.extraction.gamma);
  c.extraction.calibrate = boolean(ext, "extraction", "calibrate", c.extraction.calibrate);
  if (ext.contains("scan") && !ext.at("scan").is_null()) {
    if (!ext.at("scan").is_string()) throw ConfigError("'extraction.scan' must be a \"lo:hi:step\" string");
    c.extraction.scan = parse_gamma_range(ext.at("scan").get<std::string>());
  }
  if (!(c.extraction.gamma > 0.0)) throw ConfigError("extraction.gamma must be positive");

  const json& rec = section_or_empty(doc, "reconstruction");
  check_keys(rec, "reconstruction",
             {"n_max", "max_iters", "loglik_rel_tol", "binned", "bootstrap", "correct_eta", "correct_keep", "wigner",
              "wigner_extent", "wigner_resolution"});
  ReconstructionConfig& r = c.reconstruction;
  r.settings.n_max = static_cast<int>(count(rec, "reconstruction", "n_max", r.settings.n_max));
  r.settings.max_iters = static_cast<int>(count(rec, "reconstruction", "max_iters", r.settings.max_iters));
  r.settings.loglik_rel_tol = number(rec, "reconstruction", "loglik_rel_tol", r.settings.loglik_rel_tol);
  if (boolean(rec, "reconstruction", "binned", false)) r.settings.binning = ProjectorBinning{};
  r.bootstrap = static_cast<int>(count(rec, "reconstruction", "bootstrap", 0));
  if (rec.contains("correct_eta") && !rec.at("correct_eta").is_null()) {
    r.correct_eta = number(rec, "reconstruction", "correct_eta", 0.0);
    if (!(*r.correct_eta > 0.0 && *r.correct_eta <= 1.0)) throw ConfigError("reconstruction.correct_eta must be in (0, 1]");
  }
  r.correct_keep = static_cast<int>(count(rec, "reconstruction", "correct_keep", r.correct_keep));
  r.wigner = boolean(rec, "reconstruction", "wigner", r.wigner);
  r.wigner_extent = number(rec, "reconstruction", "wigner_extent", r.wigner_extent);
  r.wigner_resolution = static_cast<int>(count(rec, "reconstruction", "wigner_resolution", r.wigner_resolution));
  try {
    r.settings.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(r.wigner_extent > 0.0) || r.wigner_resolution < 2) throw ConfigError("invalid Wigner grid settings");

  const json& her = section_or_empty(doc, "heralding");
  check_keys(her, "heralding", {"brightness_bandwidth"});
  c.heralding.brightness_bandwidth = number(her, "heralding", "brightness_bandwidth", c.heralding.brightness_bandwidth);
  if (!(c.heralding.brightness_bandwidth > 0.0)) throw ConfigError("heralding.brightness_bandwidth must be positive");

  const json& ref = section_or_empty(doc, "reference");
  check_keys(ref, "reference", {"cascade_rejection", "corrected_rate"});
  if (ref.contains("cascade_rejection")) c.reference.cascade_rejection = number(ref, "reference", "cascade_rejection", 0);
  if (ref.contains("corrected_rate")) c.reference.corrected_rate = number(ref, "reference", "corrected_rate", 0);

  const json& exp = section_or_empty(doc, "expected");
  check_keys(exp, "expected", {"rho00", "rho11", "rho22", "rho11_corrected", "gamma_star", "wigner_origin_max"});
  if (exp.contains("rho00")) c.expected.rho00 = band(exp.at("rho00"), "rho00");
  if (exp.contains("rho11")) c.expected.rho11 = band(exp.at("rho11"), "rho11");
  if (exp.contains("rho22")) c.expected.rho22 = band(exp.at("rho22"), "rho22");
  if (exp.contains("rho11_corrected")) c.expected.rho11_corrected = band(exp.at("rho11_corrected"), "rho11_corrected");
  if (exp.contains("gamma_star")) c.expected.gamma_star = band(exp.at("gamma_star"), "gamma_star");
  if (exp.contains("wigner_origin_max")) {
    c.expected.wigner_origin_max = number(exp, "expected", "wigner_origin_max", 0.0);
  }
  if (c.expected.rho11_corrected && !r.correct_eta) {
    throw ConfigError("expected.rho11_corrected needs reconstruction.correct_eta");
  }
  if (c.expected.gamma_star && !c.extraction.scan) throw ConfigError("expected.gamma_star needs extraction.scan");
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_app_config(ss.str());
}

json to_json(const AppConfig& c) {
  json doc = json::parse(herald::to_json(c.source));
  doc["seed"] = c.seed;
  doc["acquisition"] = {
      {"n_events", c.acquisition.n_events},
      {"n_vacuum", c.acquisition.n_vacuum},
      {"n_samples", c.acquisition.n_samples},
      {"dt", c.acquisition.dt},
      {"electronic_ratio", c.acquisition.electronic_ratio},
      {"phase_schedule", to_string(c.acquisition.schedule.kind)},
      {"ramp_period", c.acquisition.schedule.ramp_period},
  };
  json scan = nullptr;
  if (c.extraction.scan) {
    std::ostringstream s;
    s.precision(17);
    s << c.extraction.scan->lo << ':' << c.extraction.scan->hi << ':' << c.extraction.scan->step;
    scan = s.str();
  }
  doc["extraction"] = {{"gamma", c.extraction.gamma}, {"scan", scan}, {"calibrate", c.extraction.calibrate}};
  const ReconstructionConfig& r = c.reconstruction;
  doc["reconstruction"] = {
      {"n_max", r.settings.n_max},
      {"max_iters", r.settings.max_iters},
      {"loglik_rel_tol", r.settings.loglik_rel_tol},
      {"binned", r.settings.binning.has_value()},
      {"bootstrap", r.bootstrap},
      {"correct_eta", r.correct_eta ? json(*r.correct_eta) : json(nullptr)},
      {"correct_keep", r.correct_keep},
      {"wigner", r.wigner},
      {"wigner_extent", r.wigner_extent},
      {"wigner_resolution", r.wigner_resolution},
  };
  doc["heralding"] = {{"brightness_bandwidth", c.heralding.brightness_bandwidth}};
  json ref = json::object();
  if (c.reference.cascade_rejection) ref["cascade_rejection"] = *c.reference.cascade_rejection;
  if (c.reference.corrected_rate) ref["corrected_rate"] = *c.reference.corrected_rate;
  doc["reference"] = ref;
  json exp = json::object();
  if (c.expected.rho00) exp["rho00"] = band_json(c.expected.rho00);
  if (c.expected.rho11) exp["rho11"] = band_json(c.expected.rho11);
  if (c.expected.rho22) exp["rho22"] = band_json(c.expected.rho22);
  if (c.expected.rho11_corrected) exp["rho11_corrected"] = band_json(c.expected.rho11_corrected);
  if (c.expected.gamma_star) exp["gamma_star"] = band_json(c.expected.gamma_star);
  if (c.expected.wigner_origin_max) exp["wigner_origin_max"] = *c.expected.wigner_origin_max;
  doc["expected"] = exp;
  return doc;
}

}  // namespace herald::cli
