#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "herald/errors.hpp"
#include "herald/opo.hpp"
#include "herald/trace_file.hpp"

#ifndef HERALD_VERSION
#define HERALD_VERSION "unknown"
#endif

namespace herald::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kScanNote =
    "gamma_star tracks the bandwidth the traces were synthesized with. Measured data can put the optimum "
    "above the cavity bandwidth (for example 65 MHz for a 60 MHz source) because of the detection "
    "electronics response; the simulated traces carry no electronics transfer function, so that shift is "
    "not reproduced here.";

std::string format_rate(double hz) {
  char buf[64];
  if (hz >= 1e6) {
    std::snprintf(buf, sizeof buf, "%.3g MHz", hz / 1e6);
  } else if (hz >= 1e3) {
    std::snprintf(buf, sizeof buf, "%.3g kHz", hz / 1e3);
  } else {
    std::snprintf(buf, sizeof buf, "%.3g Hz", hz);
  }
  return buf;
}

std::string format(const char* fmt, double a, double b, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json base_report(const Context& ctx, const char* command) {
  AppConfig resolved = ctx.config;
  resolved.seed = ctx.seed;
  return json{{"command", command}, {"version", version_string()}, {"seed", ctx.seed}, {"config", to_json(resolved)}};
}

void write_loglik_csv(const fs::path& path, const std::vector<double>& history) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "iteration,loglik\n";
  for (std::size_t i = 0; i < history.size(); ++i) out << i << ',' << history[i] << '\n';
  write_text(path, out.str());
}

json reconstruction_json(const ReconstructionResult& r) {
  return json{
      {"diagonal", r.rho.diagonal()},
      {"rho11", r.rho.population(1)},
      {"wigner_origin", wigner(r.rho, 0.0, 0.0)},
      {"iterations", r.iterations_used},
      {"converged", r.converged},
      {"fixed_point_residual", r.fixed_point_residual},
      {"loglik", r.loglik_history.back()},
  };
}

json corrected_json(const LossInversion& inv, double eta, const std::vector<double>& renormalized, int keep) {
  return json{
      {"eta", eta},
      {"diagonal", inv.rho.diagonal()},
      {"rho11", inv.rho.population(1)},
      {"renormalized_keep", keep},
      {"renormalized_diagonal", renormalized},
      {"physical", inv.status == InversionStatus::physical},
      {"min_eigenvalue", inv.min_eigenvalue},
      {"psd_distance", inv.psd_distance},
      {"wigner_origin", wigner(inv.rho, 0.0, 0.0)},
  };
}

bool same_dt(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

std::vector<double> grid_from(const GammaRange& r) { return gamma_grid(r.lo, r.hi, r.step); }

std::size_t index_of(const std::vector<double>& grid, double gamma) {
  return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), gamma) - grid.begin());
}

void apply_scale(std::vector<QuadratureSample>& samples, double scale) {
  for (QuadratureSample& s : samples) s.x *= scale;
}

double calibration_from(const std::vector<QuadratureSample>& vacuum) {
  std::vector<double> xs;
  xs.reserve(vacuum.size());
  for (const QuadratureSample& s : vacuum) xs.push_back(s.x);
  return shot_noise_scale(xs);
}

std::vector<TimeTrace> read_traces_any(const fs::path& path, double dt, TraceFileHeader& header) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<TimeTrace> traces = read_trace_csv(in, dt);
    header.n_traces = traces.size();
    header.n_samples = traces.empty() ? 0 : static_cast<std::uint32_t>(traces.front().samples.size());
    header.dt = dt;
    return traces;
  }
  return read_trace_file(path, &header);
}

}  // namespace

std::string version_string() { return HERALD_VERSION; }

std::uint64_t vacuum_seed(std::uint64_t seed) { return child_seed(seed, std::numeric_limits<std::uint64_t>::max()); }

TomographySettings scan_settings(const TomographySettings& base) {
  TomographySettings s = base;
  if (!s.binning) s.binning = ProjectorBinning{};
  return s;
}

DensityMatrix source_state(const AppConfig& config) {
  const SourceConfig& s = config.source;
  const double eta_opo = escape_efficiency(s.opo.t_out, s.opo.l_intra);
  const double eta_tot = total_detection_efficiency(s.budget);
  return heralded_state(s.opo, s.conditioning, eta_opo, eta_tot,
                        std::max(kDefaultNMax, config.reconstruction.settings.n_max));
}

BudgetSummary compute_budget(const AppConfig& config) {
  const SourceConfig& s = config.source;
  BudgetSummary b;
  b.eta_opo = escape_efficiency(s.opo.t_out, s.opo.l_intra);
  b.eta_tot = total_detection_efficiency(s.budget);
  b.eta = b.eta_opo * b.eta_tot;
  b.expected_vacuum = expected_vacuum(b.eta_tot, b.eta_opo);
  b.eta_c = s.conditioning.eta_c();
  b.two_photon_fraction = two_photon_fraction(s.opo.pump_ratio, b.eta_c, s.opo.pair_exponent);
  b.heralded_diagonal = source_state(config).diagonal();
  b.if_bandwidth = s.filters.if_bandwidth;
  b.finesse = s.filters.finesse();
  b.cascade_rejection = cascade_rejection(s.filters, s.opo);
  const HeraldingStats h = heralding_stats(s.conditioning, config.heralding.brightness_bandwidth);
  b.brightness = h.brightness;
  b.corrected_rate = h.corrected_rate;

  if (config.reference.corrected_rate) {
    const double quoted = *config.reference.corrected_rate;
    std::string note = "corrected herald rate: computed " + format_rate(b.corrected_rate) + " = " +
                       format_rate(s.conditioning.herald_rate) +
                       format(" / (%.3g x %.3g)", s.conditioning.eta_det, s.conditioning.transmission) +
                       " vs quoted " + format_rate(quoted);
    if (std::abs(b.corrected_rate - quoted) > 0.05 * quoted) {
      note += "; the quoted value does not follow from the stated conditioning efficiencies";
    }
    b.notes.push_back(note);
  }
  if (config.reference.cascade_rejection) {
    const double quoted = *config.reference.cascade_rejection;
    b.notes.push_back(format("filter cascade rejection: computed %.3g (%.1f dB) vs quoted %.3g (%.1f dB); "
                             "the interferential filter is modeled as a Lorentzian",
                             b.cascade_rejection, 10.0 * std::log10(b.cascade_rejection), quoted,
                             10.0 * std::log10(quoted)));
  }
  return b;
}

json to_json(const BudgetSummary& b, const AppConfig& config) {
  json doc{
      {"eta_opo", b.eta_opo},
      {"eta_tot", b.eta_tot},
      {"eta", b.eta},
      {"expected_vacuum", b.expected_vacuum},
      {"eta_c", b.eta_c},
      {"two_photon_fraction", b.two_photon_fraction},
      {"heralded_diagonal", b.heralded_diagonal},
      {"filters",
       {{"if_bandwidth", b.if_bandwidth},
        {"fp_finesse", b.finesse},
        {"cascade_rejection", b.cascade_rejection},
        {"cascade_rejection_db", 10.0 * std::log10(b.cascade_rejection)}}},
      {"heralding",
       {{"herald_rate", config.source.conditioning.herald_rate},
        {"bandwidth", config.heralding.brightness_bandwidth},
        {"brightness_per_mhz", b.brightness},
        {"corrected_rate", b.corrected_rate}}},
      {"notes", b.notes},
  };
  if (config.reference.cascade_rejection) doc["filters"]["quoted_rejection"] = *config.reference.cascade_rejection;
  if (config.reference.corrected_rate) doc["heralding"]["quoted_corrected_rate"] = *config.reference.corrected_rate;
  return doc;
}

json scan_report(const GammaScan& scan) {
  json curve = json::array();
  for (const GammaScanPoint& p : scan.curve) {
    curve.push_back({{"gamma", p.gamma},
                     {"rho11", p.rho11},
                     {"wigner_origin", p.wigner_origin},
                     {"diagonal", p.diagonal},
                     {"converged", p.converged}});
  }
  return json{{"gamma_star", scan.gamma_star},
              {"gamma_most_negative_wigner", scan.gamma_most_negative},
              {"projectors", "binned"},
              {"curve", curve},
              {"note", kScanNote}};
}

PipelineResult run_pipeline(const AppConfig& config, std::uint64_t seed) {
  const AcquisitionConfig& acq = config.acquisition;
  if (acq.n_events == 0) throw std::invalid_argument("the pipeline needs at least one heralding event");
  PipelineResult res;
  res.budget = compute_budget(config);
  const DensityMatrix source = source_state(config);
  res.source_diagonal = source.diagonal();

  const TemporalMode mode = build_temporal_mode(config.source.opo.gamma, acq.dt, acq.n_samples);
  const NoiseModel noise{acq.electronic_ratio};
  const std::vector<double> grid =
      config.extraction.scan ? grid_from(*config.extraction.scan) : std::vector<double>{config.extraction.gamma};

  MultiModeExtractor signal(grid, acq.dt, acq.n_samples);
  run_acquisition(source, acq.n_events, mode, noise, acq.schedule, seed,
                  [&](const TimeTrace& t) { signal.add(t); });
  std::vector<std::vector<QuadratureSample>> per_gamma(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) per_gamma[i] = signal.take(i);

  std::vector<double> scales(grid.size(), 1.0);
  if (config.extraction.calibrate) {
    MultiModeExtractor vacuum(grid, acq.dt, acq.n_samples);
    run_acquisition(DensityMatrix::vacuum(source.n_max()), acq.n_vacuum, mode, noise, acq.schedule,
                    vacuum_seed(seed), [&](const TimeTrace& t) { vacuum.add(t); });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      scales[i] = calibration_from(vacuum.samples(i));
      apply_scale(per_gamma[i], scales[i]);
    }
  }

  std::size_t chosen = 0;
  if (config.extraction.scan) {
    res.scan = scan_gamma(grid, per_gamma, scan_settings(config.reconstruction.settings));
    chosen = index_of(grid, res.scan->gamma_star);
  }
  res.gamma_used = grid[chosen];
  res.calibration_scale = scales[chosen];
  res.quadratures = std::move(per_gamma[chosen]);

  res.reconstruction = maxlik_reconstruct(res.quadratures, config.reconstruction.settings);
  res.wigner_origin = wigner(res.reconstruction->rho, 0.0, 0.0);
  if (config.reconstruction.correct_eta) {
    res.corrected = invert_loss(res.reconstruction->rho, *config.reconstruction.correct_eta);
    res.corrected_renormalized = renormalized_diagonal(res.corrected->rho, config.reconstruction.correct_keep);
  }

  const ExpectedValues& exp = config.expected;
  const DensityMatrix& rho = res.reconstruction->rho;
  auto add = [&](const char* name, double value, const std::optional<Band>& band) {
    if (band) res.checks.push_back(Check{name, value, band->lo, band->hi, band->contains(value)});
  };
  add("rho00", rho.population(0), exp.rho00);
  add("rho11", rho.population(1), exp.rho11);
  add("rho22", rho.n_max() >= 2 ? rho.population(2) : 0.0, exp.rho22);
  if (res.corrected) add("rho11_corrected", res.corrected->rho.population(1), exp.rho11_corrected);
  if (res.scan) add("gamma_star", res.scan->gamma_star, exp.gamma_star);
  if (exp.wigner_origin_max) {
    add("wigner_origin", res.wigner_origin, Band{-1.0 / std::numbers::pi, *exp.wigner_origin_max});
  }
  res.pass = std::all_of(res.checks.begin(), res.checks.end(), [](const Check& c) { return c.pass; });
  return res;
}

json pipeline_report(const PipelineResult& res, const Context& ctx) {
  json doc = base_report(ctx, "pipeline");
  doc["budget"] = to_json(res.budget, ctx.config);
  doc["source_diagonal"] = res.source_diagonal;
  doc["extraction"] = {{"gamma", res.gamma_used},
                       {"calibration_scale", res.calibration_scale},
                       {"n_quadratures", res.quadratures.size()}};
  if (res.scan) doc["scan"] = scan_report(*res.scan);
  doc["reconstruction"] = reconstruction_json(*res.reconstruction);
  if (res.corrected) {
    doc["corrected"] = corrected_json(*res.corrected, *ctx.config.reconstruction.correct_eta,
                                      res.corrected_renormalized, ctx.config.reconstruction.correct_keep);
  }
  json checks = json::array();
  for (const Check& c : res.checks) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass}});
  }
  doc["checks"] = checks;
  doc["result"] = res.pass ? "PASS" : "FAIL";
  return doc;
}

int cmd_simulate(const Context& ctx, const SimulateOptions& opts) {
  const AppConfig& config = ctx.config;
  const AcquisitionConfig& acq = config.acquisition;
  const std::size_t n_events = opts.n_events.value_or(acq.n_events);
  if (acq.n_samples > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("acquisition.n_samples too large");
  const auto n_samples = static_cast<std::uint32_t>(acq.n_samples);
  const DensityMatrix source = source_state(config);
  const TemporalMode mode = build_temporal_mode(config.source.opo.gamma, acq.dt, acq.n_samples);
  const NoiseModel noise{acq.electronic_ratio};

  const fs::path traces_path = ctx.out / "traces.htrc";
  const fs::path vacuum_path = ctx.out / "vacuum.htrc";
  TraceWriter writer(traces_path, n_samples, acq.dt);
  const AcquisitionManifest manifest = run_acquisition(source, n_events, mode, noise, acq.schedule, ctx.seed,
                                                       [&](const TimeTrace& t) { writer.write(t); });
  writer.close();
  TraceWriter vacuum(vacuum_path, n_samples, acq.dt, kTraceFlagVacuumReference);
  run_acquisition(DensityMatrix::vacuum(source.n_max()), acq.n_vacuum, mode, noise, acq.schedule,
                  vacuum_seed(ctx.seed), [&](const TimeTrace& t) { vacuum.write(t); });
  vacuum.close();

  json doc = base_report(ctx, "simulate");
  doc["acquisition"] = json::parse(manifest.to_json());
  doc["vacuum_reference"] = {{"n_traces", acq.n_vacuum}, {"seed", vacuum_seed(ctx.seed)}};
  doc["files"] = {{"traces", traces_path.filename().string()}, {"vacuum", vacuum_path.filename().string()}};
  doc["budget"] = to_json(compute_budget(config), config);
  write_json(ctx.out / "simulate_manifest.json", doc);
  std::cout << "simulate: " << n_events << " traces -> " << traces_path.string() << ", " << acq.n_vacuum
            << " vacuum traces -> " << vacuum_path.string() << '\n';
  return kExitOk;
}

int cmd_extract(const Context& ctx, const ExtractOptions& opts) {
  const AppConfig& config = ctx.config;
  const double dt = config.acquisition.dt;
  TraceFileHeader header;
  const std::vector<TimeTrace> traces = read_traces_any(opts.traces, dt, header);
  if (traces.empty()) throw std::invalid_argument("'" + opts.traces.string() + "' contains no traces");
  if (!same_dt(header.dt, dt)) {
    throw std::invalid_argument(format("trace sample period %.6g s differs from the configured acquisition.dt %.6g s",
                                       header.dt, dt));
  }

  std::vector<double> grid;
  bool scanning = false;
  if (opts.gamma) {
    grid = {*opts.gamma};
  } else if (opts.scan) {
    grid = grid_from(parse_gamma_range(*opts.scan));
    scanning = true;
  } else if (config.extraction.scan) {
    grid = grid_from(*config.extraction.scan);
    scanning = true;
  } else {
    grid = {config.extraction.gamma};
  }
  validate_gamma_grid(grid);

  MultiModeExtractor extractor(grid, dt, header.n_samples);
  for (const TimeTrace& t : traces) extractor.add(t);
  std::vector<std::vector<QuadratureSample>> per_gamma(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) per_gamma[i] = extractor.take(i);

  std::vector<double> scales(grid.size(), 1.0);
  json calibration = {{"applied", false}};
  const bool calibrate = config.extraction.calibrate && !opts.no_calibration;
  std::optional<fs::path> vacuum_path = opts.vacuum;
  if (!vacuum_path && fs::exists(opts.traces.parent_path() / "vacuum.htrc")) {
    vacuum_path = opts.traces.parent_path() / "vacuum.htrc";
  }
  if (calibrate && vacuum_path) {
    TraceFileHeader vheader;
    const std::vector<TimeTrace> vac = read_traces_any(*vacuum_path, dt, vheader);
    if (!same_dt(vheader.dt, dt) || vheader.n_samples != header.n_samples) {
      throw std::invalid_argument("vacuum reference '" + vacuum_path->string() +
                                  "' does not match the traces' sample period or length");
    }
    json per = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      scales[i] = calibrate_shot_noise(vac, extractor.mode(i));
      apply_scale(per_gamma[i], scales[i]);
      per.push_back({{"gamma", grid[i]}, {"scale", scales[i]}});
    }
    calibration = {{"applied", true}, {"vacuum_file", vacuum_path->string()}, {"n_vacuum", vac.size()},
                   {"scales", per}};
  } else if (calibrate) {
    calibration["reason"] = "no vacuum reference found; quadratures left in trace units";
  }

  std::size_t chosen = 0;
  json doc = base_report(ctx, "extract");
  if (scanning) {
    const GammaScan scan = scan_gamma(grid, per_gamma, scan_settings(config.reconstruction.settings));
    chosen = index_of(grid, scan.gamma_star);
    json scan_doc = base_report(ctx, "extract-scan");
    scan_doc["scan"] = scan_report(scan);
    write_json(ctx.out / "scan.json", scan_doc);
    doc["scan"] = {{"gamma_star", scan.gamma_star}, {"report", "scan.json"}};
    std::cout << "extract: gamma scan over " << grid.size() << " points, gamma* = " << scan.gamma_star / 1e6
              << " MHz\n";
  }
  const fs::path csv_path = ctx.out / "quadratures.csv";
  {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + csv_path.string() + "'");
    write_quadrature_csv(out, per_gamma[chosen]);
    if (!out) throw IoError("write to '" + csv_path.string() + "' failed");
  }
  doc["input"] = opts.traces.string();
  doc["gamma"] = grid[chosen];
  doc["n_quadratures"] = per_gamma[chosen].size();
  doc["calibration"] = calibration;
  doc["files"] = {{"quadratures", csv_path.filename().string()}};
  write_json(ctx.out / "extract_report.json", doc);
  std::cout << "extract: " << per_gamma[chosen].size() << " quadratures at gamma = " << grid[chosen] / 1e6
            << " MHz -> " << csv_path.string() << '\n';
  return kExitOk;
}

int cmd_reconstruct(const Context& ctx, const ReconstructOptions& opts) {
  const AppConfig& config = ctx.config;
  std::ifstream in(opts.quadratures);
  if (!in) throw IoError("cannot open '" + opts.quadratures.string() + "'");
  const std::vector<QuadratureSample> samples = read_quadrature_csv(in);
  if (samples.empty()) throw std::invalid_argument("'" + opts.quadratures.string() + "' contains no quadratures");

  TomographySettings settings = config.reconstruction.settings;
  if (opts.n_max) settings.n_max = *opts.n_max;
  if (opts.max_iters) settings.max_iters = *opts.max_iters;
  if (opts.binned) settings.binning = ProjectorBinning{};
  settings.seed = ctx.seed;
  settings.validate();

  ReconstructionResult result = maxlik_reconstruct(samples, settings);
  json doc = base_report(ctx, "reconstruct");
  doc["input"] = opts.quadratures.string();
  doc["n_quadratures"] = samples.size();
  doc["reconstruction"] = reconstruction_json(result);
  json files = {{"rho", "rho.json"}, {"loglik", "loglik.csv"}};

  const int n_boot = opts.bootstrap.value_or(config.reconstruction.bootstrap);
  if (n_boot > 0) {
    const BootstrapResult boot = bootstrap_errors(samples, settings, n_boot);
    result.diag_errors = boot.std_errors;
    json errors = base_report(ctx, "reconstruct-bootstrap");
    errors["method"] = "nonparametric bootstrap: resample the quadratures with replacement and rerun MaxLik";
    errors["n_resamples"] = boot.n_resamples;
    errors["std_errors"] = boot.std_errors;
    errors["mean"] = boot.mean;
    errors["warnings"] = boot.warnings;
    write_json(ctx.out / "errors.json", errors);
    doc["reconstruction"]["diag_errors"] = boot.std_errors;
    files["errors"] = "errors.json";
    for (const std::string& w : boot.warnings) std::cerr << "warning: " << w << '\n';
  }

  const std::optional<double> eta = opts.correct_eta ? opts.correct_eta : config.reconstruction.correct_eta;
  if (eta) {
    if (!(*eta > 0.0 && *eta <= 1.0)) throw std::invalid_argument("--correct-eta must be in (0, 1]");
    const LossInversion inv = invert_loss(result.rho, *eta);
    const std::vector<double> renorm = renormalized_diagonal(inv.rho, config.reconstruction.correct_keep);
    doc["corrected"] = corrected_json(inv, *eta, renorm, config.reconstruction.correct_keep);
    std::cout << "reconstruct: corrected for eta = " << *eta << ": rho11 = " << inv.rho.population(1)
              << " (renormalized " << renorm[1] << ")" << (inv.status == InversionStatus::physical ? "" : ", non-physical")
              << '\n';
  }

  if (opts.wigner || config.reconstruction.wigner) {
    const double e = config.reconstruction.wigner_extent;
    const WignerGrid grid = wigner_grid(result.rho, Range{-e, e}, Range{-e, e}, config.reconstruction.wigner_resolution);
    std::ofstream out(ctx.out / "wigner.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (ctx.out / "wigner.csv").string() + "'");
    write_wigner_csv(out, grid);
    files["wigner"] = "wigner.csv";
  }

  write_text(ctx.out / "rho.json", to_json(result.rho) + "\n");
  write_loglik_csv(ctx.out / "loglik.csv", result.loglik_history);
  doc["files"] = files;
  write_json(ctx.out / "reconstruct_report.json", doc);
  std::cout << "reconstruct: rho00 = " << result.rho.population(0) << ", rho11 = " << result.rho.population(1)
            << ", W(0,0) = " << wigner(result.rho, 0.0, 0.0) << ", " << result.iterations_used << " iterations"
            << (result.converged ? "" : " (not converged)") << '\n';
  return kExitOk;
}

int cmd_budget(const Context& ctx) {
  const BudgetSummary b = compute_budget(ctx.config);
  json doc = base_report(ctx, "budget");
  doc["budget"] = to_json(b, ctx.config);
  write_json(ctx.out / "budget_report.json", doc);
  std::printf("eta_tot          %.4f\n", b.eta_tot);
  std::printf("eta_opo          %.4f\n", b.eta_opo);
  std::printf("expected vacuum  %.4f\n", b.expected_vacuum);
  std::printf("two-photon part  %.4f\n", b.two_photon_fraction);
  std::printf("rejection        %.3g (%.1f dB)\n", b.cascade_rejection, 10.0 * std::log10(b.cascade_rejection));
  std::printf("brightness       %.6g counts/s/MHz\n", b.brightness);
  std::printf("corrected rate   %s\n", format_rate(b.corrected_rate).c_str());
  for (const std::string& n : b.notes) std::printf("note: %s\n", n.c_str());
  return kExitOk;
}

int cmd_pipeline(const Context& ctx, const PipelineOptions& opts) {
  Context run_ctx = ctx;
  if (opts.n_events) run_ctx.config.acquisition.n_events = *opts.n_events;
  const PipelineResult res = run_pipeline(run_ctx.config, run_ctx.seed);
  write_json(ctx.out / "pipeline_report.json", pipeline_report(res, run_ctx));
  write_text(ctx.out / "rho.json", to_json(res.reconstruction->rho) + "\n");
  write_loglik_csv(ctx.out / "loglik.csv", res.reconstruction->loglik_history);
  for (const Check& c : res.checks) {
    std::printf("%s %-16s %.6g in [%.6g, %.6g]\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.lo, c.hi);
  }
  std::printf("pipeline: %s\n", res.pass ? "PASS" : "FAIL");
  return res.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace herald::cli
