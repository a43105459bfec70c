#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "herald/sampler.hpp"
#include "herald/trace.hpp"

namespace herald {

double NoiseModel::ratio_from_db(double db_below_vacuum) { return std::pow(10.0, -db_below_vacuum / 10.0); }

void synthesize_trace(double x_sig, const TemporalMode& mode, const NoiseModel& noise, std::mt19937_64& rng,
                      TimeTrace& out) {
  if (!(noise.electronic_ratio >= 0.0)) throw std::invalid_argument("electronic_ratio must be non-negative");
  const std::size_t n = mode.size();
  const double dt = mode.dt();
  const std::span<const double> f = mode.values();
  out.samples.resize(n);
  out.dt = dt;

  std::normal_distribution<double> vacuum(0.0, std::sqrt(NoiseModel::kVacuumVariance / dt));
  double projection = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.samples[k] = vacuum(rng);
    projection += f[k] * out.samples[k];
  }
  projection *= dt;
  // Replace the vacuum component along f by the signal quadrature.
  const double shift = x_sig - projection;
  for (std::size_t k = 0; k < n; ++k) out.samples[k] += shift * f[k];

  if (noise.electronic_ratio > 0.0) {
    std::normal_distribution<double> electronic(
        0.0, std::sqrt(noise.electronic_ratio * NoiseModel::kVacuumVariance / dt));
    for (double& s : out.samples) s += electronic(rng);
  }
}

TimeTrace synthesize_trace(double x_sig, const TemporalMode& mode, const NoiseModel& noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TimeTrace out;
  synthesize_trace(x_sig, mode, noise, rng, out);
  return out;
}

void PhaseSchedule::validate() const {
  if (kind == Kind::ramp && ramp_period == 0) throw std::invalid_argument("phase ramp period must be positive");
}

std::string to_string(PhaseSchedule::Kind kind) { return kind == PhaseSchedule::Kind::ramp ? "ramp" : "uniform"; }

PhaseSchedule::Kind phase_schedule_kind(const std::string& name) {
  if (name == "ramp") return PhaseSchedule::Kind::ramp;
  if (name == "uniform") return PhaseSchedule::Kind::uniform;
  throw std::invalid_argument("unknown phase schedule '" + name + "' (expected ramp or uniform)");
}

std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t herald_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(herald_id), static_cast<std::uint32_t>(herald_id >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

std::string AcquisitionManifest::to_json() const {
  const nlohmann::json doc = {
      {"n_events", n_events},
      {"n_samples", n_samples},
      {"dt", dt},
      {"gamma", gamma},
      {"electronic_ratio", electronic_ratio},
      {"phase_schedule", {{"kind", herald::to_string(schedule.kind)}, {"ramp_period", schedule.ramp_period}}},
      {"seed", seed},
      {"source_diagonal", source_diagonal},
      {"source_is_diagonal", source_is_diagonal},
  };
  return doc.dump(2);
}

AcquisitionManifest run_acquisition(const DensityMatrix& source, std::size_t n_events, const TemporalMode& mode,
                                    const NoiseModel& noise, const PhaseSchedule& schedule, std::uint64_t seed,
                                    const TraceSink& sink) {
  schedule.validate();
  if (!(noise.electronic_ratio >= 0.0)) throw std::invalid_argument("electronic_ratio must be non-negative");

  AcquisitionManifest manifest;
  manifest.n_events = n_events;
  manifest.n_samples = mode.size();
  manifest.dt = mode.dt();
  manifest.gamma = mode.gamma();
  manifest.electronic_ratio = noise.electronic_ratio;
  manifest.schedule = schedule;
  manifest.seed = seed;
  manifest.source_diagonal = source.diagonal();
  manifest.source_is_diagonal = source.is_diagonal();
  if (n_events == 0) return manifest;

  const QuadratureSampler sampler(source);
  const bool ramp = schedule.kind == PhaseSchedule::Kind::ramp;
  auto ramp_theta = [&](std::size_t i) {
    return std::numbers::pi * static_cast<double>(i % schedule.ramp_period) /
           static_cast<double>(schedule.ramp_period);
  };
  // Ramp phases repeat, so their tables are built once.
  std::vector<QuadratureCdf> ramp_tables;
  if (ramp && !sampler.phase_independent()) {
    const std::size_t distinct = std::min(schedule.ramp_period, n_events);
    ramp_tables.reserve(distinct);
    for (std::size_t i = 0; i < distinct; ++i) ramp_tables.push_back(sampler.table(ramp_theta(i)));
  }

  constexpr std::size_t kBlock = 512;
  std::vector<TimeTrace> block(kBlock);
  for (std::size_t start = 0; start < n_events; start += kBlock) {
    const auto count = static_cast<std::ptrdiff_t>(std::min(kBlock, n_events - start));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
      const std::size_t id = start + static_cast<std::size_t>(j);
      std::mt19937_64 rng(child_seed(seed, id));
      double theta;
      if (ramp) {
        theta = ramp_theta(id);
      } else {
        std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
        theta = phase(rng);
      }
      double x_sig;
      if (!ramp_tables.empty()) {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        x_sig = ramp_tables[id % schedule.ramp_period].quantile(uniform(rng));
      } else {
        x_sig = sampler.sample(theta, rng);
      }
      TimeTrace& trace = block[static_cast<std::size_t>(j)];
      synthesize_trace(x_sig, mode, noise, rng, trace);
      trace.theta = theta;
      trace.herald_id = id;
    }
    for (std::ptrdiff_t j = 0; j < count; ++j) sink(block[static_cast<std::size_t>(j)]);
  }
  return manifest;
}

std::vector<TimeTrace> run_acquisition(const DensityMatrix& source, std::size_t n_events, const TemporalMode& mode,
                                       const NoiseModel& noise, const PhaseSchedule& schedule, std::uint64_t seed,
                                       AcquisitionManifest* manifest) {
  std::vector<TimeTrace> traces;
  traces.reserve(n_events);
  AcquisitionManifest m = run_acquisition(source, n_events, mode, noise, schedule, seed,
                                          [&traces](const TimeTrace& t) { traces.push_back(t); });
  if (manifest != nullptr) *manifest = std::move(m);
  return traces;
}

}  // namespace herald
