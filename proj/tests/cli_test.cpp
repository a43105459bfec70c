#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "app_config.hpp"
#include "commands.hpp"
#include "herald/errors.hpp"
#include "herald/trace_file.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace herald;
using namespace herald::cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("herald_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int herald_exit(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + HERALD_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const json& doc, const std::string& name = "config.json") {
  const fs::path p = dir / name;
  std::ofstream(p) << doc.dump(2);
  return p;
}

json small_config() {
  return json{
      {"seed", 7},
      {"acquisition", {{"n_events", 3000}, {"n_vacuum", 500}, {"n_samples", 200}, {"dt", 0.5e-9}}},
      {"reconstruction", {{"binned", true}, {"correct_eta", 0.85}}},
  };
}

}  // namespace

TEST(AppConfig, DefaultsRoundTripAndRejectUnknownKeys) {
  const AppConfig def = parse_app_config("{}");
  EXPECT_EQ(def.acquisition.n_events, 50000u);
  EXPECT_EQ(def.acquisition.dt, 0.2e-9);
  EXPECT_FALSE(def.extraction.scan);
  const AppConfig back = parse_app_config(to_json(def).dump());
  EXPECT_EQ(to_json(back), to_json(def));

  EXPECT_THROW(parse_app_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_app_config(R"({"acquisition": {"n_event": 1}})"), ConfigError);
  EXPECT_THROW(parse_app_config(R"({"acquisition": {"dt": -1}})"), ConfigError);
  EXPECT_THROW(parse_app_config(R"({"acquisition": {"phase_schedule": "sawtooth"}})"), ConfigError);
  EXPECT_THROW(parse_app_config(R"({"extraction": {"scan": "40e6:90e6"}})"), ConfigError);
  EXPECT_THROW(parse_app_config(R"({"expected": {"rho11": [0.9, 0.8]}})"), ConfigError);
  EXPECT_THROW(parse_app_config(R"({"expected": {"gamma_star": [55e6, 65e6]}})"), ConfigError);
  EXPECT_THROW(parse_app_config(R"({"opo": {"pump_ratio": 3}})"), ConfigError);
  EXPECT_NEAR(parse_app_config(R"({"acquisition": {"electronic_noise_db": 20}})").acquisition.electronic_ratio, 0.01,
              1e-15);
  const GammaRange r = parse_gamma_range("40e6:90e6:5e6");
  EXPECT_EQ(r.lo, 40e6);
  EXPECT_EQ(r.hi, 90e6);
  EXPECT_EQ(r.step, 5e6);
}

TEST(AppConfig, ShippedConfigParses) {
  const AppConfig c = load_app_config(HERALD_REFERENCE_CONFIG);
  EXPECT_EQ(c.acquisition.n_events, 50000u);
  EXPECT_TRUE(c.extraction.scan.has_value());
  EXPECT_EQ(*c.reconstruction.correct_eta, 0.85);
  EXPECT_THROW(load_app_config("/nonexistent/config.json"), ConfigError);
}

TEST(Budget, ReportValuesAndDiscrepancy) {
  const fs::path dir = scratch("budget");
  ASSERT_EQ(herald_exit("budget --config " HERALD_REFERENCE_CONFIG " --out " + dir.string()), 0);
  const json doc = read_json(dir / "budget_report.json");
  const json& b = doc["budget"];
  EXPECT_NEAR(b["eta_tot"].get<double>(), 0.8496, 1e-4);
  EXPECT_NEAR(b["eta_opo"].get<double>(), 0.9615, 1e-4);
  EXPECT_NEAR(b["expected_vacuum"].get<double>(), 0.184, 1e-3);
  EXPECT_EQ(b["heralding"]["brightness_per_mhz"].get<double>(), 400.0);
  const std::string notes = b["notes"].dump();
  EXPECT_NE(notes.find("1.07 MHz"), std::string::npos) << notes;
  EXPECT_NE(notes.find("750 kHz"), std::string::npos) << notes;
  EXPECT_NE(notes.find("0.003"), std::string::npos) << notes;
  EXPECT_EQ(doc["seed"].get<std::uint64_t>(), 20100101u);
  EXPECT_FALSE(doc["version"].get<std::string>().empty());
  EXPECT_TRUE(doc["config"].contains("acquisition"));
}

TEST(Budget, UnityBudgetHasNoExpectedVacuum) {
  const fs::path dir = scratch("unity");
  const json cfg{{"budget", {{"eta_noise", 1}, {"eta_phot", 1}, {"eta_prop", 1}, {"visibility", 1}}},
                 {"opo", {{"l_intra", 0}}}};
  ASSERT_EQ(herald_exit("budget --config " + write_config(dir, cfg).string() + " --out " + dir.string()), 0);
  EXPECT_EQ(read_json(dir / "budget_report.json")["budget"]["expected_vacuum"].get<double>(), 0.0);
}

TEST(ExitCodes, UsageConfigAndIo) {
  const fs::path dir = scratch("exit");
  EXPECT_EQ(herald_exit(""), 2);
  EXPECT_EQ(herald_exit("frobnicate"), 2);
  EXPECT_EQ(herald_exit("--help"), 0);
  EXPECT_EQ(herald_exit("budget --config /nonexistent.json --out " + dir.string()), 2);
  EXPECT_EQ(herald_exit("budget --config " + write_config(dir, json{{"bogus", 1}}).string() + " --out " + dir.string()),
            2);
  EXPECT_EQ(herald_exit("budget --threads 0 --out " + dir.string()), 2);
  EXPECT_EQ(herald_exit("budget --out " + dir.string(), "HERALD_THREADS=abc"), 2);
  EXPECT_EQ(herald_exit("budget --out " + dir.string(), "HERALD_THREADS=2"), 0);
  EXPECT_EQ(herald_exit("extract --traces " + (dir / "missing.htrc").string() + " --out " + dir.string()), 3);
  EXPECT_EQ(herald_exit("reconstruct --quadratures " + (dir / "missing.csv").string() + " --out " + dir.string()), 3);
  std::ofstream(dir / "corrupt.htrc") << "not a trace file";
  EXPECT_EQ(herald_exit("extract --traces " + (dir / "corrupt.htrc").string() + " --out " + dir.string()), 3);
}

TEST(Simulate, EmptyRun) {
  const fs::path dir = scratch("empty");
  const fs::path cfg = write_config(dir, small_config());
  ASSERT_EQ(herald_exit("simulate --events 0 --config " + cfg.string() + " --out " + dir.string()), 0);
  TraceFileHeader header;
  EXPECT_TRUE(read_trace_file(dir / "traces.htrc", &header).empty());
  EXPECT_EQ(header.n_traces, 0u);
  EXPECT_EQ(read_json(dir / "simulate_manifest.json")["acquisition"]["n_events"].get<int>(), 0);
}

TEST(Simulate, ExtractReconstructChain) {
  const fs::path dir = scratch("chain");
  const fs::path cfg = write_config(dir, small_config());
  const std::string common = " --config " + cfg.string() + " --out " + dir.string();
  ASSERT_EQ(herald_exit("simulate" + common), 0);
  TraceFileHeader header;
  const auto traces = read_trace_file(dir / "traces.htrc", &header);
  EXPECT_EQ(traces.size(), 3000u);
  EXPECT_EQ(header.n_samples, 200u);
  EXPECT_EQ(read_trace_file(dir / "vacuum.htrc", &header).size(), 500u);
  EXPECT_EQ(header.flags, kTraceFlagVacuumReference);

  ASSERT_EQ(herald_exit("extract --traces " + (dir / "traces.htrc").string() + " --gamma 60e6" + common), 0);
  std::ifstream csv(dir / "quadratures.csv");
  EXPECT_EQ(read_quadrature_csv(csv).size(), 3000u);
  const json ext = read_json(dir / "extract_report.json");
  EXPECT_TRUE(ext["calibration"]["applied"].get<bool>());
  EXPECT_NEAR(ext["calibration"]["scales"][0]["scale"].get<double>(), 1.0 / std::sqrt(1.01), 0.05);

  ASSERT_EQ(herald_exit("reconstruct --quadratures " + (dir / "quadratures.csv").string() +
                        " --wigner --bootstrap 3" + common),
            0);
  const json rec = read_json(dir / "reconstruct_report.json");
  EXPECT_GT(rec["reconstruction"]["rho11"].get<double>(), 0.6);
  EXPECT_LT(rec["reconstruction"]["wigner_origin"].get<double>(), 0.0);
  EXPECT_GT(rec["corrected"]["rho11"].get<double>(), rec["reconstruction"]["rho11"].get<double>());
  EXPECT_EQ(rec["corrected"]["renormalized_diagonal"].size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "rho.json"));
  EXPECT_TRUE(fs::exists(dir / "wigner.csv"));
  EXPECT_TRUE(fs::exists(dir / "loglik.csv"));
  const json errors = read_json(dir / "errors.json");
  EXPECT_EQ(errors["n_resamples"].get<int>(), 3);
  EXPECT_FALSE(errors["warnings"].empty());
  const DensityMatrix rho = density_matrix_from_json(slurp(dir / "rho.json"));
  EXPECT_NEAR(rho.population(1), rec["reconstruction"]["rho11"].get<double>(), 1e-12);

  ASSERT_EQ(herald_exit("extract --traces " + (dir / "traces.htrc").string() + " --scan 50e6:70e6:10e6" + common), 0);
  const json scan = read_json(dir / "scan.json");
  EXPECT_EQ(scan["scan"]["curve"].size(), 3u);
  EXPECT_NE(scan["scan"]["note"].get<std::string>().find("not reproduced"), std::string::npos);

  // traces recorded at a different sample period than configured
  json other = small_config();
  other["acquisition"]["dt"] = 0.25e-9;
  const fs::path other_cfg = write_config(dir, other, "other.json");
  EXPECT_EQ(herald_exit("extract --traces " + (dir / "traces.htrc").string() + " --config " + other_cfg.string() +
                        " --out " + dir.string()),
            2);
}

TEST(Pipeline, DeterministicAcrossRunsAndThreads) {
  const fs::path a = scratch("pipe_a"), b = scratch("pipe_b");
  const fs::path cfg = write_config(a, small_config());
  ASSERT_EQ(herald_exit("pipeline --threads 1 --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(herald_exit("pipeline --config " + cfg.string() + " --out " + b.string(), "HERALD_THREADS=3"), 0);
  EXPECT_EQ(slurp(a / "pipeline_report.json"), slurp(b / "pipeline_report.json"));
  EXPECT_EQ(slurp(a / "rho.json"), slurp(b / "rho.json"));
  ASSERT_EQ(herald_exit("pipeline --seed 8 --config " + cfg.string() + " --out " + b.string()), 0);
  EXPECT_NE(slurp(a / "pipeline_report.json"), slurp(b / "pipeline_report.json"));
  EXPECT_EQ(read_json(b / "pipeline_report.json")["seed"].get<int>(), 8);
}

TEST(Pipeline, PerturbedPropagationShiftsVacuum) {
  const fs::path a = scratch("pert_a"), b = scratch("pert_b");
  json cfg = small_config();
  ASSERT_EQ(herald_exit("pipeline --config " + write_config(a, cfg).string() + " --out " + a.string()), 0);
  cfg["budget"] = {{"eta_prop", 0.6}};
  ASSERT_EQ(herald_exit("pipeline --config " + write_config(b, cfg).string() + " --out " + b.string()), 0);
  const json ra = read_json(a / "pipeline_report.json"), rb = read_json(b / "pipeline_report.json");
  EXPECT_GT(rb["budget"]["expected_vacuum"].get<double>(), ra["budget"]["expected_vacuum"].get<double>() + 0.1);
  EXPECT_GT(rb["reconstruction"]["diagonal"][0].get<double>(), ra["reconstruction"]["diagonal"][0].get<double>() + 0.1);
}

TEST(Pipeline, FailedCheckExitsOne) {
  const fs::path dir = scratch("pipe_fail");
  json cfg = small_config();
  cfg["expected"] = {{"rho11", {0.99, 1.0}}, {"rho00", {0.0, 1.0}}};
  ASSERT_EQ(herald_exit("pipeline --config " + write_config(dir, cfg).string() + " --out " + dir.string()), 1);
  const json r = read_json(dir / "pipeline_report.json");
  EXPECT_EQ(r["result"], "FAIL");
  EXPECT_EQ(r["checks"].size(), 2u);
  cfg["acquisition"]["n_events"] = 0;
  EXPECT_EQ(herald_exit("pipeline --config " + write_config(dir, cfg).string() + " --out " + dir.string()), 2);
}
