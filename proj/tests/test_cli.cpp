#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "lasertune/cli.hpp"
#include "lasertune/core_physics.hpp"
#include "lasertune/io.hpp"

using namespace lasertune;
namespace fs = std::filesystem;
using io::json;

namespace {

const fs::path kData = LASERTUNE_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lasertune");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lasertune_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_wafer(const fs::path& dir, int rows, int cols, double r = 7781.0) {
  const fs::path p = dir / "wafer.json";
  io::write_atomic(p, io::dump(io::to_json(make_grid_wafer("W", rows, cols, 1000.0, r, 0.0, 1))));
  return p;
}

std::string recipe() { return (kData / "recipe_default.json").string(); }

}  // namespace

TEST_CASE("argument errors and help") {
  CHECK(run({}).code == kExitInputError);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"frobnicate"}).code == kExitInputError);
  CHECK(run({"--format", "xml", "fit", "aging", "x.csv"}).code == kExitInputError);
  CHECK(run({"fit", "aging", "/nonexistent.csv"}).code == kExitInputError);
}

TEST_CASE("simulate-wafer on 3000 junctions") {
  const fs::path dir = scratch("sim");
  const fs::path wafer = write_wafer(dir, 50, 60);
  const Run r = run({"--seed", "42", "--output", (dir / "a").string(), "simulate-wafer",
                     wafer.string(), recipe()});
  REQUIRE(r.code == kExitOk);
  const json rep = io::read_json(dir / "a" / "batch_report.json");
  CHECK(rep["junction_count"] == 3000);
  CHECK(rep["estimated_wall_time_s"] == 60000.0);
  const auto csv = io::parse_csv(io::read_text(dir / "a" / "batch_junctions.csv"));
  CHECK(csv.rows.size() == 3000);

  REQUIRE(run({"--seed", "42", "--output", (dir / "b").string(), "simulate-wafer",
               wafer.string(), recipe()}).code == kExitOk);
  CHECK(io::read_text(dir / "a" / "batch_report.json") == io::read_text(dir / "b" / "batch_report.json"));
  CHECK(io::read_text(dir / "a" / "batch_junctions.csv") == io::read_text(dir / "b" / "batch_junctions.csv"));
}

TEST_CASE("simulate-wafer seed, noise and error handling") {
  const fs::path dir = scratch("sim2");
  const fs::path wafer = write_wafer(dir, 3, 3);
  const Run no_seed = run({"--output", dir.string(), "simulate-wafer", wafer.string(), recipe()});
  CHECK(no_seed.code == kExitInputError);
  CHECK(no_seed.err.find("--seed") != std::string::npos);

  REQUIRE(run({"--output", dir.string(), "simulate-wafer", wafer.string(), recipe(), "--zero-noise"}).code == kExitOk);
  const auto csv = io::parse_csv(io::read_text(dir / "batch_junctions.csv"));
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(csv.number(i, "shift_frac") == doctest::Approx(mean_shift(LasingRecipe{}, DoseModel::defaults())));
  }

  const fs::path hot = dir / "hot.json";
  io::write_atomic(hot, R"({"power_mw": 55, "exposure_s": 60})");
  CHECK(run({"--seed", "1", "--output", dir.string(), "simulate-wafer", wafer.string(), hot.string()}).code ==
        kExitInfeasible);

  json bad = io::read_json(wafer);
  bad["junctions"][4].erase("row");
  io::write_atomic(dir / "bad.json", io::dump(bad));
  const Run b = run({"--seed", "1", "--output", dir.string(), "simulate-wafer", (dir / "bad.json").string(), recipe()});
  CHECK(b.code == kExitInputError);
  CHECK(b.err.find("wafer.junctions[4].row") != std::string::npos);

  io::write_atomic(dir / "empty.json", R"({"wafer_id":"E","rows":0,"cols":0,"pitch_um":1000,"junctions":[]})");
  REQUIRE(run({"--seed", "1", "--output", (dir / "e").string(), "simulate-wafer", (dir / "empty.json").string(), recipe()}).code == kExitOk);
  CHECK(io::read_json(dir / "e" / "batch_report.json")["junction_count"] == 0);
}

TEST_CASE("fit aging recovers generating parameters per cohort") {
  const fs::path dir = scratch("fit_aging");
  std::ostringstream csv;
  csv << "junction_id,day,resistance_ohm,cohort,wafer,r0_ohm\n";
  const struct {
    const char* id;
    const char* cohort;
    AgingParams p;
  } sets[] = {{"A1", "annealed", aging_presets::new_wafer_annealed},
              {"U1", "unannealed", aging_presets::new_wafer_unannealed}};
  for (const auto& s : sets) {
    for (int d : {0, 1, 2, 4, 7, 10, 14, 21, 30}) {
      csv << s.id << ',' << d << ',' << io::format_number(8000.0 * (1 + aging_shift(d, s.p))) << ','
          << s.cohort << ",Wafer1,8000\n";
    }
  }
  io::write_atomic(dir / "aging.csv", csv.str());
  const Run r = run({"--output", (dir / "fit.json").string(), "fit", "aging", (dir / "aging.csv").string()});
  REQUIRE(r.code == kExitOk);
  const json rep = io::read_json(dir / "fit.json");
  REQUIRE(rep["groups"].size() == 2);
  for (const auto& g : rep["groups"]) {
    const AgingParams p = g["cohort"] == "annealed" ? sets[0].p : sets[1].p;
    CHECK(g["params"]["final_shift_a"].get<double>() == doctest::Approx(p.final_shift_a).epsilon(1e-6));
    CHECK(g["params"]["tau_days"].get<double>() == doctest::Approx(p.tau_days).epsilon(1e-6));
  }
}

TEST_CASE("fit stark, barrier and csv output") {
  const fs::path dir = scratch("fit_misc");
  std::ostringstream csv;
  csv << "amplitude,shift_mhz\n";
  for (int i = 0; i <= 20; ++i) {
    const double a = 0.01 * i;
    csv << io::format_number(a) << ','
        << io::format_number(stark_shift(a, StarkCalibration{}, ToneSide::below) * 1e-6) << '\n';
  }
  io::write_atomic(dir / "stark.csv", csv.str());
  const Run s = run({"fit", "stark", (dir / "stark.csv").string(), "--side", "below"});
  REQUIRE(s.code == kExitOk);
  CHECK(json::parse(s.out)["conversion_mhz"].get<double>() == doctest::Approx(432.0).epsilon(1e-9));

  const Run b = run({"fit", "barrier", (kData / "barrier_table.csv").string()});
  REQUIRE(b.code == kExitOk);
  CHECK(json::parse(b.out)["tau_nm"].get<double>() == doctest::Approx(0.31835333).epsilon(1e-5));

  const Run c = run({"--format", "csv", "fit", "barrier", (kData / "barrier_table.csv").string()});
  REQUIRE(c.code == kExitOk);
  CHECK(c.out.rfind("parameter,value,std_error\n", 0) == 0);

  CHECK(run({"fit", "spline", (kData / "barrier_table.csv").string()}).code == kExitInputError);
  CHECK(run({"fit", "stark", (kData / "barrier_table.csv").string()}).code == kExitInputError);
}

TEST_CASE("fit non-convergence writes the report and exits 4") {
  const fs::path dir = scratch("fit_nc");
  io::write_atomic(dir / "dose.csv", "power_mw,shift_frac\n10,1\n20,-1\n30,1\n40,-1\n");
  const Run r = run({"--output", (dir / "out.json").string(), "fit", "dose", (dir / "dose.csv").string()});
  CHECK(r.code == kExitNonConvergence);
  CHECK(io::read_json(dir / "out.json")["converged"] == false);
}

TEST_CASE("plan a 94 MHz downshift") {
  const fs::path dir = scratch("plan");
  const fs::path wafer = write_wafer(dir, 1, 2);
  io::write_atomic(dir / "targets.json", R"({"targets":[{"id":"J00000","downshift_mhz":94}]})");
  const Run r = run({"plan", wafer.string(), (dir / "targets.json").string()});
  REQUIRE(r.code == kExitOk);
  const json plan = json::parse(r.out);
  CHECK(plan["junctions"][0]["required_shift"].get<double>() == doctest::Approx(0.0314217338243612).epsilon(1e-9));
  CHECK(plan["junctions"][0]["planned_shift"].get<double>() == doctest::Approx(0.0314217338243612).epsilon(1e-9));
  CHECK(plan["junctions"][1]["required_shift"] == 0.0);
  CHECK(plan["junctions"][1]["planned_shots"].empty());

  io::write_atomic(dir / "up.json", R"({"targets":[{"id":"J00000","f_target_ghz":6.5}]})");
  CHECK(run({"plan", wafer.string(), (dir / "up.json").string()}).code == kExitInfeasible);
  io::write_atomic(dir / "ghost.json", R"({"targets":[{"id":"J99999","f_target_ghz":5.0}]})");
  CHECK(run({"plan", wafer.string(), (dir / "ghost.json").string()}).code == kExitInputError);
}

TEST_CASE("plan with collision-free allocation") {
  const fs::path dir = scratch("plan_alloc");
  const fs::path wafer = write_wafer(dir, 1, 2);
  const double f0 = qubit_frequency(Ohms(7781.0)).value() * 1e-9;
  io::write_atomic(dir / "targets.json",
                   R"({"targets":[{"id":"J00001","f_target_ghz":)" + io::format_number(f0 - 0.01) + "}]}");
  const Run r = run({"plan", wafer.string(), (dir / "targets.json").string(), "--min-spacing-mhz", "50"});
  REQUIRE(r.code == kExitOk);
  const json plan = json::parse(r.out);
  CHECK(plan["junctions"][0]["f_target_ghz"].get<double>() == doctest::Approx(f0));
  CHECK(plan["junctions"][1]["f_target_ghz"].get<double>() == doctest::Approx(f0 - 0.05));
}

TEST_CASE("tune summary, seed requirement and determinism") {
  const fs::path dir = scratch("tune");
  const fs::path wafer = write_wafer(dir, 10, 10);
  json targets = {{"targets", json::array()}};
  for (int i = 0; i < 100; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "J%05d", i);
    targets["targets"].push_back({{"id", id}, {"downshift_mhz", 94}});
  }
  io::write_atomic(dir / "targets.json", io::dump(targets));
  REQUIRE(run({"--output", (dir / "plan.json").string(), "plan", wafer.string(), (dir / "targets.json").string()}).code == kExitOk);
  const std::string plan = (dir / "plan.json").string();

  CHECK(run({"--output", dir.string(), "tune", wafer.string(), plan}).code == kExitInputError);
  REQUIRE(run({"--seed", "7", "--output", (dir / "a").string(), "tune", wafer.string(), plan}).code == kExitOk);
  REQUIRE(run({"--seed", "7", "--output", (dir / "b").string(), "tune", wafer.string(), plan}).code == kExitOk);
  CHECK(io::read_text(dir / "a" / "tune_traces.json") == io::read_text(dir / "b" / "tune_traces.json"));
  const json summary = io::read_json(dir / "a" / "tune_summary.json");
  CHECK(summary["count"] == 100);
  CHECK(summary["convergence_fraction"].get<double>() >= 0.9);

  REQUIRE(run({"--format", "csv", "--output", (dir / "z").string(), "tune", wafer.string(), plan, "--zero-noise"}).code == kExitOk);
  CHECK(fs::exists(dir / "z" / "tune_traces.csv"));
  CHECK(io::read_json(dir / "z" / "tune_summary.json")["converged"] == 100);
  CHECK(run({"--seed", "7", "--output", dir.string(), "tune", wafer.string(), plan, "--step-fraction", "1.5"}).code ==
        kExitInputError);
}

TEST_CASE("tls-scan finds the static defect and reports flat maps") {
  const fs::path dir = scratch("tls");
  const Run r = run({"--seed", "3", "--output", (dir / "s").string(), "tls-scan",
                     (kData / "tls_static.json").string(), "--calibration",
                     (kData / "stark_calibration.json").string()});
  REQUIRE(r.code == kExitOk);
  const json d = io::read_json(dir / "s" / "tls_defects.json");
  CHECK(d["outcome"] == "persistent defect");
  REQUIRE(d["defects"].size() == 1);
  CHECK(d["defects"][0]["f_offset_mhz"].get<double>() == doctest::Approx(7.81).epsilon(0.1 / 7.81));
  CHECK(d["defects"][0]["g_khz"].get<double>() == doctest::Approx(76.0).epsilon(0.05));
  const auto map = io::parse_csv(io::read_text(dir / "s" / "tls_map.csv"));
  CHECK(map.rows.size() == 960);
  CHECK(map.header.size() == 266);
  const json cal = io::read_json(dir / "s" / "tls_calibration.json");
  CHECK(cal["drive"][0]["amplitude"].get<double>() == doctest::Approx(0.1847361453956368).epsilon(1e-9));

  const Run e = run({"--seed", "3", "--output", (dir / "e").string(), "tls-scan", (kData / "tls_empty.json").string()});
  REQUIRE(e.code == kExitOk);
  CHECK(e.out.find("no persistent defect") != std::string::npos);
  CHECK(run({"--output", dir.string(), "tls-scan", (kData / "tls_empty.json").string()}).code == kExitInputError);
  CHECK(run({"--seed", "1", "--output", dir.string(), "tls-scan", (kData / "tls_empty.json").string(),
             "--offset-max-mhz", "40"}).code == kExitInputError);
}

TEST_CASE("installed binary maps errors to exit codes") {
  const std::string exe = LASERTUNE_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status(exe + " --help") == 0);
  CHECK(status(exe + " fit barrier " + (kData / "barrier_table.csv").string()) == 0);
  CHECK(status(exe + " tls-scan " + (kData / "tls_empty.json").string()) == 2);
  const fs::path dir = scratch("bin");
  const fs::path wafer = write_wafer(dir, 1, 1);
  io::write_atomic(dir / "up.json", R"({"targets":[{"id":"J00000","f_target_ghz":9.0}]})");
  CHECK(status(exe + " plan " + wafer.string() + " " + (dir / "up.json").string()) == 3);
  io::write_atomic(dir / "dose.csv", "power_mw,shift_frac\n10,1\n20,-1\n30,1\n40,-1\n");
  CHECK(status(exe + " --output " + (dir / "o.json").string() + " fit dose " + (dir / "dose.csv").string()) == 4);
}
