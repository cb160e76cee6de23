#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nfcsim/io.hpp"
#include "nfcsim/scenario.hpp"

using namespace nfcsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("nfcsim_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// header line carries the run-specific hash; compare everything after it
std::string body_after_header(const std::string& text) {
  auto nl = text.find('\n');
  REQUIRE(nl != std::string::npos);
  return text.substr(nl + 1);
}

}  // namespace

TEST_CASE("scenario parsing") {
  SUBCASE("minimal config fills calibrated defaults") {
    auto cfg = scenario::parse_scenario({{"pipeline", "power"}, {"seed", 42}});
    CHECK(cfg.pipeline == "power");
    CHECK(cfg.seed == 42);
    CHECK(cfg.meander.n_runs == 6);
    CHECK(cfg.reader.L == doctest::Approx(2.2e-6));
    CHECK(cfg.sensor.L_s == doctest::Approx(3.0e-6));
    CHECK(cfg.channel.seed == 42);
  }

  SUBCASE("missing seed is reported by field name") {
    try {
      scenario::parse_scenario({{"pipeline", "power"}});
      FAIL("expected ValidationError");
    } catch (const scenario::ValidationError& e) {
      REQUIRE(e.issues().size() == 1);
      CHECK(e.issues()[0] == "seed: required field is missing");
    }
  }

  SUBCASE("all issues are collected in one pass") {
    json j = {{"pipeline", "warp-drive"},
              {"seed", 1},
              {"bits_per_point", 0},
              {"n_tags", -3},
              {"session_duration_s", -1.0},
              {"ber_bitrate", 300}};
    try {
      scenario::parse_scenario(j);
      FAIL("expected ValidationError");
    } catch (const scenario::ValidationError& e) {
      CHECK(e.issues().size() == 5);
      bool saw_pipeline = false, saw_bits = false;
      for (const auto& i : e.issues()) {
        if (i.find("pipeline") != std::string::npos) saw_pipeline = true;
        if (i.find("bits_per_point") != std::string::npos) saw_bits = true;
      }
      CHECK(saw_pipeline);
      CHECK(saw_bits);
    }
  }

  SUBCASE("section overrides land in the config") {
    json j = {{"pipeline", "ber"},
              {"seed", 9},
              {"ber_bitrate", 424},
              {"channel", {{"carrier_leak", 55.6}, {"noise_density", 2e-7}}},
              {"geometry", {{"meander", {{"n_runs", 8}}}}}};
    auto cfg = scenario::parse_scenario(j);
    CHECK(cfg.ber_bitrate == 424);
    CHECK(cfg.channel.carrier_leak.real() == doctest::Approx(55.6));
    CHECK(cfg.channel.noise_density == doctest::Approx(2e-7));
    CHECK(cfg.meander.n_runs == 8);
    // panel width follows the run count unless pinned explicitly
    CHECK(cfg.meander.panel_width == doctest::Approx(7 * 0.04));
  }

  SUBCASE("file round-trip and parse errors") {
    std::string dir = temp_dir("parse");
    json j = {{"pipeline", "protocol"}, {"seed", 3}, {"n_tags", 6}};
    io::write_text(dir + "/s.json", j.dump(2));
    auto cfg = scenario::load_scenario(dir + "/s.json");
    CHECK(cfg.n_tags == 6);
    CHECK(scenario::save_scenario(cfg) == j);

    io::write_text(dir + "/bad.json", "{not json");
    CHECK_THROWS_AS(scenario::load_scenario(dir + "/bad.json"),
                    scenario::ValidationError);
    CHECK_THROWS_AS(scenario::load_scenario(dir + "/missing.json"),
                    scenario::ValidationError);
  }
}

TEST_CASE("config hash and provenance header") {
  json a = {{"pipeline", "power"}, {"seed", 1}, {"P_in", 0.2}};
  json b = {{"P_in", 0.2}, {"seed", 1}, {"pipeline", "power"}};
  CHECK(io::config_hash(a) == io::config_hash(b));  // key order irrelevant
  json c = a;
  c["P_in"] = 0.3;
  CHECK(io::config_hash(a) != io::config_hash(c));

  auto cfg = scenario::parse_scenario(a);
  std::string h = cfg.provenance_header();
  CHECK(h.rfind("# nfcsim 0.1.0 config_hash=", 0) == 0);
  CHECK(h.find("seed=1") != std::string::npos);
  CHECK(h.find(io::hash_hex(cfg.hash())) != std::string::npos);
}

TEST_CASE("garment calibration search") {
  SUBCASE("tops targets hit the measured inductance and Q") {
    scenario::GarmentTargets t;  // defaults = tops
    auto cal = scenario::calibrate_garment(t);
    CHECK(cal.relative_residual <= 0.10);
    CHECK(cal.achieved_L ==
          doctest::Approx(2.2e-6).epsilon(t.tolerance + 1e-12));
    CHECK(cal.q_factor == doctest::Approx(10.4).epsilon(0.005));
    CHECK(cal.reader.C_each == doctest::Approx(250e-12).epsilon(0.02));
    CHECK(std::abs(cal.achieved_k) >= 0.02);
    CHECK(std::abs(cal.achieved_k) <= 0.08);
    // the pinned defaults are exactly this calibration
    auto pinned = scenario::default_tops_meander();
    CHECK(cal.meander.n_runs == pinned.n_runs);
    CHECK(cal.meander.panel_height == doctest::Approx(pinned.panel_height));
  }

  SUBCASE("bottoms targets") {
    scenario::GarmentTargets t;
    t.L = 3.0e-6;
    t.R = 23.0;
    t.n_caps = 5;
    auto cal = scenario::calibrate_garment(t);
    CHECK(cal.q_factor == doctest::Approx(11.1).epsilon(0.005));
    CHECK(cal.reader.C_each == doctest::Approx(230e-12).epsilon(0.02));
  }

  SUBCASE("unreachable target reports the best residual") {
    scenario::GarmentTargets t;
    t.L = 1e-3;  // far beyond any panel in the search box
    try {
      scenario::calibrate_garment(t);
      FAIL("expected CalibrationError");
    } catch (const scenario::CalibrationError& e) {
      CHECK(e.best_residual() > 0.9);
    }
    t.L = -1;
    CHECK_THROWS_AS(scenario::calibrate_garment(t), std::invalid_argument);
  }
}

TEST_CASE("field-map pipeline") {
  std::string dir = temp_dir("fieldmap");
  auto cfg = scenario::parse_scenario({{"pipeline", "field-map"},
                                       {"seed", 5},
                                       {"grid_nx", 9},
                                       {"grid_ny", 7},
                                       {"grid_spacing", 0.01}});
  auto out = scenario::run(cfg, dir);
  REQUIRE(out.files.size() == 2);
  std::string csv = slurp(out.files[0]);
  CHECK(csv.rfind("# nfcsim", 0) == 0);
  CHECK(csv.find("x,y,z,Bx,By,Bz,Bmag,masked") != std::string::npos);
  // 9 x 7 grid: header comment + column row + 63 samples
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
  json sidecar = json::parse(slurp(out.files[1]));
  CHECK(sidecar.at("nx") == 9);
  CHECK(sidecar.at("ny") == 7);
}

TEST_CASE("impedance pipeline") {
  std::string dir = temp_dir("impedance");
  auto cfg =
      scenario::parse_scenario({{"pipeline", "impedance"}, {"seed", 2}});
  auto out = scenario::run(cfg, dir);
  REQUIRE(out.files.size() == 2);
  std::string z = slurp(out.files[0]);
  CHECK(z.find("f_Hz,Re,Im") != std::string::npos);
  CHECK(std::count(z.begin(), z.end(), '\n') == 803);  // header x2 + 801 rows
  std::string r = slurp(out.files[1]);
  CHECK(r.find("f_Hz,ratio_coil_vs_chip,ratio_twin") != std::string::npos);
}

TEST_CASE("power pipeline writes one row per sweep point") {
  std::string dir = temp_dir("power");
  auto cfg = scenario::parse_scenario(
      {{"pipeline", "power"},
       {"seed", 4},
       {"P_in", 0.2},
       {"sweep",
        {{"variable", "offset"}, {"start", -0.03}, {"stop", 0.03},
         {"steps", 13}}}});
  auto out = scenario::run(cfg, dir);
  REQUIRE(out.files.size() == 1);
  std::string csv = slurp(out.files[0]);
  CHECK(csv.find("offset_m,k,efficiency,P_out_W,error") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 15);  // 2 headers + 13

  SUBCASE("default sweep is the 13-point misalignment scan") {
    auto cfg2 =
        scenario::parse_scenario({{"pipeline", "power"}, {"seed", 4}});
    auto out2 = scenario::run(cfg2, temp_dir("power_default"));
    std::string csv2 = slurp(out2.files[0]);
    CHECK(std::count(csv2.begin(), csv2.end(), '\n') == 15);
  }

  SUBCASE("unsupported sweep variable raises a runtime error") {
    auto bad = scenario::parse_scenario(
        {{"pipeline", "power"},
         {"seed", 4},
         {"sweep", {{"variable", "frequency"}, {"steps", 3}}}});
    CHECK_THROWS_AS(scenario::run(bad, dir), scenario::RunError);
  }
}

TEST_CASE("ber pipeline") {
  std::string dir = temp_dir("ber");
  auto cfg = scenario::parse_scenario({{"pipeline", "ber"},
                                       {"seed", 6},
                                       {"bits_per_point", 2000}});
  auto out = scenario::run(cfg, dir);
  REQUIRE(out.files.size() == 1);
  std::string csv = slurp(out.files[0]);
  CHECK(csv.find("P_in_dBm,bits,errors,ber,scheme,config_hash") !=
        std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 23);  // 2 headers + 21
  CHECK(csv.find("212kbps-BPSK") != std::string::npos);
}

TEST_CASE("protocol pipeline") {
  std::string dir = temp_dir("protocol");
  auto cfg = scenario::parse_scenario({{"pipeline", "protocol"},
                                       {"seed", 8},
                                       {"n_tags", 3},
                                       {"session_duration_s", 10.0}});
  auto out = scenario::run(cfg, dir);
  REQUIRE(out.files.size() == 4);  // 3 per-tag CSVs + summary
  json summary = json::parse(slurp(out.files.back()));
  REQUIRE(summary.at("achieved_rate_hz").size() == 3);
  CHECK(summary.at("rounds").get<long>() > 0);
  std::string tag_csv = slurp(out.files[0]);
  CHECK(tag_csv.find("t_s,value,status") != std::string::npos);
}

TEST_CASE("runs are deterministic for a fixed seed") {
  json j = {{"pipeline", "ber"}, {"seed", 31}, {"bits_per_point", 2000}};
  auto cfg = scenario::parse_scenario(j);
  std::string d1 = temp_dir("det1"), d2 = temp_dir("det2");
  auto o1 = scenario::run(cfg, d1);
  auto o2 = scenario::run(cfg, d2);
  CHECK(slurp(o1.files[0]) == slurp(o2.files[0]));

  // a different seed changes the data
  json j2 = j;
  j2["seed"] = 32;
  auto o3 = scenario::run(scenario::parse_scenario(j2), temp_dir("det3"));
  CHECK(body_after_header(slurp(o1.files[0])) !=
        body_after_header(slurp(o3.files[0])));
}

TEST_CASE("benchmark suite covers every pipeline and is reproducible") {
  auto suite = scenario::benchmark_suite_scenarios(1);
  REQUIRE(suite.size() == 8);
  std::set<std::string> pipelines;
  for (const auto& j : suite) {
    auto cfg = scenario::parse_scenario(j);  // every preset must validate
    pipelines.insert(cfg.pipeline);
  }
  CHECK(pipelines ==
        std::set<std::string>{"field-map", "impedance", "power", "ber",
                              "protocol"});
}

TEST_CASE("io helpers") {
  SUBCASE("coil path json round-trip") {
    auto path = scenario::default_tag_path();
    auto j = io::coil_path_to_json(path);
    auto back = io::coil_path_from_json(j);
    REQUIRE(back.points.size() == path.points.size());
    CHECK(back.closed == path.closed);
    CHECK(back.wire_radius == path.wire_radius);
    for (size_t i = 0; i < path.points.size(); ++i)
      CHECK(norm(back.points[i] - path.points[i]) == 0.0);
    CHECK_THROWS_AS(io::coil_path_from_json(json{{"closed", true}}),
                    std::exception);
  }

  SUBCASE("waveform iq round-trip") {
    std::string dir = temp_dir("iq");
    phy::Waveform wf;
    wf.sample_rate = phy::kDefaultSampleRate;
    for (int i = 0; i < 257; ++i)
      wf.samples.push_back({std::sin(0.1 * i), std::cos(0.2 * i)});
    io::write_waveform_iq(dir + "/w", wf);
    auto back = io::read_waveform_iq(dir + "/w");
    REQUIRE(back.samples.size() == wf.samples.size());
    CHECK(back.sample_rate == wf.sample_rate);
    for (size_t i = 0; i < wf.samples.size(); ++i) {
      // float32 storage
      CHECK(back.samples[i].real() ==
            doctest::Approx(wf.samples[i].real()).epsilon(1e-6));
      CHECK(back.samples[i].imag() ==
            doctest::Approx(wf.samples[i].imag()).epsilon(1e-6));
    }
  }

  SUBCASE("hash_hex is 16 lowercase hex digits") {
    std::string h = io::hash_hex(0xdeadbeefull);
    CHECK(h.size() == 16);
    CHECK(h == "00000000deadbeef");
  }
}
