// nfcsim command-line front end.
//
// Subcommands: field-map, impedance, link, power-sweep, ber, protocol-sim,
// run <scenario.json|benchmark-suite>, calibrate.
// Exit codes: 0 success, 2 validation error, 3 runtime simulation error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nfcsim/io.hpp"
#include "nfcsim/scenario.hpp"

using nlohmann::json;
using namespace nfcsim;

namespace {

struct GlobalOpts {
  uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 1;
  std::string format = "csv";
};

scenario::ScenarioConfig base_config(const GlobalOpts& g,
                                     const std::string& pipeline,
                                     json overrides = json::object()) {
  json j = overrides;
  j["pipeline"] = pipeline;
  if (!j.contains("seed")) j["seed"] = g.seed;
  return scenario::parse_scenario(j);
}

void report_files(const scenario::RunOutput& out, const GlobalOpts& g) {
  if (g.format == "json") {
    json j = {{"files", out.files}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "file\n";
    for (const auto& f : out.files) std::cout << f << "\n";
  }
}

geometry::CoilPath load_coil(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw scenario::ValidationError({"cannot open coil file: " + path});
  return io::coil_path_from_json(json::parse(in));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nfcsim: e-textile NFC garment link simulator"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "global RNG seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (speed only)")
      ->capture_default_str();
  app.add_option("--format", g.format, "stdout format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // field-map
  auto* fm = app.add_subcommand("field-map", "B-field map of a coil");
  std::string fm_coil, fm_reader_type = "meander";
  int fm_nx = 41, fm_ny = 41;
  double fm_spacing = 0.005;
  fm->add_option("--coil", fm_coil, "CoilPath JSON file (default: garment)");
  fm->add_option("--reader-type", fm_reader_type, "meander|helical")
      ->check(CLI::IsMember({"meander", "helical"}));
  fm->add_option("--nx", fm_nx);
  fm->add_option("--ny", fm_ny);
  fm->add_option("--spacing", fm_spacing, "grid spacing, meters");

  // impedance
  auto* imp = app.add_subcommand("impedance", "impedance and balance curves");
  double imp_f_lo = 11e6, imp_f_hi = 15e6;
  int imp_steps = 801;
  imp->add_option("--f-lo", imp_f_lo);
  imp->add_option("--f-hi", imp_f_hi);
  imp->add_option("--steps", imp_steps);

  // link
  auto* lnk = app.add_subcommand("link", "inductance matrix of two coils");
  std::string lnk_reader, lnk_tag;
  double lnk_seg = 0.005;
  lnk->add_option("--reader-coil", lnk_reader, "CoilPath JSON (default: garment)");
  lnk->add_option("--tag-coil", lnk_tag, "CoilPath JSON (default: 3 cm tag)");
  lnk->add_option("--max-seg-len", lnk_seg);

  // power-sweep
  auto* pw = app.add_subcommand("power-sweep", "power vs offset or height");
  std::string pw_var = "offset";
  double pw_start = -0.03, pw_stop = 0.03, pw_pin = 0.1;
  int pw_steps = 13;
  pw->add_option("--variable", pw_var)
      ->check(CLI::IsMember({"offset", "height"}));
  pw->add_option("--start", pw_start)->capture_default_str();
  pw->add_option("--stop", pw_stop)->capture_default_str();
  pw->add_option("--steps", pw_steps)->capture_default_str();
  pw->add_option("--p-in", pw_pin, "input power, watts")
      ->capture_default_str();

  // ber
  auto* ber = app.add_subcommand("ber", "BER vs input power sweep");
  int ber_rate = 212;
  long ber_bits = 100000;
  bool ber_single = false;
  ber->add_option("--bitrate", ber_rate)
      ->check(CLI::IsMember({106, 212, 424, 848}))
      ->capture_default_str();
  ber->add_option("--bits", ber_bits, "bits per sweep point")
      ->capture_default_str();
  ber->add_flag("--single-coil", ber_single,
                "single-coil amplifier baseline (full carrier leak)");

  // protocol-sim
  auto* prot = app.add_subcommand("protocol-sim", "multi-tag session");
  int prot_tags = 4;
  double prot_duration = 30.0;
  prot->add_option("--tags", prot_tags)->capture_default_str();
  prot->add_option("--duration", prot_duration, "seconds")
      ->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "run a scenario file or preset");
  std::string run_path;
  run->add_option("scenario", run_path,
                  "scenario JSON path or 'benchmark-suite'")
      ->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "garment geometry calibration");

  // let global flags (--seed, --format, ...) appear after the subcommand too
  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();
  double cal_l = 2.2e-6, cal_r = 18.0;
  int cal_caps = 4;
  cal->add_option("--target-l", cal_l, "henries")->capture_default_str();
  cal->add_option("--target-r", cal_r, "ohms")->capture_default_str();
  cal->add_option("--n-caps", cal_caps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (fm->parsed()) {
      if (!fm_coil.empty()) {
        auto coil = load_coil(fm_coil);
        auto fil = geometry::discretize(coil, 0.005);
        magnetics::GridSpec spec;
        Vec3 c = coil.centroid();
        spec.origin = c - Vec3{fm_nx / 2 * fm_spacing, 0, 0.1};
        spec.axis_u = {1, 0, 0};
        spec.axis_v = {0, 0, 1};
        spec.nx = fm_nx;
        spec.ny = fm_ny;
        spec.spacing = fm_spacing;
        auto map = magnetics::field_map(fil, 1.0, spec);
        std::filesystem::create_directories(g.out_dir);
        std::string file =
            (std::filesystem::path(g.out_dir) / "coil_field.csv").string();
        io::write_field_map_csv(file, map);
        report_files({{file, file + ".json"}}, g);
      } else {
        auto cfg = base_config(
            g, "field-map",
            {{"geometry", {{"reader_type", fm_reader_type}}},
             {"grid_nx", fm_nx},
             {"grid_ny", fm_ny},
             {"grid_spacing", fm_spacing}});
        report_files(scenario::run(cfg, g.out_dir, g.threads), g);
      }
    } else if (imp->parsed()) {
      auto cfg = base_config(g, "impedance",
                             {{"sweep",
                               {{"variable", "frequency"},
                                {"start", imp_f_lo},
                                {"stop", imp_f_hi},
                                {"steps", imp_steps}}}});
      report_files(scenario::run(cfg, g.out_dir, g.threads), g);
    } else if (lnk->parsed()) {
      geometry::CoilPath reader =
          lnk_reader.empty()
              ? geometry::make_meander(scenario::default_tops_meander())
              : load_coil(lnk_reader);
      geometry::CoilPath tag =
          lnk_tag.empty()
              ? scenario::place_tag(
                    scenario::default_tag_path(),
                    scenario::default_tag_position(
                        scenario::default_tops_meander()))
              : load_coil(lnk_tag);
      auto lm = magnetics::link_matrix({geometry::discretize(reader, lnk_seg),
                                        geometry::discretize(tag, lnk_seg)});
      if (g.format == "json") {
        json j = {{"L_reader_H", lm.self_L[0]},
                  {"L_tag_H", lm.self_L[1]},
                  {"M_H", lm.mutual_M[0][1]},
                  {"k", lm.k[0][1]}};
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "L_reader_H,L_tag_H,M_H,k\n"
                  << io::fmt(lm.self_L[0]) << ',' << io::fmt(lm.self_L[1])
                  << ',' << io::fmt(lm.mutual_M[0][1]) << ','
                  << io::fmt(lm.k[0][1]) << "\n";
      }
    } else if (pw->parsed()) {
      auto cfg = base_config(g, "power",
                             {{"P_in", pw_pin},
                              {"sweep",
                               {{"variable", pw_var},
                                {"start", pw_start},
                                {"stop", pw_stop},
                                {"steps", pw_steps}}}});
      report_files(scenario::run(cfg, g.out_dir, g.threads), g);
    } else if (ber->parsed()) {
      json overrides = {{"ber_bitrate", ber_rate},
                        {"bits_per_point", ber_bits}};
      if (ber_single)
        overrides["channel"] = {
            {"carrier_leak", scenario::kSingleCoilLeak}};
      auto cfg = base_config(g, "ber", overrides);
      report_files(scenario::run(cfg, g.out_dir, g.threads), g);
    } else if (prot->parsed()) {
      auto cfg = base_config(g, "protocol",
                             {{"n_tags", prot_tags},
                              {"session_duration_s", prot_duration}});
      report_files(scenario::run(cfg, g.out_dir, g.threads), g);
    } else if (run->parsed()) {
      if (run_path == "benchmark-suite") {
        report_files(scenario::run_benchmark_suite(g.out_dir, g.seed,
                                                   g.threads),
                     g);
      } else {
        auto cfg = scenario::load_scenario(run_path);
        report_files(scenario::run(cfg, g.out_dir, g.threads), g);
      }
    } else if (cal->parsed()) {
      scenario::GarmentTargets t;
      t.L = cal_l;
      t.R = cal_r;
      t.n_caps = cal_caps;
      auto result = scenario::calibrate_garment(t);
      if (g.format == "json") {
        json j = {{"n_runs", result.meander.n_runs},
                  {"panel_height_m", result.meander.panel_height},
                  {"panel_width_m", result.meander.panel_width},
                  {"achieved_L_H", result.achieved_L},
                  {"target_L_H", result.target_L},
                  {"relative_residual", result.relative_residual},
                  {"Q", result.q_factor},
                  {"k_reference_tag", result.achieved_k},
                  {"C_each_F", result.reader.C_each}};
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "n_runs,panel_height_m,achieved_L_H,target_L_H,"
                     "relative_residual,Q,k_reference_tag,C_each_F\n"
                  << result.meander.n_runs << ','
                  << io::fmt(result.meander.panel_height) << ','
                  << io::fmt(result.achieved_L) << ','
                  << io::fmt(result.target_L) << ','
                  << io::fmt(result.relative_residual) << ','
                  << io::fmt(result.q_factor) << ','
                  << io::fmt(result.achieved_k) << ','
                  << io::fmt(result.reader.C_each) << "\n";
      }
    }
  } catch (const scenario::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
