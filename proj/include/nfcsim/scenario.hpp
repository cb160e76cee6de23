#pragma once

// Declarative experiment layer: JSON scenario configs, garment calibration,
// sweep pipelines with deterministic seeding, and CSV/JSON outputs with a
// provenance header.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nfcsim/circuit.hpp"
#include "nfcsim/geometry.hpp"
#include "nfcsim/io.hpp"
#include "nfcsim/magnetics.hpp"
#include "nfcsim/phy.hpp"
#include "nfcsim/power.hpp"
#include "nfcsim/protocol.hpp"

namespace nfcsim {
namespace scenario {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "scenario validation failed:";
    for (const auto& i : v) s += "\n  - " + i;
    return s;
  }
  std::vector<std::string> issues_;
};

class RunError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Calibrated defaults. The garment geometry below was selected by
// calibrate_garment against the measured tops/bottoms values (L 2.2/3.0 uH,
// R 18/23 ohm, four 250 pF / five 230 pF series capacitors).

struct GarmentTargets {
  double L = 2.2e-6;   // henries
  double R = 18.0;     // ohms
  double Q = 0.0;                   // optional; 0 = derive from L and R
  double k_at_reference_tag = 0.0;  // optional; reported, not searched
  double f0 = circuit::kNfcCarrierHz;
  int n_caps = 4;
  double wire_spacing = 0.04;
  double wire_radius = 0.002;
  double tolerance = 0.10;  // relative L residual accepted
};

struct GarmentCalibration {
  geometry::MeanderSpec meander;
  circuit::ReaderCircuit reader;
  double achieved_L = 0.0;
  double target_L = 0.0;
  double relative_residual = 0.0;
  double q_factor = 0.0;
  double achieved_k = 0.0;  // default tag at the reference pose
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

// Bounded search over run count and panel height for the inductance target;
// R is set directly from the measurement, so Q follows by construction.
inline GarmentCalibration calibrate_garment(const GarmentTargets& t) {
  if (t.L <= 0 || t.R <= 0 || t.f0 <= 0)
    throw std::invalid_argument("calibrate_garment: targets must be positive");
  double best_residual = std::numeric_limits<double>::infinity();
  geometry::MeanderSpec best;
  double best_l = 0.0;
  for (int n_runs = 6; n_runs <= 18; n_runs += 2) {
    for (double height = 0.40; height <= 0.701; height += 0.05) {
      geometry::MeanderSpec spec;
      spec.n_runs = n_runs;
      spec.panel_height = height;
      spec.wire_spacing = t.wire_spacing;
      spec.wire_radius = t.wire_radius;
      spec.panel_width = (n_runs - 1) * t.wire_spacing;
      auto fil = geometry::discretize(geometry::make_meander(spec), 0.01);
      double l = magnetics::self_inductance(fil);
      double residual = std::abs(l - t.L) / t.L;
      if (residual < best_residual) {
        best_residual = residual;
        best = spec;
        best_l = l;
      }
    }
  }
  if (best_residual > t.tolerance)
    throw CalibrationError(
        "calibrate_garment: inductance target unreachable; best residual " +
            std::to_string(best_residual),
        best_residual);
  GarmentCalibration out;
  out.meander = best;
  out.achieved_L = best_l;
  out.target_L = t.L;
  out.relative_residual = best_residual;
  out.reader.R = t.R;
  out.reader.L = t.L;
  out.reader.n_caps = t.n_caps;
  out.reader.C_each = circuit::tune_distributed_caps(t.L, t.f0, t.n_caps);
  out.q_factor = circuit::q_factor(out.reader, t.f0);
  // Achieved-vs-target report for the reference tag coupling (3 cm, 6 turns,
  // centered between the two middle runs at 5 mm height).
  auto tag = geometry::make_circular_coil(0.03, 6, 0.0003, 0.0001);
  int left_run = best.n_runs / 2 - 1;
  Vec3 at{(left_run + 0.5) * best.wire_spacing, best.panel_height / 2, 0.005};
  Vec3 shift = at - tag.centroid();
  for (auto& p : tag.points) p += shift;
  auto reader_fil = geometry::discretize(geometry::make_meander(best), 0.01);
  auto tag_fil = geometry::discretize(tag, 0.005);
  out.achieved_k =
      magnetics::mutual_inductance(reader_fil, tag_fil) /
      std::sqrt(best_l * magnetics::self_inductance(tag_fil));
  return out;
}

// Pinned result of calibrate_garment for the tops targets; see
// tests for the calibration cross-check.
inline geometry::MeanderSpec default_tops_meander() {
  geometry::MeanderSpec spec;
  spec.n_runs = 6;
  spec.panel_height = 0.65;
  spec.wire_spacing = 0.04;
  spec.wire_radius = 0.002;
  spec.panel_width = (spec.n_runs - 1) * spec.wire_spacing;
  return spec;
}

inline circuit::ReaderCircuit default_tops_reader() {
  circuit::ReaderCircuit c;
  c.R = 18.0;
  c.L = 2.2e-6;
  c.n_caps = 4;
  c.C_each = circuit::tune_distributed_caps(c.L, circuit::kNfcCarrierHz, 4);
  return c;
}

inline circuit::ReaderCircuit default_bottoms_reader() {
  circuit::ReaderCircuit c;
  c.R = 23.0;
  c.L = 3.0e-6;
  c.n_caps = 5;
  c.C_each = circuit::tune_distributed_caps(c.L, circuit::kNfcCarrierHz, 5);
  return c;
}

// Stray shunt of the knitted coil; calibrated so the coil-vs-chip balance
// band lands at the 0.2 MHz order.
inline constexpr double kKnittedParasiticC = 220e-12;

// 3 cm, 6-turn sensor tag (Q ~ 34 at 13.56 MHz).
inline geometry::CoilPath default_tag_path() {
  return geometry::make_circular_coil(0.03, 6, 0.0003, 0.0001);
}

inline circuit::SensorCircuit default_sensor_circuit() {
  circuit::SensorCircuit s;
  s.L_s = 3.0e-6;
  s.R_s = 2 * M_PI * circuit::kNfcCarrierHz * s.L_s / 34.0;  // Q_s = 34
  s.C_s = 1.0 / std::pow(2 * M_PI * circuit::kNfcCarrierHz, 2) / s.L_s;
  return s;
}

// Tag centered between the two middle runs of the meander, 5 mm above the
// garment plane (the strong-field pocket of the meander pattern).
inline Vec3 default_tag_position(const geometry::MeanderSpec& m,
                                 double height = 0.005) {
  int left_run = m.n_runs / 2 - 1;
  double x = (left_run + 0.5) * m.wire_spacing;
  return {x, m.panel_height / 2, height};
}

inline geometry::CoilPath place_tag(const geometry::CoilPath& tag,
                                    const Vec3& at) {
  geometry::Placement pl;
  pl.translation = at - tag.centroid();
  return geometry::place(tag, pl);
}

// ---------------------------------------------------------------------------
// Calibrated channel. One-point noise calibration: the twin-bridge 212 kbps
// BPSK curve crosses BER 1e-3 at -10 dBm; the single-coil readout leaks the
// full carrier into the receiver, whose source noise then dominates and
// shifts the crossing right by ~13 dB.

inline constexpr double kLinkGainAt0dBm = 3.086;  // R_amp*V_in*dZ/Z^2, volts
inline constexpr double kTwinBridgeLeak = 0.1;    // residual imbalance, volts
inline constexpr double kSingleCoilLeak = 55.6;   // R_amp*V_in/Z, volts
inline constexpr double kSourceNoiseRel = 1.165e-9;      // 1/Hz
inline constexpr double kReceiverNoiseDensity = 1.9e-7;  // V^2/Hz

inline phy::ChannelConfig default_twin_bridge_channel(uint64_t seed = 0) {
  phy::ChannelConfig c;
  c.link_gain = kLinkGainAt0dBm;
  c.carrier_leak = kTwinBridgeLeak;
  c.noise_density = kReceiverNoiseDensity;
  c.source_noise_rel = kSourceNoiseRel;
  c.seed = seed;
  return c;
}

inline phy::ChannelConfig default_single_coil_channel(uint64_t seed = 0) {
  phy::ChannelConfig c = default_twin_bridge_channel(seed);
  c.carrier_leak = kSingleCoilLeak;
  return c;
}

// Frame timing calibrated so a 4-tag session lands in the 1-2 Hz per-tag
// band.
inline protocol::FrameConfig default_frame_config() {
  protocol::FrameConfig f;
  f.slots_per_round = 4;
  f.slot_duration_s = 0.07;
  f.per_read_payload_bits = 256;
  f.bitrate_kbps = 106.0;
  return f;
}

// ---------------------------------------------------------------------------
// Scenario config

struct SweepSpec {
  std::string variable;  // offset | height | p_in_dbm | frequency
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  std::vector<double> grid() const {
    std::vector<double> g(steps);
    for (int i = 0; i < steps; ++i)
      g[i] = steps > 1 ? start + (stop - start) * i / (steps - 1) : start;
    return g;
  }
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string pipeline;  // field-map | impedance | power | ber | protocol
  uint64_t seed = 0;
  std::string out_prefix = "out";

  geometry::MeanderSpec meander = default_tops_meander();
  std::string reader_type = "meander";  // meander | twin-meander | helical
  double twin_separation = 0.05;
  double helical_circumference = 0.9;
  int helical_turns = 4;

  double tag_height = 0.005;
  circuit::ReaderCircuit reader = default_tops_reader();
  circuit::SensorCircuit sensor = default_sensor_circuit();
  circuit::BridgeConfig bridge;
  phy::ChannelConfig channel = default_twin_bridge_channel();
  phy::ReceiverConfig receiver;
  protocol::FrameConfig frame = default_frame_config();

  SweepSpec sweep;
  double P_in = 0.1;  // watts
  int ber_bitrate = 212;
  long bits_per_point = 100000;
  int n_tags = 4;
  double session_duration_s = 30.0;
  double grid_spacing = 0.005;
  int grid_nx = 41, grid_ny = 41;
  double max_seg_len = 0.01;

  json raw;  // canonical form used for hashing

  uint64_t hash() const { return io::config_hash(raw); }
  std::string provenance_header() const {
    return std::string("# nfcsim ") + kVersion +
           " config_hash=" + io::hash_hex(hash()) +
           " seed=" + std::to_string(seed);
  }
};

namespace detail {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void parse_sections(const json& j, ScenarioConfig& cfg,
                           std::vector<std::string>& issues) {
  get_if(j, "name", cfg.name);
  get_if(j, "out_prefix", cfg.out_prefix);
  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    get_if(g, "reader_type", cfg.reader_type);
    if (g.contains("meander")) {
      const json& m = g.at("meander");
      get_if(m, "n_runs", cfg.meander.n_runs);
      get_if(m, "panel_height", cfg.meander.panel_height);
      get_if(m, "wire_spacing", cfg.meander.wire_spacing);
      get_if(m, "wire_radius", cfg.meander.wire_radius);
      cfg.meander.panel_width =
          (cfg.meander.n_runs - 1) * cfg.meander.wire_spacing;
      get_if(m, "panel_width", cfg.meander.panel_width);
    }
    get_if(g, "twin_separation", cfg.twin_separation);
    get_if(g, "helical_circumference", cfg.helical_circumference);
    get_if(g, "helical_turns", cfg.helical_turns);
    get_if(g, "tag_height", cfg.tag_height);
    get_if(g, "max_seg_len", cfg.max_seg_len);
  }
  if (j.contains("circuit")) {
    const json& c = j.at("circuit");
    if (c.contains("reader")) {
      const json& r = c.at("reader");
      get_if(r, "R", cfg.reader.R);
      get_if(r, "L", cfg.reader.L);
      get_if(r, "n_caps", cfg.reader.n_caps);
      get_if(r, "C_each", cfg.reader.C_each);
      get_if(r, "parasitic_C", cfg.reader.parasitic_C);
    }
    if (c.contains("sensor")) {
      const json& s = c.at("sensor");
      get_if(s, "R_s", cfg.sensor.R_s);
      get_if(s, "L_s", cfg.sensor.L_s);
      get_if(s, "C_s", cfg.sensor.C_s);
    }
    if (c.contains("bridge")) {
      get_if(c.at("bridge"), "R_amp", cfg.bridge.R_amp);
      get_if(c.at("bridge"), "V_in", cfg.bridge.V_in);
    }
  }
  if (j.contains("channel")) {
    const json& c = j.at("channel");
    double gain = cfg.channel.link_gain.real();
    double leak = cfg.channel.carrier_leak.real();
    get_if(c, "link_gain", gain);
    get_if(c, "carrier_leak", leak);
    cfg.channel.link_gain = gain;
    cfg.channel.carrier_leak = leak;
    get_if(c, "noise_density", cfg.channel.noise_density);
    get_if(c, "source_noise_rel", cfg.channel.source_noise_rel);
  }
  if (j.contains("receiver")) {
    const json& r = j.at("receiver");
    get_if(r, "butterworth_order", cfg.receiver.butterworth_order);
    get_if(r, "cutoff_per_bitrate", cfg.receiver.cutoff_per_bitrate);
    get_if(r, "lms_taps", cfg.receiver.lms_taps);
    get_if(r, "lms_step", cfg.receiver.lms_step);
    get_if(r, "preamble_bits", cfg.receiver.preamble_bits);
  }
  if (j.contains("frame")) {
    const json& f = j.at("frame");
    get_if(f, "slots_per_round", cfg.frame.slots_per_round);
    get_if(f, "slot_duration_s", cfg.frame.slot_duration_s);
    get_if(f, "per_read_payload_bits", cfg.frame.per_read_payload_bits);
    get_if(f, "bitrate_kbps", cfg.frame.bitrate_kbps);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    get_if(s, "variable", cfg.sweep.variable);
    get_if(s, "start", cfg.sweep.start);
    get_if(s, "stop", cfg.sweep.stop);
    get_if(s, "steps", cfg.sweep.steps);
  }
  get_if(j, "P_in", cfg.P_in);
  get_if(j, "ber_bitrate", cfg.ber_bitrate);
  get_if(j, "bits_per_point", cfg.bits_per_point);
  get_if(j, "n_tags", cfg.n_tags);
  get_if(j, "session_duration_s", cfg.session_duration_s);
  get_if(j, "grid_spacing", cfg.grid_spacing);
  get_if(j, "grid_nx", cfg.grid_nx);
  get_if(j, "grid_ny", cfg.grid_ny);

  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) issues.push_back(msg);
  };
  check(cfg.pipeline == "field-map" || cfg.pipeline == "impedance" ||
            cfg.pipeline == "power" || cfg.pipeline == "ber" ||
            cfg.pipeline == "protocol",
        "pipeline: must be one of field-map|impedance|power|ber|protocol");
  try {
    cfg.meander.validate();
  } catch (const std::exception& e) {
    issues.push_back(std::string("geometry.meander: ") + e.what());
  }
  try {
    cfg.reader.validate();
  } catch (const std::exception& e) {
    issues.push_back(std::string("circuit.reader: ") + e.what());
  }
  try {
    cfg.sensor.validate();
  } catch (const std::exception& e) {
    issues.push_back(std::string("circuit.sensor: ") + e.what());
  }
  try {
    cfg.frame.validate();
  } catch (const std::exception& e) {
    issues.push_back(std::string("frame: ") + e.what());
  }
  check(cfg.channel.noise_density >= 0, "channel.noise_density: must be >= 0");
  check(cfg.sweep.steps >= 1, "sweep.steps: must be >= 1");
  check(cfg.bits_per_point > 0, "bits_per_point: must be > 0");
  check(cfg.n_tags >= 0, "n_tags: must be >= 0");
  check(cfg.session_duration_s > 0, "session_duration_s: must be > 0");
  check(cfg.ber_bitrate == 106 || cfg.ber_bitrate == 212 ||
            cfg.ber_bitrate == 424 || cfg.ber_bitrate == 848,
        "ber_bitrate: must be 106, 212, 424 or 848");
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const json& j) {
  std::vector<std::string> issues;
  ScenarioConfig cfg;
  cfg.raw = j;
  if (!j.contains("pipeline"))
    issues.push_back("pipeline: required field is missing");
  else
    cfg.pipeline = j.at("pipeline").get<std::string>();
  if (!j.contains("seed"))
    issues.push_back("seed: required field is missing");
  else
    cfg.seed = j.at("seed").get<uint64_t>();
  detail::parse_sections(j, cfg, issues);
  if (!issues.empty()) throw ValidationError(issues);
  cfg.channel.seed = cfg.seed;
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open scenario file: " + path});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("parse error: ") + e.what()});
  }
  return parse_scenario(j);
}

inline json save_scenario(const ScenarioConfig& cfg) { return cfg.raw; }

// ---------------------------------------------------------------------------
// Pipelines

struct RunOutput {
  std::vector<std::string> files;
};

namespace detail {

inline geometry::CoilPath reader_path(const ScenarioConfig& cfg) {
  if (cfg.reader_type == "helical")
    return geometry::make_helical_body_coil(cfg.helical_circumference,
                                            cfg.helical_turns, 0.05, 0.002);
  return geometry::make_meander(cfg.meander);
}

inline std::string out_path(const std::string& out_dir,
                            const std::string& name) {
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / name).string();
}

// Deterministic parallel map: results land by index regardless of the
// thread count.
inline void parallel_for(int n, int threads,
                         const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  int workers = std::min(threads, n);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline RunOutput run_field_map(const ScenarioConfig& cfg,
                               const std::string& out_dir, int threads = 1) {
  (void)threads;
  auto path = detail::reader_path(cfg);
  auto fil = geometry::discretize(path, cfg.max_seg_len);
  magnetics::GridSpec grid;
  // Vertical cut through the panel center: u across the runs, v into depth.
  grid.origin = {0.0, cfg.meander.panel_height / 2, -0.1};
  grid.axis_u = {1, 0, 0};
  grid.axis_v = {0, 0, 1};
  grid.nx = cfg.grid_nx;
  grid.ny = cfg.grid_ny;
  grid.spacing = cfg.grid_spacing;
  auto map = magnetics::field_map(fil, 1.0, grid);
  std::string file = detail::out_path(out_dir, cfg.out_prefix + "_field.csv");
  io::write_field_map_csv(file, map, cfg.provenance_header());
  return {{file, file + ".json"}};
}

inline RunOutput run_impedance(const ScenarioConfig& cfg,
                               const std::string& out_dir) {
  int n = std::max(cfg.sweep.steps, 2);
  double f_lo = cfg.sweep.variable == "frequency" ? cfg.sweep.start : 11e6;
  double f_hi = cfg.sweep.variable == "frequency" ? cfg.sweep.stop : 15e6;
  if (cfg.sweep.variable != "frequency") n = 801;
  std::vector<double> f(n);
  std::vector<circuit::Complex> z1(n), z2(n);
  circuit::ReaderCircuit knitted = cfg.reader;
  knitted.parasitic_C =
      cfg.reader.parasitic_C > 0 ? cfg.reader.parasitic_C : kKnittedParasiticC;
  circuit::ReaderCircuit chip =
      circuit::fit_ideal_rlc(knitted, circuit::kNfcCarrierHz);
  for (int i = 0; i < n; ++i) {
    f[i] = f_lo + (f_hi - f_lo) * i / (n - 1);
    z1[i] = circuit::impedance(knitted, f[i]);
    z2[i] = circuit::impedance(chip, f[i]);
  }
  auto ratio = circuit::impedance_difference_ratio(f, z1, z2);
  std::string fz = detail::out_path(out_dir, cfg.out_prefix + "_z_coil.csv");
  std::string fr = detail::out_path(out_dir, cfg.out_prefix + "_ratio.csv");
  io::write_impedance_csv(fz, f, z1, cfg.provenance_header());
  std::ostringstream os;
  os << cfg.provenance_header() << "\n";
  os << "f_Hz,ratio_coil_vs_chip,ratio_twin\n";
  for (int i = 0; i < n; ++i)
    os << io::fmt(f[i]) << ',' << io::fmt(ratio.ratio[i]) << ','
       << io::fmt(0.0) << "\n";  // congruent twins: identical curves
  io::write_text(fr, os.str());
  return {{fz, fr}};
}

inline power::LinkTemplate link_template(const ScenarioConfig& cfg) {
  power::LinkTemplate t;
  t.reader_path = detail::reader_path(cfg);
  t.tag_path = place_tag(default_tag_path(),
                         default_tag_position(cfg.meander, cfg.tag_height));
  t.reader = cfg.reader;
  t.sensor = cfg.sensor;
  t.P_in = cfg.P_in;
  t.max_seg_len = cfg.max_seg_len;
  return t;
}

inline RunOutput run_power(const ScenarioConfig& cfg,
                           const std::string& out_dir) {
  auto t = link_template(cfg);
  SweepSpec sweep = cfg.sweep;
  if (sweep.variable.empty()) {
    sweep.variable = "offset";
    sweep.start = -0.03;
    sweep.stop = 0.03;
    sweep.steps = 13;
  }
  auto grid = sweep.grid();
  if (sweep.variable != "offset" && sweep.variable != "height")
    throw RunError("power pipeline: sweep.variable must be offset or height");
  std::ostringstream os;
  os << cfg.provenance_header() << "\n";
  os << sweep.variable << "_m,k,efficiency,P_out_W,error\n";
  // Row errors are recorded in the last column; the sweep continues.
  for (double x : grid) {
    power::PowerResult r;
    std::string err;
    try {
      r = sweep.variable == "offset" ? power::sweep_misalignment(t, {x}).at(0)
                                     : power::sweep_distance(t, {x}).at(0);
    } catch (const std::exception& e) {
      err = e.what();
    }
    os << io::fmt(x) << ',' << io::fmt(r.k) << ',' << io::fmt(r.efficiency)
       << ',' << io::fmt(r.P_out) << ',' << err << "\n";
  }
  std::string file = detail::out_path(out_dir, cfg.out_prefix + "_power.csv");
  io::write_text(file, os.str());
  return {{file}};
}

inline RunOutput run_ber(const ScenarioConfig& cfg, const std::string& out_dir,
                         int threads = 1) {
  (void)threads;
  phy::BerSweepConfig bc;
  bc.scheme = phy::ModulationScheme::from_bitrate(cfg.ber_bitrate);
  bc.channel = cfg.channel;
  bc.bits_per_point = cfg.bits_per_point;
  bc.seed = cfg.seed;
  if (cfg.sweep.variable == "p_in_dbm") {
    bc.p_start_dbm = cfg.sweep.start;
    bc.p_stop_dbm = cfg.sweep.stop;
    if (cfg.sweep.steps > 1)
      bc.p_step_db =
          (cfg.sweep.stop - cfg.sweep.start) / (cfg.sweep.steps - 1);
  }
  auto points = phy::ber_sweep(bc);
  std::string file = detail::out_path(out_dir, cfg.out_prefix + "_ber.csv");
  io::write_ber_csv(file, points,
                    std::to_string(cfg.ber_bitrate) +
                        (bc.scheme.keying == phy::Keying::kOok ? "kbps-OOK"
                                                               : "kbps-BPSK"),
                    io::hash_hex(cfg.hash()), cfg.provenance_header());
  return {{file}};
}

inline RunOutput run_protocol(const ScenarioConfig& cfg,
                              const std::string& out_dir) {
  std::vector<protocol::TagDescriptor> tags(cfg.n_tags);
  std::vector<double> ber(cfg.n_tags, 1e-4);
  std::vector<double> truth(cfg.n_tags);
  for (int i = 0; i < cfg.n_tags; ++i) {
    tags[i].uid = 1000 + i;
    tags[i].sensor_kind = protocol::SensorKind::kTemperature;
    tags[i].calibration = {100.0, 30.0};  // degC per ratio, textile baseline
    truth[i] = 30.0 + 0.1 * i;
  }
  auto result = protocol::run_session(tags, cfg.frame, ber,
                                      cfg.session_duration_s, cfg.seed, truth);
  std::string prefix = detail::out_path(out_dir, cfg.out_prefix + "_session");
  io::write_session_csv(prefix, tags, result, cfg.provenance_header());
  RunOutput out;
  for (const auto& tag : tags)
    out.files.push_back(prefix + "_tag" + std::to_string(tag.uid) + ".csv");
  out.files.push_back(prefix + "_summary.json");
  return out;
}

inline RunOutput run(const ScenarioConfig& cfg, const std::string& out_dir,
                     int threads = 1) {
  if (cfg.pipeline == "field-map") return run_field_map(cfg, out_dir, threads);
  if (cfg.pipeline == "impedance") return run_impedance(cfg, out_dir);
  if (cfg.pipeline == "power") return run_power(cfg, out_dir);
  if (cfg.pipeline == "ber") return run_ber(cfg, out_dir, threads);
  if (cfg.pipeline == "protocol") return run_protocol(cfg, out_dir);
  throw RunError("unknown pipeline: " + cfg.pipeline);
}

// ---------------------------------------------------------------------------
// Bundled preset: desk-scale analogs of the field-confinement maps, the
// impedance balance, the power sweeps, the BER sweeps, and a 4-tag session.

inline std::vector<json> benchmark_suite_scenarios(uint64_t seed = 1) {
  std::vector<json> out;
  out.push_back({{"name", "field-meander"},
                 {"pipeline", "field-map"},
                 {"seed", seed},
                 {"out_prefix", "meander"},
                 {"grid_nx", 33},
                 {"grid_ny", 25},
                 {"grid_spacing", 0.005}});
  out.push_back({{"name", "field-helical"},
                 {"pipeline", "field-map"},
                 {"seed", seed},
                 {"out_prefix", "helical"},
                 {"geometry", {{"reader_type", "helical"}}},
                 {"grid_nx", 33},
                 {"grid_ny", 25},
                 {"grid_spacing", 0.005}});
  out.push_back({{"name", "impedance-balance"},
                 {"pipeline", "impedance"},
                 {"seed", seed},
                 {"out_prefix", "balance"}});
  out.push_back({{"name", "power-misalignment"},
                 {"pipeline", "power"},
                 {"seed", seed},
                 {"out_prefix", "misalign"},
                 {"P_in", 0.2},
                 {"sweep",
                  {{"variable", "offset"},
                   {"start", -0.03},
                   {"stop", 0.03},
                   {"steps", 13}}}});
  out.push_back({{"name", "power-distance"},
                 {"pipeline", "power"},
                 {"seed", seed},
                 {"out_prefix", "distance"},
                 {"P_in", 0.2},
                 {"sweep",
                  {{"variable", "height"},
                   {"start", 0.005},
                   {"stop", 0.05},
                   {"steps", 10}}}});
  out.push_back({{"name", "ber-twin-212"},
                 {"pipeline", "ber"},
                 {"seed", seed},
                 {"out_prefix", "ber212"},
                 {"ber_bitrate", 212},
                 {"bits_per_point", 20000}});
  json single = {{"name", "ber-single-coil-212"},
                 {"pipeline", "ber"},
                 {"seed", seed},
                 {"out_prefix", "ber212_single"},
                 {"ber_bitrate", 212},
                 {"bits_per_point", 20000},
                 {"channel", {{"carrier_leak", kSingleCoilLeak}}}};
  out.push_back(single);
  out.push_back({{"name", "session-4tag"},
                 {"pipeline", "protocol"},
                 {"seed", seed},
                 {"out_prefix", "session4"},
                 {"n_tags", 4},
                 {"session_duration_s", 30.0}});
  return out;
}

inline RunOutput run_benchmark_suite(const std::string& out_dir,
                                     uint64_t seed = 1, int threads = 1) {
  RunOutput all;
  for (const auto& j : benchmark_suite_scenarios(seed)) {
    auto cfg = parse_scenario(j);
    auto out = run(cfg, out_dir, threads);
    all.files.insert(all.files.end(), out.files.begin(), out.files.end());
  }
  return all;
}

}  // namespace scenario
}  // namespace nfcsim
