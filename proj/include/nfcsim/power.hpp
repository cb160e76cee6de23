#pragma once

// Wireless power transfer over an inductive link: optimal load, exact
// two-mesh AC-to-AC efficiency, and geometry-driven misalignment, distance,
// and motion sweeps.

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfcsim/circuit.hpp"
#include "nfcsim/geometry.hpp"
#include "nfcsim/magnetics.hpp"

namespace nfcsim {
namespace power {

using circuit::Complex;

struct PowerLink {
  circuit::ReaderCircuit reader;
  circuit::SensorCircuit sensor;
  circuit::InductiveLink link;
  double P_in = 0.0;  // watts

  void validate() const {
    reader.validate();
    sensor.validate();
    if (P_in < 0) throw std::invalid_argument("PowerLink: P_in >= 0");
    double m = link.k * std::sqrt(reader.L * sensor.L_s);
    if (std::abs(m - link.M) > 1e-12 * std::max(std::abs(m), 1e-30))
      throw std::invalid_argument("PowerLink: M inconsistent with k, L, L_s");
  }
};

struct PowerResult {
  double P_out = 0.0;      // watts
  double efficiency = 0.0;
  double k = 0.0;          // coupling at this sweep point
  bool outage = false;
};

// Sensor series impedance excluding the load.
inline Complex sensor_series_impedance(const circuit::SensorCircuit& s,
                                       double f) {
  double w = 2 * M_PI * f;
  return Complex(s.R_s, 0) + Complex(0, w * s.L_s) +
         1.0 / Complex(0, w * s.C_s);
}

// Maximum-efficiency load: resistive part R_s * sqrt(1 + k^2 Qr Qs), reactive
// part cancelling the residual sensor reactance at f.
inline Complex optimal_load(const PowerLink& pl) {
  pl.validate();
  double f = pl.link.f;
  double q_r = circuit::q_factor(pl.reader, f);
  double q_s = pl.sensor.q_factor(f);
  double x = pl.link.k * pl.link.k * q_r * q_s;
  double r_opt = pl.sensor.R_s * std::sqrt(1.0 + x);
  Complex zs = sensor_series_impedance(pl.sensor, f);
  return {r_opt, -zs.imag()};
}

// Closed-form maximum efficiency for figure of merit x = k^2 Qr Qs.
inline double max_efficiency(double x) {
  double s = std::sqrt(1.0 + x);
  return x / ((1.0 + s) * (1.0 + s));
}

// Exact two-mesh solve: eta = P_load / P_delivered at the reader terminals.
inline double transfer_efficiency(const PowerLink& pl, Complex z_load) {
  pl.validate();
  if (std::abs(z_load) <= 0)
    throw circuit::DegenerateError("transfer_efficiency: degenerate load");
  double f = pl.link.f;
  double w = 2 * M_PI * f;
  Complex z_r = circuit::impedance(pl.reader, f);
  Complex z_s = sensor_series_impedance(pl.sensor, f) + z_load;
  Complex dz = (w * pl.link.M) * (w * pl.link.M) / z_s;
  Complex z_in = z_r + dz;
  // |I_s/I_r| = w M / |z_s|
  double current_ratio2 = (w * pl.link.M) * (w * pl.link.M) /
                          std::norm(z_s);
  double p_load_per_ir2 = current_ratio2 * z_load.real();
  double p_in_per_ir2 = z_in.real();
  if (p_in_per_ir2 <= 0) return 0.0;
  return p_load_per_ir2 / p_in_per_ir2;
}

inline PowerResult output_power(const PowerLink& pl, Complex z_load) {
  double eta = transfer_efficiency(pl, z_load);
  return {eta * pl.P_in, eta, pl.link.k, false};
}

// Geometry-backed link template: coupling is recomputed from the filament
// model per sweep point, then mapped onto the measured circuit values.
struct LinkTemplate {
  geometry::CoilPath reader_path;
  geometry::CoilPath tag_path;  // at the reference (centered) placement
  circuit::ReaderCircuit reader;
  circuit::SensorCircuit sensor;
  double f = circuit::kNfcCarrierHz;
  double P_in = 0.0;
  double max_seg_len = 0.005;
};

namespace detail {

struct TemplateCache {
  geometry::FilamentSet reader_fil;
  double l_reader = 0.0;
  double l_tag = 0.0;
};

inline TemplateCache build_cache(const LinkTemplate& t) {
  TemplateCache c;
  c.reader_fil = geometry::discretize(t.reader_path, t.max_seg_len);
  c.l_reader = magnetics::self_inductance(c.reader_fil);
  c.l_tag = magnetics::self_inductance(
      geometry::discretize(t.tag_path, t.max_seg_len));
  return c;
}

inline double coupling_at(const LinkTemplate& t, const TemplateCache& c,
                          const geometry::CoilPath& tag_placed) {
  auto tag_fil = geometry::discretize(tag_placed, t.max_seg_len);
  double m = magnetics::mutual_inductance(c.reader_fil, tag_fil);
  return m / std::sqrt(c.l_reader * c.l_tag);
}

inline PowerResult evaluate(const LinkTemplate& t, double k,
                            std::optional<Complex> fixed_load) {
  PowerLink pl;
  pl.reader = t.reader;
  pl.sensor = t.sensor;
  pl.link = circuit::InductiveLink::from_k(std::abs(k), t.reader.L,
                                           t.sensor.L_s, t.f);
  pl.P_in = t.P_in;
  Complex z_load = fixed_load ? *fixed_load : optimal_load(pl);
  PowerResult r = output_power(pl, z_load);
  r.k = std::abs(k);
  return r;
}

}  // namespace detail

// Offsets displace the tag along x (across the meander runs). The optimal
// load is computed at the centered pose and held fixed across the sweep.
inline std::vector<PowerResult> sweep_misalignment(
    const LinkTemplate& t, const std::vector<double>& offsets) {
  auto cache = detail::build_cache(t);
  double k0 = detail::coupling_at(t, cache, t.tag_path);
  PowerLink base;
  base.reader = t.reader;
  base.sensor = t.sensor;
  base.link =
      circuit::InductiveLink::from_k(std::abs(k0), t.reader.L, t.sensor.L_s, t.f);
  base.P_in = t.P_in;
  Complex z_load = optimal_load(base);
  std::vector<PowerResult> out;
  out.reserve(offsets.size());
  for (double off : offsets) {
    geometry::CoilPath tag = t.tag_path;
    for (auto& p : tag.points) p.x += off;
    double k = detail::coupling_at(t, cache, tag);
    out.push_back(detail::evaluate(t, k, z_load));
  }
  return out;
}

// Heights displace the tag along z (away from the garment plane).
inline std::vector<PowerResult> sweep_distance(
    const LinkTemplate& t, const std::vector<double>& heights) {
  auto cache = detail::build_cache(t);
  double k0 = detail::coupling_at(t, cache, t.tag_path);
  PowerLink base;
  base.reader = t.reader;
  base.sensor = t.sensor;
  base.link =
      circuit::InductiveLink::from_k(std::abs(k0), t.reader.L, t.sensor.L_s, t.f);
  base.P_in = t.P_in;
  Complex z_load = optimal_load(base);
  double z_ref = t.tag_path.centroid().z;
  std::vector<PowerResult> out;
  out.reserve(heights.size());
  for (double h : heights) {
    geometry::CoilPath tag = t.tag_path;
    double dz = h - z_ref;
    for (auto& p : tag.points) p.z += dz;
    double k = detail::coupling_at(t, cache, tag);
    out.push_back(detail::evaluate(t, k, z_load));
  }
  return out;
}

struct Motion {
  std::string name;
  geometry::MotionPerturbation perturbation;
  bool outage = false;  // coil-contact pose (e.g. sitting with legs crossed)
};

// Deforms the reader coil per motion and re-evaluates the link at the load
// optimized for the undeformed (standing) pose.
inline std::vector<PowerResult> motion_power_profile(
    const LinkTemplate& t, const std::vector<Motion>& motions) {
  auto cache = detail::build_cache(t);
  double k0 = detail::coupling_at(t, cache, t.tag_path);
  PowerLink base;
  base.reader = t.reader;
  base.sensor = t.sensor;
  base.link =
      circuit::InductiveLink::from_k(std::abs(k0), t.reader.L, t.sensor.L_s, t.f);
  base.P_in = t.P_in;
  Complex z_load = optimal_load(base);
  std::vector<PowerResult> out;
  out.reserve(motions.size());
  for (const auto& m : motions) {
    if (m.outage) {
      out.push_back({0.0, 0.0, 0.0, true});
      continue;
    }
    geometry::CoilPath deformed = geometry::deform(t.reader_path, m.perturbation);
    auto reader_fil = geometry::discretize(deformed, t.max_seg_len);
    double l_reader = magnetics::self_inductance(reader_fil);
    auto tag_fil = geometry::discretize(t.tag_path, t.max_seg_len);
    double mm = magnetics::mutual_inductance(reader_fil, tag_fil);
    double k = mm / std::sqrt(l_reader * cache.l_tag);
    out.push_back(detail::evaluate(t, k, z_load));
  }
  return out;
}

// Number of tags that can be powered simultaneously before the per-tag
// output drops below the threshold; reader input power is fixed and each
// tag adds its reflected impedance.
inline int max_powered_tags(const PowerLink& single, Complex z_load,
                            double per_tag_threshold_w, int limit = 64) {
  single.validate();
  double f = single.link.f;
  double w = 2 * M_PI * f;
  Complex z_r = circuit::impedance(single.reader, f);
  Complex z_s = sensor_series_impedance(single.sensor, f) + z_load;
  Complex dz = (w * single.link.M) * (w * single.link.M) / z_s;
  double load_share = z_load.real() / z_s.real();
  int n = 0;
  while (n < limit) {
    Complex z_in = z_r + dz * static_cast<double>(n + 1);
    double per_tag =
        single.P_in * dz.real() / z_in.real() * load_share;
    if (per_tag < per_tag_threshold_w) break;
    ++n;
  }
  return n;
}

}  // namespace power
}  // namespace nfcsim
