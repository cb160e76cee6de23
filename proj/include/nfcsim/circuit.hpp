#pragma once

// Lumped-element reader/sensor resonators with distributed series
// capacitance, reflected impedance, impedance-difference ratio, and the
// balanced-bridge output.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nfcsim/magnetics.hpp"

namespace nfcsim {
namespace circuit {

using Complex = std::complex<double>;

constexpr double kNfcCarrierHz = 13.56e6;
constexpr double kNfcSubcarrierHz = 848e3;

struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReaderCircuit {
  double R = 0.0;           // ohms
  double L = 0.0;           // henries
  int n_caps = 1;           // series capacitor count
  double C_each = 0.0;      // farads, each capacitor
  double parasitic_C = 0.0; // optional stray shunt across the coil

  void validate() const {
    if (R <= 0 || L <= 0 || C_each <= 0 || n_caps < 1)
      throw std::invalid_argument("ReaderCircuit: component values invalid");
  }
  double series_capacitance() const { return C_each / n_caps; }
  double resonant_frequency() const {
    return 1.0 / (2 * M_PI * std::sqrt(L * series_capacitance()));
  }
};

enum class ModState { kOpen, kShorted };

struct SensorCircuit {
  double R_s = 0.0;  // ohms
  double L_s = 0.0;  // henries
  double C_s = 0.0;  // farads
  Complex load{0.0, 0.0};  // rectifier/IC surrogate or Z_opt
  ModState mod_state = ModState::kOpen;

  void validate() const {
    if (R_s <= 0 || L_s <= 0 || C_s <= 0)
      throw std::invalid_argument("SensorCircuit: component values invalid");
  }
  double resonant_frequency() const {
    return 1.0 / (2 * M_PI * std::sqrt(L_s * C_s));
  }
  double q_factor(double f) const { return 2 * M_PI * f * L_s / R_s; }

  // Series impedance seen through the coupling, including the load.
  // Shorting the load models the load-modulation switch.
  Complex impedance(double f) const {
    validate();
    Complex z = Complex(R_s, 0) + Complex(0, 2 * M_PI * f * L_s) +
                1.0 / Complex(0, 2 * M_PI * f * C_s);
    if (mod_state == ModState::kOpen) z += load;
    return z;
  }
};

struct InductiveLink {
  double M = 0.0;  // henries
  double k = 0.0;
  double f = kNfcCarrierHz;

  static InductiveLink from_k(double k, double l_reader, double l_sensor,
                              double f = kNfcCarrierHz) {
    return {k * std::sqrt(l_reader * l_sensor), k, f};
  }
  static InductiveLink from_m(double m, double l_reader, double l_sensor,
                              double f = kNfcCarrierHz) {
    return {m, m / std::sqrt(l_reader * l_sensor), f};
  }
};

struct BridgeConfig {
  double R_amp = 1000.0;  // inverting-amplifier feedback factor, ohms
  double V_in = 1.0;      // drive amplitude, volts

  void validate() const {
    if (R_amp <= 0 || V_in <= 0)
      throw std::invalid_argument("BridgeConfig: R_amp and V_in must be > 0");
  }
};

// Series string R + jwL + n/(jwC_each), with the stray shunt applied across
// the whole string.
inline Complex impedance(const ReaderCircuit& c, double f) {
  c.validate();
  if (f <= 0) throw std::invalid_argument("impedance: f must be > 0");
  double w = 2 * M_PI * f;
  Complex z = Complex(c.R, 0) + Complex(0, w * c.L) +
              Complex(c.n_caps, 0) / Complex(0, w * c.C_each);
  if (c.parasitic_C > 0) {
    Complex y = 1.0 / z + Complex(0, w * c.parasitic_C);
    z = 1.0 / y;
  }
  return z;
}

inline double q_factor(double L, double R, double f) {
  if (f <= 0) throw std::invalid_argument("q_factor: f must be > 0");
  return 2 * M_PI * f * L / R;
}

inline double q_factor(const ReaderCircuit& c, double f) {
  return q_factor(c.L, c.R, f);
}

// C_each so that the series combination of n_caps capacitors resonates the
// coil at f0.
inline double tune_distributed_caps(double L, double f0, int n_caps) {
  if (n_caps < 1)
    throw std::invalid_argument("tune_distributed_caps: n_caps >= 1");
  double w0 = 2 * M_PI * f0;
  return n_caps / (w0 * w0 * L);
}

// Eq.: dZ = (2*pi*f*M)^2 / Z_sensor
inline Complex reflected_impedance(const InductiveLink& link,
                                   Complex z_sensor) {
  if (std::abs(z_sensor) <= 0)
    throw DegenerateError("reflected_impedance: |Z_sensor| must be > 0");
  double wm = 2 * M_PI * link.f * link.M;
  return wm * wm / z_sensor;
}

inline Complex input_impedance(Complex z_reader, Complex dz) {
  return z_reader + dz;
}

// First-order superposition for several weakly coupled tags.
inline Complex input_impedance_superposed(Complex z_reader,
                                          const std::vector<Complex>& dzs) {
  Complex z = z_reader;
  for (auto dz : dzs) z += dz;
  return z;
}

// Exact mesh-equation input impedance for one reader coupled to n tags,
// including tag-tag mutual inductances. Used as the oracle for the
// superposition above and whenever any pairwise tag k exceeds 0.01.
// meshes: index 0 is the reader; m[i][j] are mutual inductances.
inline Complex mesh_input_impedance(const std::vector<Complex>& self_z,
                                    const std::vector<std::vector<double>>& m,
                                    double f) {
  size_t n = self_z.size();
  if (n == 0) throw std::invalid_argument("mesh_input_impedance: empty");
  double w = 2 * M_PI * f;
  // Z * I = V with V = (1, 0, ..., 0); Z_in = 1 / I_0.
  std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
  for (size_t i = 0; i < n; ++i) {
    a[i][i] = self_z[i];
    for (size_t j = 0; j < n; ++j)
      if (i != j) a[i][j] = Complex(0, w * m[i][j]);
  }
  std::vector<Complex> v(n, 0);
  v[0] = 1.0;
  // Gaussian elimination with partial pivoting.
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-30)
      throw DegenerateError("mesh_input_impedance: singular mesh matrix");
    std::swap(a[col], a[piv]);
    std::swap(v[col], v[piv]);
    for (size_t r = col + 1; r < n; ++r) {
      Complex factor = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      v[r] -= factor * v[col];
    }
  }
  std::vector<Complex> current(n);
  for (size_t r = n; r-- > 0;) {
    Complex s = v[r];
    for (size_t c = r + 1; c < n; ++c) s -= a[r][c] * current[c];
    current[r] = s / a[r][r];
  }
  return 1.0 / current[0];
}

struct RatioCurve {
  std::vector<double> f;      // Hz
  std::vector<double> ratio;  // |z1 - z2| / |z1|
  double band_lo = 0.0;       // widest contiguous interval with ratio < 0.10
  double band_hi = 0.0;
  double band_width() const { return band_hi - band_lo; }
};

inline RatioCurve impedance_difference_ratio(const std::vector<double>& f,
                                             const std::vector<Complex>& z1,
                                             const std::vector<Complex>& z2,
                                             double threshold = 0.10) {
  if (f.size() != z1.size() || f.size() != z2.size() || f.empty())
    throw std::invalid_argument(
        "impedance_difference_ratio: curves must share the frequency grid");
  RatioCurve out;
  out.f = f;
  out.ratio.resize(f.size());
  for (size_t i = 0; i < f.size(); ++i)
    out.ratio[i] = std::abs(z1[i] - z2[i]) / std::abs(z1[i]);
  // widest contiguous run below threshold
  double best = -1.0;
  size_t i = 0;
  while (i < f.size()) {
    if (out.ratio[i] >= threshold) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < f.size() && out.ratio[j + 1] < threshold) ++j;
    double width = f[j] - f[i];
    if (width > best) {
      best = width;
      out.band_lo = f[i];
      out.band_hi = f[j];
    }
    i = j + 1;
  }
  if (best < 0) out.band_lo = out.band_hi = 0.0;  // empty band
  return out;
}

// Eq.: V_out = -R_amp * (V_in/Z_in_1 - V_in/Z_in_2)
inline Complex bridge_output(const BridgeConfig& cfg, Complex z_in_1,
                             Complex z_in_2) {
  cfg.validate();
  if (std::abs(z_in_1) <= 0 || std::abs(z_in_2) <= 0)
    throw DegenerateError("bridge_output: degenerate input impedance");
  if (z_in_1 == z_in_2) return {0.0, 0.0};
  return -cfg.R_amp * (cfg.V_in / z_in_1 - cfg.V_in / z_in_2);
}

// Small-perturbation form of the bridge output, +-R_amp * dZ / Z^2 * V_in.
inline Complex bridge_output_first_order(const BridgeConfig& cfg, Complex z,
                                         Complex dz) {
  cfg.validate();
  return cfg.R_amp * dz / (z * z) * cfg.V_in;
}

// Series RLC fitted to match a shunt-loaded coil's impedance exactly at f0
// (the "chip element" reference of the balance comparison): same L, with R
// and C chosen from the coil's complex impedance at f0.
inline ReaderCircuit fit_ideal_rlc(const ReaderCircuit& coil, double f0) {
  Complex z0 = impedance(coil, f0);
  ReaderCircuit fit;
  fit.L = coil.L;
  fit.R = std::max(z0.real(), 1e-6);
  fit.n_caps = 1;
  double w0 = 2 * M_PI * f0;
  // Im(Z_fit(f0)) = w0 L - 1/(w0 C) == Im(z0)
  double x = w0 * coil.L - z0.imag();
  if (x <= 0)
    throw std::invalid_argument("fit_ideal_rlc: cannot match reactance");
  fit.C_each = 1.0 / (w0 * x);
  fit.parasitic_C = 0.0;
  return fit;
}

}  // namespace circuit
}  // namespace nfcsim
