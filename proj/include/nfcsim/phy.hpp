#pragma once

// NFC-A listening-mode physical layer at complex baseband: PRBS source,
// subcarrier load-modulation waveforms (OOK / BPSK), channel with carrier
// leakage and AWGN, and the receiver chain (Butterworth lowpass, preamble
// sync, DD-LMS equalizer, BER sweeps).

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace nfcsim {
namespace phy {

using Complex = std::complex<double>;

constexpr double kCarrierHz = 13.56e6;
// fc/16; the nominal "848 kHz" subcarrier. Exact carrier ratios keep every
// bit an integer number of subcarrier cycles.
constexpr double kSubcarrierHz = kCarrierHz / 16.0;
constexpr double kDefaultSampleRate = kCarrierHz / 2.0;

inline double q_function(double x) { return 0.5 * std::erfc(x / M_SQRT2); }

// Coherent BPSK reference: Q(sqrt(2 Eb/N0)).
inline double theoretical_bpsk_ber(double ebn0_db) {
  double ebn0 = std::pow(10.0, ebn0_db / 10.0);
  return q_function(std::sqrt(2.0 * ebn0));
}

enum class Keying { kOok, kBpsk };

struct ModulationScheme {
  int bitrate_kbps = 212;  // label: 106, 212, 424 or 848
  Keying keying = Keying::kBpsk;
  double subcarrier_hz = kSubcarrierHz;

  // fc/128, fc/64, fc/32, fc/16
  int carrier_divisor() const {
    switch (bitrate_kbps) {
      case 106: return 128;
      case 212: return 64;
      case 424: return 32;
      case 848: return 16;
      default:
        throw std::invalid_argument("ModulationScheme: unsupported bitrate");
    }
  }
  double bitrate_hz() const { return kCarrierHz / carrier_divisor(); }

  void validate() const {
    int div = carrier_divisor();
    if ((bitrate_kbps == 106) != (keying == Keying::kOok))
      throw std::invalid_argument(
          "ModulationScheme: 106 kbps uses OOK, higher rates use BPSK");
    if (subcarrier_hz != kSubcarrierHz)
      throw std::invalid_argument("ModulationScheme: subcarrier is fc/16");
    (void)div;
  }

  static ModulationScheme from_bitrate(int kbps) {
    ModulationScheme s;
    s.bitrate_kbps = kbps;
    s.keying = (kbps == 106) ? Keying::kOok : Keying::kBpsk;
    s.validate();
    return s;
  }
};

struct Waveform {
  std::vector<Complex> samples;  // complex baseband, volts
  double sample_rate = kDefaultSampleRate;
  int64_t epoch = 0;  // sample index origin
};

// Maximal-length LFSR, x^15 + x^14 + 1, period 32767.
class Prbs15 {
 public:
  explicit Prbs15(uint16_t seed) : state_(seed & 0x7FFF) {
    if (state_ == 0)
      throw std::invalid_argument("Prbs15: zero state is not allowed");
  }
  uint8_t next() {
    uint8_t out = (state_ >> 14) & 1;
    uint16_t fb = ((state_ >> 14) ^ (state_ >> 13)) & 1;
    state_ = ((state_ << 1) | fb) & 0x7FFF;
    return out;
  }
  uint16_t state() const { return state_; }

 private:
  uint16_t state_;
};

inline std::vector<uint8_t> prbs15(uint16_t seed, size_t n_bits) {
  if (n_bits == 0) throw std::invalid_argument("prbs15: n_bits must be > 0");
  Prbs15 gen(seed);
  std::vector<uint8_t> bits(n_bits);
  for (auto& b : bits) b = gen.next();
  return bits;
}

namespace detail {

inline int samples_per_bit(const ModulationScheme& scheme,
                           double sample_rate) {
  double spb = sample_rate * scheme.carrier_divisor() / kCarrierHz;
  double half_cycle = sample_rate / (2.0 * scheme.subcarrier_hz);
  if (std::abs(spb - std::round(spb)) > 1e-9 ||
      std::abs(half_cycle - std::round(half_cycle)) > 1e-9)
    throw std::invalid_argument(
        "modulate: sample_rate must give integer samples per subcarrier "
        "half-cycle");
  return static_cast<int>(std::round(spb));
}

// +-1 square subcarrier sample.
inline double subcarrier_square(int n, int samples_per_cycle) {
  return (n % samples_per_cycle) < samples_per_cycle / 2 ? 1.0 : -1.0;
}

}  // namespace detail

// Tag load-state waveform. OOK: Manchester-coded subcarrier burst (bit 1 ->
// subcarrier in the first half-bit). BPSK: NRZ-L phase-coded subcarrier
// (bit 1 -> phase 0, bit 0 -> phase pi). One bit of zero tail is appended
// so receiver filter delay never truncates the last symbol.
inline Waveform modulate(const std::vector<uint8_t>& bits,
                         const ModulationScheme& scheme, double sample_rate) {
  scheme.validate();
  int spb = detail::samples_per_bit(scheme, sample_rate);
  int spc = static_cast<int>(std::round(sample_rate / scheme.subcarrier_hz));
  Waveform wf;
  wf.sample_rate = sample_rate;
  wf.samples.assign(bits.size() * spb + spb, Complex(0, 0));
  for (size_t m = 0; m < bits.size(); ++m) {
    int base = static_cast<int>(m) * spb;
    if (scheme.keying == Keying::kBpsk) {
      double sign = bits[m] ? 1.0 : -1.0;
      for (int n = 0; n < spb; ++n)
        wf.samples[base + n] =
            Complex(sign * detail::subcarrier_square(n, spc), 0);
    } else {
      int active_start = bits[m] ? 0 : spb / 2;
      for (int n = 0; n < spb / 2; ++n)
        wf.samples[base + active_start + n] =
            Complex(detail::subcarrier_square(n, spc), 0);
    }
  }
  return wf;
}

struct ChannelConfig {
  Complex link_gain{1.0, 0.0};   // receiver volts per unit tag waveform
  Complex carrier_leak{0.0, 0.0};  // residual bridge imbalance, volts at DC
  double noise_density = 0.0;    // receiver noise, V^2/Hz (one-sided)
  // Source noise carried by the leaking carrier, relative PSD in 1/Hz.
  // A poorly balanced front end (single-coil readout) raises the floor by
  // |carrier_leak|^2 * source_noise_rel.
  double source_noise_rel = 0.0;
  uint64_t seed = 0;

  void validate() const {
    if (noise_density < 0 || source_noise_rel < 0)
      throw std::invalid_argument("ChannelConfig: noise densities >= 0");
  }
  double effective_noise_density() const {
    return noise_density + std::norm(carrier_leak) * source_noise_rel;
  }
};

// out = link_gain * tag + carrier_leak + AWGN; deterministic per seed.
inline Waveform apply_channel(const Waveform& tag, const ChannelConfig& cfg) {
  cfg.validate();
  Waveform out;
  out.sample_rate = tag.sample_rate;
  out.epoch = tag.epoch;
  out.samples.resize(tag.samples.size());
  double density = cfg.effective_noise_density();
  double sigma = std::sqrt(density * tag.sample_rate / 2.0);  // per component
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t i = 0; i < tag.samples.size(); ++i) {
    Complex n = sigma > 0 ? Complex(gauss(rng), gauss(rng)) * sigma
                          : Complex(0, 0);
    out.samples[i] = cfg.link_gain * tag.samples[i] + cfg.carrier_leak + n;
  }
  return out;
}

struct ReceiverConfig {
  int butterworth_order = 5;
  double cutoff_per_bitrate = 1.5;  // OOK doubles this (Manchester halves)
  int lms_taps = 9;
  double lms_step = 0.01;
  int preamble_bits = 48;
  uint16_t preamble_seed = 0x2F5A;  // PRBS15 state generating the preamble
  double sync_threshold = 0.5;
  int sync_window_bits = 2;
  bool equalizer_bypass = false;  // one-tap gain only, no adaptive taps

  void validate() const {
    if (butterworth_order < 1 || lms_taps < 1 || lms_step <= 0 ||
        preamble_bits < 8 || cutoff_per_bitrate <= 0)
      throw std::invalid_argument("ReceiverConfig: invalid parameters");
  }
  std::vector<uint8_t> preamble() const {
    return prbs15(preamble_seed, preamble_bits);
  }
};

namespace detail {

struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

// Bilinear-transform Butterworth lowpass as cascaded biquads (plus one
// first-order section for odd orders), unity gain at DC.
inline std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz,
                                               double fs) {
  if (cutoff_hz <= 0 || cutoff_hz >= fs / 2)
    throw std::invalid_argument("butterworth_lowpass: cutoff out of range");
  double wa = 2.0 * fs * std::tan(M_PI * cutoff_hz / fs);  // pre-warped
  std::vector<Biquad> sections;
  int pairs = order / 2;
  for (int k = 0; k < pairs; ++k) {
    double theta = M_PI * (2.0 * k + 1.0) / (2.0 * order) + M_PI / 2.0;
    Complex p = wa * std::exp(Complex(0, theta));  // left-half-plane pole
    Complex zd = (1.0 + p / (2.0 * fs)) / (1.0 - p / (2.0 * fs));
    Biquad s;
    s.a1 = -2.0 * zd.real();
    s.a2 = std::norm(zd);
    double dc_den = 1.0 + s.a1 + s.a2;
    s.b0 = dc_den / 4.0;
    s.b1 = 2.0 * s.b0;
    s.b2 = s.b0;
    sections.push_back(s);
  }
  if (order % 2 == 1) {
    double p = -wa;
    double zd = (1.0 + p / (2.0 * fs)) / (1.0 - p / (2.0 * fs));
    Biquad s;
    s.a1 = -zd;
    s.a2 = 0.0;
    s.b0 = (1.0 + s.a1) / 2.0;
    s.b1 = s.b0;
    s.b2 = 0.0;
    sections.push_back(s);
  }
  return sections;
}

inline void filter_in_place(std::vector<Complex>& x,
                            const std::vector<Biquad>& sections) {
  for (const auto& s : sections) {
    Complex w1{0, 0}, w2{0, 0};  // direct form II
    for (auto& v : x) {
      Complex w = v - s.a1 * w1 - s.a2 * w2;
      v = s.b0 * w + s.b1 * w1 + s.b2 * w2;
      w2 = w1;
      w1 = w;
    }
  }
}

// Mean of v[from, to), clamped to the vector bounds.
inline Complex window_mean(const std::vector<Complex>& v, long from, long to) {
  from = std::max(from, 0L);
  to = std::min(to, static_cast<long>(v.size()));
  if (to <= from) return {0, 0};
  Complex s{0, 0};
  for (long i = from; i < to; ++i) s += v[i];
  return s / static_cast<double>(to - from);
}

}  // namespace detail

struct DemodResult {
  std::vector<uint8_t> bits;  // all decoded bits, preamble included
  bool sync_ok = false;
  double sync_metric = 0.0;
  int sync_offset = 0;
};

// Receiver chain: DC block -> subcarrier downconversion -> Butterworth
// lowpass -> preamble-correlation timing sync -> DD-LMS -> decisions.
// A failed sync is flagged (decoding still proceeds at the best offset).
inline DemodResult demodulate(const Waveform& rx,
                              const ModulationScheme& scheme,
                              const ReceiverConfig& cfg) {
  scheme.validate();
  cfg.validate();
  int spb = detail::samples_per_bit(scheme, rx.sample_rate);
  size_t n_samples = rx.samples.size();
  long n_bits = static_cast<long>(n_samples / spb) - 1;  // minus tail pad
  if (n_bits < cfg.preamble_bits)
    throw std::invalid_argument("demodulate: waveform shorter than preamble");

  // DC block removes the deterministic carrier leak.
  Complex mean{0, 0};
  for (const auto& s : rx.samples) mean += s;
  mean /= static_cast<double>(n_samples);

  // Downconvert the subcarrier to DC.
  std::vector<Complex> v(n_samples);
  double w = 2.0 * M_PI * scheme.subcarrier_hz / rx.sample_rate;
  for (size_t n = 0; n < n_samples; ++n)
    v[n] = (rx.samples[n] - mean) *
           std::exp(Complex(0, -w * static_cast<double>(n)));

  bool ook = scheme.keying == Keying::kOok;
  double cutoff =
      cfg.cutoff_per_bitrate * scheme.bitrate_hz() * (ook ? 2.0 : 1.0);
  detail::filter_in_place(
      v, detail::butterworth_lowpass(cfg.butterworth_order, cutoff,
                                     rx.sample_rate));

  auto preamble = cfg.preamble();
  auto symbol_at = [&](int offset, long m) -> Complex {
    long base = offset + m * spb;
    if (ook) {
      // Noncoherent half-bit energies; Manchester position decision.
      Complex first = detail::window_mean(v, base + spb / 8,
                                          base + spb / 2 - spb / 8);
      Complex second = detail::window_mean(v, base + spb / 2 + spb / 8,
                                           base + spb - spb / 8);
      return {std::abs(first) - std::abs(second), 0.0};
    }
    return detail::window_mean(v, base + spb / 4, base + 3 * spb / 4);
  };

  // Timing sync by preamble correlation over candidate sample offsets.
  int window = cfg.sync_window_bits * spb;
  int best_offset = 0;
  double best_metric = -1.0;
  for (int off = 0; off < window; ++off) {
    Complex corr{0, 0};
    double energy = 0.0;
    for (int m = 0; m < cfg.preamble_bits; ++m) {
      Complex s = symbol_at(off, m);
      double p = preamble[m] ? 1.0 : -1.0;
      corr += p * std::conj(s);
      energy += std::abs(s);
    }
    double metric = energy > 0 ? std::abs(corr) / energy : 0.0;
    if (metric > best_metric) {
      best_metric = metric;
      best_offset = off;
    }
  }

  DemodResult result;
  result.sync_offset = best_offset;
  result.sync_metric = best_metric;
  result.sync_ok = best_metric >= cfg.sync_threshold;

  // Symbol stream, RMS-normalized over the preamble.
  std::vector<Complex> symbols(n_bits);
  for (long m = 0; m < n_bits; ++m) symbols[m] = symbol_at(best_offset, m);
  double rms = 0.0;
  for (int m = 0; m < cfg.preamble_bits; ++m) rms += std::norm(symbols[m]);
  rms = std::sqrt(rms / cfg.preamble_bits);
  if (rms > 0)
    for (auto& s : symbols) s /= rms;

  // One-tap gain estimate from the preamble seeds the equalizer so the
  // decision-directed phase starts from mostly correct decisions.
  Complex g{0, 0};
  double pe = 0.0;
  for (int m = 0; m < cfg.preamble_bits; ++m) {
    double p = preamble[m] ? 1.0 : -1.0;
    g += p * std::conj(symbols[m]);
    pe += 1.0;
  }
  g = (pe > 0 && std::abs(g) > 0) ? Complex(pe, 0) / std::conj(g)
                                  : Complex(1, 0);

  int taps = cfg.equalizer_bypass ? 1 : cfg.lms_taps;
  int center = taps / 2;
  std::vector<Complex> wgt(taps, Complex(0, 0));
  wgt[center] = g;

  auto equalize_at = [&](long m) -> Complex {
    Complex y{0, 0};
    for (int t = 0; t < taps; ++t) {
      long idx = m + center - t;
      if (idx >= 0 && idx < n_bits) y += wgt[t] * symbols[idx];
    }
    return y;
  };

  result.bits.resize(n_bits);
  // Two training passes over the preamble, then decision-directed.
  for (int pass = 0; pass < 2 && !cfg.equalizer_bypass; ++pass) {
    for (int m = 0; m < cfg.preamble_bits; ++m) {
      Complex y = equalize_at(m);
      double d = preamble[m] ? 1.0 : -1.0;
      Complex e = Complex(d, 0) - y;
      for (int t = 0; t < taps; ++t) {
        long idx = m + center - t;
        if (idx >= 0 && idx < n_bits)
          wgt[t] += cfg.lms_step * e * std::conj(symbols[idx]);
      }
    }
  }
  for (long m = 0; m < n_bits; ++m) {
    Complex y = equalize_at(m);
    double d = (m < cfg.preamble_bits) ? (preamble[m] ? 1.0 : -1.0)
                                       : (y.real() >= 0 ? 1.0 : -1.0);
    result.bits[m] = y.real() >= 0 ? 1 : 0;
    if (!cfg.equalizer_bypass) {
      Complex e = Complex(d, 0) - y;
      for (int t = 0; t < taps; ++t) {
        long idx = m + center - t;
        if (idx >= 0 && idx < n_bits)
          wgt[t] += cfg.lms_step * e * std::conj(symbols[idx]);
      }
    }
  }
  return result;
}

struct BERPoint {
  double P_in_dBm = 0.0;
  long bits_sent = 0;
  long bit_errors = 0;
  bool sync_ok = true;
  double ber() const {
    return bits_sent > 0 ? static_cast<double>(bit_errors) / bits_sent : 0.0;
  }
};

struct BerSweepConfig {
  ModulationScheme scheme = ModulationScheme::from_bitrate(212);
  ChannelConfig channel;  // link_gain referenced to 0 dBm drive
  ReceiverConfig receiver;
  double sample_rate = kDefaultSampleRate;
  double p_start_dbm = -30.0;
  double p_stop_dbm = 10.0;
  double p_step_db = 2.0;
  long bits_per_point = 100000;
  uint64_t seed = 1;
};

// Signal amplitude scales with sqrt(P_in); the carrier leak and noise floor
// are fixed receiver properties.
inline std::vector<BERPoint> ber_sweep(const BerSweepConfig& cfg) {
  if (cfg.p_step_db <= 0 || cfg.p_stop_dbm < cfg.p_start_dbm)
    throw std::invalid_argument("ber_sweep: invalid power range");
  if (cfg.bits_per_point <= 0)
    throw std::invalid_argument("ber_sweep: bits_per_point must be > 0");
  auto preamble = cfg.receiver.preamble();
  std::vector<BERPoint> points;
  int n_points = static_cast<int>(
      std::floor((cfg.p_stop_dbm - cfg.p_start_dbm) / cfg.p_step_db + 0.5)) + 1;
  for (int i = 0; i < n_points; ++i) {
    double dbm = cfg.p_start_dbm + i * cfg.p_step_db;
    uint64_t point_seed = cfg.seed * 1000003ull + static_cast<uint64_t>(i);
    uint16_t prbs_seed =
        static_cast<uint16_t>((point_seed % 32767) + 1);  // nonzero 15-bit
    std::vector<uint8_t> bits = preamble;
    auto payload = prbs15(prbs_seed, cfg.bits_per_point);
    bits.insert(bits.end(), payload.begin(), payload.end());

    Waveform tx = modulate(bits, cfg.scheme, cfg.sample_rate);
    ChannelConfig ch = cfg.channel;
    ch.link_gain *= std::pow(10.0, dbm / 20.0);
    ch.seed = point_seed;
    Waveform rx = apply_channel(tx, ch);
    DemodResult dm = demodulate(rx, cfg.scheme, cfg.receiver);

    BERPoint pt;
    pt.P_in_dBm = dbm;
    pt.bits_sent = cfg.bits_per_point;
    pt.sync_ok = dm.sync_ok;
    for (long m = 0; m < cfg.bits_per_point; ++m) {
      size_t idx = preamble.size() + m;
      if (idx >= dm.bits.size() || dm.bits[idx] != payload[m])
        ++pt.bit_errors;
    }
    points.push_back(pt);
  }
  return points;
}

// Interpolated P_in where the curve first crosses below the target BER;
// NaN if it never does.
inline double ber_crossing_dbm(const std::vector<BERPoint>& points,
                               double target) {
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].ber() <= target) {
      if (i == 0) return points[0].P_in_dBm;
      double b0 = std::max(points[i - 1].ber(), 1e-12);
      double b1 = std::max(points[i].ber(), 1e-12);
      double t = (std::log10(b0) - std::log10(target)) /
                 (std::log10(b0) - std::log10(b1));
      return points[i - 1].P_in_dBm +
             t * (points[i].P_in_dBm - points[i - 1].P_in_dBm);
    }
  }
  return std::nan("");
}

// Streaming matched-filter BPSK reference: correlates each bit against the
// known subcarrier chip sequence with per-sample Gaussian noise. This is
// the theory-anchor path with equalizer and filter bypassed; it never
// builds the full waveform, so 1e7+ bit runs stay cheap.
inline double matched_filter_bpsk_ber(double ebn0_db, long n_bits,
                                      uint64_t seed, int samples_per_bit = 16) {
  double ebn0 = std::pow(10.0, ebn0_db / 10.0);
  double sigma = std::sqrt(samples_per_bit / (2.0 * ebn0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::bernoulli_distribution coin(0.5);
  long errors = 0;
  for (long i = 0; i < n_bits; ++i) {
    double sign = coin(rng) ? 1.0 : -1.0;
    double corr = 0.0;
    for (int n = 0; n < samples_per_bit; ++n) corr += sign + gauss(rng);
    bool decided_one = corr >= 0;
    if (decided_one != (sign > 0)) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(n_bits);
}

}  // namespace phy
}  // namespace nfcsim
