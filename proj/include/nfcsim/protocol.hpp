#pragma once

// MAC/session layer: framed slotted-Aloha inventory, TDM readout sessions
// with per-tag link BER, and linear sensor calibration.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfcsim/geometry.hpp"

namespace nfcsim {
namespace protocol {

struct LinearCalibration {
  double slope = 1.0;      // sensor units per resistance-change ratio
  double intercept = 0.0;

  void validate() const {
    if (!std::isfinite(slope) || slope == 0.0)
      throw std::invalid_argument("LinearCalibration: slope finite, nonzero");
  }
};

enum class SensorKind { kTemperature, kBend, kGeneric };

struct TagDescriptor {
  uint64_t uid = 0;
  SensorKind sensor_kind = SensorKind::kGeneric;
  geometry::Placement position;
  LinearCalibration calibration;
};

struct FrameConfig {
  int slots_per_round = 4;
  double slot_duration_s = 0.07;
  int per_read_payload_bits = 256;
  double bitrate_kbps = 106.0;

  void validate() const {
    if (slots_per_round < 1 || slot_duration_s <= 0 ||
        per_read_payload_bits < 1 || bitrate_kbps <= 0)
      throw std::invalid_argument("FrameConfig: invalid parameters");
    if (slot_duration_s < per_read_payload_bits / (bitrate_kbps * 1000.0))
      throw std::invalid_argument(
          "FrameConfig: slot shorter than the payload airtime");
  }
  double round_duration_s() const { return slots_per_round * slot_duration_s; }
};

struct RoundOutcome {
  int singletons = 0;
  int collisions = 0;  // slots with >= 2 tags
  int empties = 0;
};

// Each tag independently picks a slot uniformly at random.
inline RoundOutcome inventory_round(int n_tags, const FrameConfig& cfg,
                                    std::mt19937_64& rng) {
  cfg.validate();
  if (n_tags < 0) throw std::invalid_argument("inventory_round: n_tags >= 0");
  std::vector<int> occupancy(cfg.slots_per_round, 0);
  std::uniform_int_distribution<int> pick(0, cfg.slots_per_round - 1);
  for (int t = 0; t < n_tags; ++t) ++occupancy[pick(rng)];
  RoundOutcome out;
  for (int c : occupancy) {
    if (c == 0)
      ++out.empties;
    else if (c == 1)
      ++out.singletons;
    else
      ++out.collisions;
  }
  return out;
}

inline RoundOutcome inventory_round(int n_tags, const FrameConfig& cfg,
                                    uint64_t seed) {
  std::mt19937_64 rng(seed);
  return inventory_round(n_tags, cfg, rng);
}

// Classical slotted-Aloha throughput, S = G * exp(-G).
inline double expected_throughput(double offered_load) {
  if (offered_load < 0)
    throw std::invalid_argument("expected_throughput: G >= 0");
  return offered_load * std::exp(-offered_load);
}

struct Reading {
  double timestamp_s = 0.0;
  double value = 0.0;
  bool ok = false;  // delivered vs lost (collision or bit errors)
};

struct SessionResult {
  std::vector<std::vector<Reading>> per_tag;  // delivered + lost attempts
  long collision_slots = 0;
  long singleton_slots = 0;
  long rounds = 0;
  std::vector<double> achieved_rate_hz;  // delivered readings per second
  std::vector<double> loss_fraction;     // lost / attempted per tag
};

struct OutageInterval {
  double start_s = 0.0;
  double end_s = 0.0;  // all slots inside [start, end) fail
};

// Back-to-back inventory rounds for the given duration. Singleton slots
// deliver a packet dropped with probability 1 - (1 - BER)^payload_bits.
// Sensor values are replayed from true_value(tag, t) through each tag's
// calibration inverse, so decode_sensor recovers them.
inline SessionResult run_session(
    const std::vector<TagDescriptor>& tags, const FrameConfig& cfg,
    const std::vector<double>& ber_per_tag, double duration_s, uint64_t seed,
    const std::vector<double>& true_values = {},
    const std::vector<OutageInterval>& outages = {}) {
  cfg.validate();
  if (duration_s <= 0)
    throw std::invalid_argument("run_session: duration must be > 0");
  if (ber_per_tag.size() != tags.size())
    throw std::invalid_argument("run_session: one BER per tag required");
  for (double b : ber_per_tag)
    if (b < 0 || b > 0.5)
      throw std::invalid_argument("run_session: BER must be in [0, 0.5]");
  for (size_t i = 0; i < tags.size(); ++i)
    for (size_t j = i + 1; j < tags.size(); ++j)
      if (tags[i].uid == tags[j].uid)
        throw std::invalid_argument("run_session: duplicate tag uid");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, cfg.slots_per_round - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SessionResult res;
  res.per_tag.resize(tags.size());
  res.achieved_rate_hz.assign(tags.size(), 0.0);
  res.loss_fraction.assign(tags.size(), 0.0);
  std::vector<long> delivered(tags.size(), 0), attempted(tags.size(), 0);

  double round_len = cfg.round_duration_s();
  long n_rounds = static_cast<long>(std::floor(duration_s / round_len));
  res.rounds = n_rounds;
  std::vector<int> slot_of(tags.size());
  std::vector<int> occupancy(cfg.slots_per_round);

  for (long r = 0; r < n_rounds; ++r) {
    double t0 = r * round_len;
    std::fill(occupancy.begin(), occupancy.end(), 0);
    for (size_t t = 0; t < tags.size(); ++t) {
      slot_of[t] = pick(rng);
      ++occupancy[slot_of[t]];
    }
    for (int c : occupancy) {
      if (c == 1) ++res.singleton_slots;
      if (c >= 2) ++res.collision_slots;
    }
    for (size_t t = 0; t < tags.size(); ++t) {
      double ts = t0 + (slot_of[t] + 0.5) * cfg.slot_duration_s;
      bool in_outage = false;
      for (const auto& o : outages)
        if (ts >= o.start_s && ts < o.end_s) in_outage = true;
      ++attempted[t];
      bool singleton = occupancy[slot_of[t]] == 1;
      double p_drop =
          1.0 - std::pow(1.0 - ber_per_tag[t], cfg.per_read_payload_bits);
      bool delivered_now =
          singleton && !in_outage && unif(rng) >= p_drop;
      double truth = t < true_values.size() ? true_values[t] : 0.0;
      // value on air is the raw resistance-change ratio
      double raw = (truth - tags[t].calibration.intercept) /
                   tags[t].calibration.slope;
      res.per_tag[t].push_back({ts, raw, delivered_now});
      if (delivered_now) ++delivered[t];
    }
  }
  for (size_t t = 0; t < tags.size(); ++t) {
    res.achieved_rate_hz[t] = delivered[t] / duration_s;
    res.loss_fraction[t] =
        attempted[t] > 0
            ? 1.0 - static_cast<double>(delivered[t]) / attempted[t]
            : 0.0;
  }
  return res;
}

inline double decode_sensor(double ratio, const LinearCalibration& cal) {
  cal.validate();
  return ratio * cal.slope + cal.intercept;
}

// Ordinary least squares; throws on rank-deficient input.
inline LinearCalibration fit_calibration(
    const std::vector<std::pair<double, double>>& points,
    double* residual_rms = nullptr) {
  if (points.size() < 2)
    throw std::invalid_argument("fit_calibration: need at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(points.size());
  double det = n * sxx - sx * sx;
  double scale = std::max(sxx, 1e-30);
  if (std::abs(det) < 1e-12 * n * scale)
    throw std::invalid_argument(
        "fit_calibration: rank-deficient input (all ratios equal)");
  LinearCalibration cal;
  cal.slope = (n * sxy - sx * sy) / det;
  cal.intercept = (sy - cal.slope * sx) / n;
  if (residual_rms) {
    double ss = 0;
    for (auto [x, y] : points) {
      double e = y - (cal.slope * x + cal.intercept);
      ss += e * e;
    }
    *residual_rms = std::sqrt(ss / n);
  }
  return cal;
}

}  // namespace protocol
}  // namespace nfcsim
