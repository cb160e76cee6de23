#pragma once

// File formats: CoilPath JSON, field-map / impedance / BER / session CSV,
// and binary interleaved float32 I/Q waveforms with a JSON sidecar.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfcsim/circuit.hpp"
#include "nfcsim/geometry.hpp"
#include "nfcsim/magnetics.hpp"
#include "nfcsim/phy.hpp"
#include "nfcsim/protocol.hpp"

namespace nfcsim {
namespace io {

using nlohmann::json;

// Shortest round-trippable decimal form; keeps CSV bodies byte-stable.
inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline json coil_path_to_json(const geometry::CoilPath& path) {
  json points = json::array();
  for (const auto& p : path.points) points.push_back({p.x, p.y, p.z});
  return {{"points", points},
          {"closed", path.closed},
          {"wire_radius", path.wire_radius}};
}

inline geometry::CoilPath coil_path_from_json(const json& j) {
  geometry::CoilPath path;
  for (const auto& p : j.at("points"))
    path.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                           p.at(2).get<double>()});
  path.closed = j.at("closed").get<bool>();
  path.wire_radius = j.at("wire_radius").get<double>();
  path.validate();
  return path;
}

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
}

// x,y,z,Bx,By,Bz,|B| rows plus a JSON sidecar of grid metadata.
inline void write_field_map_csv(const std::string& path,
                                const magnetics::BFieldGrid& grid,
                                const std::string& header = "") {
  std::ostringstream os;
  if (!header.empty()) os << header << "\n";
  os << "x,y,z,Bx,By,Bz,Bmag,masked\n";
  for (const auto& s : grid.samples)
    os << fmt(s.position.x) << ',' << fmt(s.position.y) << ','
       << fmt(s.position.z) << ',' << fmt(s.b.x) << ',' << fmt(s.b.y) << ','
       << fmt(s.b.z) << ',' << fmt(s.mag) << ',' << (s.masked ? 1 : 0)
       << "\n";
  write_text(path, os.str());
  json meta = {{"origin", {grid.origin.x, grid.origin.y, grid.origin.z}},
               {"axis_u", {grid.axis_u.x, grid.axis_u.y, grid.axis_u.z}},
               {"axis_v", {grid.axis_v.x, grid.axis_v.y, grid.axis_v.z}},
               {"nx", grid.nx},
               {"ny", grid.ny},
               {"spacing", grid.spacing}};
  write_text(path + ".json", meta.dump(2) + "\n");
}

inline void write_impedance_csv(const std::string& path,
                                const std::vector<double>& f,
                                const std::vector<circuit::Complex>& z,
                                const std::string& header = "") {
  std::ostringstream os;
  if (!header.empty()) os << header << "\n";
  os << "f_Hz,Re,Im\n";
  for (size_t i = 0; i < f.size(); ++i)
    os << fmt(f[i]) << ',' << fmt(z[i].real()) << ',' << fmt(z[i].imag())
       << "\n";
  write_text(path, os.str());
}

inline void write_ber_csv(const std::string& path,
                          const std::vector<phy::BERPoint>& points,
                          const std::string& scheme_label,
                          const std::string& config_hash,
                          const std::string& header = "") {
  std::ostringstream os;
  if (!header.empty()) os << header << "\n";
  os << "P_in_dBm,bits,errors,ber,scheme,config_hash\n";
  for (const auto& p : points)
    os << fmt(p.P_in_dBm) << ',' << p.bits_sent << ',' << p.bit_errors << ','
       << fmt(p.ber()) << ',' << scheme_label << ',' << config_hash << "\n";
  write_text(path, os.str());
}

inline void write_session_csv(const std::string& prefix,
                              const std::vector<protocol::TagDescriptor>& tags,
                              const protocol::SessionResult& result,
                              const std::string& header = "") {
  for (size_t t = 0; t < tags.size(); ++t) {
    std::ostringstream os;
    if (!header.empty()) os << header << "\n";
    os << "t_s,value,status\n";
    for (const auto& r : result.per_tag[t])
      os << fmt(r.timestamp_s) << ','
         << fmt(protocol::decode_sensor(r.value, tags[t].calibration)) << ','
         << (r.ok ? "ok" : "lost") << "\n";
    write_text(prefix + "_tag" + std::to_string(tags[t].uid) + ".csv",
               os.str());
  }
  json summary = {{"rounds", result.rounds},
                  {"singleton_slots", result.singleton_slots},
                  {"collision_slots", result.collision_slots},
                  {"achieved_rate_hz", result.achieved_rate_hz},
                  {"loss_fraction", result.loss_fraction}};
  write_text(prefix + "_summary.json", summary.dump(2) + "\n");
}

// Interleaved float32 I/Q plus JSON sidecar, for external SDR tooling.
inline void write_waveform_iq(const std::string& path_base,
                              const phy::Waveform& wf) {
  std::ofstream out(path_base + ".iq", std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path_base + ".iq");
  for (const auto& s : wf.samples) {
    float iq[2] = {static_cast<float>(s.real()), static_cast<float>(s.imag())};
    out.write(reinterpret_cast<const char*>(iq), sizeof(iq));
  }
  json meta = {{"sample_rate", wf.sample_rate},
               {"epoch", wf.epoch},
               {"format", "interleaved float32 I/Q"},
               {"samples", wf.samples.size()}};
  write_text(path_base + ".json", meta.dump(2) + "\n");
}

inline phy::Waveform read_waveform_iq(const std::string& path_base) {
  std::ifstream meta_in(path_base + ".json");
  if (!meta_in)
    throw std::runtime_error("cannot open: " + path_base + ".json");
  json meta = json::parse(meta_in);
  phy::Waveform wf;
  wf.sample_rate = meta.at("sample_rate").get<double>();
  wf.epoch = meta.at("epoch").get<int64_t>();
  std::ifstream in(path_base + ".iq", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path_base + ".iq");
  float iq[2];
  while (in.read(reinterpret_cast<char*>(iq), sizeof(iq)))
    wf.samples.emplace_back(iq[0], iq[1]);
  return wf;
}

// FNV-1a over the canonical (sorted-key) JSON serialization.
inline uint64_t config_hash(const json& j) {
  std::string canon = j.dump();  // nlohmann objects iterate in sorted order
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace io
}  // namespace nfcsim
