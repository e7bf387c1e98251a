#pragma once

// Field snapshots, JSON records and the radial-profile CSV.
//
// Snapshot layout (little endian):
//   "FCHQ1"  dim:u8  n:u32  L:f64  values:f64[n^dim]

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/functionals.hpp"
#include "fchq/ground_state.hpp"
#include "fchq/grid.hpp"
#include "fchq/inequality_lab.hpp"
#include "fchq/verify.hpp"

namespace fchq {

using Json = nlohmann::ordered_json;

// --------------------------------------------------------------------------
// Snapshots

namespace detail {

inline constexpr char kSnapshotMagic[5] = {'F', 'C', 'H', 'Q', '1'};

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw SnapshotError("truncated snapshot");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::string encode_snapshot(const Field& u) {
  const GridSpec& g = u.grid();
  std::string out(detail::kSnapshotMagic, 5);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(g.dim));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis));
  detail::put_le<double>(out, g.half_length);
  for (double v : u.values()) detail::put_le<double>(out, v);
  return out;
}

inline Field decode_snapshot(const std::string& bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), detail::kSnapshotMagic, 5) != 0)
    throw SnapshotError("bad magic");
  std::size_t pos = 5;
  const int dim = detail::get_le<std::uint8_t>(bytes, pos);
  const std::uint32_t n = detail::get_le<std::uint32_t>(bytes, pos);
  const double L = detail::get_le<double>(bytes, pos);
  GridSpec g;
  try {
    g = make_grid(dim, L, n);
  } catch (const InvalidGrid& e) {
    throw SnapshotError(std::string("bad header: ") + e.what());
  }
  const std::size_t count = g.total_points();
  if (bytes.size() - pos != count * sizeof(double))
    throw SnapshotError("expected " + std::to_string(count) + " values, payload has " +
                        std::to_string((bytes.size() - pos) / sizeof(double)));
  std::vector<double> v(count);
  for (auto& x : v) {
    x = detail::get_le<double>(bytes, pos);
    if (!std::isfinite(x)) throw SnapshotError("non-finite value in payload");
  }
  return Field(g, std::move(v));
}

inline void write_snapshot(const std::string& path, const Field& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SnapshotError("cannot open " + path + " for writing");
  const std::string bytes = encode_snapshot(u);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw SnapshotError("write failed for " + path);
}

inline Field read_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SnapshotError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_snapshot(ss.str());
}

// --------------------------------------------------------------------------
// JSON

namespace detail {
// JSON has no infinities; they are written as null
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
}  // namespace detail

inline Json to_json(const EnergyReport& r) {
  Json j;
  j["kinetic"] = detail::number(r.kinetic);
  j["mass"] = detail::number(r.mass);
  j["dterm"] = detail::number(r.dterm);
  j["energy"] = detail::number(r.energy);
  j["pohozaev"] = detail::number(r.pohozaev);
  j["grad_norm"] = detail::number(r.grad_norm);
  return j;
}

inline Json to_json(const SolveResult& r) {
  Json j;
  j["solver"] = r.solver;
  j["status"] = to_string(r.status);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["p_mu_estimate"] = detail::number(r.p_mu_estimate);
  j["lagrange_residual"] = detail::number(r.lagrange_residual);
  j["report"] = to_json(r.report);
  j["warnings"] = r.warnings;
  Json hist = Json::array();
  for (const auto& h : r.history)
    hist.push_back({{"energy", detail::number(h.energy)},
                    {"grad_norm", detail::number(h.grad_norm)},
                    {"pohozaev", detail::number(h.pohozaev)}});
  j["history"] = std::move(hist);
  return j;
}

inline Json to_json(const QualitativeReport& q) {
  Json j;
  j["min_value"] = detail::number(q.min_value);
  j["asymmetry"] = detail::number(q.asymmetry);
  j["sup_norm"] = detail::number(q.sup_norm);
  j["l1_norm"] = detail::number(q.l1_norm);
  j["riesz_edge"] = detail::number(q.riesz_edge);
  j["centered"] = q.centered;
  j["notes"] = q.notes;
  return j;
}

inline Json to_json(const DecayFit& d) {
  Json j;
  j["window"] = {detail::number(d.window.r1), detail::number(d.window.r2)};
  j["slope"] = detail::number(d.slope);
  j["expected"] = detail::number(d.expected);
  j["c_lower"] = detail::number(d.c_lower);
  j["c_upper"] = detail::number(d.c_upper);
  j["envelope_ratio"] = detail::number(d.envelope_ratio());
  j["r_squared"] = detail::number(d.r_squared);
  j["shells"] = d.shells;
  j["informational"] = d.informational;
  j["flags"] = d.flags;
  return j;
}

inline Json to_json(const IneqReport& r) {
  Json j;
  j["name"] = r.name;
  j["trials"] = r.trials;
  j["worst_margin"] = detail::number(r.worst_margin);
  j["violations"] = r.violations;
  j["max_ratio"] = detail::number(r.max_ratio);
  j["notes"] = r.notes;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SnapshotError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw SnapshotError("write failed for " + path);
}

inline void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// --------------------------------------------------------------------------
// CSV

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::string radial_profile_csv(const Field& u) {
  std::string out = "r,shell_mean_u,shell_min,shell_max\n";
  for (const auto& s : radial_profile(u))
    out += format_double(s.r) + "," + format_double(s.mean) + "," + format_double(s.min) + "," +
           format_double(s.max) + "\n";
  return out;
}

}  // namespace fchq
