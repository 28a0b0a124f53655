#include "gpsplit/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gpsplit {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw IoError(where + ": bad number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw IoError(where + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string diagnostics_header(int components) {
  std::string h = "step,t,tau,accepted,err_est,mass_total";
  for (int j = 1; j <= components; ++j) h += ",mass_" + std::to_string(j);
  h += ",E,E1,E2";
  for (int j = 1; j <= components; ++j) h += ",mu_" + std::to_string(j);
  h += ",transforms_cum";
  return h;
}

std::string diagnostics_row(const ObservableRecord& r) {
  std::string row = std::to_string(r.step) + "," + fmt(r.t) + "," + fmt(r.tau) + "," +
                    (r.accepted ? "1" : "0") + "," + fmt(r.err_estimate) + "," + fmt(r.mass_total);
  for (double m : r.mass) row += "," + fmt(m);
  row += "," + fmt(r.E) + "," + fmt(r.E1) + "," + fmt(r.E2);
  for (double m : r.mu) row += "," + fmt(m);
  row += "," + std::to_string(r.transforms);
  return row;
}

DiagnosticsWriter::DiagnosticsWriter(const std::string& path, int components)
    : path_(path), components_(components) {
  file_ = std::fopen(path.c_str(), "w");
  if (!file_) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  const std::string h = diagnostics_header(components) + "\n";
  if (std::fputs(h.c_str(), file_) < 0) throw IoError("write failed: '" + path + "'");
}

DiagnosticsWriter::~DiagnosticsWriter() {
  if (file_) std::fclose(file_);
}

void DiagnosticsWriter::write(const ObservableRecord& record) {
  if (!file_) throw IoError("write to closed diagnostics file '" + path_ + "'");
  if (static_cast<int>(record.mass.size()) != components_ ||
      static_cast<int>(record.mu.size()) != components_)
    throw std::invalid_argument("diagnostics: record has the wrong number of components");
  const std::string row = diagnostics_row(record) + "\n";
  if (std::fputs(row.c_str(), file_) < 0) throw IoError("write failed: '" + path_ + "'");
}

void DiagnosticsWriter::close() {
  if (!file_) return;
  const bool ok = std::fflush(file_) == 0;
  const bool closed = std::fclose(file_) == 0;
  file_ = nullptr;
  if (!ok || !closed) throw IoError("write failed: '" + path_ + "'");
}

void write_diagnostics(const std::string& path, int components,
                       const std::vector<ObservableRecord>& records) {
  DiagnosticsWriter w(path, components);
  for (const auto& r : records) w.write(r);
  w.close();
}

std::vector<ObservableRecord> read_diagnostics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header");
  const auto head = split_csv(line);
  int components = 0;
  for (const auto& h : head)
    if (h.rfind("mass_", 0) == 0 && h != "mass_total") ++components;
  if (line != diagnostics_header(components)) throw IoError(path + ": unexpected header");
  const std::size_t width = head.size();

  std::vector<ObservableRecord> out;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto cells = split_csv(line);
    if (cells.size() != width) throw IoError(where + ": expected " + std::to_string(width) + " columns");
    ObservableRecord r;
    std::size_t c = 0;
    r.step = parse_int(cells[c++], where);
    r.t = parse_double(cells[c++], where);
    r.tau = parse_double(cells[c++], where);
    r.accepted = parse_int(cells[c++], where) != 0;
    r.err_estimate = parse_double(cells[c++], where);
    r.mass_total = parse_double(cells[c++], where);
    for (int j = 0; j < components; ++j) r.mass.push_back(parse_double(cells[c++], where));
    r.E = parse_double(cells[c++], where);
    r.E1 = parse_double(cells[c++], where);
    r.E2 = parse_double(cells[c++], where);
    for (int j = 0; j < components; ++j) r.mu.push_back(parse_double(cells[c++], where));
    r.transforms = parse_int(cells[c++], where);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

template <typename T>
void put(std::string& buf, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t& pos) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

using Kind = SnapshotError::Kind;

}  // namespace

std::size_t snapshot_header_bytes(int dim) {
  return 4 + 3 * 4 + static_cast<std::size_t>(dim) * (4 + 8) + 8 + 4;
}

void snapshot_write(const std::string& path, const SpectralGrid& grid, const State& state) {
  const int d = grid.dim();
  const int J = static_cast<int>(state.psi.size());
  for (const auto& f : state.psi)
    if (f.size() != grid.size()) throw std::invalid_argument("snapshot: field does not match grid");
  std::string buf;
  buf.reserve(snapshot_header_bytes(d) + static_cast<std::size_t>(J * grid.size()) * 16);
  buf.append("GPSS", 4);
  put<std::uint32_t>(buf, kSnapshotVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(d));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(J));
  for (int i = 0; i < d; ++i) put<std::uint32_t>(buf, static_cast<std::uint32_t>(grid.points(i)));
  for (int i = 0; i < d; ++i) put<double>(buf, grid.omega(i));
  put<double>(buf, state.t);
  put<std::uint8_t>(buf, state.mode == Mode::real ? 0 : 1);
  put<std::uint8_t>(buf, kEncodingComplex128);
  put<std::uint16_t>(buf, 0);
  for (const auto& f : state.psi)
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      put<double>(buf, f[k].real());
      put<double>(buf, f[k].imag());
    }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.close();
  if (!out) throw IoError("write failed: '" + path + "'");
}

Snapshot snapshot_read(const std::string& path, const SpectralGrid* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  auto fail = [&](Kind kind, const std::string& msg) -> SnapshotError {
    return SnapshotError(kind, path + ": " + msg);
  };

  if (buf.size() < 16) throw fail(Kind::truncated, "file shorter than the fixed header");
  if (buf.compare(0, 4, "GPSS") != 0) throw fail(Kind::corrupt_header, "bad magic");
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(buf, pos);
  if (version != kSnapshotVersion)
    throw fail(Kind::corrupt_header, "unsupported version " + std::to_string(version));
  const auto d = get<std::uint32_t>(buf, pos);
  const auto J = get<std::uint32_t>(buf, pos);
  if (d < 1 || d > 3) throw fail(Kind::corrupt_header, "dimension " + std::to_string(d));
  if (J < 1 || J > 64) throw fail(Kind::corrupt_header, "component count " + std::to_string(J));
  const std::size_t header = snapshot_header_bytes(static_cast<int>(d));
  if (buf.size() < header) throw fail(Kind::truncated, "header cut short");

  GridSpec spec;
  std::size_t cells = 1;
  for (std::uint32_t i = 0; i < d; ++i) {
    const auto m = get<std::uint32_t>(buf, pos);
    if (m < 2 || m % 2 != 0 || m > (1u << 24))
      throw fail(Kind::corrupt_header, "bad point count " + std::to_string(m));
    spec.points.push_back(static_cast<int>(m));
    cells *= m;
  }
  for (std::uint32_t i = 0; i < d; ++i) {
    const double w = get<double>(buf, pos);
    if (!(w > 0.0) || !std::isfinite(w)) throw fail(Kind::corrupt_header, "bad half-width");
    spec.omega.push_back(w);
  }
  const double t = get<double>(buf, pos);
  const auto mode = get<std::uint8_t>(buf, pos);
  const auto encoding = get<std::uint8_t>(buf, pos);
  get<std::uint16_t>(buf, pos);
  if (!std::isfinite(t)) throw fail(Kind::corrupt_header, "non-finite time");
  if (mode > 1) throw fail(Kind::corrupt_header, "bad mode tag");
  if (encoding != kEncodingComplex128) throw fail(Kind::corrupt_header, "unknown encoding tag");

  const std::size_t payload = static_cast<std::size_t>(J) * cells * 16;
  if (buf.size() < header + payload)
    throw fail(Kind::truncated, "payload has " + std::to_string(buf.size() - header) +
                                    " bytes, expected " + std::to_string(payload));
  if (buf.size() > header + payload) throw fail(Kind::corrupt_header, "trailing bytes after payload");

  if (expected) {
    const auto& e = expected->spec();
    if (e.points != spec.points || e.omega != spec.omega)
      throw fail(Kind::grid_mismatch, "grid does not match the expected grid");
  }

  Snapshot snap;
  snap.grid = spec;
  snap.state.t = t;
  snap.state.mode = mode == 0 ? Mode::real : Mode::imaginary;
  for (std::uint32_t j = 0; j < J; ++j) {
    Field f(static_cast<Eigen::Index>(cells));
    for (std::size_t k = 0; k < cells; ++k) {
      const double re = get<double>(buf, pos);
      const double im = get<double>(buf, pos);
      f[static_cast<Eigen::Index>(k)] = Complex(re, im);
    }
    snap.state.psi.push_back(std::move(f));
  }
  return snap;
}

Snapshot section_x3_zero(const SpectralGrid& grid, const State& state) {
  if (grid.dim() != 3) throw std::invalid_argument("section_x3_zero: needs a 3D grid");
  const int m0 = grid.points(0), m1 = grid.points(1), m2 = grid.points(2);
  // x_k = -w + k h vanishes at k = M / 2.
  const Eigen::Index k2 = m2 / 2;
  Snapshot out;
  out.grid.points = {m0, m1};
  out.grid.omega = {grid.omega(0), grid.omega(1)};
  out.state.t = state.t;
  out.state.mode = state.mode;
  const Eigen::Index plane = static_cast<Eigen::Index>(m0) * m1;
  for (const auto& f : state.psi) out.state.psi.push_back(f.segment(k2 * plane, plane));
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace gpsplit
