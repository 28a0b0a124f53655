#pragma once

// Diagnostics CSV and binary field snapshots.
//
// CSV header: step,t,tau,accepted,err_est,mass_total,mass_1..J,E,E1,E2,mu_1..J,transforms_cum
// with every real printed to 17 significant digits.
//
// Snapshot layout (little-endian):
//   "GPSS" | u32 version | u32 d | u32 J | u32 points[d] | f64 omega[d] | f64 t
//   | u8 mode (0 real, 1 imaginary) | u8 encoding (1 = complex f64 pairs) | u16 reserved
//   | J * prod(points) (re, im) pairs, component-major, axis 0 fastest.

#include <cstdio>
#include <string>
#include <vector>

#include "gpsplit/errors.hpp"
#include "gpsplit/model.hpp"

namespace gpsplit {

std::string diagnostics_header(int components);
std::string diagnostics_row(const ObservableRecord& record);

/// Streams records to a CSV file in acceptance order. The header is written on
/// construction, so an empty run leaves a header-only file.
class DiagnosticsWriter {
 public:
  DiagnosticsWriter(const std::string& path, int components);
  ~DiagnosticsWriter();
  DiagnosticsWriter(const DiagnosticsWriter&) = delete;
  DiagnosticsWriter& operator=(const DiagnosticsWriter&) = delete;

  void write(const ObservableRecord& record);
  /// Flushes and closes; throws IoError on failure.
  void close();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  int components_;
  std::FILE* file_ = nullptr;
};

void write_diagnostics(const std::string& path, int components,
                       const std::vector<ObservableRecord>& records);

/// Reads the serialized columns back (e1/e2 per component are not stored).
std::vector<ObservableRecord> read_diagnostics(const std::string& path);

/// Malformed or mismatched snapshot file.
class SnapshotError : public IoError {
 public:
  enum class Kind { corrupt_header, truncated, grid_mismatch };
  SnapshotError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Snapshot {
  GridSpec grid;
  State state;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::uint8_t kEncodingComplex128 = 1;

std::size_t snapshot_header_bytes(int dim);
void snapshot_write(const std::string& path, const SpectralGrid& grid, const State& state);
/// Reads and validates a snapshot; with `expected` set the grid must match it.
Snapshot snapshot_read(const std::string& path, const SpectralGrid* expected = nullptr);

/// The x_3 = 0 plane of a 3D state and its 2D grid.
Snapshot section_x3_zero(const SpectralGrid& grid, const State& state);

/// Lowercase hex SHA-256 of a byte string or a file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace gpsplit
