#pragma once

// Run configuration, snapshots, CSV and manifest output.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "llmag/experiments.hpp"

namespace llmag {

/// Fully resolved run configuration. Text form: flat `key = value` lines
/// under [grid] [material] [scheme] [experiment] [output] headers; `#`
/// starts a comment.
struct RunConfig {
  // [grid]
  int dim = 1;
  std::array<int, 3> n{100, 1, 1};
  std::array<double, 3> extent{1.0, 1.0, 1.0};  ///< in units of L

  // [material]: either the physical group (Ms, Cex, Ku, mu0, L) or the
  // dimensionless group (eps, Q), never both.
  bool physical = false;
  double Ms = 8.0e5, Cex = 1.3e-11, Ku = 1.0e2, mu0 = kMu0, L = 2.0e-6;
  double eps = 1.0, Q = 0.0;
  double alpha = 0.01, beta = 5.0;

  // [scheme]
  SchemeId scheme = SchemeId::IMEXRK2;
  double k = 1e-3;
  double T = 1.0;
  bool project = false;
  RhsForm form = RhsForm::Equivalent;
  GmresConfig gmres{};

  // [experiment]
  std::string kind = "converge";
  SweepAxis axis = SweepAxis::Temporal;
  bool exchange = true, anisotropy = false, demag = false, zeeman = false, forcing = true;
  Vec3 h_ext{};
  unsigned long seed = 1;
  std::string initial = "s_state";
  std::string field_axis = "y";
  int field_steps = 50;
  double canting_deg = 1.0;
  double h_max_mT = 50.0;
  double steady_tol = 1e-9;
  long max_steps = 20000;

  // [output]
  std::string output_dir = "runs";

  GridSpec grid() const;
  MaterialParams material() const;
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the text form. Unknown sections or keys are a ValidationError that
/// lists the valid keys; so is supplying both material groups.
RunConfig parse_config(const std::string& text);
/// Same, starting from `base` instead of the built-in defaults. Material keys
/// from either group switch `physical` accordingly.
RunConfig parse_config(const std::string& text, const RunConfig& base);
RunConfig load_config(const std::filesystem::path& path);
/// Text form with every key written out; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& c);
std::vector<std::string> valid_keys();

/// Round-trip-safe decimal form (17 significant digits).
std::string fmt_double(double v);

/// FNV-1a 64-bit.
std::uint64_t fnv1a(const std::string& s);
/// <base>/<kind>-<16 hex digits of fnv1a(to_text(c))>
std::filesystem::path run_directory(const RunConfig& c);

/// Writes via a sibling temporary file and rename.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  void add(const std::vector<double>& values);
  std::string str() const;
};

// Binary field snapshot: "LLMF", u32 version = 1, u32 nx, ny, nz, f64 hx,
// hy, hz, f64 time, then 3 nx ny nz f64 values (interior cells, x-fastest,
// component-interleaved). All little-endian.
struct FieldSnapshot {
  std::array<std::uint32_t, 3> dims{1, 1, 1};
  std::array<double, 3> spacing{1, 1, 1};
  double time = 0;
  std::vector<double> payload;

  static FieldSnapshot from_field(const VectorField3& m, double t);
  /// dim 0 infers: 1 when ny = nz = 1 and the y, z spacings are 1.
  VectorField3 to_field(int dim = 0) const;
  friend bool operator==(const FieldSnapshot&, const FieldSnapshot&) = default;
};

std::string encode_snapshot(const FieldSnapshot& s);
FieldSnapshot decode_snapshot(const std::string& bytes);
void write_snapshot(const VectorField3& m, double t, const std::filesystem::path& path);
FieldSnapshot read_snapshot(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Command-line entry point; returns the process exit code (0 ok,
/// 1 validation or usage error, 2 numerical failure).
int cli_main(int argc, char** argv);

}  // namespace llmag
