#include "llmag/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <type_traits>
#include <unistd.h>

namespace llmag {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_num(const std::string& key, const std::string& v) {
  double out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ValidationError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long to_int(const std::string& key, const std::string& v) {
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ValidationError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ValidationError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string b2s(bool b) { return b ? "true" : "false"; }

SweepAxis parse_axis(const std::string& v) {
  if (v == "temporal") return SweepAxis::Temporal;
  if (v == "spatial") return SweepAxis::Spatial;
  if (v == "coupled") return SweepAxis::Coupled;
  throw ValidationError("config: 'experiment.axis' must be temporal, spatial or coupled");
}

enum class Group { None, Physical, Dimensionless };

struct Key {
  std::string section, name;
  Group group;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define NUM(sec, nm, field) \
  Key{sec, nm, Group::None, [](const RunConfig& c) { return fmt_double(c.field); }, \
      [](RunConfig& c, const std::string& v) { c.field = to_num(sec "." nm, v); }}
#define INT(sec, nm, field) \
  Key{sec, nm, Group::None, [](const RunConfig& c) { return std::to_string(c.field); }, \
      [](RunConfig& c, const std::string& v) { c.field = static_cast<std::remove_cvref_t<decltype(c.field)>>(to_int(sec "." nm, v)); }}
#define BOOL(sec, nm, field) \
  Key{sec, nm, Group::None, [](const RunConfig& c) { return b2s(c.field); }, \
      [](RunConfig& c, const std::string& v) { c.field = to_bool(sec "." nm, v); }}
#define STR(sec, nm, field) \
  Key{sec, nm, Group::None, [](const RunConfig& c) { return c.field; }, \
      [](RunConfig& c, const std::string& v) { c.field = v; }}
#define PHYS(nm, field) \
  Key{"material", nm, Group::Physical, [](const RunConfig& c) { return fmt_double(c.field); }, \
      [](RunConfig& c, const std::string& v) { c.field = to_num("material." nm, v); }}
#define DIML(nm, field) \
  Key{"material", nm, Group::Dimensionless, [](const RunConfig& c) { return fmt_double(c.field); }, \
      [](RunConfig& c, const std::string& v) { c.field = to_num("material." nm, v); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      INT("grid", "dim", dim),
      INT("grid", "nx", n[0]),
      INT("grid", "ny", n[1]),
      INT("grid", "nz", n[2]),
      NUM("grid", "lx", extent[0]),
      NUM("grid", "ly", extent[1]),
      NUM("grid", "lz", extent[2]),
      PHYS("Ms", Ms),
      PHYS("Cex", Cex),
      PHYS("Ku", Ku),
      PHYS("mu0", mu0),
      PHYS("L", L),
      DIML("eps", eps),
      DIML("Q", Q),
      NUM("material", "alpha", alpha),
      NUM("material", "beta", beta),
      Key{"scheme", "name", Group::None, [](const RunConfig& c) { return scheme_name(c.scheme); },
          [](RunConfig& c, const std::string& v) { c.scheme = parse_scheme(v); }},
      NUM("scheme", "k", k),
      NUM("scheme", "T", T),
      BOOL("scheme", "project", project),
      Key{"scheme", "form", Group::None,
          [](const RunConfig& c) { return std::string(c.form == RhsForm::Equivalent ? "equivalent" : "cross"); },
          [](RunConfig& c, const std::string& v) {
            if (v == "equivalent") c.form = RhsForm::Equivalent;
            else if (v == "cross") c.form = RhsForm::CrossProduct;
            else throw ValidationError("config: 'scheme.form' must be equivalent or cross");
          }},
      NUM("scheme", "gmres_tol", gmres.rel_tol),
      NUM("scheme", "gmres_abs_tol", gmres.abs_tol),
      INT("scheme", "gmres_restart", gmres.restart),
      INT("scheme", "gmres_max_iter", gmres.max_iter),
      STR("experiment", "kind", kind),
      Key{"experiment", "axis", Group::None, [](const RunConfig& c) { return axis_name(c.axis); },
          [](RunConfig& c, const std::string& v) { c.axis = parse_axis(v); }},
      BOOL("experiment", "exchange", exchange),
      BOOL("experiment", "anisotropy", anisotropy),
      BOOL("experiment", "demag", demag),
      BOOL("experiment", "zeeman", zeeman),
      BOOL("experiment", "forcing", forcing),
      NUM("experiment", "hx", h_ext.x),
      NUM("experiment", "hy", h_ext.y),
      NUM("experiment", "hz", h_ext.z),
      INT("experiment", "seed", seed),
      STR("experiment", "initial", initial),
      STR("experiment", "field_axis", field_axis),
      INT("experiment", "field_steps", field_steps),
      NUM("experiment", "canting_deg", canting_deg),
      NUM("experiment", "h_max_mT", h_max_mT),
      NUM("experiment", "steady_tol", steady_tol),
      INT("experiment", "max_steps", max_steps),
      STR("output", "dir", output_dir),
  };
  return k;
}

#undef NUM
#undef INT
#undef BOOL
#undef STR
#undef PHYS
#undef DIML

const char* const kSections[] = {"grid", "material", "scheme", "experiment", "output"};

}  // namespace

std::vector<std::string> valid_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.section + "." + k.name);
  return out;
}

GridSpec RunConfig::grid() const {
  if (dim == 1) return GridSpec::line(n[0], extent[0]);
  return GridSpec::box(n[0], n[1], n[2], extent[0], extent[1], extent[2]);
}

MaterialParams RunConfig::material() const {
  if (physical) return MaterialParams::from_physical(Ms, Cex, Ku, mu0, L, alpha, beta);
  MaterialParams p;
  p.eps = eps;
  p.Q = Q;
  p.alpha = alpha;
  p.beta = beta;
  p.validate();
  return p;
}

void RunConfig::validate() const {
  require(dim == 1 || dim == 3, "config: grid.dim must be 1 or 3");
  for (int a = 0; a < 3; ++a) require(n[static_cast<std::size_t>(a)] >= 1, "config: grid cell counts must be >= 1");
  if (dim == 1) require(n[1] == 1 && n[2] == 1, "config: grid.ny and grid.nz must be 1 when grid.dim = 1");
  for (double e : extent) require(e > 0, "config: grid extents must be > 0");
  require(std::isfinite(alpha) && alpha > 0, "config: material.alpha must be > 0");
  require(std::isfinite(beta) && beta >= 0, "config: material.beta must be >= 0");
  require(std::isfinite(k) && k > 0, "config: scheme.k must be > 0");
  require(std::isfinite(T) && T > 0, "config: scheme.T must be > 0");
  gmres.validate();
  require(!(forcing && demag), "config: experiment.forcing and experiment.demag are mutually exclusive");
  require(field_axis == "x" || field_axis == "y", "config: experiment.field_axis must be x or y");
  require(field_steps >= 2, "config: experiment.field_steps must be >= 2");
  require(steady_tol > 0, "config: experiment.steady_tol must be > 0");
  require(max_steps >= 1, "config: experiment.max_steps must be >= 1");
  (void)material();
  (void)grid();
}

RunConfig parse_config(const std::string& text) { return parse_config(text, RunConfig{}); }

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  RunConfig c = base;
  std::istringstream in(text);
  std::string line, section;
  bool saw_phys = false, saw_dim = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', "config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      bool ok = false;
      for (const char* s : kSections) ok = ok || section == s;
      require(ok, "config: unknown section [" + section + "] (valid: grid, material, scheme, experiment, output)");
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(lineno) + ": expected key = value");
    require(!section.empty(), "config line " + std::to_string(lineno) + ": key outside of a section");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    const Key* found = nullptr;
    for (const auto& k : keys())
      if (k.section == section && k.name == key) found = &k;
    if (!found) {
      std::string msg = "config: unknown key '" + section + "." + key + "'; valid keys:";
      for (const auto& v : valid_keys()) msg += " " + v;
      throw ValidationError(msg);
    }
    found->set(c, val);
    saw_phys = saw_phys || found->group == Group::Physical;
    saw_dim = saw_dim || found->group == Group::Dimensionless;
  }
  require(!(saw_phys && saw_dim),
          "config: give either the physical material group (Ms, Cex, Ku, mu0, L) or the dimensionless one "
          "(eps, Q), not both");
  if (saw_phys) c.physical = true;
  if (saw_dim) c.physical = false;
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

std::string to_text(const RunConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : keys()) {
    if (k.group == Group::Physical && !c.physical) continue;
    if (k.group == Group::Dimensionless && c.physical) continue;
    if (k.section != section) {
      if (!section.empty()) os << "\n";
      section = k.section;
      os << "[" << section << "]\n";
    }
    os << k.name << " = " << k.get(c) << "\n";
  }
  return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

fs::path run_directory(const RunConfig& c) {
  std::ostringstream os;
  os << c.kind << "-" << std::hex << std::setw(16) << std::setfill('0') << fnv1a(to_text(c));
  return fs::path(c.output_dir) / os.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void atomic_write(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void CsvTable::add(const std::vector<double>& values) {
  std::vector<std::string> row;
  for (double v : values) row.push_back(fmt_double(v));
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

// ------------------------------------------------------------------ snapshots

namespace {

constexpr char kMagic[4] = {'L', 'L', 'M', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 3 * 4 + 3 * 8 + 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos++])) << (8 * b);
  return v;
}
double get_f64(const std::string& in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos++])) << (8 * b);
  return std::bit_cast<double>(v);
}

}  // namespace

FieldSnapshot FieldSnapshot::from_field(const VectorField3& m, double t) {
  const GridSpec& g = m.grid();
  FieldSnapshot s;
  for (int a = 0; a < 3; ++a) {
    s.dims[static_cast<std::size_t>(a)] = static_cast<std::uint32_t>(g.n[static_cast<std::size_t>(a)]);
    s.spacing[static_cast<std::size_t>(a)] = g.h[static_cast<std::size_t>(a)];
  }
  s.time = t;
  s.payload.reserve(3 * g.cells());
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        for (int c = 0; c < 3; ++c) s.payload.push_back(m(c, i, j, k));
  return s;
}

VectorField3 FieldSnapshot::to_field(int dim) const {
  if (dim == 0) dim = (dims[1] == 1 && dims[2] == 1 && spacing[1] == 1.0 && spacing[2] == 1.0) ? 1 : 3;
  const int nx = static_cast<int>(dims[0]), ny = static_cast<int>(dims[1]), nz = static_cast<int>(dims[2]);
  const GridSpec g = dim == 1 ? GridSpec::line(nx, nx * spacing[0])
                              : GridSpec::box(nx, ny, nz, nx * spacing[0], ny * spacing[1], nz * spacing[2]);
  VectorField3 m(g);
  require(payload.size() == 3 * g.cells(), "snapshot: payload length does not match dims");
  std::size_t q = 0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (int c = 0; c < 3; ++c) m(c, i, j, k) = payload[q++];
  fill_ghosts(m);
  return m;
}

std::string encode_snapshot(const FieldSnapshot& s) {
  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  for (auto d : s.dims) put_u32(out, d);
  for (double h : s.spacing) put_f64(out, h);
  put_f64(out, s.time);
  for (double v : s.payload) put_f64(out, v);
  return out;
}

FieldSnapshot decode_snapshot(const std::string& in) {
  require(in.size() >= 8, "snapshot: truncated header");
  require(std::memcmp(in.data(), kMagic, 4) == 0, "snapshot: bad magic (expected LLMF)");
  std::size_t pos = 4;
  const std::uint32_t ver = get_u32(in, pos);
  require(ver == kVersion, "snapshot: unsupported version " + std::to_string(ver));
  require(in.size() >= kHeaderBytes, "snapshot: truncated header");
  FieldSnapshot s;
  for (auto& d : s.dims) d = get_u32(in, pos);
  for (double& h : s.spacing) h = get_f64(in, pos);
  s.time = get_f64(in, pos);
  const std::uint64_t count = 3ull * s.dims[0] * s.dims[1] * s.dims[2];
  require(in.size() - kHeaderBytes == 8 * count,
          "snapshot: payload length " + std::to_string(in.size() - kHeaderBytes) + " bytes, header implies " +
              std::to_string(8 * count));
  s.payload.resize(count);
  for (auto& v : s.payload) v = get_f64(in, pos);
  return s;
}

void write_snapshot(const VectorField3& m, double t, const fs::path& path) {
  atomic_write(path, encode_snapshot(FieldSnapshot::from_field(m, t)));
}

FieldSnapshot read_snapshot(const fs::path& path) { return decode_snapshot(read_file(path)); }

}  // namespace llmag
