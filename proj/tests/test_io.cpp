#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <unistd.h>
#include <fstream>

#include "llmag/io.hpp"
#include "test_util.hpp"

using namespace llmag;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("llmag_test_io_" + std::to_string(::getpid())) / name;
  fs::create_directories(p.parent_path());
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
  CHECK(parse_config("") == RunConfig{});
  CHECK(parse_config("# only a comment\n\n   \n") == RunConfig{});
}

TEST_CASE("config values and validation") {
  const auto c = parse_config(R"(
[grid]
dim = 3
nx = 8   # trailing comment
ny = 4
nz = 2
[material]
eps = 0.5
Q = 0.1
alpha = 0.2
beta = 3
[scheme]
name = ssp
k = 1e-3
T = 0.02
project = true
form = cross
gmres_tol = 1e-10
[experiment]
kind = stability
hx = 0.1
seed = 99
[output]
dir = /tmp/x
)");
  CHECK(c.dim == 3);
  CHECK(c.n == std::array<int, 3>{8, 4, 2});
  CHECK(c.eps == 0.5);
  CHECK_FALSE(c.physical);
  CHECK(c.scheme == SchemeId::SSPIMEXRK2);
  CHECK(c.form == RhsForm::CrossProduct);
  CHECK(c.gmres.rel_tol == 1e-10);
  CHECK(c.h_ext.x == 0.1);
  CHECK(c.seed == 99);
  CHECK(c.output_dir == "/tmp/x");
  CHECK(c.grid().n[1] == 4);
  CHECK(c.material().Q == 0.1);

  const std::string beta = error_of("[material]\nbeta = -1\n");
  CHECK(beta.find("beta") != std::string::npos);
  CHECK(error_of("[scheme]\nk = 0\n").find("k") != std::string::npos);
  CHECK(error_of("[grid]\ndim = 2\n").find("dim") != std::string::npos);
  CHECK(error_of("[grid]\nnx = abc\n").find("nx") != std::string::npos);
  CHECK(error_of("[grid]\ndim = 1\nny = 3\n") != "");
  CHECK(error_of("[experiment]\ndemag = true\nforcing = true\n") != "");
  CHECK(error_of("no equals sign\n") != "");
}

TEST_CASE("unknown keys and sections list the valid keys") {
  const std::string e = error_of("[grid]\nnq = 3\n");
  CHECK(e.find("nq") != std::string::npos);
  CHECK(e.find("grid.nx") != std::string::npos);
  CHECK(error_of("[solver]\nx = 1\n").find("solver") != std::string::npos);
  CHECK(valid_keys().size() > 30);
}

TEST_CASE("material groups") {
  const auto c = parse_config("[material]\nMs = 8e5\nCex = 1.3e-11\nKu = 100\nL = 2e-6\n");
  CHECK(c.physical);
  CHECK(c.material().Q == doctest::Approx(1.2434e-4).epsilon(1e-4));
  CHECK(c.material().eps == doctest::Approx(1.3e-11 / (4e-7 * M_PI * 6.4e11 * 4e-12)).epsilon(1e-12));
  CHECK(error_of("[material]\nMs = 8e5\neps = 1\n").find("both") != std::string::npos);
}

TEST_CASE("text round trip") {
  RunConfig c;
  c.dim = 3;
  c.n = {5, 6, 7};
  c.physical = true;
  c.L = 1.234567890123e-6;
  c.alpha = 0.1 + 0.2;
  c.scheme = SchemeId::BDF2LD;
  c.k = 1.0 / 3.0;
  c.h_ext = {1e-300, -0.0, 3.5};
  c.kind = "relax";
  c.initial = "c_state";
  c.gmres.abs_tol = 1e-14;
  CHECK(parse_config(to_text(c)) == c);
  RunConfig d;
  CHECK(parse_config(to_text(d)) == d);
  CHECK(to_text(c) == to_text(parse_config(to_text(c))));
  CHECK(fmt_double(0.1) == "0.10000000000000001");
}

TEST_CASE("run directory is a stable hash") {
  RunConfig c;
  c.output_dir = "out";
  const auto a = run_directory(c);
  CHECK(a.parent_path() == "out");
  CHECK(a.filename().string().rfind("converge-", 0) == 0);
  CHECK(a.filename().string().size() == std::string("converge-").size() + 16);
  CHECK(run_directory(c) == a);
  c.k *= 2;
  CHECK(run_directory(c) != a);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("csv table") {
  CsvTable t;
  t.header = {"k", "err"};
  t.add({0.5, 1e-3});
  CHECK(t.str() == "k,err\n0.5,0.001\n");
}

TEST_CASE("snapshot round trip") {
  const auto g = GridSpec::box(5, 4, 3, 1.0, 0.5, 0.25);
  const auto m = testutil::random_field(g, 1);
  const auto p = scratch("m.llmf");
  write_snapshot(m, 0.125, p);
  const auto s = read_snapshot(p);
  CHECK(s.time == 0.125);
  CHECK(s.dims == std::array<std::uint32_t, 3>{5, 4, 3});
  const auto back = s.to_field();
  CHECK(back.grid() == g);
  CHECK(testutil::max_diff(back, m) == 0.0);
  CHECK(s == FieldSnapshot::from_field(m, 0.125));
  CHECK(fs::file_size(p) == 52 + 8 * 3 * 60);

  const auto line = testutil::random_field(GridSpec::line(7, 2.0), 2);
  CHECK(FieldSnapshot::from_field(line, 0).to_field().grid() == GridSpec::line(7, 2.0));
}

TEST_CASE("snapshot errors") {
  VectorField3 m(GridSpec::line(3));
  m.fill({1, 0, 0});
  const std::string bytes = encode_snapshot(FieldSnapshot::from_field(m, 0));
  CHECK_THROWS_AS(decode_snapshot(bytes.substr(0, 20)), ValidationError);
  CHECK_THROWS_AS(decode_snapshot(bytes.substr(0, bytes.size() - 1)), ValidationError);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_snapshot(bad), ValidationError);
  bad = bytes;
  bad[4] = 2;
  try {
    decode_snapshot(bad);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  CHECK_THROWS(read_snapshot(scratch("missing.llmf")));
}

TEST_CASE("snapshot golden bytes") {
  VectorField3 m(GridSpec::line(1));
  m.set(0, 0, 0, {1.0, 0, 0});
  const std::string b = encode_snapshot(FieldSnapshot::from_field(m, 0));
  // header: magic 4, version 4, dims 12, spacing 24, time 8
  REQUIRE(b.size() == 52 + 24);
  CHECK(b.substr(0, 4) == "LLMF");
  CHECK(static_cast<unsigned char>(b[4]) == 1);
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  for (int i = 0; i < 8; ++i) CHECK(static_cast<unsigned char>(b[52 + i]) == one[i]);
}

TEST_CASE("atomic write") {
  const auto p = scratch("a.txt");
  atomic_write(p, "first");
  atomic_write(p, "second");
  CHECK(read_file(p) == "second");
  for (const auto& e : fs::directory_iterator(p.parent_path()))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}
