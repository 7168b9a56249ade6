#include "doctest.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mcl/checkpoint.hpp"

using namespace mcl;
namespace fs = std::filesystem;

namespace {

// Deterministic contents shared with the stored golden file.
FieldState pattern_state(int nx, int ny) {
  FieldState s;
  auto fill = [&](TimeLevel& L, int level) {
    Field* fields[] = {&L.phi, &L.u, &L.w, &L.p, &L.U};
    for (int k = 0; k < 5; ++k) {
      fields[k]->resize(ny + 1, nx);
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= ny; ++j) (*fields[k])(j, i) = level * 100 + k * 10 + j + 0.5 * i + 1.0 / 3.0;
    }
    L.W.bottom.resize(nx);
    L.W.top.resize(nx);
    for (int i = 0; i < nx; ++i) {
      L.W.bottom(i) = level * 100 + 50 + i / 7.0;
      L.W.top(i) = level * 100 + 60 - i / 7.0;
    }
  };
  fill(s.now, 0);
  fill(s.prev, 1);
  s.t = 0.0123;
  s.step = 123;
  return s;
}

RunConfig small_config() {
  RunConfig c;
  c.sim.Nx = 4;
  c.sim.Ny = 2;
  c.sim.eps = 0.04;
  finalize(c);
  return c;
}

bool same(const TimeLevel& a, const TimeLevel& b) {
  auto eq = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  };
  return eq(a.phi, b.phi) && eq(a.u, b.u) && eq(a.w, b.w) && eq(a.p, b.p) && eq(a.U, b.U) &&
         eq(a.W.bottom, b.W.bottom) && eq(a.W.top, b.W.top);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mcl_test_checkpoint";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("round trip is bitwise") {
  const RunConfig cfg = small_config();
  FieldState s = pattern_state(4, 2);
  s.now.phi(1, 2) = 0.1 + 0.2;  // not exactly representable as a short decimal
  const auto path = scratch("rt.mcls").string();
  write_checkpoint(path, s, cfg);
  const Checkpoint c = read_checkpoint(path, &cfg);
  CHECK(same(c.state.now, s.now));
  CHECK(same(c.state.prev, s.prev));
  CHECK(c.state.t == s.t);
  CHECK(c.state.step == s.step);
  CHECK(flatten(c.config) == flatten(cfg));
  CHECK_FALSE(fs::exists(path + ".tmp"));
}

TEST_CASE("header-only inspection") {
  const RunConfig cfg = small_config();
  const auto path = scratch("hdr.mcls").string();
  write_checkpoint(path, pattern_state(4, 2), cfg);
  const CheckpointHeader h = read_checkpoint_header(path);
  CHECK(h.version == kCheckpointVersion);
  CHECK(h.nx == 4);
  CHECK(h.ny == 2);
  CHECK(h.lx == cfg.sim.Lx);
  CHECK(h.eps == cfg.sim.eps);
  CHECK(h.t == 0.0123);
  CHECK(h.step == 123);
  CHECK(h.config_text == flatten(cfg));
}

TEST_CASE("truncated, foreign and wrong-version files are rejected") {
  const RunConfig cfg = small_config();
  const auto path = scratch("trunc.mcls").string();
  write_checkpoint(path, pattern_state(4, 2), cfg);
  const auto size = fs::file_size(path);
  fs::resize_file(path, size - 8);
  CHECK_THROWS_AS(read_checkpoint(path), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint_header(path), CheckpointError);
  fs::resize_file(path, 20);
  CHECK_THROWS_AS(read_checkpoint(path), CheckpointError);

  const auto other = scratch("foreign.mcls").string();
  { std::ofstream(other) << "not a checkpoint"; }
  CHECK_THROWS_AS(read_checkpoint(other), CheckpointError);

  const auto ver = scratch("version.mcls").string();
  write_checkpoint(ver, pattern_state(4, 2), cfg);
  {
    std::fstream f(ver, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char v2[4] = {2, 0, 0, 0};
    f.write(v2, 4);
  }
  try {
    read_checkpoint(ver);
    FAIL("version mismatch not detected");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find("version 2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_checkpoint("/nonexistent/dir/x.mcls"), CheckpointError);
}

TEST_CASE("configuration cross-check") {
  const RunConfig cfg = small_config();
  const auto path = scratch("cfg.mcls").string();
  write_checkpoint(path, pattern_state(4, 2), cfg);

  RunConfig bigger = cfg;
  bigger.sim.Nx = 8;
  CHECK_THROWS_AS(read_checkpoint(path, &bigger), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(path, &bigger, true), CheckpointError);

  RunConfig other = cfg;
  other.sim.B = 10.0;
  CHECK_THROWS_AS(read_checkpoint(path, &other), CheckpointError);
  CHECK_NOTHROW(read_checkpoint(path, &other, true));

  RunConfig longer = cfg;
  longer.sim.T_end = 1.0;
  longer.exp.output_dir = "elsewhere";
  CHECK_NOTHROW(read_checkpoint(path, &longer));
}

TEST_CASE("stored golden file parses to the known pattern") {
  const std::string golden = std::string(MCL_TEST_DATA) + "/golden_v1.mcls";
  const Checkpoint c = read_checkpoint(golden);
  CHECK(c.header.nx == 4);
  CHECK(c.header.ny == 2);
  CHECK(c.header.step == 123);
  const FieldState ref = pattern_state(4, 2);
  CHECK(same(c.state.now, ref.now));
  CHECK(same(c.state.prev, ref.prev));
  CHECK(c.config.sim.eps == 0.04);
  // Little-endian on disk regardless of the host: the version word reads 01 00 00 00.
  std::ifstream f(golden, std::ios::binary);
  char head[8];
  f.read(head, 8);
  CHECK(std::string(head, 4) == "MCLS");
  CHECK(head[4] == 1);
  CHECK(head[5] == 0);
}
