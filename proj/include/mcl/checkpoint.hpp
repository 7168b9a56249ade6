#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "mcl/chns_core.hpp"

namespace mcl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointHeader {
  std::uint32_t version = 0;
  int nx = 0, ny = 0;
  double lx = 0.0, eps = 0.0, t = 0.0;
  std::int64_t step = 0;
  std::string config_text;  // flattened INI
};

struct Checkpoint {
  CheckpointHeader header;
  RunConfig config;
  FieldState state;  // mu is not stored and comes back empty
};

/// Layout: "MCLS", u32 version, Nx u32, Ny u32, Lx f64, eps f64, t f64,
/// step u64, u64-length-prefixed config text, then phi, u, w, p, U, W_bottom,
/// W_top for the current and the previous level, all little-endian f64 with y
/// running fastest. Written to a temporary file and renamed into place.
void write_checkpoint(const std::string& path, const FieldState& s, const RunConfig& cfg);

/// Reads the header only; array payload is not touched beyond a size check.
CheckpointHeader read_checkpoint_header(const std::string& path);

/// Full read. With `expected`, physics and numerics keys (except T_end) must
/// agree unless force is set; grid shape must always agree.
Checkpoint read_checkpoint(const std::string& path, const RunConfig* expected = nullptr, bool force = false);

}  // namespace mcl
