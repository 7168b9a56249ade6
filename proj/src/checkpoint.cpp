#include "mcl/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <vector>

namespace mcl {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  template <class T>
  void put(T v) {
    v = to_le(v);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void bytes(const std::string& s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void array(const double* d, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) put(d[i]);
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path) : buf_(std::move(buf)), path_(std::move(path)) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_le(v);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void array(double* d, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) d[i] = get<double>();
  }
  std::size_t remaining() const { return buf_.size() - pos_; }
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw CheckpointError("checkpoint '" + path_ + "' is truncated");
  }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::string path_;
};

std::vector<char> slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

CheckpointHeader parse_header(Reader& r, const std::string& path) {
  if (r.remaining() < 8 || r.bytes(4) != "MCLS") throw CheckpointError("'" + path + "' is not a checkpoint file");
  CheckpointHeader h;
  h.version = r.get<std::uint32_t>();
  if (h.version != kCheckpointVersion)
    throw CheckpointError("checkpoint '" + path + "' has format version " + std::to_string(h.version) +
                          ", expected " + std::to_string(kCheckpointVersion));
  h.nx = static_cast<int>(r.get<std::uint32_t>());
  h.ny = static_cast<int>(r.get<std::uint32_t>());
  h.lx = r.get<double>();
  h.eps = r.get<double>();
  h.t = r.get<double>();
  h.step = static_cast<std::int64_t>(r.get<std::uint64_t>());
  const auto len = r.get<std::uint64_t>();
  h.config_text = r.bytes(len);
  return h;
}

std::size_t payload_doubles(const CheckpointHeader& h) {
  const std::size_t field = static_cast<std::size_t>(h.nx) * (h.ny + 1);
  return 2 * (5 * field + 2 * static_cast<std::size_t>(h.nx));
}

void write_level(Writer& w, const TimeLevel& L) {
  for (const Field* f : {&L.phi, &L.u, &L.w, &L.p, &L.U}) w.array(f->data(), f->size());
  w.array(L.W.bottom.data(), L.W.bottom.size());
  w.array(L.W.top.data(), L.W.top.size());
}

void read_level(Reader& r, TimeLevel& L, int nx, int ny) {
  for (Field* f : {&L.phi, &L.u, &L.w, &L.p, &L.U}) {
    f->resize(ny + 1, nx);
    r.array(f->data(), f->size());
  }
  L.W.bottom.resize(nx);
  L.W.top.resize(nx);
  r.array(L.W.bottom.data(), nx);
  r.array(L.W.top.data(), nx);
}

}  // namespace

void write_checkpoint(const std::string& path, const FieldState& s, const RunConfig& cfg) {
  const int nx = static_cast<int>(s.now.phi.cols()), ny = static_cast<int>(s.now.phi.rows()) - 1;
  for (const TimeLevel* L : {&s.now, &s.prev}) {
    for (const Field* f : {&L->phi, &L->u, &L->w, &L->p, &L->U})
      if (f->rows() != ny + 1 || f->cols() != nx) throw CheckpointError("write_checkpoint: inconsistent field shapes");
    if (L->W.bottom.size() != nx || L->W.top.size() != nx)
      throw CheckpointError("write_checkpoint: inconsistent wall-trace shapes");
  }
  Writer w;
  w.bytes("MCLS");
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(nx));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ny));
  w.put<double>(cfg.sim.Lx);
  w.put<double>(cfg.sim.eps);
  w.put<double>(s.t);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(s.step));
  const std::string text = flatten(cfg);
  w.put<std::uint64_t>(text.size());
  w.bytes(text);
  write_level(w, s.now);
  write_level(w, s.prev);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot write checkpoint '" + tmp + "'");
    f.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!f) throw CheckpointError("I/O error while writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place at '" + path + "': " + ec.message());
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  Reader r(slurp(path), path);
  CheckpointHeader h = parse_header(r, path);
  if (r.remaining() != payload_doubles(h) * sizeof(double))
    throw CheckpointError("checkpoint '" + path + "' payload length does not match its header");
  return h;
}

Checkpoint read_checkpoint(const std::string& path, const RunConfig* expected, bool force) {
  Reader r(slurp(path), path);
  Checkpoint c;
  c.header = parse_header(r, path);
  if (r.remaining() != payload_doubles(c.header) * sizeof(double))
    throw CheckpointError("checkpoint '" + path + "' payload length does not match its header");
  c.config = parse_config(c.header.config_text);

  if (expected) {
    if (expected->sim.Nx != c.header.nx || expected->sim.Ny != c.header.ny)
      throw CheckpointError("checkpoint '" + path + "' grid " + std::to_string(c.header.nx) + "x" +
                            std::to_string(c.header.ny) + " does not match configured " +
                            std::to_string(expected->sim.Nx) + "x" + std::to_string(expected->sim.Ny));
    if (!force) {
      std::map<std::string, std::string> stored;
      for (auto& [k, v] : flatten_pairs(c.config)) stored[k] = v;
      std::string diff;
      for (auto& [k, v] : flatten_pairs(*expected)) {
        if (k.rfind("physics.", 0) != 0 && k.rfind("numerics.", 0) != 0) continue;
        if (k == "numerics.T_end") continue;
        if (stored[k] != v) diff += " " + k + " (stored " + stored[k] + ", configured " + v + ")";
      }
      if (!diff.empty())
        throw CheckpointError("checkpoint '" + path + "' parameters differ from the configuration:" + diff +
                              "; use --force to override");
    }
  }

  c.state.t = c.header.t;
  c.state.step = c.header.step;
  read_level(r, c.state.now, c.header.nx, c.header.ny);
  read_level(r, c.state.prev, c.header.nx, c.header.ny);
  return c;
}

}  // namespace mcl
