#include "lmcf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace lmcf {
namespace {

constexpr char kMagic[4] = {'L', 'M', 'C', 'F'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  bool magic_ok() {
    need(4, "magic");
    const bool ok = std::memcmp(in_.data() + pos_, kMagic, 4) == 0;
    pos_ += 4;
    return ok;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw CheckpointError(std::string("checkpoint truncated while reading ") + what);
    }
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const FlowState& state, const FlowConfig& cfg) {
  const GridSpec& g = state.u.spec();
  require_same_grid(g, cfg.grid);
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) w.u32(static_cast<std::uint32_t>(g.size(a)));
  for (int a = 0; a < g.dim(); ++a) w.f64(g.period(a));
  w.f64(state.t);
  w.f64(cfg.kappa);
  for (double v : state.u.values()) w.f64(v);
  return w.take();
}

LoadedCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, Scheme scheme) {
  Reader r(bytes);
  if (!r.magic_ok()) throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto dim = r.u32("dimension");
  if (dim < 1 || dim > static_cast<std::uint32_t>(kMaxDim)) {
    throw CheckpointError("checkpoint dimension " + std::to_string(dim) + " is not 1, 2 or 3");
  }
  std::vector<int> sizes(dim);
  std::vector<double> periods(dim);
  std::size_t count = 1;
  for (auto& s : sizes) {
    const auto v = r.u32("grid size");
    if (v > (1u << 20)) throw CheckpointError("checkpoint grid size is implausible");
    s = static_cast<int>(v);
    count *= v;
  }
  for (auto& p : periods) p = r.f64("period");
  const double t = r.f64("time");
  const double kappa = r.f64("kappa");
  if (r.remaining() != count * 8) {
    throw CheckpointError("checkpoint length mismatch: expected " + std::to_string(count * 8) +
                          " value bytes, found " + std::to_string(r.remaining()));
  }
  std::vector<double> values(count);
  for (auto& v : values) v = r.f64("values");

  try {
    GridSpec grid(std::move(sizes), std::move(periods));
    FlowConfig cfg;
    cfg.grid = grid;
    cfg.kappa = kappa;
    cfg.scheme = scheme;
    ScalarField u(grid, std::move(values));
    return {FlowState::at(t, std::move(u), scheme), cfg};
  } catch (const InvalidArgumentError& e) {
    throw CheckpointError(std::string("invalid checkpoint contents: ") + e.what());
  }
}

void checkpoint_save(const FlowState& state, const FlowConfig& cfg,
                     const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(state, cfg);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write to " + path.string() + " failed");
}

LoadedCheckpoint checkpoint_load(const std::filesystem::path& path, Scheme scheme) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, scheme);
}

}  // namespace lmcf
