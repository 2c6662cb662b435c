#include "cavoid/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "cavoid/errors.hpp"
#include "yaml_util.hpp"

namespace cavoid {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'C', 'A', 'V', 'Q', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(source_, std::string("truncated while reading ") + what, 0, pos_);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void doubles(double* dst, std::size_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / 8) {
      throw ParseError(source_, std::string("truncated while reading ") + what, 0, pos_);
    }
    std::memcpy(dst, bytes_.data() + pos_, n * 8);
    pos_ += n * 8;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_, msg, 0, pos_); }
  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_params(const QNetworkParams& params) {
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  const NetworkShape& s = params.shape();
  put_u32(out, static_cast<std::uint32_t>(s.obs_dim));
  put_u32(out, static_cast<std::uint32_t>(s.hidden_size));
  put_u32(out, static_cast<std::uint32_t>(s.n_actions));
  const auto tensors = params.tensors();
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.rows));
    put_u32(out, static_cast<std::uint32_t>(t.cols));
    out.append(reinterpret_cast<const char*>(params.flat().data() + t.offset), t.size() * sizeof(double));
  }
  return out;
}

QNetworkParams deserialize_params(const std::string& bytes, const std::string& source) {
  ByteReader rd(bytes, source);
  if (rd.str(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic)) {
    throw ParseError(source, "bad magic; not a parameter checkpoint", 0, 0);
  }
  if (rd.u32("version") != kVersion) rd.fail("unsupported checkpoint version");
  NetworkShape shape;
  shape.obs_dim = static_cast<int>(rd.u32("obs_dim"));
  shape.hidden_size = static_cast<int>(rd.u32("hidden_size"));
  shape.n_actions = static_cast<int>(rd.u32("n_actions"));
  if (shape.obs_dim < 1 || shape.hidden_size < 1 || shape.n_actions < 1 || shape.obs_dim > (1 << 20) ||
      shape.hidden_size > (1 << 16) || shape.n_actions > (1 << 20)) {
    rd.fail("implausible network shape");
  }
  QNetworkParams params(shape);
  const auto expected = params.tensors();
  if (rd.u32("tensor count") != expected.size()) rd.fail("tensor count does not match the network layout");
  for (const auto& t : expected) {
    const std::uint32_t name_len = rd.u32("tensor name length");
    if (name_len > 256) rd.fail("tensor name too long");
    const std::string name = rd.str(name_len, "tensor name");
    if (name != t.name) rd.fail("expected tensor '" + t.name + "', found '" + name + "'");
    const auto rows = rd.u32("tensor rows");
    const auto cols = rd.u32("tensor cols");
    if (static_cast<int>(rows) != t.rows || static_cast<int>(cols) != t.cols) {
      rd.fail("tensor '" + t.name + "' has the wrong shape");
    }
    rd.doubles(params.flat().data() + t.offset, t.size(), t.name.c_str());
  }
  if (!rd.at_end()) rd.fail("trailing bytes after the last tensor");
  return params;
}

void save_checkpoint(const QNetworkParams& params, const std::filesystem::path& path) {
  yamlio::write_file(path, serialize_params(params));
}

QNetworkParams load_checkpoint(const std::filesystem::path& path) {
  return deserialize_params(yamlio::read_file(path), path.string());
}

}  // namespace cavoid
