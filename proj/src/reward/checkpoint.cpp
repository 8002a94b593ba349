#include "opscore/reward/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "opscore/common/checksum.hpp"
#include "opscore/common/error.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

namespace opscore {
namespace {

constexpr std::string_view kMagic = "OPSCKPT1";

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::CorruptCheckpoint, "truncated checkpoint");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const CheckpointBlock& Checkpoint::block(const std::string& name, Eigen::Index rows, Eigen::Index cols) const {
  for (const auto& b : blocks) {
    if (b.name != name) continue;
    if (b.rows != rows || b.cols != cols)
      fail(ErrorCode::CheckpointLoadError, "block '" + name + "' has shape " + std::to_string(b.rows) + "x" +
                                               std::to_string(b.cols) + ", expected " + std::to_string(rows) + "x" +
                                               std::to_string(cols));
    return b;
  }
  fail(ErrorCode::CheckpointLoadError, "missing block '" + name + "' in " + kind + " checkpoint");
}

bool Checkpoint::has_block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return true;
  return false;
}

std::string encode_checkpoint(const Checkpoint& checkpoint) {
  Json header;
  header["schema_version"] = kCheckpointSchemaVersion;
  header["kind"] = checkpoint.kind;
  header["meta"] = checkpoint.meta;
  header["blocks"] = Json::array();
  std::uint64_t count = 0;
  for (const auto& b : checkpoint.blocks) {
    header["blocks"].push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
    count += b.values.size();
  }
  const std::string header_text = header.dump();

  std::string out(kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  put<std::uint64_t>(out, count);
  for (const auto& b : checkpoint.blocks)
    for (double v : b.values) put<double>(out, v);
  put<std::uint32_t>(out, crc32_of(out));
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 4 || bytes.substr(0, kMagic.size()) != kMagic)
    fail(ErrorCode::CorruptCheckpoint, "bad magic");
  if (bytes.size() < kMagic.size() + 4 + 8 + 4) fail(ErrorCode::CorruptCheckpoint, "truncated checkpoint");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body.size(), 4);
  if (stored_crc != crc32_of(body)) fail(ErrorCode::CorruptCheckpoint, "checksum mismatch");

  Reader r(body);
  (void)r.take(kMagic.size());
  const auto header_len = r.get<std::uint32_t>();
  Json header;
  try {
    header = Json::parse(r.take(header_len));
  } catch (const Json::exception& e) {
    fail(ErrorCode::CorruptCheckpoint, std::string("header: ") + e.what());
  }
  if (!header.contains("schema_version") || !header["schema_version"].is_number_integer())
    fail(ErrorCode::CorruptCheckpoint, "header lacks schema_version");
  if (header["schema_version"].get<int>() != kCheckpointSchemaVersion)
    fail(ErrorCode::VersionMismatch, "checkpoint schema_version " + header["schema_version"].dump());

  Checkpoint ck;
  try {
    ck.kind = header.at("kind").get<std::string>();
    ck.meta = header.value("meta", Json::object());
    const auto count = r.get<std::uint64_t>();
    std::uint64_t expected = 0;
    for (const auto& bj : header.at("blocks")) {
      CheckpointBlock b;
      b.name = bj.at("name").get<std::string>();
      b.rows = bj.at("rows").get<Eigen::Index>();
      b.cols = bj.at("cols").get<Eigen::Index>();
      if (b.rows < 0 || b.cols < 0) fail(ErrorCode::CorruptCheckpoint, "negative block shape");
      expected += static_cast<std::uint64_t>(b.rows * b.cols);
      ck.blocks.push_back(std::move(b));
    }
    if (expected != count) fail(ErrorCode::CorruptCheckpoint, "value count does not match block shapes");
    for (auto& b : ck.blocks) {
      b.values.resize(static_cast<std::size_t>(b.rows * b.cols));
      for (double& v : b.values) v = r.get<double>();
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::CorruptCheckpoint, std::string("header: ") + e.what());
  }
  if (r.position() != body.size()) fail(ErrorCode::CorruptCheckpoint, "trailing bytes");
  return ck;
}

void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::CheckpointLoadError, e.what());
  }
  return decode_checkpoint(bytes);
}

}  // namespace opscore
