#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "opscore/common/json.hpp"
#include "opscore/common/types.hpp"

namespace opscore {

inline constexpr int kCheckpointSchemaVersion = 1;

// Binary layout (all integers and floats little-endian):
//   "OPSCKPT1"                         8-byte magic
//   u32 header_len, header JSON        {schema_version, kind, blocks:[{name, rows, cols}], meta}
//   u64 value_count, f64 x value_count every block, column-major, in header order
//   u32 CRC32 of all preceding bytes
struct CheckpointBlock {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> values;

  template <typename Derived>
  static CheckpointBlock of(std::string name, const Eigen::DenseBase<Derived>& m) {
    CheckpointBlock b{std::move(name), m.rows(), m.cols(), {}};
    b.values.resize(static_cast<std::size_t>(m.size()));
    Eigen::Map<MatX>(b.values.data(), m.rows(), m.cols()) = m.template cast<double>();
    return b;
  }

  MatX matrix() const { return Eigen::Map<const MatX>(values.data(), rows, cols); }
};

struct Checkpoint {
  std::string kind;
  Json meta = Json::object();
  std::vector<CheckpointBlock> blocks;

  // CheckpointLoadError if absent or mis-shaped.
  const CheckpointBlock& block(const std::string& name, Eigen::Index rows, Eigen::Index cols) const;
  bool has_block(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
// CorruptCheckpoint on bad magic, truncation or checksum mismatch;
// VersionMismatch on an unknown schema_version.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Missing/unreadable files raise CheckpointLoadError.
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

}  // namespace opscore
