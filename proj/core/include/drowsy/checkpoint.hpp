#pragma once

// Binary LSTM checkpoint, all integers and floats little-endian:
//
//   offset  size  field
//   0       4     magic "DRWL"
//   4       1     format version (kCheckpointVersion)
//   5       3     reserved, zero
//   8       4     input_dim  (u32)
//   12      4     hidden_dim (u32)
//   16      8*N   parameters as IEEE-754 binary64, in LstmModel layout order
//
// N = LstmModel::parameter_count(hidden_dim). No trailing bytes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "drowsy/error.hpp"
#include "drowsy/lstm.hpp"

namespace drowsy {

inline constexpr std::uint8_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderSize = 16;

class CheckpointError : public Error {
 public:
  enum class Kind { bad_magic, version, truncated, trailing_bytes, dimensions, non_finite, io };

  CheckpointError(Kind kind, const std::string& what) : Error("checkpoint: " + what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> save_checkpoint(const LstmModel& model);
LstmModel load_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint_file(const LstmModel& model, const std::filesystem::path& path);
LstmModel load_checkpoint_file(const std::filesystem::path& path);

}  // namespace drowsy
