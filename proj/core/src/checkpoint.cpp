#include "drowsy/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace drowsy {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'R', 'W', 'L'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (sizeof(T) == 8)
    bits = std::bit_cast<std::uint64_t>(value);
  else
    bits = static_cast<std::uint64_t>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> save_checkpoint(const LstmModel& model) {
  std::vector<std::uint8_t> out;
  out.reserve(kCheckpointHeaderSize + 8 * model.parameter_count());
  for (auto b : kMagic) out.push_back(b);
  out.push_back(kCheckpointVersion);
  for (int i = 0; i < 3; ++i) out.push_back(0);
  put_le(out, static_cast<std::uint32_t>(model.input_dim()));
  put_le(out, static_cast<std::uint32_t>(model.hidden_dim()));
  for (double p : model.parameters()) put_le(out, p);
  return out;
}

LstmModel load_checkpoint(std::span<const std::uint8_t> bytes) {
  using Kind = CheckpointError::Kind;
  if (bytes.size() < 5) throw CheckpointError(Kind::truncated, "payload shorter than header");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CheckpointError(Kind::bad_magic, "bad magic bytes");
  if (bytes[4] != kCheckpointVersion)
    throw CheckpointError(Kind::version, "unsupported format version " + std::to_string(bytes[4]) +
                                             " (expected " + std::to_string(kCheckpointVersion) + ")");
  if (bytes.size() < kCheckpointHeaderSize) throw CheckpointError(Kind::truncated, "payload shorter than header");

  const auto input_dim = get_le(bytes, 8, 4);
  const auto hidden_dim = get_le(bytes, 12, 4);
  if (input_dim != kInputDim)
    throw CheckpointError(Kind::dimensions, "input_dim " + std::to_string(input_dim) + ", expected 2");
  if (hidden_dim == 0 || hidden_dim > 4096)
    throw CheckpointError(Kind::dimensions, "implausible hidden_dim " + std::to_string(hidden_dim));

  LstmModel model(static_cast<std::size_t>(hidden_dim));
  const std::size_t expected = kCheckpointHeaderSize + 8 * model.parameter_count();
  if (bytes.size() < expected)
    throw CheckpointError(Kind::truncated, "expected " + std::to_string(expected) + " bytes, got " +
                                               std::to_string(bytes.size()));
  if (bytes.size() > expected) throw CheckpointError(Kind::trailing_bytes, "trailing bytes after parameters");

  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i] = std::bit_cast<double>(get_le(bytes, kCheckpointHeaderSize + 8 * i, 8));
  if (!model.finite()) throw CheckpointError(Kind::non_finite, "non-finite parameter");
  return model;
}

void save_checkpoint_file(const LstmModel& model, const std::filesystem::path& path) {
  const auto bytes = save_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "write failed for " + path.string());
}

LstmModel load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_checkpoint(bytes);
}

}  // namespace drowsy
