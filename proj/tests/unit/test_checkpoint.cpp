#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "drowsy/checkpoint.hpp"
#include "drowsy/random.hpp"

namespace drowsy {
namespace {

CheckpointError::Kind load_error(std::span<const std::uint8_t> bytes) {
  try {
    load_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected CheckpointError";
  return CheckpointError::Kind::io;
}

TEST(Checkpoint, HeaderLayout) {
  const auto bytes = save_checkpoint(LstmModel(3));
  ASSERT_EQ(bytes.size(), kCheckpointHeaderSize + 8 * LstmModel::parameter_count(3));
  EXPECT_EQ(std::memcmp(bytes.data(), "DRWL", 4), 0);
  EXPECT_EQ(bytes[4], kCheckpointVersion);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[12], 3);
}

TEST(Checkpoint, ParametersAreLittleEndianDoubles) {
  LstmModel m(1);
  m.output_bias() = 1.0;  // 0x3FF0000000000000
  const auto bytes = save_checkpoint(m);
  const std::uint8_t expected[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  EXPECT_EQ(std::memcmp(bytes.data() + bytes.size() - 8, expected, 8), 0);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  Rng rng(21);
  const auto model = LstmModel::initialized(16, 77);
  const auto loaded = load_checkpoint(save_checkpoint(model));
  EXPECT_EQ(loaded, model);
  for (int k = 0; k < 100; ++k) {
    NormalizedWindow w{};
    for (auto& s : w) s = {rng.uniform(), rng.uniform()};
    EXPECT_EQ(forward(loaded, w), forward(model, w));
  }
}

TEST(Checkpoint, TruncatedPayload) {
  auto bytes = save_checkpoint(LstmModel::initialized(4, 1));
  bytes.pop_back();
  EXPECT_EQ(load_error(bytes), CheckpointError::Kind::truncated);
  EXPECT_EQ(load_error(std::span(bytes).first(10)), CheckpointError::Kind::truncated);
  EXPECT_EQ(load_error({}), CheckpointError::Kind::truncated);
}

TEST(Checkpoint, WrongVersion) {
  auto bytes = save_checkpoint(LstmModel(2));
  bytes[4] = 2;
  EXPECT_EQ(load_error(bytes), CheckpointError::Kind::version);
}

TEST(Checkpoint, BadMagic) {
  auto bytes = save_checkpoint(LstmModel(2));
  bytes[0] = 'X';
  EXPECT_EQ(load_error(bytes), CheckpointError::Kind::bad_magic);
}

TEST(Checkpoint, TrailingBytes) {
  auto bytes = save_checkpoint(LstmModel(2));
  bytes.push_back(0);
  EXPECT_EQ(load_error(bytes), CheckpointError::Kind::trailing_bytes);
}

TEST(Checkpoint, BadDimensions) {
  auto bytes = save_checkpoint(LstmModel(2));
  bytes[8] = 3;
  EXPECT_EQ(load_error(bytes), CheckpointError::Kind::dimensions);
  bytes = save_checkpoint(LstmModel(2));
  bytes[12] = 0;
  EXPECT_EQ(load_error(bytes), CheckpointError::Kind::dimensions);
}

TEST(Checkpoint, NonFiniteParameter) {
  LstmModel m(2);
  m.output_bias() = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(load_error(save_checkpoint(m)), CheckpointError::Kind::non_finite);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "drowsy_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.bin";
  const auto model = LstmModel::initialized(5, 9);
  save_checkpoint_file(model, path);
  EXPECT_EQ(load_checkpoint_file(path), model);
  EXPECT_THROW(load_checkpoint_file(dir / "missing.bin"), CheckpointError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace drowsy
