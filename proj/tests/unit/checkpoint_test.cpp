#include <gtest/gtest.h>

#include "fakespot/checkpoint.hpp"
#include "fakespot/data/synthetic.hpp"
#include "fakespot/training.hpp"
#include "oracles.hpp"

namespace fakespot {
namespace {

nn::TrainedModel trained_model()
{
    SeededRng rng(61);
    auto corpus = data::make_square_corpus(10, rng);
    SeededRng srng(62);
    const auto split = data::make_split(std::move(corpus.images), 0.2, srng);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    cfg.seed = 9;
    cfg.adam.learning_rate = 2.5e-3;
    return train_model(nn::make_topology(3, 2, {5}), split, cfg).model;
}

std::string error_of(const std::vector<unsigned char>& bytes)
{
    try {
        decode_checkpoint(bytes);
    } catch (const CheckpointError& e) {
        return e.what();
    }
    return "";
}

TEST(Checkpoint, RoundTripIsBitExactWithOptimizerState)
{
    const auto model = trained_model();
    ASSERT_TRUE(model.optimizer.has_value());
    const auto back = decode_checkpoint(encode_checkpoint(model));
    EXPECT_EQ(back.topology, model.topology);
    EXPECT_EQ(back.params, model.params);
    EXPECT_EQ(back.provenance.seed, 9u);
    EXPECT_EQ(back.provenance.epochs, 1u);
    EXPECT_EQ(back.provenance.batch_size, 4u);
    EXPECT_EQ(back.provenance.learning_rate, 2.5e-3);
    ASSERT_TRUE(back.optimizer.has_value());
    EXPECT_EQ(back.optimizer->step, model.optimizer->step);
    EXPECT_EQ(back.optimizer->config.learning_rate, 2.5e-3);
    EXPECT_EQ(back.optimizer->config.beta2, model.optimizer->config.beta2);
    EXPECT_EQ(back.optimizer->first_moment, model.optimizer->first_moment);
    EXPECT_EQ(back.optimizer->second_moment, model.optimizer->second_moment);
    EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(model));
}

TEST(Checkpoint, WithoutOptimizerState)
{
    auto model = nn::TrainedModel::initialise(nn::make_topology(2, 1, {3}), 4);
    model.optimizer.reset();
    const auto back = decode_checkpoint(encode_checkpoint(model));
    EXPECT_FALSE(back.optimizer.has_value());
    EXPECT_EQ(back.params, model.params);
}

TEST(Checkpoint, SaveAndLoadThroughFiles)
{
    testing::TempDir dir("ckpt");
    const auto model = trained_model();
    save_checkpoint(model, dir.path() / "sub" / "m.fspt");
    EXPECT_EQ(load_checkpoint(dir.path() / "sub" / "m.fspt").params, model.params);
    EXPECT_THROW(load_checkpoint(dir.path() / "absent.fspt"), CheckpointError);
}

TEST(Checkpoint, DetectsSingleByteCorruptionAnywhere)
{
    const auto bytes = encode_checkpoint(trained_model());
    SeededRng rng(63);
    for (int trial = 0; trial < 200; ++trial) {
        auto bad = bytes;
        const std::size_t at = 6 + rng.below(bad.size() - 6);
        bad[at] ^= static_cast<unsigned char>(1 + rng.below(255));
        ASSERT_THROW(decode_checkpoint(bad), CheckpointError) << at;
    }
    auto bad = bytes;
    bad[bytes.size() / 2] ^= 0x10;
    EXPECT_NE(error_of(bad).find("CRC"), std::string::npos) << error_of(bad);
}

TEST(Checkpoint, RejectsTruncationAndTrailingData)
{
    const auto bytes = encode_checkpoint(trained_model());
    for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{5}, std::size_t{40}, bytes.size() - 1}) {
        const std::vector<unsigned char> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(keep));
        EXPECT_THROW(decode_checkpoint(cut), CheckpointError) << keep;
    }
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW(decode_checkpoint(longer), CheckpointError);
}

TEST(Checkpoint, ReportsVersionAndMagicBeforeIntegrity)
{
    auto bytes = encode_checkpoint(trained_model());
    auto newer = bytes;
    newer[4] = static_cast<unsigned char>(kCheckpointVersion + 1);
    EXPECT_NE(error_of(newer).find("version"), std::string::npos) << error_of(newer);
    auto foreign = bytes;
    foreign[0] = 'X';
    EXPECT_NE(error_of(foreign).find("magic"), std::string::npos) << error_of(foreign);
}

}  // namespace
}  // namespace fakespot
