#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "fakespot/nn/model.hpp"

namespace fakespot {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Binary layout, all integers little-endian:
///
///     "FSPT"  u16 version
///     u32 n, n bytes   topology descriptor (UTF-8)
///     u32 n, n bytes   provenance, "key=value" pairs joined by ';'
///     u32 tensor count
///     per tensor: u32 rank, rank x u32 dims, product(dims) x f32
///     u32 CRC-32 of every preceding byte
///
/// Tensors follow the canonical parameter order. Conv weights have rank 4,
/// dense weights rank 2, biases rank 1. When optimizer state is stored the Adam
/// first and second moments follow, in the same order, and the provenance holds
/// the step count and Adam hyperparameters.
std::vector<unsigned char> encode_checkpoint(const nn::TrainedModel& model);

/// Inverse of encode_checkpoint. The magic and version are checked before the
/// CRC so a newer file reports an unsupported version rather than corruption.
/// Throws CheckpointError on any malformed, truncated or corrupted input.
nn::TrainedModel decode_checkpoint(const std::vector<unsigned char>& bytes);

/// Atomic write through a temporary file.
void save_checkpoint(const nn::TrainedModel& model, const std::filesystem::path& path);
nn::TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace fakespot
