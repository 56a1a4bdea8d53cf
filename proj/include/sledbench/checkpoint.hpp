// checkpoint.hpp: resumable partial sums of an ensemble run
//
// Binary layout (little endian, version 1):
//   magic "SLEDCKPT", u32 version, u64 fingerprint, u64 seed, u64 n_traj,
//   u64 block_size, u64 n_blocks, u64 block_length, then per block:
//   u8 done, u64 count, f64 trace_drift, f64[block_length] sum, f64[block_length] sumsq.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sledbench/sled.hpp"

namespace sledbench {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
    std::uint64_t fingerprint{0};
    std::uint64_t seed{0};
    std::uint64_t n_traj{0};
    std::uint64_t block_size{0};
    std::uint64_t n_blocks{0};
    std::uint64_t block_length{0};

    bool operator==(const CheckpointHeader&) const = default;
};

// Writes to path + ".tmp" then renames.
void write_checkpoint(const std::string& path, const CheckpointHeader& header,
                      const std::vector<BlockSums>& blocks);

// Returns false if the file does not exist. Throws InvalidArgument if it
// belongs to a different run and NumericalError if it is truncated or corrupt.
bool read_checkpoint(const std::string& path, const CheckpointHeader& expected,
                     std::vector<BlockSums>& blocks);

} // namespace sledbench
