#include "sledbench/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sledbench/errors.hpp"

namespace sledbench {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'E', 'D', 'C', 'K', 'P', 'T'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw NumericalError("checkpoint: truncated file");
}

} // namespace

void write_checkpoint(const std::string& path, const CheckpointHeader& h,
                      const std::vector<BlockSums>& blocks) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw NumericalError("checkpoint: cannot open " + tmp);
        os.write(kMagic, sizeof(kMagic));
        put(os, kCheckpointVersion);
        put(os, h.fingerprint);
        put(os, h.seed);
        put(os, h.n_traj);
        put(os, h.block_size);
        put(os, h.n_blocks);
        put(os, h.block_length);
        for (const BlockSums& b : blocks) {
            const std::uint8_t done = b.done ? 1 : 0;
            put(os, done);
            put(os, static_cast<std::uint64_t>(b.count));
            put(os, b.trace_drift);
            if (b.done) {
                os.write(reinterpret_cast<const char*>(b.sum.data()),
                         static_cast<std::streamsize>(sizeof(double) * h.block_length));
                os.write(reinterpret_cast<const char*>(b.sumsq.data()),
                         static_cast<std::streamsize>(sizeof(double) * h.block_length));
            }
        }
        if (!os) throw NumericalError("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

bool read_checkpoint(const std::string& path, const CheckpointHeader& expected,
                     std::vector<BlockSums>& blocks) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw NumericalError("checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    get(is, version);
    if (version != kCheckpointVersion) {
        std::ostringstream os;
        os << "checkpoint: unsupported version " << version << " in " << path;
        throw NumericalError(os.str());
    }
    CheckpointHeader h;
    get(is, h.fingerprint);
    get(is, h.seed);
    get(is, h.n_traj);
    get(is, h.block_size);
    get(is, h.n_blocks);
    get(is, h.block_length);
    if (!(h == expected)) throw InvalidArgument("checkpoint: " + path + " belongs to a different run");

    blocks.assign(h.n_blocks, BlockSums{});
    for (BlockSums& b : blocks) {
        std::uint8_t done = 0;
        std::uint64_t count = 0;
        get(is, done);
        get(is, count);
        get(is, b.trace_drift);
        b.done = done != 0;
        b.count = count;
        if (b.done) {
            b.sum.resize(h.block_length);
            b.sumsq.resize(h.block_length);
            is.read(reinterpret_cast<char*>(b.sum.data()),
                    static_cast<std::streamsize>(sizeof(double) * h.block_length));
            is.read(reinterpret_cast<char*>(b.sumsq.data()),
                    static_cast<std::streamsize>(sizeof(double) * h.block_length));
            if (!is) throw NumericalError("checkpoint: truncated file " + path);
        } else {
            b.count = 0;
            b.trace_drift = 0.0;
        }
    }
    return true;
}

} // namespace sledbench
