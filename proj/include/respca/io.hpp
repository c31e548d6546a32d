#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "respca/matrix.hpp"

namespace respca::io {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagic : IoError {
    using IoError::IoError;
};
struct TruncatedFile : IoError {
    using IoError::IoError;
};
struct ParseError : IoError {
    using IoError::IoError;
};
struct RaggedRow : IoError {
    using IoError::IoError;
};
struct DimensionMismatch : IoError {
    using IoError::IoError;
};
struct BadFormat : IoError {
    using IoError::IoError;
};

struct FrameStackMeta {
    std::size_t frame_height = 0;
    std::size_t frame_width = 0;
    std::size_t frame_count = 0;
    std::vector<std::filesystem::path> sources;
};

struct SynthSpec {
    std::size_t d = 0;
    std::size_t n = 0;
    std::size_t c = 1;
    double sparsity = 0.0;   // fraction of corrupted entries, [0, 1)
    double magnitude = 1.0;  // corruption scale
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct SynthData {
    DenseMatrix x;
    DenseMatrix l0;
    DenseMatrix s0;
    GroupAssignment assignment;
};

/// Numeric CSV, no header; file row r / column c -> entry (r, c).
DenseMatrix read_csv_matrix(const std::filesystem::path& path);

/// Full-precision decimal serialization; read_csv_matrix round-trips values
/// exactly.
void write_csv_matrix(const std::filesystem::path& path, const DenseMatrix& m);

/// Binary format: magic "RESPCA1\0", u64le rows, u64le cols, then
/// rows*cols f64le column-major. Round-trip is bit-exact.
DenseMatrix read_binary_matrix(const std::filesystem::path& path);
void write_binary_matrix(const std::filesystem::path& path, const DenseMatrix& m);

/// Reads 8-bit binary PGM (P5, maxval 255) frames of identical size; each
/// frame is flattened row-major into one column, pixels scaled to [0,1].
std::pair<DenseMatrix, FrameStackMeta> read_pgm_stack(
    const std::vector<std::filesystem::path>& files);

/// Directory form: all *.pgm files, lexicographically ordered.
std::pair<DenseMatrix, FrameStackMeta> read_pgm_stack(
    const std::filesystem::path& dir);

/// Writes each column as a P5 frame, values rescaled from [lo,hi] to
/// [0,255] with clamping; rounds half away from zero.
void write_pgm_stack(const DenseMatrix& m, const FrameStackMeta& meta,
                     const std::filesystem::path& dir, double lo, double hi,
                     const std::string& prefix = "frame");

/// Synthetic ground truth: c groups of identical columns plus exactly
/// round(sparsity*d*n) sparse corruptions, optional dense noise.
SynthData synth_generate(const SynthSpec& spec);

struct OutlierScores {
    std::vector<double> scores;        // column l2 norms of S
    std::vector<std::size_t> flagged;  // indices with score >= threshold
};

OutlierScores outlier_scores(const DenseMatrix& s, double threshold);

}  // namespace respca::io
