#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "provpipe/frame.hpp"

namespace provpipe {

enum class EncoderKind { OneHot, StandardScale, TokenCountScaled, HashEmbed };

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& name);

/// Seed for the hashing embedder unless a spec overrides it.
inline constexpr std::uint64_t kDefaultEmbedSeed = 0x7c0ffee1234abcdULL;

struct EncoderSpec {
    std::string input_column;
    EncoderKind kind;
    std::size_t dim = 0;                        // hash_embed only, >= 1
    std::uint64_t seed = kDefaultEmbedSeed;     // hash_embed only

    bool operator==(const EncoderSpec&) const = default;
};

struct OneHotState {
    std::vector<std::string> categories;  // sorted distinct fit values
    bool operator==(const OneHotState&) const = default;
};

struct ScaleState {
    double mean = 0.0;
    double std_dev = 0.0;  // population standard deviation
    bool operator==(const ScaleState&) const = default;
};

struct HashEmbedState {
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    bool operator==(const HashEmbedState&) const = default;
};

/// Immutable fitted statistics of one encoder; the transform width is fully
/// determined by the state.
struct FittedEncoder {
    EncoderSpec spec;
    std::variant<OneHotState, ScaleState, HashEmbedState> state;

    std::size_t width() const;

    bool operator==(const FittedEncoder&) const = default;
};

struct DimRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // half-open

    std::size_t width() const { return end - begin; }
    bool operator==(const DimRange&) const = default;
};

/// Input column name -> dimension ranges its encoders populate, in spec
/// order. Ranges across all entries are disjoint and tile [0, n_dims).
using MatrixColumnProvenance = std::map<std::string, std::vector<DimRange>>;

/// Dense row-major matrix of 64-bit floats. Rows are stored in fixed-size
/// chunks shared between matrices, so replacing a few rows copies only the
/// touched chunks. Row i is aligned with row i of the prepared frame.
class FeatureMatrix {
public:
    static constexpr std::size_t kRowsPerChunk = 16;
    using Chunk = std::vector<double>;  // up to kRowsPerChunk * n_dims values
    using ChunkPtr = std::shared_ptr<const Chunk>;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t n_rows, std::size_t n_dims, std::vector<ChunkPtr> chunks);

    /// Builds from dense row-major data (n_rows * n_dims values).
    static FeatureMatrix from_dense(std::size_t n_rows, std::size_t n_dims,
                                    std::vector<double> values);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_dims() const { return n_dims_; }

    double at(std::size_t row, std::size_t dim) const {
        return (*chunks_[row / kRowsPerChunk])[(row % kRowsPerChunk) * n_dims_ + dim];
    }
    std::span<const double> row(std::size_t i) const {
        const Chunk& chunk = *chunks_[i / kRowsPerChunk];
        return {chunk.data() + (i % kRowsPerChunk) * n_dims_, n_dims_};
    }

    struct CellUpdate {
        std::size_t row;
        std::size_t dim;
        double value;
    };

    /// Copy with the given cells overwritten; untouched chunks are shared.
    FeatureMatrix with_updates(std::span<const CellUpdate> updates) const;

    /// Copy without the given rows (sorted ascending).
    FeatureMatrix with_rows_removed(std::span<const std::size_t> sorted_rows) const;

    /// Row-major little-endian bytes (the persisted layout).
    std::string to_bytes_le() const;
    static FeatureMatrix from_bytes_le(std::size_t n_rows, std::size_t n_dims,
                                       std::string_view bytes);

    /// Bitwise equality (distinguishes -0.0 from 0.0).
    bool operator==(const FeatureMatrix& other) const;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_dims_ = 0;
    std::vector<ChunkPtr> chunks_;
};

/// One {0.0, 1.0} label per feature-matrix row.
using LabelVector = std::vector<double>;

/// Fits one encoder on a column of non-Null values.
FittedEncoder fit_encoder(const EncoderSpec& spec, std::span<const Value> values);

/// Applies a fitted encoder; returns a row-major (values.size() x width())
/// block. Null encodes to zeros in every encoder.
std::vector<double> transform_values(const FittedEncoder& fitted, std::span<const Value> values);

struct EncodeResult {
    FeatureMatrix features;
    LabelVector labels;
    std::vector<FittedEncoder> fitted;
    MatrixColumnProvenance matrix_prov;
};

/// Fits every spec on its column, transforms, and concatenates the blocks in
/// spec order; records which dimension ranges each input column occupies.
EncodeResult encode_fit(const ProvDataFrame& frame, std::span<const EncoderSpec> specs,
                        const std::string& label_column);

struct EncodeOutput {
    FeatureMatrix features;
    LabelVector labels;
};

/// Transform-only pass with previously fitted encoders (no refitting), same
/// concatenation order as at fit time.
EncodeOutput encode_with(std::span<const FittedEncoder> fitted, const ProvDataFrame& frame,
                         const std::string& label_column);

/// Largest absolute elementwise difference; throws on shape mismatch.
double max_abs_diff(const FeatureMatrix& a, const FeatureMatrix& b);

}  // namespace provpipe
