#include "provpipe/encoding.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>

#include "provpipe/errors.hpp"
#include "provpipe/hash.hpp"

namespace provpipe {

std::string to_string(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::OneHot: return "one_hot";
        case EncoderKind::StandardScale: return "standard_scale";
        case EncoderKind::TokenCountScaled: return "token_count_scaled";
        case EncoderKind::HashEmbed: return "hash_embed";
    }
    return "unknown";
}

EncoderKind encoder_kind_from_string(const std::string& name) {
    if (name == "one_hot") return EncoderKind::OneHot;
    if (name == "standard_scale") return EncoderKind::StandardScale;
    if (name == "token_count_scaled") return EncoderKind::TokenCountScaled;
    if (name == "hash_embed") return EncoderKind::HashEmbed;
    throw ValidationError("unknown encoder kind: " + name);
}

std::size_t FittedEncoder::width() const {
    switch (spec.kind) {
        case EncoderKind::OneHot: return std::get<OneHotState>(state).categories.size();
        case EncoderKind::StandardScale:
        case EncoderKind::TokenCountScaled: return 1;
        case EncoderKind::HashEmbed: return std::get<HashEmbedState>(state).dim;
    }
    return 0;
}

FeatureMatrix::FeatureMatrix(std::size_t n_rows, std::size_t n_dims,
                             std::vector<ChunkPtr> chunks)
    : n_rows_(n_rows), n_dims_(n_dims), chunks_(std::move(chunks)) {
    std::size_t expected_chunks = (n_rows + kRowsPerChunk - 1) / kRowsPerChunk;
    if (chunks_.size() != expected_chunks) {
        throw ValidationError("feature matrix chunk count mismatch");
    }
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        std::size_t rows_here =
            (i + 1 < chunks_.size()) ? kRowsPerChunk : n_rows - i * kRowsPerChunk;
        if (!chunks_[i] || chunks_[i]->size() != rows_here * n_dims) {
            throw ValidationError("feature matrix chunk size mismatch");
        }
    }
}

FeatureMatrix FeatureMatrix::from_dense(std::size_t n_rows, std::size_t n_dims,
                                        std::vector<double> values) {
    if (values.size() != n_rows * n_dims) {
        throw ValidationError("dense data size does not match matrix shape");
    }
    std::vector<ChunkPtr> chunks;
    chunks.reserve((n_rows + kRowsPerChunk - 1) / kRowsPerChunk);
    for (std::size_t start = 0; start < n_rows; start += kRowsPerChunk) {
        std::size_t rows_here = std::min(kRowsPerChunk, n_rows - start);
        chunks.push_back(std::make_shared<Chunk>(values.begin() + start * n_dims,
                                                 values.begin() + (start + rows_here) * n_dims));
    }
    return FeatureMatrix{n_rows, n_dims, std::move(chunks)};
}

FeatureMatrix FeatureMatrix::with_updates(std::span<const CellUpdate> updates) const {
    std::vector<ChunkPtr> chunks = chunks_;
    std::vector<Chunk*> cloned(chunks_.size(), nullptr);
    for (const CellUpdate& u : updates) {
        if (u.row >= n_rows_ || u.dim >= n_dims_) {
            throw ValidationError("matrix update out of range");
        }
        std::size_t ci = u.row / kRowsPerChunk;
        if (cloned[ci] == nullptr) {
            auto fresh = std::make_shared<Chunk>(*chunks_[ci]);
            cloned[ci] = fresh.get();
            chunks[ci] = std::move(fresh);
        }
        (*cloned[ci])[(u.row % kRowsPerChunk) * n_dims_ + u.dim] = u.value;
    }
    return FeatureMatrix{n_rows_, n_dims_, std::move(chunks)};
}

FeatureMatrix FeatureMatrix::with_rows_removed(std::span<const std::size_t> sorted_rows) const {
    std::vector<double> dense;
    dense.reserve((n_rows_ - std::min(n_rows_, sorted_rows.size())) * n_dims_);
    std::size_t next = 0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n_rows_; ++i) {
        if (next < sorted_rows.size() && sorted_rows[next] == i) {
            ++next;
            continue;
        }
        std::span<const double> r = row(i);
        dense.insert(dense.end(), r.begin(), r.end());
        ++kept;
    }
    return from_dense(kept, n_dims_, std::move(dense));
}

std::string FeatureMatrix::to_bytes_le() const {
    std::string out;
    out.resize(n_rows_ * n_dims_ * sizeof(double));
    char* dst = out.data();
    for (const ChunkPtr& chunk : chunks_) {
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(dst, chunk->data(), chunk->size() * sizeof(double));
            dst += chunk->size() * sizeof(double);
        } else {
            for (double v : *chunk) {
                std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
                for (int b = 0; b < 8; ++b) {
                    *dst++ = static_cast<char>((bits >> (8 * b)) & 0xff);
                }
            }
        }
    }
    return out;
}

FeatureMatrix FeatureMatrix::from_bytes_le(std::size_t n_rows, std::size_t n_dims,
                                           std::string_view bytes) {
    if (bytes.size() != n_rows * n_dims * sizeof(double)) {
        throw ValidationError("matrix byte length does not match shape");
    }
    std::vector<double> values(n_rows * n_dims);
    if (values.empty()) {
        return from_dense(n_rows, n_dims, std::move(values));
    }
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(values.data(), bytes.data(), bytes.size());
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::uint64_t bits = 0;
            for (int b = 7; b >= 0; --b) {
                bits = (bits << 8) | static_cast<unsigned char>(bytes[i * 8 + b]);
            }
            values[i] = std::bit_cast<double>(bits);
        }
    }
    return from_dense(n_rows, n_dims, std::move(values));
}

bool FeatureMatrix::operator==(const FeatureMatrix& other) const {
    if (n_rows_ != other.n_rows_ || n_dims_ != other.n_dims_) return false;
    for (std::size_t i = 0; i < n_rows_; ++i) {
        std::span<const double> a = row(i);
        std::span<const double> b = other.row(i);
        if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) return false;
    }
    return true;
}

namespace {

std::size_t token_count(const std::string& text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        bool ws = (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v');
        if (!ws && !in_token) ++count;
        in_token = !ws;
    }
    return count;
}

template <typename Fn>
void for_each_token(const std::string& text, Fn&& fn) {
    std::size_t start = 0;
    while (start < text.size()) {
        while (start < text.size() && std::isspace(static_cast<unsigned char>(text[start]))) {
            ++start;
        }
        std::size_t end = start;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) {
            ++end;
        }
        if (end > start) fn(std::string_view(text).substr(start, end - start));
        start = end;
    }
}

ScaleState fit_scale(std::span<const double> values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return ScaleState{mean, std::sqrt(var)};
}

double scale_one(const ScaleState& s, double v) {
    if (s.std_dev == 0.0) return 0.0;
    return (v - s.mean) / s.std_dev;
}

const std::string& require_text(const Value& v, const EncoderSpec& spec) {
    if (!v.is(ValueKind::Text)) {
        throw ValidationError("encoder '" + to_string(spec.kind) + "' on column '" +
                              spec.input_column + "' requires text values");
    }
    return v.as_text();
}

double require_number(const Value& v, const EncoderSpec& spec) {
    if (!v.is(ValueKind::Float) && !v.is(ValueKind::Int)) {
        throw ValidationError("encoder '" + to_string(spec.kind) + "' on column '" +
                              spec.input_column + "' requires numeric values");
    }
    return v.as_number();
}

}  // namespace

FittedEncoder fit_encoder(const EncoderSpec& spec, std::span<const Value> values) {
    if (values.empty()) {
        throw ValidationError("empty input: cannot fit encoder on column '" + spec.input_column +
                              "'");
    }
    for (const Value& v : values) {
        if (v.is_null()) {
            throw ValidationError("Null present while fitting column '" + spec.input_column +
                                  "'");
        }
    }
    switch (spec.kind) {
        case EncoderKind::OneHot: {
            std::vector<std::string> categories;
            for (const Value& v : values) categories.push_back(require_text(v, spec));
            std::sort(categories.begin(), categories.end());
            categories.erase(std::unique(categories.begin(), categories.end()),
                             categories.end());
            return FittedEncoder{spec, OneHotState{std::move(categories)}};
        }
        case EncoderKind::StandardScale: {
            std::vector<double> nums;
            nums.reserve(values.size());
            for (const Value& v : values) nums.push_back(require_number(v, spec));
            return FittedEncoder{spec, fit_scale(nums)};
        }
        case EncoderKind::TokenCountScaled: {
            std::vector<double> counts;
            counts.reserve(values.size());
            for (const Value& v : values) {
                counts.push_back(static_cast<double>(token_count(require_text(v, spec))));
            }
            return FittedEncoder{spec, fit_scale(counts)};
        }
        case EncoderKind::HashEmbed: {
            if (spec.dim < 1) {
                throw ValidationError("hash_embed dim must be >= 1");
            }
            for (const Value& v : values) require_text(v, spec);
            return FittedEncoder{spec, HashEmbedState{spec.dim, spec.seed}};
        }
    }
    throw ValidationError("unhandled encoder kind");
}

namespace {

void embed_into(const HashEmbedState& state, const std::string& text, std::span<double> out) {
    for_each_token(text, [&](std::string_view token) {
        std::size_t slot = hash64(token, state.seed) % state.dim;
        double sign = (hash64(token, state.seed + 1) % 2 == 0) ? 1.0 : -1.0;
        out[slot] += sign;
    });
    double norm_sq = 0.0;
    for (double v : out) norm_sq += v * v;
    if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (double& v : out) v *= inv;
    }
}

}  // namespace

std::vector<double> transform_values(const FittedEncoder& fitted,
                                     std::span<const Value> values) {
    std::size_t width = fitted.width();
    std::vector<double> block(values.size() * width, 0.0);
    switch (fitted.spec.kind) {
        case EncoderKind::OneHot: {
            const auto& categories = std::get<OneHotState>(fitted.state).categories;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (values[i].is_null()) continue;
                const std::string& text = require_text(values[i], fitted.spec);
                auto it = std::lower_bound(categories.begin(), categories.end(), text);
                if (it != categories.end() && *it == text) {
                    block[i * width + static_cast<std::size_t>(it - categories.begin())] = 1.0;
                }
            }
            break;
        }
        case EncoderKind::StandardScale: {
            const auto& state = std::get<ScaleState>(fitted.state);
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (values[i].is_null()) continue;
                block[i] = scale_one(state, require_number(values[i], fitted.spec));
            }
            break;
        }
        case EncoderKind::TokenCountScaled: {
            const auto& state = std::get<ScaleState>(fitted.state);
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (values[i].is_null()) continue;
                double count = static_cast<double>(
                    token_count(require_text(values[i], fitted.spec)));
                block[i] = scale_one(state, count);
            }
            break;
        }
        case EncoderKind::HashEmbed: {
            const auto& state = std::get<HashEmbedState>(fitted.state);
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (values[i].is_null()) continue;
                embed_into(state, require_text(values[i], fitted.spec),
                           std::span<double>(block).subspan(i * width, width));
            }
            break;
        }
    }
    return block;
}

namespace {

std::vector<Value> column_values(const ProvDataFrame& frame, const std::string& column) {
    std::size_t idx = frame.column_index(column);
    std::vector<Value> values;
    values.reserve(frame.n_rows());
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        values.push_back(frame.row(i)[idx]);
    }
    return values;
}

LabelVector extract_labels(const ProvDataFrame& frame, const std::string& label_column) {
    std::size_t idx = frame.column_index(label_column);
    LabelVector labels;
    labels.reserve(frame.n_rows());
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        const Value& v = frame.row(i)[idx];
        if (v.is(ValueKind::Bool)) {
            labels.push_back(v.as_bool() ? 1.0 : 0.0);
        } else if (v.is(ValueKind::Int) && (v.as_int() == 0 || v.as_int() == 1)) {
            labels.push_back(static_cast<double>(v.as_int()));
        } else {
            throw ValidationError("label column '" + label_column +
                                  "' must hold bool or {0,1} int values (row " +
                                  std::to_string(i) + ")");
        }
    }
    return labels;
}

FeatureMatrix assemble(const std::vector<std::vector<double>>& blocks,
                       const std::vector<std::size_t>& widths, std::size_t n_rows) {
    std::size_t n_dims = 0;
    for (std::size_t w : widths) n_dims += w;
    std::vector<double> dense(n_rows * n_dims);
    std::size_t offset = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t i = 0; i < n_rows; ++i) {
            std::copy_n(blocks[b].data() + i * widths[b], widths[b],
                        dense.data() + i * n_dims + offset);
        }
        offset += widths[b];
    }
    return FeatureMatrix::from_dense(n_rows, n_dims, std::move(dense));
}

}  // namespace

EncodeResult encode_fit(const ProvDataFrame& frame, std::span<const EncoderSpec> specs,
                        const std::string& label_column) {
    if (specs.empty()) {
        throw ValidationError("no features: encoder spec list is empty");
    }
    std::vector<FittedEncoder> fitted;
    std::vector<std::vector<double>> blocks;
    std::vector<std::size_t> widths;
    MatrixColumnProvenance prov;
    std::size_t offset = 0;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        std::vector<Value> values = column_values(frame, specs[s].input_column);
        try {
            fitted.push_back(fit_encoder(specs[s], values));
        } catch (const ValidationError& e) {
            throw ValidationError("spec " + std::to_string(s) + ": " + e.what());
        }
        blocks.push_back(transform_values(fitted.back(), values));
        std::size_t width = fitted.back().width();
        widths.push_back(width);
        prov[specs[s].input_column].push_back({offset, offset + width});
        offset += width;
    }
    FeatureMatrix features = assemble(blocks, widths, frame.n_rows());
    LabelVector labels = extract_labels(frame, label_column);
    return EncodeResult{std::move(features), std::move(labels), std::move(fitted),
                        std::move(prov)};
}

EncodeOutput encode_with(std::span<const FittedEncoder> fitted, const ProvDataFrame& frame,
                         const std::string& label_column) {
    std::vector<std::vector<double>> blocks;
    std::vector<std::size_t> widths;
    for (const FittedEncoder& enc : fitted) {
        std::vector<Value> values = column_values(frame, enc.spec.input_column);
        blocks.push_back(transform_values(enc, values));
        widths.push_back(enc.width());
    }
    FeatureMatrix features = assemble(blocks, widths, frame.n_rows());
    LabelVector labels = extract_labels(frame, label_column);
    return EncodeOutput{std::move(features), std::move(labels)};
}

double max_abs_diff(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.n_rows() != b.n_rows() || a.n_dims() != b.n_dims()) {
        throw ValidationError("matrix shapes differ");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        std::span<const double> ra = a.row(i);
        std::span<const double> rb = b.row(i);
        for (std::size_t d = 0; d < ra.size(); ++d) {
            worst = std::max(worst, std::abs(ra[d] - rb[d]));
        }
    }
    return worst;
}

}  // namespace provpipe
