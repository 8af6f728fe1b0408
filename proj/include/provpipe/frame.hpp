#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "provpipe/provenance.hpp"
#include "provpipe/value.hpp"

namespace provpipe {

struct ColumnDef {
    std::string name;
    ValueKind kind;

    bool operator==(const ColumnDef&) const = default;
};

using Schema = std::vector<ColumnDef>;
using Row = std::vector<Value>;

/// (source name, input column name) pair a frame column descends from.
using ColumnOrigin = std::pair<std::string, std::string>;

/// Per-output-column set of base columns feeding it through projections.
/// Every column of the owning frame has an entry; only constant-valued
/// derived columns may have an empty one.
using ColumnProvenance = std::map<std::string, std::set<ColumnOrigin>>;

using RowFn = std::function<Value(std::span<const Value>)>;
using RowPredicate = std::function<bool(std::span<const Value>)>;

/// Relational table with one provenance polynomial per row and column-level
/// lineage. Immutable after construction; operations return new frames.
///
/// Rows are stored in fixed-size chunks shared between frames, so the
/// maintenance paths that replace a handful of rows copy only the touched
/// chunks instead of the whole table.
class ProvDataFrame {
public:
    static constexpr std::size_t kRowsPerChunk = 16;

    using RowChunk = std::vector<Row>;
    using ChunkPtr = std::shared_ptr<const RowChunk>;
    using ProvVec = std::vector<ProvenancePolynomial>;

    ProvDataFrame(Schema schema, std::vector<ChunkPtr> chunks, std::size_t n_rows,
                  std::shared_ptr<const ProvVec> provenance, ColumnProvenance column_provenance);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return schema_.size(); }
    const Schema& schema() const { return schema_; }
    const Row& row(std::size_t i) const {
        return (*chunks_[i / kRowsPerChunk])[i % kRowsPerChunk];
    }
    const ProvenancePolynomial& provenance(std::size_t i) const { return (*provenance_)[i]; }
    const std::shared_ptr<const ProvVec>& provenance_vector() const { return provenance_; }
    const ColumnProvenance& column_provenance() const { return column_provenance_; }

    /// Index of a named column; throws ValidationError if absent.
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;

    /// Copy with the given cells set to Null. Shares untouched row chunks and
    /// the full provenance vector with this frame.
    ProvDataFrame with_cells_nulled(std::span<const std::size_t> rows,
                                    std::span<const std::size_t> columns) const;

    /// Copy without the given rows (sorted ascending). Provenance rows are
    /// dropped in lockstep.
    ProvDataFrame with_rows_removed(std::span<const std::size_t> sorted_rows) const;

    bool operator==(const ProvDataFrame& other) const;

private:
    Schema schema_;
    std::vector<ChunkPtr> chunks_;
    std::size_t n_rows_ = 0;
    std::shared_ptr<const ProvVec> provenance_;
    ColumnProvenance column_provenance_;
};

/// Accumulates rows chunk by chunk; validates each cell against the schema
/// as it is appended.
class FrameBuilder {
public:
    explicit FrameBuilder(Schema schema, ColumnProvenance column_provenance);

    void append(Row row, ProvenancePolynomial provenance);
    void reserve(std::size_t n_rows);
    std::size_t size() const { return provenance_.size(); }

    ProvDataFrame build() &&;

private:
    Schema schema_;
    ColumnProvenance column_provenance_;
    std::vector<ProvDataFrame::ChunkPtr> sealed_;
    ProvDataFrame::RowChunk open_;
    ProvDataFrame::ProvVec provenance_;
};

/// Tracks which source names have been registered in one pipeline session,
/// so provenance indeterminates stay unambiguous.
class SourceRegistry {
public:
    ProvDataFrame register_source(const std::string& name, Schema schema,
                                  std::vector<Row> rows);

    bool contains(const std::string& name) const;
    std::size_t row_count(const std::string& name) const;

private:
    std::map<std::string, std::size_t> row_counts_;
};

// Relational operations. All are pure: inputs are never mutated.

/// Rows where any referenced column is Null are dropped without consulting
/// the predicate: Null never matches.
ProvDataFrame filter(const ProvDataFrame& frame, std::span<const std::string> columns,
                     const RowPredicate& predicate);

/// Extended projection: adds or replaces `target` with fn over the named
/// source columns. The new column's lineage is the union of the source
/// columns' lineage (empty for constant columns).
ProvDataFrame project_derive(const ProvDataFrame& frame, const std::string& target,
                             ValueKind target_kind, std::span<const std::string> source_columns,
                             const RowFn& fn);

ProvDataFrame keep_columns(const ProvDataFrame& frame, std::span<const std::string> columns);

ProvDataFrame rename_column(const ProvDataFrame& frame, const std::string& old_name,
                            const std::string& new_name);

/// Inner equi-join, left-major stable order. Null keys join to nothing. The
/// right key column is dropped; non-key column names must be disjoint.
/// Output row provenance is the product of the matched rows' polynomials.
ProvDataFrame join(const ProvDataFrame& left, const ProvDataFrame& right,
                   const std::string& left_on, const std::string& right_on);

/// Bag-semantics concatenation; schemas must be identical.
ProvDataFrame union_all(const ProvDataFrame& a, const ProvDataFrame& b);

/// Each row with a k-element TextList yields k Text rows carrying the input
/// row's polynomial verbatim; empty lists (and Null cells) drop the row.
ProvDataFrame explode(const ProvDataFrame& frame, const std::string& column);

/// Ascending indices of rows whose polynomial mentions any of the ids.
std::vector<std::size_t> rows_touching(const ProvDataFrame& frame,
                                       std::span<const BaseTupleId> ids);

/// Output columns whose lineage contains (source, column).
std::set<std::string> columns_derived_from(const ProvDataFrame& frame, const std::string& source,
                                           const std::string& column);

}  // namespace provpipe
