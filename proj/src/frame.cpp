#include "provpipe/frame.hpp"

#include <algorithm>
#include <unordered_map>

#include "provpipe/errors.hpp"

namespace provpipe {

namespace {

void check_row_against_schema(const Row& row, const Schema& schema) {
    if (row.size() != schema.size()) {
        throw ValidationError("row arity " + std::to_string(row.size()) +
                              " does not match schema arity " + std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (!row[c].conforms_to(schema[c].kind)) {
            throw ValidationError("value in column '" + schema[c].name +
                                  "' does not conform to kind " + to_string(schema[c].kind));
        }
    }
}

void check_schema(const Schema& schema) {
    std::set<std::string> seen;
    for (const ColumnDef& col : schema) {
        if (col.name.empty()) {
            throw ValidationError("column names must be non-empty");
        }
        if (!seen.insert(col.name).second) {
            throw ValidationError("duplicate column name: " + col.name);
        }
    }
}

void check_column_provenance(const ColumnProvenance& prov, const Schema& schema) {
    for (const ColumnDef& col : schema) {
        if (prov.find(col.name) == prov.end()) {
            throw ValidationError("missing column provenance entry for: " + col.name);
        }
    }
}

}  // namespace

ProvDataFrame::ProvDataFrame(Schema schema, std::vector<ChunkPtr> chunks, std::size_t n_rows,
                             std::shared_ptr<const ProvVec> provenance,
                             ColumnProvenance column_provenance)
    : schema_(std::move(schema)),
      chunks_(std::move(chunks)),
      n_rows_(n_rows),
      provenance_(std::move(provenance)),
      column_provenance_(std::move(column_provenance)) {
    check_schema(schema_);
    check_column_provenance(column_provenance_, schema_);
    if (!provenance_ || provenance_->size() != n_rows_) {
        throw ValidationError("row provenance count does not match row count");
    }
}

std::size_t ProvDataFrame::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].name == name) return i;
    }
    throw ValidationError("unknown column: " + name);
}

bool ProvDataFrame::has_column(const std::string& name) const {
    for (const ColumnDef& col : schema_) {
        if (col.name == name) return true;
    }
    return false;
}

ProvDataFrame ProvDataFrame::with_cells_nulled(std::span<const std::size_t> rows,
                                               std::span<const std::size_t> columns) const {
    for (std::size_t c : columns) {
        if (c >= schema_.size()) throw ValidationError("column index out of range");
    }
    std::vector<ChunkPtr> chunks = chunks_;
    std::unordered_map<std::size_t, RowChunk*> cloned;
    for (std::size_t r : rows) {
        if (r >= n_rows_) throw ValidationError("row index out of range");
        std::size_t ci = r / kRowsPerChunk;
        auto it = cloned.find(ci);
        RowChunk* chunk;
        if (it == cloned.end()) {
            // Clone each touched chunk once, then patch in place.
            auto fresh = std::make_shared<RowChunk>(*chunks_[ci]);
            chunk = fresh.get();
            chunks[ci] = std::move(fresh);
            cloned.emplace(ci, chunk);
        } else {
            chunk = it->second;
        }
        for (std::size_t c : columns) {
            (*chunk)[r % kRowsPerChunk][c] = Value::null();
        }
    }
    return ProvDataFrame{schema_, std::move(chunks), n_rows_, provenance_, column_provenance_};
}

ProvDataFrame ProvDataFrame::with_rows_removed(std::span<const std::size_t> sorted_rows) const {
    FrameBuilder builder{schema_, column_provenance_};
    builder.reserve(n_rows_ - std::min(n_rows_, sorted_rows.size()));
    std::size_t next = 0;
    for (std::size_t i = 0; i < n_rows_; ++i) {
        if (next < sorted_rows.size() && sorted_rows[next] == i) {
            ++next;
            continue;
        }
        builder.append(row(i), provenance(i));
    }
    return std::move(builder).build();
}

bool ProvDataFrame::operator==(const ProvDataFrame& other) const {
    if (schema_ != other.schema_ || n_rows_ != other.n_rows_ ||
        column_provenance_ != other.column_provenance_) {
        return false;
    }
    for (std::size_t i = 0; i < n_rows_; ++i) {
        if (row(i) != other.row(i) || provenance(i) != other.provenance(i)) return false;
    }
    return true;
}

FrameBuilder::FrameBuilder(Schema schema, ColumnProvenance column_provenance)
    : schema_(std::move(schema)), column_provenance_(std::move(column_provenance)) {
    check_schema(schema_);
    open_.reserve(ProvDataFrame::kRowsPerChunk);
}

void FrameBuilder::reserve(std::size_t n_rows) {
    provenance_.reserve(n_rows);
    sealed_.reserve(n_rows / ProvDataFrame::kRowsPerChunk + 1);
}

void FrameBuilder::append(Row row, ProvenancePolynomial provenance) {
    check_row_against_schema(row, schema_);
    open_.push_back(std::move(row));
    provenance_.push_back(std::move(provenance));
    if (open_.size() == ProvDataFrame::kRowsPerChunk) {
        sealed_.push_back(std::make_shared<ProvDataFrame::RowChunk>(std::move(open_)));
        open_ = ProvDataFrame::RowChunk{};
        open_.reserve(ProvDataFrame::kRowsPerChunk);
    }
}

ProvDataFrame FrameBuilder::build() && {
    if (!open_.empty()) {
        sealed_.push_back(std::make_shared<ProvDataFrame::RowChunk>(std::move(open_)));
    }
    std::size_t n_rows = provenance_.size();
    return ProvDataFrame{std::move(schema_), std::move(sealed_), n_rows,
                         std::make_shared<ProvDataFrame::ProvVec>(std::move(provenance_)),
                         std::move(column_provenance_)};
}

ProvDataFrame SourceRegistry::register_source(const std::string& name, Schema schema,
                                              std::vector<Row> rows) {
    if (!is_valid_source_name(name)) {
        throw ValidationError("invalid source name: '" + name + "'");
    }
    if (row_counts_.count(name) != 0) {
        throw ValidationError("duplicate source: " + name);
    }
    ColumnProvenance prov;
    for (const ColumnDef& col : schema) {
        prov[col.name] = {ColumnOrigin{name, col.name}};
    }
    FrameBuilder builder{std::move(schema), std::move(prov)};
    builder.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        builder.append(std::move(rows[i]), ProvenancePolynomial::of_base({name, i}));
    }
    row_counts_[name] = builder.size();
    return std::move(builder).build();
}

bool SourceRegistry::contains(const std::string& name) const {
    return row_counts_.count(name) != 0;
}

std::size_t SourceRegistry::row_count(const std::string& name) const {
    auto it = row_counts_.find(name);
    if (it == row_counts_.end()) throw ValidationError("unregistered source: " + name);
    return it->second;
}

namespace {

std::vector<std::size_t> resolve_columns(const ProvDataFrame& frame,
                                         std::span<const std::string> names) {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const std::string& n : names) {
        idx.push_back(frame.column_index(n));
    }
    return idx;
}

std::set<ColumnOrigin> union_of_origins(const ProvDataFrame& frame,
                                        std::span<const std::string> columns) {
    std::set<ColumnOrigin> out;
    for (const std::string& c : columns) {
        const auto& entry = frame.column_provenance().at(c);
        out.insert(entry.begin(), entry.end());
    }
    return out;
}

}  // namespace

ProvDataFrame filter(const ProvDataFrame& frame, std::span<const std::string> columns,
                     const RowPredicate& predicate) {
    std::vector<std::size_t> idx = resolve_columns(frame, columns);
    FrameBuilder builder{frame.schema(), frame.column_provenance()};
    std::vector<Value> args(idx.size());
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        const Row& row = frame.row(i);
        bool has_null = false;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (row[idx[k]].is_null()) {
                has_null = true;
                break;
            }
            args[k] = row[idx[k]];
        }
        if (has_null) continue;
        if (predicate(args)) {
            builder.append(row, frame.provenance(i));
        }
    }
    return std::move(builder).build();
}

ProvDataFrame project_derive(const ProvDataFrame& frame, const std::string& target,
                             ValueKind target_kind, std::span<const std::string> source_columns,
                             const RowFn& fn) {
    std::vector<std::size_t> idx = resolve_columns(frame, source_columns);

    Schema schema = frame.schema();
    bool replace = frame.has_column(target);
    std::size_t target_idx;
    if (replace) {
        target_idx = frame.column_index(target);
        schema[target_idx].kind = target_kind;
    } else {
        target_idx = schema.size();
        schema.push_back({target, target_kind});
    }

    ColumnProvenance prov = frame.column_provenance();
    prov[target] = union_of_origins(frame, source_columns);

    FrameBuilder builder{std::move(schema), std::move(prov)};
    builder.reserve(frame.n_rows());
    std::vector<Value> args(idx.size());
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        const Row& row = frame.row(i);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            args[k] = row[idx[k]];
        }
        Value derived = fn(args);
        if (!derived.conforms_to(target_kind)) {
            throw ValidationError("derivation for column '" + target +
                                  "' produced a value of the wrong kind");
        }
        Row out = row;
        if (replace) {
            out[target_idx] = std::move(derived);
        } else {
            out.push_back(std::move(derived));
        }
        builder.append(std::move(out), frame.provenance(i));
    }
    return std::move(builder).build();
}

ProvDataFrame keep_columns(const ProvDataFrame& frame, std::span<const std::string> columns) {
    std::vector<std::size_t> idx = resolve_columns(frame, columns);
    Schema schema;
    ColumnProvenance prov;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        schema.push_back(frame.schema()[idx[k]]);
        prov[columns[k]] = frame.column_provenance().at(columns[k]);
    }
    FrameBuilder builder{std::move(schema), std::move(prov)};
    builder.reserve(frame.n_rows());
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        const Row& row = frame.row(i);
        Row out;
        out.reserve(idx.size());
        for (std::size_t k : idx) {
            out.push_back(row[k]);
        }
        builder.append(std::move(out), frame.provenance(i));
    }
    return std::move(builder).build();
}

ProvDataFrame rename_column(const ProvDataFrame& frame, const std::string& old_name,
                            const std::string& new_name) {
    std::size_t idx = frame.column_index(old_name);
    if (frame.has_column(new_name)) {
        throw ValidationError("rename target already exists: " + new_name);
    }
    Schema schema = frame.schema();
    schema[idx].name = new_name;
    ColumnProvenance prov = frame.column_provenance();
    auto node = prov.extract(old_name);
    node.key() = new_name;
    prov.insert(std::move(node));

    FrameBuilder builder{std::move(schema), std::move(prov)};
    builder.reserve(frame.n_rows());
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        builder.append(frame.row(i), frame.provenance(i));
    }
    return std::move(builder).build();
}

ProvDataFrame join(const ProvDataFrame& left, const ProvDataFrame& right,
                   const std::string& left_on, const std::string& right_on) {
    std::size_t lkey = left.column_index(left_on);
    std::size_t rkey = right.column_index(right_on);
    if (left.schema()[lkey].kind != right.schema()[rkey].kind) {
        throw ValidationError("join key kinds differ: " + left_on + " vs " + right_on);
    }
    for (const ColumnDef& col : right.schema()) {
        if (col.name != right_on && left.has_column(col.name)) {
            throw ValidationError("duplicate non-key column in join: " + col.name);
        }
    }

    Schema schema = left.schema();
    for (std::size_t c = 0; c < right.schema().size(); ++c) {
        if (c != rkey) schema.push_back(right.schema()[c]);
    }
    ColumnProvenance prov = left.column_provenance();
    for (const auto& [name, origins] : right.column_provenance()) {
        if (name != right_on) prov[name] = origins;
    }

    std::unordered_map<Value, std::vector<std::size_t>, ValueHash> right_index;
    right_index.reserve(right.n_rows());
    for (std::size_t j = 0; j < right.n_rows(); ++j) {
        const Value& key = right.row(j)[rkey];
        if (key.is_null()) continue;
        right_index[key].push_back(j);
    }

    FrameBuilder builder{std::move(schema), std::move(prov)};
    for (std::size_t i = 0; i < left.n_rows(); ++i) {
        const Row& lrow = left.row(i);
        const Value& key = lrow[lkey];
        if (key.is_null()) continue;
        auto it = right_index.find(key);
        if (it == right_index.end()) continue;
        for (std::size_t j : it->second) {
            const Row& rrow = right.row(j);
            Row out = lrow;
            out.reserve(lrow.size() + rrow.size() - 1);
            for (std::size_t c = 0; c < rrow.size(); ++c) {
                if (c != rkey) out.push_back(rrow[c]);
            }
            builder.append(std::move(out), poly_mul(left.provenance(i), right.provenance(j)));
        }
    }
    return std::move(builder).build();
}

ProvDataFrame union_all(const ProvDataFrame& a, const ProvDataFrame& b) {
    if (a.schema() != b.schema()) {
        throw ValidationError("union_all requires identical schemas");
    }
    ColumnProvenance prov = a.column_provenance();
    for (const auto& [name, origins] : b.column_provenance()) {
        prov[name].insert(origins.begin(), origins.end());
    }
    FrameBuilder builder{a.schema(), std::move(prov)};
    builder.reserve(a.n_rows() + b.n_rows());
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        builder.append(a.row(i), a.provenance(i));
    }
    for (std::size_t i = 0; i < b.n_rows(); ++i) {
        builder.append(b.row(i), b.provenance(i));
    }
    return std::move(builder).build();
}

ProvDataFrame explode(const ProvDataFrame& frame, const std::string& column) {
    std::size_t idx = frame.column_index(column);
    if (frame.schema()[idx].kind != ValueKind::TextList) {
        throw ValidationError("explode requires a text_list column: " + column);
    }
    Schema schema = frame.schema();
    schema[idx].kind = ValueKind::Text;

    FrameBuilder builder{std::move(schema), frame.column_provenance()};
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        const Row& row = frame.row(i);
        if (row[idx].is_null()) continue;
        for (const std::string& element : row[idx].as_text_list()) {
            Row out = row;
            out[idx] = Value::text(element);
            builder.append(std::move(out), frame.provenance(i));
        }
    }
    return std::move(builder).build();
}

std::vector<std::size_t> rows_touching(const ProvDataFrame& frame,
                                       std::span<const BaseTupleId> ids) {
    // Group the requested ordinals per source so the scan does one byte
    // probe (and a string compare only on probable hits) per factor.
    std::vector<std::pair<std::string, std::vector<unsigned char>>> wanted;
    for (const BaseTupleId& id : ids) {
        std::vector<unsigned char>* bits = nullptr;
        for (auto& [source, b] : wanted) {
            if (source == id.source) {
                bits = &b;
                break;
            }
        }
        if (bits == nullptr) {
            wanted.emplace_back(id.source, std::vector<unsigned char>{});
            bits = &wanted.back().second;
        }
        if (bits->size() <= id.row) bits->resize(id.row + 1, 0);
        (*bits)[id.row] = 1;
    }

    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        bool hit = false;
        for (const Monomial& m : frame.provenance(i).monomials()) {
            for (const BaseTupleId& f : m.factors()) {
                for (const auto& [source, bits] : wanted) {
                    if (f.row < bits.size() && bits[f.row] != 0 && f.source == source) {
                        hit = true;
                        break;
                    }
                }
                if (hit) break;
            }
            if (hit) break;
        }
        if (hit) out.push_back(i);
    }
    return out;
}

std::set<std::string> columns_derived_from(const ProvDataFrame& frame, const std::string& source,
                                           const std::string& column) {
    std::set<std::string> out;
    ColumnOrigin origin{source, column};
    for (const auto& [name, origins] : frame.column_provenance()) {
        if (origins.count(origin) != 0) out.insert(name);
    }
    return out;
}

}  // namespace provpipe
