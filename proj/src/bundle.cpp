#include "provpipe/bundle.hpp"

#include <algorithm>
#include <cmath>

#include "provpipe/errors.hpp"

namespace provpipe {

ProvenanceIndex ProvenanceIndex::build(const ProvDataFrame& frame,
                                       std::span<const SourceInfo> sources) {
    ProvenanceIndex index;
    index.sources_.reserve(sources.size());
    for (const SourceInfo& s : sources) {
        PerSource per;
        per.name = s.name;
        per.offsets.assign(s.row_count + 1, 0);
        index.sources_.push_back(std::move(per));
    }
    auto slot_of = [&](const BaseTupleId& id) -> PerSource& {
        for (PerSource& per : index.sources_) {
            if (per.name == id.source) {
                if (id.row + 1 >= per.offsets.size()) {
                    throw ValidationError("row provenance references " + id.source + "#" +
                                          std::to_string(id.row) +
                                          " beyond the declared row count");
                }
                return per;
            }
        }
        throw ValidationError("row provenance references undeclared source: " + id.source);
    };

    // Counting pass, then fill.
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        for (const Monomial& m : frame.provenance(i).monomials()) {
            for (const BaseTupleId& f : m.factors()) {
                slot_of(f).offsets[f.row + 1] += 1;
            }
        }
    }
    for (PerSource& per : index.sources_) {
        for (std::size_t r = 1; r < per.offsets.size(); ++r) {
            per.offsets[r] += per.offsets[r - 1];
        }
        per.rows.resize(per.offsets.back());
    }
    std::vector<std::vector<std::size_t>> cursors;
    for (PerSource& per : index.sources_) {
        cursors.emplace_back(per.offsets.begin(), per.offsets.end() - 1);
    }
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        for (const Monomial& m : frame.provenance(i).monomials()) {
            for (const BaseTupleId& f : m.factors()) {
                for (std::size_t s = 0; s < index.sources_.size(); ++s) {
                    if (index.sources_[s].name == f.source) {
                        index.sources_[s].rows[cursors[s][f.row]++] = i;
                        break;
                    }
                }
            }
        }
    }
    return index;
}

std::vector<std::size_t> ProvenanceIndex::rows_touching(
    std::span<const BaseTupleId> ids) const {
    std::vector<std::size_t> out;
    for (const BaseTupleId& id : ids) {
        for (const PerSource& per : sources_) {
            if (per.name != id.source) continue;
            if (id.row + 1 < per.offsets.size()) {
                out.insert(out.end(), per.rows.begin() + per.offsets[id.row],
                           per.rows.begin() + per.offsets[id.row + 1]);
            }
            break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const SourceInfo* ArtifactBundle::find_source(const std::string& name) const {
    for (const SourceInfo& s : sources) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

bool ArtifactBundle::operator==(const ArtifactBundle& other) const {
    return sources == other.sources && prepared == other.prepared &&
           features == other.features && labels == other.labels && fitted == other.fitted &&
           matrix_prov == other.matrix_prov && model == other.model &&
           train_cfg == other.train_cfg;
}

void validate_bundle(const ArtifactBundle& bundle) {
    if (bundle.features.n_rows() != bundle.prepared.n_rows()) {
        throw ValidationError("feature matrix rows do not match prepared rows");
    }
    if (bundle.labels.size() != bundle.features.n_rows()) {
        throw ValidationError("label count does not match feature rows");
    }
    if (bundle.model.weights.size() != bundle.features.n_dims()) {
        throw ValidationError("model weight width does not match feature dimensions");
    }
    for (double y : bundle.labels) {
        if (y != 0.0 && y != 1.0) {
            throw ValidationError("labels must be 0.0 or 1.0");
        }
    }
    if (!std::isfinite(bundle.model.bias)) {
        throw ValidationError("model bias is not finite");
    }
    for (double w : bundle.model.weights) {
        if (!std::isfinite(w)) throw ValidationError("model weight is not finite");
    }
    bundle.train_cfg.validate();

    // Encoder widths, spec order and the recorded ranges must agree, and the
    // ranges must tile [0, n_dims) without gaps or overlaps.
    std::map<std::string, std::vector<DimRange>> expected;
    std::size_t offset = 0;
    for (const FittedEncoder& enc : bundle.fitted) {
        std::size_t width = enc.width();
        expected[enc.spec.input_column].push_back({offset, offset + width});
        offset += width;
    }
    if (offset != bundle.features.n_dims()) {
        throw ValidationError("encoder widths do not sum to feature dimensions");
    }
    if (expected != bundle.matrix_prov) {
        throw ValidationError("matrix column provenance does not match fitted encoders");
    }
    for (const FittedEncoder& enc : bundle.fitted) {
        if (!bundle.prepared.has_column(enc.spec.input_column)) {
            throw ValidationError("encoder input column missing from prepared frame: " +
                                  enc.spec.input_column);
        }
    }
}

}  // namespace provpipe
