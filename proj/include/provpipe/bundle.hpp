#pragma once

#include <optional>
#include <string>
#include <vector>

#include "provpipe/encoding.hpp"
#include "provpipe/frame.hpp"
#include "provpipe/model.hpp"

namespace provpipe {

struct SourceInfo {
    std::string name;
    std::size_t row_count = 0;
    Schema schema;

    bool operator==(const SourceInfo&) const = default;
};

/// Inverted row-provenance index: base tuple id -> prepared rows whose
/// polynomial mentions it. Lets maintenance planning touch only the affected
/// rows instead of scanning every polynomial. Built once per bundle state at
/// capture/load time; immutable afterwards.
class ProvenanceIndex {
public:
    /// Walks every polynomial once. Rejects provenance that references an
    /// undeclared source or a row beyond the source's declared row count.
    static ProvenanceIndex build(const ProvDataFrame& frame,
                                 std::span<const SourceInfo> sources);

    /// Same contract as rows_touching on the indexed frame: ascending,
    /// duplicate-free; ids for unknown sources or rows match nothing.
    std::vector<std::size_t> rows_touching(std::span<const BaseTupleId> ids) const;

private:
    struct PerSource {
        std::string name;
        std::vector<std::size_t> offsets;  // row ordinal -> [offsets[r], offsets[r+1])
        std::vector<std::size_t> rows;     // prepared row indices
    };
    std::vector<PerSource> sources_;
};

/// The captured "materialised views" of one pipeline execution: prepared
/// data with provenance, feature matrix, labels, fitted encoders, matrix
/// column provenance and the trained model. Treat as immutable; maintenance
/// operations build new bundles.
struct ArtifactBundle {
    ArtifactBundle(std::vector<SourceInfo> sources, ProvDataFrame prepared,
                   FeatureMatrix features, LabelVector labels,
                   std::vector<FittedEncoder> fitted, MatrixColumnProvenance matrix_prov,
                   ModelParams model, TrainConfig train_cfg)
        : sources(std::move(sources)),
          prepared(std::move(prepared)),
          features(std::move(features)),
          labels(std::move(labels)),
          fitted(std::move(fitted)),
          matrix_prov(std::move(matrix_prov)),
          model(std::move(model)),
          train_cfg(train_cfg) {}

    std::vector<SourceInfo> sources;
    ProvDataFrame prepared;
    FeatureMatrix features;
    LabelVector labels;
    std::vector<FittedEncoder> fitted;
    MatrixColumnProvenance matrix_prov;
    ModelParams model;
    TrainConfig train_cfg;

    const SourceInfo* find_source(const std::string& name) const;

    bool operator==(const ArtifactBundle& other) const;

    /// Memoized manifest digest; cleared implicitly by building new bundles.
    /// Filled eagerly by capture/load so shared bundles are read-only.
    mutable std::optional<std::string> fingerprint_memo;

    /// Derived acceleration structure (not persisted, not compared). Set by
    /// capture/load; shared by redactions (provenance is unchanged); empty
    /// after deletions until the next capture/load/plan.
    std::shared_ptr<const ProvenanceIndex> prov_index;
};

/// Checks the cross-component invariants (row alignment, weight width,
/// matrix-provenance tiling, label domain, finiteness). Throws
/// ValidationError on the first violation.
void validate_bundle(const ArtifactBundle& bundle);

/// SHA-256 of the bundle's manifest, memoized on the bundle. Used to reject
/// maintenance plans built against a different bundle state.
const std::string& bundle_fingerprint(const ArtifactBundle& bundle);

}  // namespace provpipe
