#pragma once

#include <string>
#include <vector>

#include "provpipe/bundle.hpp"
#include "provpipe/pipeline.hpp"

namespace provpipe {

/// Redact one input column of some base rows: Null the derived prepared
/// cells, zero the derived feature dimensions, unlearn the difference.
struct RedactionRequest {
    std::string source;
    std::vector<std::size_t> base_rows;
    std::string input_column;
};

struct DeletionRequest {
    std::string source;
    std::vector<std::size_t> base_rows;
};

struct UpdateDelta {
    std::size_t row = 0;
    std::size_t dim = 0;
    double old_value = 0.0;
    double new_value = 0.0;
};

/// Resolved maintenance work for one redaction request against one bundle
/// state (guarded by the bundle fingerprint).
struct MaintenancePlan {
    std::string bundle_fingerprint;
    std::vector<std::size_t> affected_prep_rows;       // ascending
    std::vector<std::string> affected_prep_columns;    // sorted
    std::vector<DimRange> affected_dim_ranges;         // ascending by begin
    std::vector<UpdateDelta> deltas;                   // currently nonzero cells only
};

struct MaintenanceReport {
    std::size_t cells_nulled = 0;
    std::size_t dims_zeroed = 0;
    std::size_t rows_deleted = 0;
    double model_param_delta_norm = 0.0;
    double affected_row_fraction = 0.0;
    std::vector<std::pair<std::string, double>> elapsed_seconds;  // per phase
};

/// Single-line JSON with an ISO-8601 UTC timestamp.
std::string report_json_line(const MaintenanceReport& report);

MaintenancePlan plan_redaction(const ArtifactBundle& bundle, const RedactionRequest& request);

struct MaintenanceOutcome {
    ArtifactBundle bundle;
    MaintenanceReport report;
};

/// Applies a plan produced from this exact bundle state; the input bundle is
/// left untouched. Rejects plans whose fingerprint does not match.
MaintenanceOutcome apply_redaction(const ArtifactBundle& bundle, const MaintenancePlan& plan,
                                   const UnlearnConfig& cfg);

/// Removes every prepared/feature/label row whose provenance mentions an
/// affected base tuple, and unlearns the removed rows' influence.
MaintenanceOutcome apply_deletion(const ArtifactBundle& bundle, const DeletionRequest& request,
                                  const UnlearnConfig& cfg);

struct OracleResult {
    ProvDataFrame prepared;
    FeatureMatrix features;
    LabelVector labels;
};

/// Full re-execution reference: runs data preparation from scratch on the
/// (modified) inputs, then transforms with the originally fitted encoders —
/// no refitting, so results are comparable to incremental maintenance.
OracleResult oracle_reexecute(const PipelineDef& def, const SourceTables& inputs,
                              std::span<const FittedEncoder> fitted);

}  // namespace provpipe
