#include "provpipe/ivm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

#include <nlohmann/json.hpp>

#include "provpipe/errors.hpp"

namespace provpipe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const SourceInfo& checked_source(const ArtifactBundle& bundle, const std::string& name) {
    const SourceInfo* info = bundle.find_source(name);
    if (info == nullptr) {
        throw ValidationError("unknown source: " + name);
    }
    return *info;
}

std::vector<BaseTupleId> request_ids(const std::string& source,
                                     const std::vector<std::size_t>& base_rows,
                                     std::size_t row_count) {
    if (base_rows.empty()) {
        throw ValidationError("request names no base rows");
    }
    std::vector<BaseTupleId> ids;
    ids.reserve(base_rows.size());
    for (std::size_t r : base_rows) {
        if (r >= row_count) {
            throw ValidationError("base row " + std::to_string(r) + " out of range for source " +
                                  source);
        }
        ids.push_back({source, r});
    }
    return ids;
}

/// Rows of the feature matrix gathered into a dense block.
FeatureMatrix gather_rows(const FeatureMatrix& matrix, std::span<const std::size_t> rows) {
    std::vector<double> dense;
    dense.reserve(rows.size() * matrix.n_dims());
    for (std::size_t r : rows) {
        std::span<const double> row = matrix.row(r);
        dense.insert(dense.end(), row.begin(), row.end());
    }
    return FeatureMatrix::from_dense(rows.size(), matrix.n_dims(), std::move(dense));
}

double param_delta_norm(const ModelParams& a, const ModelParams& b) {
    double sum = 0.0;
    for (std::size_t d = 0; d < a.weights.size(); ++d) {
        double diff = a.weights[d] - b.weights[d];
        sum += diff * diff;
    }
    double bias_diff = a.bias - b.bias;
    sum += bias_diff * bias_diff;
    return std::sqrt(sum);
}

}  // namespace

std::string report_json_line(const MaintenanceReport& report) {
    char timestamp[32];
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(timestamp, sizeof(timestamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

    nlohmann::json j;
    j["timestamp"] = timestamp;
    j["cells_nulled"] = report.cells_nulled;
    j["dims_zeroed"] = report.dims_zeroed;
    j["rows_deleted"] = report.rows_deleted;
    j["model_param_delta_norm"] = report.model_param_delta_norm;
    j["affected_row_fraction"] = report.affected_row_fraction;
    nlohmann::json elapsed = nlohmann::json::object();
    for (const auto& [phase, secs] : report.elapsed_seconds) {
        elapsed[phase] = secs;
    }
    j["elapsed_seconds"] = std::move(elapsed);
    return j.dump();
}

MaintenancePlan plan_redaction(const ArtifactBundle& bundle, const RedactionRequest& request) {
    const SourceInfo& source = checked_source(bundle, request.source);
    bool column_known = false;
    for (const ColumnDef& col : source.schema) {
        if (col.name == request.input_column) {
            column_known = true;
            break;
        }
    }
    if (!column_known) {
        throw ValidationError("column '" + request.input_column + "' not in source '" +
                              request.source + "'");
    }
    std::vector<BaseTupleId> ids =
        request_ids(request.source, request.base_rows, source.row_count);

    MaintenancePlan plan;
    plan.bundle_fingerprint = bundle_fingerprint(bundle);
    if (bundle.prov_index) {
        plan.affected_prep_rows = bundle.prov_index->rows_touching(ids);
    } else {
        plan.affected_prep_rows = rows_touching(bundle.prepared, ids);
    }

    std::set<std::string> columns =
        columns_derived_from(bundle.prepared, request.source, request.input_column);
    plan.affected_prep_columns.assign(columns.begin(), columns.end());

    for (const std::string& column : plan.affected_prep_columns) {
        auto it = bundle.matrix_prov.find(column);
        if (it == bundle.matrix_prov.end()) continue;  // prepared-only column
        plan.affected_dim_ranges.insert(plan.affected_dim_ranges.end(), it->second.begin(),
                                        it->second.end());
    }
    std::sort(plan.affected_dim_ranges.begin(), plan.affected_dim_ranges.end(),
              [](const DimRange& a, const DimRange& b) { return a.begin < b.begin; });

    for (std::size_t row : plan.affected_prep_rows) {
        for (const DimRange& range : plan.affected_dim_ranges) {
            for (std::size_t dim = range.begin; dim < range.end; ++dim) {
                double value = bundle.features.at(row, dim);
                if (value != 0.0) {
                    plan.deltas.push_back({row, dim, value, 0.0});
                }
            }
        }
    }
    return plan;
}

MaintenanceOutcome apply_redaction(const ArtifactBundle& bundle, const MaintenancePlan& plan,
                                   const UnlearnConfig& cfg) {
    cfg.validate();
    if (plan.bundle_fingerprint != bundle_fingerprint(bundle)) {
        throw ValidationError("stale maintenance plan: bundle fingerprint mismatch");
    }

    MaintenanceReport report;

    Clock::time_point t0 = Clock::now();
    std::vector<std::size_t> column_indices;
    column_indices.reserve(plan.affected_prep_columns.size());
    for (const std::string& name : plan.affected_prep_columns) {
        column_indices.push_back(bundle.prepared.column_index(name));
    }
    ProvDataFrame prepared =
        bundle.prepared.with_cells_nulled(plan.affected_prep_rows, column_indices);
    report.cells_nulled = plan.affected_prep_rows.size() * column_indices.size();
    report.elapsed_seconds.emplace_back("null_cells", seconds_since(t0));

    Clock::time_point t1 = Clock::now();
    std::vector<FeatureMatrix::CellUpdate> updates;
    updates.reserve(plan.deltas.size());
    for (const UpdateDelta& d : plan.deltas) {
        updates.push_back({d.row, d.dim, d.new_value});
    }
    FeatureMatrix features = bundle.features.with_updates(updates);
    report.dims_zeroed = plan.deltas.size();
    report.elapsed_seconds.emplace_back("zero_dims", seconds_since(t1));

    Clock::time_point t2 = Clock::now();
    FeatureMatrix old_rows = gather_rows(bundle.features, plan.affected_prep_rows);
    FeatureMatrix new_rows = gather_rows(features, plan.affected_prep_rows);
    std::vector<double> labels;
    labels.reserve(plan.affected_prep_rows.size());
    for (std::size_t r : plan.affected_prep_rows) {
        labels.push_back(bundle.labels[r]);
    }
    ModelParams model = unlearn_first_order(bundle.model, old_rows, new_rows, labels, cfg);
    report.elapsed_seconds.emplace_back("unlearn", seconds_since(t2));

    report.model_param_delta_norm = param_delta_norm(model, bundle.model);
    report.affected_row_fraction =
        bundle.prepared.n_rows() == 0
            ? 0.0
            : static_cast<double>(plan.affected_prep_rows.size()) /
                  static_cast<double>(bundle.prepared.n_rows());

    ArtifactBundle out{bundle.sources,  std::move(prepared), std::move(features),
                       bundle.labels,   bundle.fitted,       bundle.matrix_prov,
                       std::move(model), bundle.train_cfg};
    // Row provenance is untouched by redaction, so the index carries over.
    out.prov_index = bundle.prov_index;
    return MaintenanceOutcome{std::move(out), std::move(report)};
}

MaintenanceOutcome apply_deletion(const ArtifactBundle& bundle, const DeletionRequest& request,
                                  const UnlearnConfig& cfg) {
    cfg.validate();
    const SourceInfo& source = checked_source(bundle, request.source);
    std::vector<BaseTupleId> ids =
        request_ids(request.source, request.base_rows, source.row_count);

    MaintenanceReport report;

    Clock::time_point t0 = Clock::now();
    std::vector<std::size_t> affected = bundle.prov_index
                                            ? bundle.prov_index->rows_touching(ids)
                                            : rows_touching(bundle.prepared, ids);
    report.rows_deleted = affected.size();
    report.affected_row_fraction =
        bundle.prepared.n_rows() == 0
            ? 0.0
            : static_cast<double>(affected.size()) /
                  static_cast<double>(bundle.prepared.n_rows());

    if (affected.empty()) {
        report.elapsed_seconds.emplace_back("delete_rows", seconds_since(t0));
        return MaintenanceOutcome{bundle, std::move(report)};
    }

    ProvDataFrame prepared = bundle.prepared.with_rows_removed(affected);
    FeatureMatrix features = bundle.features.with_rows_removed(affected);
    LabelVector labels;
    labels.reserve(bundle.labels.size() - affected.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < bundle.labels.size(); ++i) {
        if (next < affected.size() && affected[next] == i) {
            ++next;
            continue;
        }
        labels.push_back(bundle.labels[i]);
    }
    report.elapsed_seconds.emplace_back("delete_rows", seconds_since(t0));

    Clock::time_point t1 = Clock::now();
    FeatureMatrix removed_rows = gather_rows(bundle.features, affected);
    std::vector<double> removed_labels;
    removed_labels.reserve(affected.size());
    for (std::size_t r : affected) {
        removed_labels.push_back(bundle.labels[r]);
    }
    ModelParams model = unlearn_delete(bundle.model, removed_rows, removed_labels, cfg);
    report.elapsed_seconds.emplace_back("unlearn", seconds_since(t1));

    report.model_param_delta_norm = param_delta_norm(model, bundle.model);

    ArtifactBundle out{bundle.sources,   std::move(prepared), std::move(features),
                       std::move(labels), bundle.fitted,       bundle.matrix_prov,
                       std::move(model),  bundle.train_cfg};
    return MaintenanceOutcome{std::move(out), std::move(report)};
}

OracleResult oracle_reexecute(const PipelineDef& def, const SourceTables& inputs,
                              std::span<const FittedEncoder> fitted) {
    ProvDataFrame prepared = run_prep(def, inputs);
    EncodeOutput out = encode_with(fitted, prepared, def.label_column);
    return OracleResult{std::move(prepared), std::move(out.features), std::move(out.labels)};
}

}  // namespace provpipe
