#pragma once

#include <map>
#include <string>
#include <vector>

#include "provpipe/bundle.hpp"
#include "provpipe/frame.hpp"

namespace provpipe {

struct SourceDecl {
    std::string name;
    Schema schema;
};

/// Raw input data for one declared source.
struct SourceTable {
    Schema schema;
    std::vector<Row> rows;
};

using SourceTables = std::map<std::string, SourceTable>;

/// One data-preparation operation in a pipeline plan. Steps name their
/// result frame and reference sources or earlier results by name.
struct PrepStep {
    enum class Kind { Filter, Derive, KeepColumns, Rename, Join, UnionAll, Explode };

    Kind kind;
    std::string result;
    std::vector<std::string> inputs;

    std::vector<std::string> columns;  // Filter: predicate inputs; Derive: source
                                       // columns; KeepColumns: kept columns
    RowPredicate predicate;            // Filter
    std::string target;                // Derive
    ValueKind target_kind = ValueKind::Text;
    RowFn fn;                          // Derive
    std::string old_name, new_name;    // Rename
    std::string left_on, right_on;     // Join
    std::string column;                // Explode

    static PrepStep filter_rows(std::string result, std::string input,
                                std::vector<std::string> columns, RowPredicate predicate);
    static PrepStep derive(std::string result, std::string input, std::string target,
                           ValueKind target_kind, std::vector<std::string> source_columns,
                           RowFn fn);
    static PrepStep keep(std::string result, std::string input,
                         std::vector<std::string> columns);
    static PrepStep rename(std::string result, std::string input, std::string old_name,
                           std::string new_name);
    static PrepStep join_on(std::string result, std::string left, std::string right,
                            std::string left_on, std::string right_on);
    static PrepStep union_frames(std::string result, std::string a, std::string b);
    static PrepStep explode_list(std::string result, std::string input, std::string column);

    const char* kind_name() const;
};

/// Declarative pipeline: a data-preparation dataflow over named sources
/// ending in one result frame, encoder specs, the label column, and the
/// training configuration.
struct PipelineDef {
    std::vector<SourceDecl> sources;
    std::vector<PrepStep> prep;
    std::vector<EncoderSpec> encoders;
    std::string label_column;
    TrainConfig train_cfg;

    /// Structural checks: unique names, inputs defined before use, exactly
    /// one terminal frame (the last step's result).
    void validate() const;
};

/// Registers the tables as sources and executes the steps in order; returns
/// the last step's result. Inputs must reference declared sources or earlier
/// results. Tables must match the declared schemas.
ProvDataFrame run_steps(std::span<const SourceDecl> sources, std::span<const PrepStep> steps,
                        const SourceTables& tables);

/// Executes the data-preparation plan only (validates the pipeline first).
ProvDataFrame run_prep(const PipelineDef& def, const SourceTables& tables);

/// Full capture: prep, encode (fit), train, assemble and validate the
/// artifact bundle. Errors are annotated with the failing stage.
ArtifactBundle capture(const PipelineDef& def, const SourceTables& tables);

/// The built-in example pipeline: customers joined to their mails, filtered
/// to German premium customers, with a lowercased mail subject as `title`,
/// the mail body as `text`, and complaint labels. Encodes title twice
/// (hashed embedding + scaled token count), text once, country one-hot.
PipelineDef complaints_pipeline();

Schema complaints_customers_schema();
Schema complaints_mails_schema();

}  // namespace provpipe
