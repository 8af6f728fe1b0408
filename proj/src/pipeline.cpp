#include "provpipe/pipeline.hpp"

#include <algorithm>
#include <set>

#include "provpipe/errors.hpp"

namespace provpipe {

PrepStep PrepStep::filter_rows(std::string result, std::string input,
                               std::vector<std::string> columns, RowPredicate predicate) {
    PrepStep s;
    s.kind = Kind::Filter;
    s.result = std::move(result);
    s.inputs = {std::move(input)};
    s.columns = std::move(columns);
    s.predicate = std::move(predicate);
    return s;
}

PrepStep PrepStep::derive(std::string result, std::string input, std::string target,
                          ValueKind target_kind, std::vector<std::string> source_columns,
                          RowFn fn) {
    PrepStep s;
    s.kind = Kind::Derive;
    s.result = std::move(result);
    s.inputs = {std::move(input)};
    s.target = std::move(target);
    s.target_kind = target_kind;
    s.columns = std::move(source_columns);
    s.fn = std::move(fn);
    return s;
}

PrepStep PrepStep::keep(std::string result, std::string input,
                        std::vector<std::string> columns) {
    PrepStep s;
    s.kind = Kind::KeepColumns;
    s.result = std::move(result);
    s.inputs = {std::move(input)};
    s.columns = std::move(columns);
    return s;
}

PrepStep PrepStep::rename(std::string result, std::string input, std::string old_name,
                          std::string new_name) {
    PrepStep s;
    s.kind = Kind::Rename;
    s.result = std::move(result);
    s.inputs = {std::move(input)};
    s.old_name = std::move(old_name);
    s.new_name = std::move(new_name);
    return s;
}

PrepStep PrepStep::join_on(std::string result, std::string left, std::string right,
                           std::string left_on, std::string right_on) {
    PrepStep s;
    s.kind = Kind::Join;
    s.result = std::move(result);
    s.inputs = {std::move(left), std::move(right)};
    s.left_on = std::move(left_on);
    s.right_on = std::move(right_on);
    return s;
}

PrepStep PrepStep::union_frames(std::string result, std::string a, std::string b) {
    PrepStep s;
    s.kind = Kind::UnionAll;
    s.result = std::move(result);
    s.inputs = {std::move(a), std::move(b)};
    return s;
}

PrepStep PrepStep::explode_list(std::string result, std::string input, std::string column) {
    PrepStep s;
    s.kind = Kind::Explode;
    s.result = std::move(result);
    s.inputs = {std::move(input)};
    s.column = std::move(column);
    return s;
}

const char* PrepStep::kind_name() const {
    switch (kind) {
        case Kind::Filter: return "filter";
        case Kind::Derive: return "derive";
        case Kind::KeepColumns: return "keep_columns";
        case Kind::Rename: return "rename";
        case Kind::Join: return "join";
        case Kind::UnionAll: return "union_all";
        case Kind::Explode: return "explode";
    }
    return "unknown";
}

void PipelineDef::validate() const {
    std::set<std::string> defined;
    for (const SourceDecl& s : sources) {
        if (!is_valid_source_name(s.name)) {
            throw ValidationError("invalid source name: '" + s.name + "'");
        }
        if (!defined.insert(s.name).second) {
            throw ValidationError("duplicate source declaration: " + s.name);
        }
    }
    if (prep.empty()) {
        throw ValidationError("pipeline has no preparation steps");
    }
    std::set<std::string> produced;
    std::set<std::string> consumed;
    for (const PrepStep& step : prep) {
        for (const std::string& in : step.inputs) {
            if (defined.count(in) == 0) {
                throw ValidationError("step '" + step.result + "' references undefined frame: " +
                                      in);
            }
            consumed.insert(in);
        }
        if (!defined.insert(step.result).second) {
            throw ValidationError("duplicate frame name: " + step.result);
        }
        produced.insert(step.result);
    }
    const std::string& terminal = prep.back().result;
    for (const std::string& name : produced) {
        if (name != terminal && consumed.count(name) == 0) {
            throw ValidationError("dangling intermediate frame (not consumed): " + name);
        }
    }
    if (consumed.count(terminal) != 0) {
        throw ValidationError("terminal frame is consumed by a later step: " + terminal);
    }
    if (encoders.empty()) {
        throw ValidationError("no features: pipeline declares no encoder specs");
    }
    if (label_column.empty()) {
        throw ValidationError("pipeline declares no label column");
    }
    train_cfg.validate();
}

namespace {

ProvDataFrame execute_step(const PrepStep& step,
                           const std::map<std::string, ProvDataFrame>& env) {
    auto frame = [&](const std::string& name) -> const ProvDataFrame& {
        return env.at(name);
    };
    switch (step.kind) {
        case PrepStep::Kind::Filter:
            return filter(frame(step.inputs[0]), step.columns, step.predicate);
        case PrepStep::Kind::Derive:
            return project_derive(frame(step.inputs[0]), step.target, step.target_kind,
                                  step.columns, step.fn);
        case PrepStep::Kind::KeepColumns:
            return keep_columns(frame(step.inputs[0]), step.columns);
        case PrepStep::Kind::Rename:
            return rename_column(frame(step.inputs[0]), step.old_name, step.new_name);
        case PrepStep::Kind::Join:
            return join(frame(step.inputs[0]), frame(step.inputs[1]), step.left_on,
                        step.right_on);
        case PrepStep::Kind::UnionAll:
            return union_all(frame(step.inputs[0]), frame(step.inputs[1]));
        case PrepStep::Kind::Explode:
            return explode(frame(step.inputs[0]), step.column);
    }
    throw ValidationError("unhandled prep step kind");
}

}  // namespace

ProvDataFrame run_steps(std::span<const SourceDecl> sources, std::span<const PrepStep> steps,
                        const SourceTables& tables) {
    if (steps.empty()) {
        throw ValidationError("no steps to execute");
    }
    if (tables.size() != sources.size()) {
        throw ValidationError("expected " + std::to_string(sources.size()) +
                              " source tables, got " + std::to_string(tables.size()));
    }
    SourceRegistry registry;
    std::map<std::string, ProvDataFrame> env;
    for (const SourceDecl& decl : sources) {
        auto it = tables.find(decl.name);
        if (it == tables.end()) {
            throw ValidationError("missing source table: " + decl.name);
        }
        if (it->second.schema != decl.schema) {
            throw ValidationError("schema mismatch for source: " + decl.name);
        }
        env.emplace(decl.name,
                    registry.register_source(decl.name, decl.schema, it->second.rows));
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const PrepStep& step = steps[i];
        try {
            if (!env.emplace(step.result, execute_step(step, env)).second) {
                throw ValidationError("duplicate frame name: " + step.result);
            }
        } catch (const ValidationError& e) {
            throw ValidationError("prep step " + std::to_string(i) + " (" + step.kind_name() +
                                  " -> " + step.result + "): " + e.what());
        }
    }
    return env.at(steps.back().result);
}

ProvDataFrame run_prep(const PipelineDef& def, const SourceTables& tables) {
    def.validate();
    return run_steps(def.sources, def.prep, tables);
}

ArtifactBundle capture(const PipelineDef& def, const SourceTables& tables) {
    ProvDataFrame prepared = run_prep(def, tables);

    EncodeResult encoded = [&] {
        try {
            return encode_fit(prepared, def.encoders, def.label_column);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("encode stage: ") + e.what());
        }
    }();

    ModelParams model = [&] {
        try {
            return train_logistic(encoded.features, encoded.labels, def.train_cfg);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("train stage: ") + e.what());
        }
    }();

    std::vector<SourceInfo> sources;
    for (const SourceDecl& decl : def.sources) {
        sources.push_back({decl.name, tables.at(decl.name).rows.size(), decl.schema});
    }

    ArtifactBundle bundle{std::move(sources),          std::move(prepared),
                          std::move(encoded.features), std::move(encoded.labels),
                          std::move(encoded.fitted),   std::move(encoded.matrix_prov),
                          std::move(model),            def.train_cfg};
    validate_bundle(bundle);
    bundle.prov_index = std::make_shared<ProvenanceIndex>(
        ProvenanceIndex::build(bundle.prepared, bundle.sources));
    return bundle;
}

namespace {

Value lowercase_text(std::span<const Value> args) {
    if (args[0].is_null()) return Value::null();
    std::string out = args[0].as_text();
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return Value::text(std::move(out));
}

Value copy_value(std::span<const Value> args) { return args[0]; }

}  // namespace

Schema complaints_customers_schema() {
    return {{"email", ValueKind::Text},
            {"bank", ValueKind::Text},
            {"country", ValueKind::Text},
            {"level", ValueKind::Text}};
}

Schema complaints_mails_schema() {
    return {{"email", ValueKind::Text},
            {"mail_subject", ValueKind::Text},
            {"mail_text", ValueKind::Text},
            {"is_complaint", ValueKind::Int}};
}

PipelineDef complaints_pipeline() {
    PipelineDef def;
    def.sources = {{"customers", complaints_customers_schema()},
                   {"mails", complaints_mails_schema()}};
    def.prep = {
        PrepStep::join_on("joined", "customers", "mails", "email", "email"),
        PrepStep::filter_rows("in_germany", "joined", {"country"},
                              [](std::span<const Value> v) { return v[0].as_text() == "DE"; }),
        PrepStep::filter_rows(
            "premium", "in_germany", {"level"},
            [](std::span<const Value> v) { return v[0].as_text() == "premium"; }),
        PrepStep::derive("with_title", "premium", "title", ValueKind::Text, {"mail_subject"},
                         lowercase_text),
        PrepStep::derive("with_text", "with_title", "text", ValueKind::Text, {"mail_text"},
                         copy_value),
        PrepStep::keep("training_data", "with_text",
                       {"title", "text", "country", "is_complaint"}),
    };
    def.encoders = {
        {"title", EncoderKind::HashEmbed, 50},
        {"title", EncoderKind::TokenCountScaled},
        {"text", EncoderKind::HashEmbed, 50},
        {"country", EncoderKind::OneHot},
    };
    def.label_column = "is_complaint";
    def.train_cfg = TrainConfig{0.1, 50, 1e-4};
    return def;
}

}  // namespace provpipe
