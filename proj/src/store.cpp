#include "provpipe/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "provpipe/csv.hpp"
#include "provpipe/errors.hpp"
#include "provpipe/sha256.hpp"

namespace provpipe {

namespace {

using nlohmann::json;

constexpr char kDelimiter = ',';

json schema_to_json(const Schema& schema) {
    json arr = json::array();
    for (const ColumnDef& col : schema) {
        arr.push_back(json::array({col.name, to_string(col.kind)}));
    }
    return arr;
}

Schema schema_from_json(const json& arr) {
    Schema schema;
    for (const json& entry : arr) {
        schema.push_back({entry.at(0).get<std::string>(),
                          value_kind_from_string(entry.at(1).get<std::string>())});
    }
    return schema;
}

json column_provenance_to_json(const ColumnProvenance& prov) {
    json obj = json::object();
    for (const auto& [column, origins] : prov) {
        json arr = json::array();
        for (const ColumnOrigin& origin : origins) {
            arr.push_back(json::array({origin.first, origin.second}));
        }
        obj[column] = std::move(arr);
    }
    return obj;
}

ColumnProvenance column_provenance_from_json(const json& obj) {
    ColumnProvenance prov;
    for (const auto& [column, arr] : obj.items()) {
        std::set<ColumnOrigin>& origins = prov[column];
        for (const json& pair : arr) {
            origins.insert({pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
        }
    }
    return prov;
}

json encoder_to_json(const FittedEncoder& enc) {
    json obj;
    obj["input_column"] = enc.spec.input_column;
    obj["kind"] = to_string(enc.spec.kind);
    switch (enc.spec.kind) {
        case EncoderKind::OneHot:
            obj["categories"] = std::get<OneHotState>(enc.state).categories;
            break;
        case EncoderKind::StandardScale:
        case EncoderKind::TokenCountScaled: {
            const auto& s = std::get<ScaleState>(enc.state);
            obj["mean"] = s.mean;
            obj["std"] = s.std_dev;
            break;
        }
        case EncoderKind::HashEmbed: {
            const auto& s = std::get<HashEmbedState>(enc.state);
            obj["dim"] = s.dim;
            obj["seed"] = s.seed;
            break;
        }
    }
    return obj;
}

FittedEncoder encoder_from_json(const json& obj) {
    EncoderSpec spec;
    spec.input_column = obj.at("input_column").get<std::string>();
    spec.kind = encoder_kind_from_string(obj.at("kind").get<std::string>());
    switch (spec.kind) {
        case EncoderKind::OneHot:
            return FittedEncoder{
                spec, OneHotState{obj.at("categories").get<std::vector<std::string>>()}};
        case EncoderKind::StandardScale:
        case EncoderKind::TokenCountScaled:
            return FittedEncoder{
                spec, ScaleState{obj.at("mean").get<double>(), obj.at("std").get<double>()}};
        case EncoderKind::HashEmbed: {
            spec.dim = obj.at("dim").get<std::size_t>();
            spec.seed = obj.at("seed").get<std::uint64_t>();
            return FittedEncoder{spec, HashEmbedState{spec.dim, spec.seed}};
        }
    }
    throw ValidationError("unhandled encoder kind in manifest");
}

std::string prov_string(const ProvDataFrame& frame) {
    std::string out;
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        out += frame.provenance(i).to_string();
        out += '\n';
    }
    return out;
}

std::string labels_bytes_le(const LabelVector& labels) {
    FeatureMatrix as_matrix = FeatureMatrix::from_dense(labels.size(), 1, labels);
    return as_matrix.to_bytes_le();
}

struct Payload {
    std::string dprep_csv;
    std::string dprep_prov;
    std::string x_bytes;
    std::string y_bytes;
};

Payload make_payload(const ArtifactBundle& bundle) {
    Payload p;
    p.dprep_csv = frame_to_delimited(bundle.prepared, kDelimiter);
    p.dprep_prov = prov_string(bundle.prepared);
    p.x_bytes = bundle.features.to_bytes_le();
    p.y_bytes = labels_bytes_le(bundle.labels);
    return p;
}

json manifest_json(const ArtifactBundle& bundle, const Payload& payload) {
    json m;
    m["format_version"] = kManifestVersion;

    json sources = json::array();
    for (const SourceInfo& s : bundle.sources) {
        sources.push_back({{"name", s.name},
                           {"row_count", s.row_count},
                           {"schema", schema_to_json(s.schema)}});
    }
    m["sources"] = std::move(sources);

    m["prepared"] = {{"schema", schema_to_json(bundle.prepared.schema())},
                     {"row_count", bundle.prepared.n_rows()},
                     {"column_provenance",
                      column_provenance_to_json(bundle.prepared.column_provenance())}};

    m["matrix"] = {{"rows", bundle.features.n_rows()},
                   {"dims", bundle.features.n_dims()},
                   {"dtype", "f64"},
                   {"endianness", "little"}};
    m["labels"] = {{"rows", bundle.labels.size()}};

    json ranges = json::object();
    for (const auto& [column, list] : bundle.matrix_prov) {
        json arr = json::array();
        for (const DimRange& r : list) {
            arr.push_back(json::array({r.begin, r.end}));
        }
        ranges[column] = std::move(arr);
    }
    m["matrix_column_provenance"] = std::move(ranges);

    json encoders = json::array();
    for (const FittedEncoder& enc : bundle.fitted) {
        encoders.push_back(encoder_to_json(enc));
    }
    m["encoders"] = std::move(encoders);

    m["model"] = {{"weights", bundle.model.weights}, {"bias", bundle.model.bias}};
    m["train_config"] = {{"learning_rate", bundle.train_cfg.learning_rate},
                         {"epochs", bundle.train_cfg.epochs},
                         {"l2", bundle.train_cfg.l2},
                         {"init", "zeros"}};

    m["files"] = {{"dprep.csv",
                   {{"bytes", payload.dprep_csv.size()}, {"sha256", sha256_hex(payload.dprep_csv)}}},
                  {"dprep.prov",
                   {{"bytes", payload.dprep_prov.size()},
                    {"sha256", sha256_hex(payload.dprep_prov)}}},
                  {"X.f64le",
                   {{"bytes", payload.x_bytes.size()}, {"sha256", sha256_hex(payload.x_bytes)}}},
                  {"y.f64le",
                   {{"bytes", payload.y_bytes.size()}, {"sha256", sha256_hex(payload.y_bytes)}}}};
    return m;
}

void write_file_synced(const std::filesystem::path& path, std::string_view bytes) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) {
        throw IoError("cannot open for writing: " + path.string());
    }
    std::size_t written = 0;
    while (written < bytes.size()) {
        ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
        if (n < 0) {
            ::close(fd);
            throw IoError("write failed: " + path.string());
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw IoError("fsync failed: " + path.string());
    }
    ::close(fd);
}

void sync_directory(const std::filesystem::path& dir) {
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failure: " + path.string());
    }
    return std::move(buf).str();
}

std::string read_checked(const std::filesystem::path& dir, const std::string& name,
                         const json& files) {
    std::string bytes = read_file(dir / name);
    const json& entry = files.at(name);
    if (bytes.size() != entry.at("bytes").get<std::size_t>()) {
        throw ValidationError("file length mismatch for " + name);
    }
    if (sha256_hex(bytes) != entry.at("sha256").get<std::string>()) {
        throw ValidationError("checksum mismatch for " + name);
    }
    return bytes;
}

ProvDataFrame parse_prepared(const json& prepared, const std::string& csv,
                             const std::string& prov) {
    Schema schema = schema_from_json(prepared.at("schema"));
    ColumnProvenance column_prov = column_provenance_from_json(prepared.at("column_provenance"));
    std::size_t expected_rows = prepared.at("row_count").get<std::size_t>();

    FrameBuilder builder{schema, std::move(column_prov)};
    builder.reserve(expected_rows);

    std::istringstream csv_in(csv);
    std::istringstream prov_in(prov);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(csv_in, line)) {
        ++line_no;
        if (line_no == 1) continue;  // header
        std::vector<std::string> fields = split_fields(line, kDelimiter);
        if (fields.size() != schema.size()) {
            throw ValidationError("dprep.csv:" + std::to_string(line_no) + ": arity mismatch");
        }
        Row row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            row.push_back(parse_cell(fields[c], schema[c].kind));
        }
        std::string prov_line;
        if (!std::getline(prov_in, prov_line)) {
            throw ValidationError("dprep.prov has fewer rows than dprep.csv");
        }
        builder.append(std::move(row), ProvenancePolynomial::parse(prov_line));
    }
    std::string extra;
    if (std::getline(prov_in, extra)) {
        throw ValidationError("dprep.prov has more rows than dprep.csv");
    }
    if (builder.size() != expected_rows) {
        throw ValidationError("dprep.csv row count does not match manifest");
    }
    return std::move(builder).build();
}

}  // namespace

std::string manifest_string(const ArtifactBundle& bundle) {
    return manifest_json(bundle, make_payload(bundle)).dump(2) + "\n";
}

const std::string& bundle_fingerprint(const ArtifactBundle& bundle) {
    if (!bundle.fingerprint_memo) {
        bundle.fingerprint_memo = sha256_hex(manifest_string(bundle));
    }
    return *bundle.fingerprint_memo;
}

SaveSummary save_bundle(const ArtifactBundle& bundle, const std::filesystem::path& directory,
                        bool overwrite) {
    validate_bundle(bundle);
    // Serialize everything up front so nothing is written on failure.
    Payload payload = make_payload(bundle);
    std::string manifest = manifest_json(bundle, payload).dump(2) + "\n";

    std::error_code ec;
    if (std::filesystem::exists(directory, ec)) {
        if (!std::filesystem::is_directory(directory, ec)) {
            throw IoError("not a directory: " + directory.string());
        }
        if (!overwrite && !std::filesystem::is_empty(directory, ec)) {
            throw IoError("directory not empty (pass overwrite to replace): " +
                          directory.string());
        }
    } else {
        if (!std::filesystem::create_directories(directory, ec) && ec) {
            throw IoError("cannot create directory: " + directory.string());
        }
    }

    SaveSummary summary;
    auto put = [&](const std::string& name, std::string_view bytes) {
        write_file_synced(directory / name, bytes);
        summary.files_written += 1;
        summary.bytes_written += bytes.size();
    };
    put("dprep.csv", payload.dprep_csv);
    put("dprep.prov", payload.dprep_prov);
    put("X.f64le", payload.x_bytes);
    put("y.f64le", payload.y_bytes);
    put("manifest.json", manifest);
    sync_directory(directory);

    bundle.fingerprint_memo = sha256_hex(manifest);
    return summary;
}

ArtifactBundle load_bundle(const std::filesystem::path& directory) {
    std::string manifest_bytes = read_file(directory / "manifest.json");
    json m;
    try {
        m = json::parse(manifest_bytes);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest parse error: ") + e.what());
    }

    try {
        if (m.at("format_version").get<std::string>() != kManifestVersion) {
            throw ValidationError("unsupported manifest version: " +
                                  m.at("format_version").get<std::string>());
        }
        const json& files = m.at("files");
        std::string csv = read_checked(directory, "dprep.csv", files);
        std::string prov = read_checked(directory, "dprep.prov", files);
        std::string x_bytes = read_checked(directory, "X.f64le", files);
        std::string y_bytes = read_checked(directory, "y.f64le", files);

        std::vector<SourceInfo> sources;
        for (const json& s : m.at("sources")) {
            sources.push_back({s.at("name").get<std::string>(),
                               s.at("row_count").get<std::size_t>(),
                               schema_from_json(s.at("schema"))});
        }

        ProvDataFrame prepared = parse_prepared(m.at("prepared"), csv, prov);

        std::size_t rows = m.at("matrix").at("rows").get<std::size_t>();
        std::size_t dims = m.at("matrix").at("dims").get<std::size_t>();
        if (m.at("matrix").at("dtype").get<std::string>() != "f64" ||
            m.at("matrix").at("endianness").get<std::string>() != "little") {
            throw ValidationError("unsupported matrix encoding in manifest");
        }
        FeatureMatrix features = FeatureMatrix::from_bytes_le(rows, dims, x_bytes);

        std::size_t label_rows = m.at("labels").at("rows").get<std::size_t>();
        FeatureMatrix y_matrix = FeatureMatrix::from_bytes_le(label_rows, 1, y_bytes);
        LabelVector labels(label_rows);
        for (std::size_t i = 0; i < label_rows; ++i) labels[i] = y_matrix.at(i, 0);

        std::vector<FittedEncoder> fitted;
        for (const json& e : m.at("encoders")) {
            fitted.push_back(encoder_from_json(e));
        }

        MatrixColumnProvenance matrix_prov;
        for (const auto& [column, arr] : m.at("matrix_column_provenance").items()) {
            std::vector<DimRange>& list = matrix_prov[column];
            for (const json& r : arr) {
                list.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
            }
        }

        ModelParams model{m.at("model").at("weights").get<std::vector<double>>(),
                          m.at("model").at("bias").get<double>()};

        const json& tc = m.at("train_config");
        if (tc.at("init").get<std::string>() != "zeros") {
            throw ValidationError("unsupported train init in manifest");
        }
        TrainConfig train_cfg{tc.at("learning_rate").get<double>(),
                              tc.at("epochs").get<std::size_t>(), tc.at("l2").get<double>()};

        ArtifactBundle bundle{std::move(sources), std::move(prepared), std::move(features),
                              std::move(labels),  std::move(fitted),   std::move(matrix_prov),
                              std::move(model),   train_cfg};
        validate_bundle(bundle);
        bundle.fingerprint_memo = sha256_hex(manifest_bytes);
        bundle.prov_index = std::make_shared<ProvenanceIndex>(
            ProvenanceIndex::build(bundle.prepared, bundle.sources));
        return bundle;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
}

}  // namespace provpipe
