#include "provpipe/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "provpipe/errors.hpp"

namespace provpipe {

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

Value parse_cell(const std::string& field, ValueKind kind) {
    if (field.empty()) return Value::null();
    switch (kind) {
        case ValueKind::Bool: {
            if (field == "true") return Value::boolean(true);
            if (field == "false") return Value::boolean(false);
            throw ValidationError("cannot parse bool: '" + field + "'");
        }
        case ValueKind::Int: {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw ValidationError("cannot parse int: '" + field + "'");
            }
            return Value::integer(v);
        }
        case ValueKind::Float: {
            double v = 0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw ValidationError("cannot parse float: '" + field + "'");
            }
            return Value::real(v);
        }
        case ValueKind::Text:
            return Value::text(field);
        case ValueKind::TextList:
            return Value::text_list(split_fields(field, kListSeparator));
    }
    throw ValidationError("unhandled value kind");
}

std::string format_cell(const Value& value, char delimiter) {
    if (value.is_null()) return "";
    auto check_text = [&](const std::string& s) {
        if (s.empty()) {
            throw ValidationError("empty text cannot be represented (\"\" encodes Null)");
        }
        for (char c : s) {
            if (c == delimiter || c == '\n' || c == '\r' || c == kListSeparator) {
                throw ValidationError("text cell contains a delimiter or control byte: " + s);
            }
        }
    };
    if (value.is(ValueKind::Bool)) return value.as_bool() ? "true" : "false";
    if (value.is(ValueKind::Int)) return std::to_string(value.as_int());
    if (value.is(ValueKind::Float)) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value.as_float());
        if (ec != std::errc{}) throw ValidationError("cannot format float");
        return std::string(buf, ptr);
    }
    if (value.is(ValueKind::Text)) {
        check_text(value.as_text());
        return value.as_text();
    }
    const auto& list = value.as_text_list();
    if (list.empty()) {
        throw ValidationError("empty list cannot be represented (\"\" encodes Null)");
    }
    std::string out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        check_text(list[i]);
        if (i > 0) out += kListSeparator;
        out += list[i];
    }
    return out;
}

ProvDataFrame read_delimited(SourceRegistry& registry, const std::string& path,
                             const std::string& name, char delimiter, bool has_header,
                             Schema schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (has_header && line_no == 1) continue;
        line = strip_cr(std::move(line));
        std::vector<std::string> fields = split_fields(line, delimiter);
        if (fields.size() != schema.size()) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(schema.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        Row row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            try {
                row.push_back(parse_cell(fields[c], schema[c].kind));
            } catch (const ValidationError& e) {
                throw ValidationError(path + ":" + std::to_string(line_no) + ": column '" +
                                      schema[c].name + "': " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    if (in.bad()) {
        throw IoError("read failure: " + path);
    }
    return registry.register_source(name, std::move(schema), std::move(rows));
}

std::string frame_to_delimited(const ProvDataFrame& frame, char delimiter) {
    std::string out;
    for (std::size_t c = 0; c < frame.schema().size(); ++c) {
        if (c > 0) out += delimiter;
        out += frame.schema()[c].name;
    }
    out += '\n';
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        const Row& row = frame.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += delimiter;
            out += format_cell(row[c], delimiter);
        }
        out += '\n';
    }
    return out;
}

}  // namespace provpipe
