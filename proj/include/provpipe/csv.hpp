#pragma once

#include <string>

#include "provpipe/frame.hpp"

namespace provpipe {

/// Separator between TextList elements inside one delimited field.
inline constexpr char kListSeparator = '\x1f';

/// Reads a delimited UTF-8 text file and registers it as a source. Fields
/// are split on the single-character delimiter with no quoting; "" parses to
/// Null. Row ordinal = record order in the file, excluding the header.
ProvDataFrame read_delimited(SourceRegistry& registry, const std::string& path,
                             const std::string& name, char delimiter, bool has_header,
                             Schema schema);

/// Formats one cell for the delimited format (Null -> "", lists joined by
/// kListSeparator). Throws ValidationError for cells the format cannot
/// represent losslessly: text containing the delimiter, CR, LF or the list
/// separator, empty text, and empty lists or list elements.
std::string format_cell(const Value& value, char delimiter);

/// Parses one field according to the declared kind ("" -> Null).
Value parse_cell(const std::string& field, ValueKind kind);

/// Splits one record on the delimiter (no quoting).
std::vector<std::string> split_fields(const std::string& line, char delimiter);

/// Serializes a frame's data (no provenance) as delimited text with a header
/// row. Inverse of parsing every record with the frame's schema.
std::string frame_to_delimited(const ProvDataFrame& frame, char delimiter);

}  // namespace provpipe
