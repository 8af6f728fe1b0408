#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace provpipe {

enum class ValueKind { Bool, Int, Float, Text, TextList };

std::string to_string(ValueKind kind);
ValueKind value_kind_from_string(const std::string& name);

/// Tagged scalar cell. Null is a value, not a kind: a column of any kind may
/// hold Null. Floats are checked for finiteness at construction, so frames
/// never store NaN or Inf.
class Value {
public:
    using TextListType = std::vector<std::string>;

    Value() : data_(std::monostate{}) {}

    static Value null() { return Value{}; }
    static Value boolean(bool v) { return Value{Storage{v}}; }
    static Value integer(std::int64_t v) { return Value{Storage{v}}; }
    static Value real(double v);  // throws ValidationError on NaN/Inf
    static Value text(std::string v) { return Value{Storage{std::move(v)}}; }
    static Value text_list(TextListType v) { return Value{Storage{std::move(v)}}; }

    bool is_null() const { return std::holds_alternative<std::monostate>(data_); }
    bool is(ValueKind kind) const;

    // Accessors throw ValidationError when the cell holds a different kind.
    bool as_bool() const;
    std::int64_t as_int() const;
    double as_float() const;
    const std::string& as_text() const;
    const TextListType& as_text_list() const;

    /// Numeric view of Int/Float cells (encoder input).
    double as_number() const;

    /// Null conforms to every kind.
    bool conforms_to(ValueKind kind) const { return is_null() || is(kind); }

    bool operator==(const Value& other) const { return data_ == other.data_; }

    std::size_t hash() const;

private:
    using Storage =
        std::variant<std::monostate, bool, std::int64_t, double, std::string, TextListType>;

    explicit Value(Storage s) : data_(std::move(s)) {}

    Storage data_;
};

struct ValueHash {
    std::size_t operator()(const Value& v) const { return v.hash(); }
};

}  // namespace provpipe
