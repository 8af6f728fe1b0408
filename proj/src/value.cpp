#include "provpipe/value.hpp"

#include <cmath>
#include <functional>

#include "provpipe/errors.hpp"

namespace provpipe {

std::string to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::Bool: return "bool";
        case ValueKind::Int: return "int";
        case ValueKind::Float: return "float";
        case ValueKind::Text: return "text";
        case ValueKind::TextList: return "text_list";
    }
    return "unknown";
}

ValueKind value_kind_from_string(const std::string& name) {
    if (name == "bool") return ValueKind::Bool;
    if (name == "int") return ValueKind::Int;
    if (name == "float") return ValueKind::Float;
    if (name == "text") return ValueKind::Text;
    if (name == "text_list") return ValueKind::TextList;
    throw ValidationError("unknown value kind: " + name);
}

Value Value::real(double v) {
    if (!std::isfinite(v)) {
        throw ValidationError("non-finite float rejected");
    }
    return Value{Storage{v}};
}

bool Value::is(ValueKind kind) const {
    switch (kind) {
        case ValueKind::Bool: return std::holds_alternative<bool>(data_);
        case ValueKind::Int: return std::holds_alternative<std::int64_t>(data_);
        case ValueKind::Float: return std::holds_alternative<double>(data_);
        case ValueKind::Text: return std::holds_alternative<std::string>(data_);
        case ValueKind::TextList: return std::holds_alternative<TextListType>(data_);
    }
    return false;
}

namespace {

[[noreturn]] void wrong_kind(const char* wanted) {
    throw ValidationError(std::string("value is not of kind ") + wanted);
}

}  // namespace

bool Value::as_bool() const {
    if (const bool* v = std::get_if<bool>(&data_)) return *v;
    wrong_kind("bool");
}

std::int64_t Value::as_int() const {
    if (const std::int64_t* v = std::get_if<std::int64_t>(&data_)) return *v;
    wrong_kind("int");
}

double Value::as_float() const {
    if (const double* v = std::get_if<double>(&data_)) return *v;
    wrong_kind("float");
}

const std::string& Value::as_text() const {
    if (const std::string* v = std::get_if<std::string>(&data_)) return *v;
    wrong_kind("text");
}

const Value::TextListType& Value::as_text_list() const {
    if (const TextListType* v = std::get_if<TextListType>(&data_)) return *v;
    wrong_kind("text_list");
}

double Value::as_number() const {
    if (const double* v = std::get_if<double>(&data_)) return *v;
    if (const std::int64_t* v = std::get_if<std::int64_t>(&data_)) {
        return static_cast<double>(*v);
    }
    wrong_kind("int or float");
}

std::size_t Value::hash() const {
    auto mix = [](std::size_t h, std::size_t v) {
        return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    };
    std::size_t tag = data_.index();
    switch (data_.index()) {
        case 0: return mix(tag, 0);
        case 1: return mix(tag, std::get<bool>(data_) ? 1 : 2);
        case 2: return mix(tag, std::hash<std::int64_t>{}(std::get<std::int64_t>(data_)));
        case 3: return mix(tag, std::hash<double>{}(std::get<double>(data_)));
        case 4: return mix(tag, std::hash<std::string>{}(std::get<std::string>(data_)));
        case 5: {
            std::size_t h = tag;
            for (const std::string& s : std::get<TextListType>(data_)) {
                h = mix(h, std::hash<std::string>{}(s));
            }
            return h;
        }
    }
    return tag;
}

}  // namespace provpipe
