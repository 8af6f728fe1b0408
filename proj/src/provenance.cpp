#include "provpipe/provenance.hpp"

#include <algorithm>
#include <charconv>

#include "provpipe/errors.hpp"

namespace provpipe {

Monomial::Monomial(std::vector<BaseTupleId> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) {
        throw ValidationError("monomial must have at least one factor");
    }
    std::sort(factors_.begin(), factors_.end());
}

bool Monomial::mentions(const BaseTupleId& id) const {
    return std::binary_search(factors_.begin(), factors_.end(), id);
}

ProvenancePolynomial::ProvenancePolynomial(std::vector<Monomial> monomials)
    : monomials_(std::move(monomials)) {
    if (monomials_.empty()) {
        throw ValidationError("provenance polynomial must have at least one monomial");
    }
    std::sort(monomials_.begin(), monomials_.end());
    monomials_.erase(std::unique(monomials_.begin(), monomials_.end()), monomials_.end());
}

ProvenancePolynomial ProvenancePolynomial::of_base(BaseTupleId id) {
    return ProvenancePolynomial{{Monomial{{std::move(id)}}}};
}

bool ProvenancePolynomial::mentions(const BaseTupleId& id) const {
    for (const Monomial& m : monomials_) {
        if (m.mentions(id)) return true;
    }
    return false;
}

std::string ProvenancePolynomial::to_string() const {
    std::string out;
    bool first_monomial = true;
    for (const Monomial& m : monomials_) {
        if (!first_monomial) out += " + ";
        first_monomial = false;
        bool first_factor = true;
        for (const BaseTupleId& f : m.factors()) {
            if (!first_factor) out += '*';
            first_factor = false;
            out += f.source;
            out += '#';
            out += std::to_string(f.row);
        }
    }
    return out;
}

namespace {

BaseTupleId parse_factor(const std::string& text, std::size_t begin, std::size_t end) {
    std::size_t hash = text.rfind('#', end == 0 ? 0 : end - 1);
    if (hash == std::string::npos || hash < begin || hash == begin) {
        throw ValidationError("invalid provenance factor: " + text.substr(begin, end - begin));
    }
    std::string source = text.substr(begin, hash - begin);
    if (!is_valid_source_name(source)) {
        throw ValidationError("invalid source name in provenance factor: " + source);
    }
    std::size_t row = 0;
    const char* first = text.data() + hash + 1;
    const char* last = text.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, row);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw ValidationError("invalid row index in provenance factor: " +
                              text.substr(begin, end - begin));
    }
    return BaseTupleId{std::move(source), row};
}

}  // namespace

ProvenancePolynomial ProvenancePolynomial::parse(const std::string& text) {
    std::vector<Monomial> monomials;
    std::size_t pos = 0;
    while (true) {
        std::size_t term_end = text.find(" + ", pos);
        std::size_t end = (term_end == std::string::npos) ? text.size() : term_end;
        std::vector<BaseTupleId> factors;
        std::size_t fpos = pos;
        while (fpos < end) {
            std::size_t star = text.find('*', fpos);
            std::size_t fend = (star == std::string::npos || star >= end) ? end : star;
            factors.push_back(parse_factor(text, fpos, fend));
            fpos = fend + (fend < end ? 1 : 0);
            if (fend < end && fend + 1 == end) {
                throw ValidationError("trailing '*' in provenance monomial");
            }
        }
        if (factors.empty()) {
            throw ValidationError("empty monomial in provenance polynomial: " + text);
        }
        monomials.emplace_back(std::move(factors));
        if (term_end == std::string::npos) break;
        pos = term_end + 3;
    }
    return ProvenancePolynomial{std::move(monomials)};
}

ProvenancePolynomial poly_add(const ProvenancePolynomial& a, const ProvenancePolynomial& b) {
    std::vector<Monomial> merged = a.monomials();
    merged.insert(merged.end(), b.monomials().begin(), b.monomials().end());
    return ProvenancePolynomial{std::move(merged)};
}

ProvenancePolynomial poly_mul(const ProvenancePolynomial& a, const ProvenancePolynomial& b) {
    std::vector<Monomial> products;
    products.reserve(a.monomials().size() * b.monomials().size());
    for (const Monomial& ma : a.monomials()) {
        for (const Monomial& mb : b.monomials()) {
            std::vector<BaseTupleId> factors = ma.factors();
            factors.insert(factors.end(), mb.factors().begin(), mb.factors().end());
            products.emplace_back(std::move(factors));
        }
    }
    return ProvenancePolynomial{std::move(products)};
}

bool is_valid_source_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_';
        if (!ok) return false;
    }
    return true;
}

}  // namespace provpipe
