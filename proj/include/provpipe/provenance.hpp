#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace provpipe {

/// Identifier of one row of one registered input source. These are the
/// indeterminates that row provenance polynomials are built from.
struct BaseTupleId {
    std::string source;
    std::size_t row = 0;

    auto operator<=>(const BaseTupleId&) const = default;
};

/// Product of base tuple ids, kept sorted by (source, row). Repeats are
/// allowed: a self-join contributes the same id twice.
class Monomial {
public:
    explicit Monomial(std::vector<BaseTupleId> factors);

    const std::vector<BaseTupleId>& factors() const { return factors_; }
    bool mentions(const BaseTupleId& id) const;

    auto operator<=>(const Monomial&) const = default;

private:
    std::vector<BaseTupleId> factors_;
};

/// Sum of monomials in canonical (sorted, duplicate-free) order, so equality
/// is structural. Every materialized row carries a non-empty polynomial.
class ProvenancePolynomial {
public:
    explicit ProvenancePolynomial(std::vector<Monomial> monomials);

    static ProvenancePolynomial of_base(BaseTupleId id);

    const std::vector<Monomial>& monomials() const { return monomials_; }
    bool mentions(const BaseTupleId& id) const;

    std::string to_string() const;

    /// Parses the text grammar
    ///   polynomial := monomial (" + " monomial)*
    ///   monomial   := factor ("*" factor)*
    ///   factor     := source "#" decimal-index
    /// Non-canonical input is re-canonicalized, so format(parse(s)) is a
    /// fixed point for any accepted s.
    static ProvenancePolynomial parse(const std::string& text);

    bool operator==(const ProvenancePolynomial&) const = default;

private:
    std::vector<Monomial> monomials_;
};

/// Semiring sum: monomial-set union.
ProvenancePolynomial poly_add(const ProvenancePolynomial& a, const ProvenancePolynomial& b);

/// Semiring product: all pairwise monomial concatenations, re-sorted, with
/// duplicate monomials collapsed.
ProvenancePolynomial poly_mul(const ProvenancePolynomial& a, const ProvenancePolynomial& b);

/// True when `name` is a valid source identifier ([A-Za-z0-9_]+).
bool is_valid_source_name(const std::string& name);

}  // namespace provpipe
