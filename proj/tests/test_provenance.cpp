#include <doctest.h>

#include "provpipe/errors.hpp"
#include "provpipe/provenance.hpp"
#include "support/generators.hpp"

using namespace provpipe;

namespace {

ProvenancePolynomial P(const std::string& text) { return ProvenancePolynomial::parse(text); }

}  // namespace

TEST_CASE("polynomial text grammar round-trips canonically") {
    CHECK(P("c#3*m#7 + c#3*m#9").to_string() == "c#3*m#7 + c#3*m#9");
    // Non-canonical input is re-canonicalized.
    CHECK(P("m#7*c#3").to_string() == "c#3*m#7");
    CHECK(P("a#2 + a#1").to_string() == "a#1 + a#2");
    CHECK(P("a#1 + a#1").to_string() == "a#1");

    SUBCASE("serialize-parse-serialize is a fixed point on random polynomials") {
        testing::Rng rng(11);
        for (int i = 0; i < 200; ++i) {
            ProvenancePolynomial poly = testing::random_polynomial(rng);
            std::string text = poly.to_string();
            CHECK(P(text).to_string() == text);
            CHECK(P(text) == poly);
        }
    }

    SUBCASE("rejects malformed input") {
        CHECK_THROWS_AS(P(""), ValidationError);
        CHECK_THROWS_AS(P("a#"), ValidationError);
        CHECK_THROWS_AS(P("#3"), ValidationError);
        CHECK_THROWS_AS(P("a#1*"), ValidationError);
        CHECK_THROWS_AS(P("a!b#1"), ValidationError);
        CHECK_THROWS_AS(P("a#x"), ValidationError);
    }
}

TEST_CASE("poly_mul distributes pairwise products") {
    CHECK(poly_mul(P("a#1"), P("b#2")).to_string() == "a#1*b#2");
    CHECK(poly_mul(P("a#1 + a#2"), P("b#0")).to_string() == "a#1*b#0 + a#2*b#0");
    // Repeated factors survive (bag-semantics self-join).
    CHECK(poly_mul(P("a#1"), P("a#1")).to_string() == "a#1*a#1");
}

TEST_CASE("poly_add unions monomial sets") {
    CHECK(poly_add(P("a#1"), P("a#2")).to_string() == "a#1 + a#2");
    ProvenancePolynomial p = P("a#1*b#2 + c#0");
    CHECK(poly_add(p, p) == p);
    CHECK(poly_add(P("a#1"), P("b#3")) == poly_add(P("b#3"), P("a#1")));
}

TEST_CASE("semiring laws hold on random polynomials") {
    testing::Rng rng(42);
    for (int i = 0; i < 300; ++i) {
        ProvenancePolynomial a = testing::random_polynomial(rng);
        ProvenancePolynomial b = testing::random_polynomial(rng);
        ProvenancePolynomial c = testing::random_polynomial(rng);

        CHECK(poly_add(a, b) == poly_add(b, a));
        CHECK(poly_add(poly_add(a, b), c) == poly_add(a, poly_add(b, c)));
        CHECK(poly_add(a, a) == a);

        CHECK(poly_mul(a, b) == poly_mul(b, a));
        CHECK(poly_mul(poly_mul(a, b), c) == poly_mul(a, poly_mul(b, c)));

        CHECK(poly_mul(a, poly_add(b, c)) == poly_add(poly_mul(a, b), poly_mul(a, c)));
    }
}

TEST_CASE("mentions finds ids across monomials") {
    ProvenancePolynomial p = P("a#1*b#2 + c#5");
    CHECK(p.mentions({"a", 1}));
    CHECK(p.mentions({"c", 5}));
    CHECK_FALSE(p.mentions({"a", 2}));
    CHECK_FALSE(p.mentions({"d", 1}));
}

TEST_CASE("monomials and polynomials reject empty construction") {
    CHECK_THROWS_AS(Monomial{std::vector<BaseTupleId>{}}, ValidationError);
    CHECK_THROWS_AS(ProvenancePolynomial{std::vector<Monomial>{}}, ValidationError);
}
