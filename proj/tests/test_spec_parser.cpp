#include <doctest.h>

#include "meanlab/error.hpp"
#include "meanlab/spec_parser.hpp"

using namespace meanlab;

namespace {

ParseErrorKind kind_of(const char* expr) {
    try {
        parse_spec(expr);
    } catch (const ParseError& e) {
        return e.kind();
    }
    FAIL("no ParseError for " << expr);
    return ParseErrorKind::Syntax;
}

} // namespace

TEST_CASE("parse: examples") {
    CHECK(parse_mult("one").canonical() == one().canonical());
    const MultSpec t = parse_mult("twist(one,1.0)");
    CHECK(std::abs(t(2, 1) - std::polar(1.0, -std::log(2.0))) < 1e-15);
    const MultSpec c = parse_mult("coprime(divisor:rho=0.5,30030)");
    CHECK(c(2, 1) * c(13, 1) == cplx(0));
    CHECK(c(17, 1).real() == doctest::Approx(0.5));
    CHECK(std::holds_alternative<AddSpec>(parse_spec("omega")));
    CHECK(parse_mult(" conv( one , squarefree ) ")(2, 2).real() == doctest::Approx(2));
}

TEST_CASE("parse: distinct diagnostics with offsets") {
    CHECK(kind_of("foo") == ParseErrorKind::UnknownName);
    CHECK(kind_of("divisor:rho") == ParseErrorKind::MalformedKvlist);
    CHECK(kind_of("divisor:sigma=1") == ParseErrorKind::MalformedKvlist);
    CHECK(kind_of("divisor:rho=1,rho=2") == ParseErrorKind::MalformedKvlist);
    CHECK(kind_of("twist(one)") == ParseErrorKind::Arity);
    CHECK(kind_of("twist(one,1,2)") == ParseErrorKind::Arity);
    CHECK(kind_of("conv(one,omega)") == ParseErrorKind::Type);
    CHECK(kind_of("") == ParseErrorKind::Syntax);
    CHECK(kind_of("one)") == ParseErrorKind::Syntax);
    try {
        parse_spec("conv(one, bogus)");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 10);
    }
    CHECK_THROWS_AS(parse_mult("omega"), ParseError);
    CHECK_THROWS_AS(parse_add("one"), ParseError);
}

TEST_CASE("property: canonical strings round trip") {
    for (const char* e : {"one", "squarefree", "divisor:rho=0.5", "omega_exp:z=0.25",
                          "bigomega_exp:z=1.5", "twist(one,1)", "coprime(divisor:rho=2,30030)",
                          "conv(one,squarefree)", "expext(divisor:rho=0.3)",
                          "cofactor(one,squarefree)", "omega", "bigomega"}) {
        const AnySpec a = parse_spec(e);
        const std::string c1 = std::visit([](const auto& s) { return s.canonical(); }, a);
        const AnySpec b = parse_spec(c1);
        const std::string c2 = std::visit([](const auto& s) { return s.canonical(); }, b);
        CHECK(c1 == c2);
        if (auto* m = std::get_if<MultSpec>(&a)) {
            const MultSpec& n = std::get<MultSpec>(b);
            for (std::uint64_t p : {2u, 3u, 7u})
                for (int nu = 1; nu <= 4; ++nu) CHECK(std::abs((*m)(p, nu) - n(p, nu)) < 1e-15);
        }
    }
}
