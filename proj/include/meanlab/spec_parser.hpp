// spec_parser.hpp
// Parser for function-spec expressions:
//
//   spec   := NAME | NAME ":" kvlist | COMB "(" spec ("," arg)* ")"
//   NAME   := one | squarefree | divisor | omega_exp | bigomega_exp   (multiplicative)
//           | omega | bigomega                                        (additive)
//   COMB   := twist | coprime | conv | expext | cofactor
//   kvlist := key "=" number ("," key "=" number)*
//
// Combinator signatures:
//   twist(f, tau)   coprime(f, D)   conv(f, g)   expext(f)   cofactor(r, s)
//
// Examples: "divisor:rho=0.5", "twist(one,1.0)", "coprime(one,30030)".

#pragma once
#include <string_view>
#include <variant>

#include "meanlab/funcspec.hpp"

namespace meanlab {

using AnySpec = std::variant<MultSpec, AddSpec>;

// Throws ParseError (with byte offset and kind) on malformed input.
AnySpec parse_spec(std::string_view expr);

// Convenience wrappers; throw ParseError of kind Type on the wrong family.
MultSpec parse_mult(std::string_view expr);
AddSpec parse_add(std::string_view expr);

} // namespace meanlab
