#pragma once

// `.an` literal syntax for values: none, true, 3, -2.5, nan, "s", [..], (..,),
// {k: v}, ndarray("uint8", (2, 2), [..]), handle(1, "gen").

#include <string>
#include <string_view>

#include "ancheck/value.hpp"

namespace ancheck {

std::string render_literal(const Value& v);

// Throws SyntaxError on malformed text.
Value parse_literal(std::string_view text);

// Shortest round-trip decimal for a finite double that always reads back as a
// float ("2.0", "0.1", "1e-05").
std::string format_double(double d);

}  // namespace ancheck
