#pragma once

// Parsed annotation files.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ancheck/constraint.hpp"
#include "ancheck/require.hpp"

namespace ancheck {

struct FunctionAnnotations {
  std::vector<std::pair<std::string, Constraint>> args;
  std::vector<RequireExpr> preconditions;
  bool excluded = false;
  std::optional<double> timeout_s;
  std::optional<std::vector<LiteralOrGenCall>> cc_example;

  const Constraint* arg(std::string_view name) const;
  std::vector<std::string> arg_names() const;

  bool operator==(const FunctionAnnotations&) const = default;
};

struct AnnotationSpec {
  std::string subject;
  // Both keep file order. Names are unique across the two lists.
  std::vector<std::pair<std::string, FunctionAnnotations>> functions;
  std::vector<std::pair<std::string, FunctionAnnotations>> generators;
  std::vector<std::string> module_tests;

  const FunctionAnnotations* function(std::string_view name) const;
  const FunctionAnnotations* generator(std::string_view name) const;

  bool operator==(const AnnotationSpec&) const = default;
};

// Reads a `.an` file. Throws SyntaxError, ResolutionError, DuplicateError or
// UnknownIdentifier; every error carries a line and column.
AnnotationSpec parse_spec(std::string_view text);

// Canonical text with every field spelled out; parse_spec(render_spec(s)) == s.
std::string render_spec(const AnnotationSpec& spec);

// Canonical `.an` syntax of a single constraint.
std::string render_constraint(const Constraint& c);

// Parses a single constraint term (no generator resolution).
Constraint parse_constraint(std::string_view text);

// Qualified-name helpers for methods: "Class.method".
struct MethodName {
  std::string class_name;
  std::string method;
};
std::optional<MethodName> split_method_name(std::string_view qualified);

// Constructor block name of a class ("C" -> "C.__init__").
std::string constructor_name(std::string_view class_name);

}  // namespace ancheck
