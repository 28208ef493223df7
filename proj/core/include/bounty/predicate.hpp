#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bounty/dataset.hpp"
#include "bounty/loss.hpp"

namespace bounty {

enum class CompareOp { eq, ne, lt, le, gt, ge };

std::string_view to_string(CompareOp op);

// A predicate constant: a number for numeric features, a string for
// categorical ones.
using Literal = std::variant<double, std::string>;

// Group indicator g : X -> {0,1} as an expression tree. Feature references
// are by name; validation against a schema happens in validate_predicate.
class Predicate {
 public:
  enum class Kind { always_true, compare, member_of, all_of, any_of, negation };

  static Predicate always_true();
  static Predicate compare(std::string feature, CompareOp op, Literal value);
  // The value set is stored sorted (numbers before strings) without duplicates.
  static Predicate member_of(std::string feature, std::vector<Literal> values);
  static Predicate all_of(std::vector<Predicate> children);
  static Predicate any_of(std::vector<Predicate> children);
  static Predicate negation(Predicate child);

  Kind kind() const { return kind_; }
  const std::string& feature() const { return feature_; }
  CompareOp op() const { return op_; }
  const Literal& value() const { return value_; }
  const std::vector<Literal>& values() const { return values_; }
  const std::vector<Predicate>& children() const { return children_; }

  std::size_t depth() const;
  std::size_t node_count() const;

  bool operator==(const Predicate& other) const;

 private:
  Kind kind_ = Kind::always_true;
  std::string feature_;
  CompareOp op_ = CompareOp::eq;
  Literal value_;
  std::vector<Literal> values_;
  std::vector<Predicate> children_;
};

// Parses the infix surface syntax (see docs/predicate-syntax.md). Throws
// Error(Errc::syntax_error) with the 1-based column of the problem, or
// Errc::limit_exceeded when nesting exceeds `max_depth`.
Predicate parse_predicate(std::string_view text, std::size_t max_depth = 32);

// Canonical surface text. parse_predicate(to_text(p)) == p.
std::string to_text(const Predicate& predicate);

// JSON expression-tree form, accepted on the wire as an alternative to text.
nlohmann::json to_json(const Predicate& predicate);
Predicate predicate_from_json(const nlohmann::json& doc, std::size_t max_depth = 32);

// Row-wise two-valued evaluation. The predicate must already be valid
// against the dataset's schema.
GroupMask eval_predicate(const Predicate& predicate, const Dataset& dataset);

}  // namespace bounty
