#ifndef CONSTRUE_VALUES_HPP
#define CONSTRUE_VALUES_HPP

#include <set>
#include <string>
#include <variant>

namespace construe {

// Attribute values are either numeric (with the unit fixed by the
// observable's declaration) or symbolic labels.
using Value = std::variant<double, std::string>;

bool value_equal(const Value& a, const Value& b);
std::string value_to_string(const Value& v);

// Declared domain of an attribute: a closed real interval with a unit, a
// finite label set, or unconstrained.
struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
  std::string unit;  // may be empty
  bool operator==(const RealRange&) const = default;
};

struct LabelSet {
  std::set<std::string> labels;
  bool operator==(const LabelSet&) const = default;
};

struct Unconstrained {
  bool operator==(const Unconstrained&) const = default;
};

using ValueDomain = std::variant<RealRange, LabelSet, Unconstrained>;

bool domain_admits(const ValueDomain& dom, const Value& v);

// Inclusion check used by the generalization relation: every value admitted
// by `specific` must be admitted by `general`.
bool domain_included(const ValueDomain& specific, const ValueDomain& general);

std::string domain_to_string(const ValueDomain& dom);

}  // namespace construe

#endif
