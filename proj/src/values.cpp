#include "construe/values.hpp"

#include <cmath>
#include <sstream>

namespace construe {

bool value_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<double>(a))
    return std::get<double>(a) == std::get<double>(b);
  return std::get<std::string>(a) == std::get<std::string>(b);
}

std::string value_to_string(const Value& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  std::ostringstream os;
  os << std::get<double>(v);
  return os.str();
}

bool domain_admits(const ValueDomain& dom, const Value& v) {
  if (std::holds_alternative<Unconstrained>(dom)) return true;
  if (const auto* r = std::get_if<RealRange>(&dom)) {
    if (!std::holds_alternative<double>(v)) return false;
    const double x = std::get<double>(v);
    return r->lo <= x && x <= r->hi;
  }
  const auto& ls = std::get<LabelSet>(dom);
  if (!std::holds_alternative<std::string>(v)) return false;
  return ls.labels.count(std::get<std::string>(v)) > 0;
}

bool domain_included(const ValueDomain& specific, const ValueDomain& general) {
  if (std::holds_alternative<Unconstrained>(general)) return true;
  if (std::holds_alternative<Unconstrained>(specific)) return false;
  if (const auto* rs = std::get_if<RealRange>(&specific)) {
    const auto* rg = std::get_if<RealRange>(&general);
    if (!rg) return false;
    return rg->lo <= rs->lo && rs->hi <= rg->hi;
  }
  const auto& ls = std::get<LabelSet>(specific);
  const auto* lg = std::get_if<LabelSet>(&general);
  if (!lg) return false;
  for (const auto& l : ls.labels)
    if (!lg->labels.count(l)) return false;
  return true;
}

std::string domain_to_string(const ValueDomain& dom) {
  if (std::holds_alternative<Unconstrained>(dom)) return "any";
  if (const auto* r = std::get_if<RealRange>(&dom)) {
    std::ostringstream os;
    os << "[" << r->lo << "," << r->hi << "]";
    if (!r->unit.empty()) os << " " << r->unit;
    return os.str();
  }
  const auto& ls = std::get<LabelSet>(dom);
  std::string out = "{";
  bool first = true;
  for (const auto& l : ls.labels) {
    if (!first) out += ",";
    out += l;
    first = false;
  }
  return out + "}";
}

}  // namespace construe
