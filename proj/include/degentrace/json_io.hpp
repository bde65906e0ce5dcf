#pragma once

// JSON forms of jets and symbols.
//   Jet:    {"dim":d,"order":N,"terms":[{"alpha":[...],"c":v},...]}
//   Symbol: {"n":1,"Ec":0.0,"p1":0.0,"components":[{"degree":4,"terms":[...]}]}
// Terms are listed in graded-lex order and explicit zeros are dropped.

#include <string>
#include <vector>

#include "json.hpp"

#include "degentrace/errors.hpp"
#include "degentrace/jets.hpp"
#include "degentrace/symbols.hpp"

namespace degentrace {

using json = nlohmann::json;

inline json jet_terms_to_json(const Jet& a) {
  json terms = json::array();
  const auto& L = a.layout();
  auto c = a.coefficients();
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (c[p] == 0.0) continue;
    const auto& m = L.monomial(p);
    terms.push_back({{"alpha", std::vector<int>(m.begin(), m.begin() + a.dim())}, {"c", c[p]}});
  }
  return terms;
}

inline json jet_to_json(const Jet& a) {
  return {{"dim", a.dim()}, {"order", a.order()}, {"terms", jet_terms_to_json(a)}};
}

inline Jet jet_terms_from_json(const json& terms, int dim, int order) {
  if (!terms.is_array()) throw ConfigError("jet terms must be an array");
  Jet a(dim, order);
  for (const auto& t : terms) {
    if (!t.contains("alpha") || !t.contains("c")) throw ConfigError("jet term needs \"alpha\" and \"c\"");
    const auto alpha = t.at("alpha").get<std::vector<int>>();
    if (static_cast<int>(alpha.size()) != dim)
      throw ConfigError("multi-index length " + std::to_string(alpha.size()) + " does not match dim " +
                        std::to_string(dim));
    MultiIndex m{};
    int deg = 0;
    for (int i = 0; i < dim; ++i) {
      if (alpha[i] < 0) throw ConfigError("multi-index entries must be non-negative");
      m[i] = alpha[i];
      deg += alpha[i];
    }
    if (deg > order) throw ConfigError("term of degree " + std::to_string(deg) + " exceeds order " + std::to_string(order));
    a.add_to(m, t.at("c").get<double>());
  }
  return a;
}

inline Jet jet_from_json(const json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    const int order = j.at("order").get<int>();
    if (dim < 1 || dim > kMaxJetDim) throw ConfigError("jet dim must lie in [1, 4]");
    if (order < 0) throw ConfigError("jet order must be non-negative");
    return jet_terms_from_json(j.at("terms"), dim, order);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed jet: ") + e.what());
  }
}

inline json symbol_to_json(const SymbolModel& s) {
  json comps = json::array();
  for (const auto& [deg, c] : s.components()) comps.push_back({{"degree", deg}, {"terms", jet_terms_to_json(c)}});
  return {{"n", s.n()}, {"Ec", s.critical_energy()}, {"p1", s.p1()}, {"components", comps}};
}

// "order" is optional and defaults to the largest component degree.
inline SymbolModel symbol_from_json(const json& j) {
  try {
    const int n = j.at("n").get<int>();
    if (n < 1 || n > 2) throw ConfigError("symbol n must be 1 or 2");
    const double ec = j.value("Ec", 0.0);
    const double p1 = j.value("p1", 0.0);
    int max_deg = 0;
    for (const auto& c : j.at("components")) max_deg = std::max(max_deg, c.at("degree").get<int>());
    const int order = j.value("order", max_deg);
    std::vector<Jet> comps;
    for (const auto& c : j.at("components")) {
      const int deg = c.at("degree").get<int>();
      Jet a = jet_terms_from_json(c.at("terms"), 2 * n, std::max(order, deg));
      if (!a.is_zero() && homogeneous_part(a, deg) != a)
        throw HypothesisError("H2", "component declared with degree " + std::to_string(deg) + " is not homogeneous of that degree");
      comps.push_back(std::move(a));
    }
    return make_symbol(n, ec, std::move(comps), p1, order);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed symbol: ") + e.what());
  }
}

}  // namespace degentrace
