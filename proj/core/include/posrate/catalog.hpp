#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "posrate/distribution.hpp"
#include "posrate/poset.hpp"
#include "posrate/rational.hpp"

namespace posrate {

/// Builder parameters as text, e.g. {"k": "3", "alpha": "1/2"}.
using CatalogParams = std::map<std::string, std::string>;

struct CatalogExpectation {
  bool antichain = false;
  bool connected = false;
  bool rooted_tree = false;
};

struct CatalogEntryInfo {
  std::string name;
  unsigned version = 1;
  std::string description;
  CatalogParams defaults;
};

/// A built entry. `pdf` is the bundled law when the entry has one;
/// `alt_pdf` is the second member of a pair (nonunique only).
struct CatalogItem {
  std::string name;
  unsigned version = 1;
  CatalogParams params;  // resolved, defaults filled in
  Poset poset;
  std::vector<std::string> labels;
  CatalogExpectation expected;
  std::optional<Pdf<Rational>> pdf;
  std::optional<Pdf<Rational>> alt_pdf;
  std::optional<Rational> alpha;  // constant rate of `pdf`, when it has one
  std::optional<Rational> nonunique_c;
};

std::vector<CatalogEntryInfo> catalog_list();

/// Throws InvalidParams for unknown names, unknown keys or invalid values.
CatalogItem catalog_build(std::string_view name, const CatalogParams& params = {});

/// "name" or "name:key=value,key=value".
CatalogItem catalog_build_ref(std::string_view ref);

/// Every entry at its defaults.
std::vector<CatalogItem> catalog_defaults();

/// Two parallel geometric chains of `depth + 1` elements each: weight p on
/// the first (rate alpha), 1 - p on the second (rate beta). p = 1 gives a
/// single chain.
struct MixtureCounterexample {
  Poset poset;
  Pdf<Rational> pdf;
};

MixtureCounterexample mixture_counterexample(const Rational& p, const Rational& alpha, const Rational& beta,
                                             unsigned depth);

/// Largest c = j/120 (j = 1..120) keeping the nonunique pair strictly
/// positive, tail included. Empty if none.
std::optional<Rational> nonunique_c_search(unsigned k, unsigned depth);

}  // namespace posrate
