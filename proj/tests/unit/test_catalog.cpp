#include <gtest/gtest.h>

#include "posrate/catalog.hpp"
#include "posrate/distribution.hpp"
#include "posrate/incidence.hpp"

using namespace posrate;

namespace {

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Overflow;
}

}  // namespace

TEST(Catalog, ListsEveryEntry) {
  const auto list = catalog_list();
  std::vector<std::string> names;
  for (const auto& e : list) names.push_back(e.name);
  for (const char* want : {"chain", "geometric_chain", "antichain", "kary_tree", "nonunique", "parallel_chains",
                           "subsets", "boolean", "product", "lex_product"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
}

TEST(Catalog, DefaultsMatchExpectations) {
  for (const auto& item : catalog_defaults()) {
    const auto c = classify(item.poset);
    EXPECT_EQ(c.is_antichain, item.expected.antichain) << item.name;
    EXPECT_EQ(c.is_connected, item.expected.connected) << item.name;
    EXPECT_EQ(c.is_rooted_tree, item.expected.rooted_tree) << item.name;
    EXPECT_EQ(item.labels.size(), item.poset.size()) << item.name;
    if (item.alpha) {
      ASSERT_TRUE(item.pdf.has_value()) << item.name;
      EXPECT_EQ(check_constant_rate(item.poset, *item.pdf), item.alpha) << item.name;
    }
  }
}

TEST(Catalog, RebuildIsDeterministic) {
  const auto a = catalog_build_ref("kary_tree:k=3,depth=3,alpha=2/5");
  const auto b = catalog_build("kary_tree", {{"k", "3"}, {"depth", "3"}, {"alpha", "2/5"}});
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.poset.cover_pairs(), b.poset.cover_pairs());
  EXPECT_EQ(a.pdf->probs(), b.pdf->probs());
  EXPECT_EQ(a.params.at("alpha"), "2/5");
}

TEST(Catalog, RejectsBadParams) {
  EXPECT_EQ(kind_of([] { catalog_build("nope"); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { catalog_build("chain", {{"m", "3"}}); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { catalog_build("chain", {{"n", "zero"}}); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { catalog_build("geometric_chain", {{"alpha", "3/2"}}); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { catalog_build_ref("chain:n"); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { catalog_build("kary_tree", {{"k", "4"}, {"depth", "12"}}); }), ErrorKind::InvalidParams);
}

TEST(Catalog, NonuniquePair) {
  const auto item = catalog_build("nonunique");
  ASSERT_TRUE(item.pdf && item.alt_pdf);
  EXPECT_EQ(item.nonunique_c, q(19, 120));
  EXPECT_EQ(nonunique_c_search(3, 6), q(19, 120));
  EXPECT_NE(item.pdf->probs(), item.alt_pdf->probs());
  for (ElementId x = 0; x < item.poset.size(); ++x) {
    EXPECT_GT((*item.pdf)[x], 0);
    EXPECT_GT((*item.alt_pdf)[x], 0);
  }
  EXPECT_EQ(upf_from_pdf(item.poset, *item.pdf).values, upf_from_pdf(item.poset, *item.alt_pdf).values);
  bool differs = false;
  for (ElementId a = 0; a < item.poset.size() && !differs; ++a) {
    for (ElementId b = a + 1; b < item.poset.size() && !differs; ++b) {
      const std::vector<ElementId> s = {a, b};
      differs = generalized_upf(item.poset, *item.pdf, std::span<const ElementId>(s)) !=
                generalized_upf(item.poset, *item.alt_pdf, std::span<const ElementId>(s));
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Catalog, SubsetsLabelsAndSize) {
  const auto item = catalog_build("subsets");
  EXPECT_EQ(item.poset.size(), 15u);
  EXPECT_EQ(item.labels.front(), "{}");
  EXPECT_NE(std::find(item.labels.begin(), item.labels.end(), "{1,3}"), item.labels.end());
}

TEST(Catalog, ParallelChainsMixture) {
  const auto item = catalog_build("parallel_chains");
  ASSERT_TRUE(item.pdf.has_value());
  EXPECT_FALSE(check_constant_rate(item.poset, *item.pdf).has_value());
  EXPECT_FALSE(classify(item.poset).is_connected);
}

TEST(Catalog, ProductsHaveExpectedSizes) {
  EXPECT_EQ(catalog_build("product").poset.size(), 12u);
  EXPECT_EQ(catalog_build("lex_product").poset.size(), 6u);
  EXPECT_EQ(catalog_build("boolean", {{"M", "4"}}).poset.size(), 16u);
}
