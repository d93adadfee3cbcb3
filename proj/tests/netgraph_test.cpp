#include <gtest/gtest.h>

#include <random>

#include "linkforge/netgraph.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace lf = linkforge;

using fixture::link;
using fixture::people;
using fixture::random_graph;

TEST(BuildGraph, AggregatesParallelNamings) {
  const auto rs = people(3);
  const auto g = lf::build_graph(rs, {link(0, 1, lf::Domain::money), link(0, 1, lf::Domain::health), link(0, 0)});
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].multiplicity, 2u);
  EXPECT_EQ(lf::domain_list(g.edges[0].domains), "money;health");
  EXPECT_EQ(g.n_undirected_edges(), 1u);
}

TEST(BuildGraph, MutualNamingIsOneUndirectedEdge) {
  const auto rs = people(2);
  const auto g = lf::build_graph(rs, {link(0, 1), link(1, 0)});
  EXPECT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.n_undirected_edges(), 1u);
  EXPECT_DOUBLE_EQ(lf::reciprocity(g), 1.0);
  EXPECT_DOUBLE_EQ(lf::reciprocity(lf::build_graph(rs, {link(0, 1)})), 0.0);
}

TEST(BuildGraph, AdultFilterDropsChildEdges) {
  auto rs = people(3);
  rs[1].is_adult = false;
  rs[2].is_stable = false;
  EXPECT_TRUE(lf::build_graph(rs, {link(0, 1)}, lf::NodeFilter::adult).edges.empty());
  const auto stable = lf::build_graph(rs, {link(0, 2), link(0, 1)}, lf::NodeFilter::stable_adult);
  EXPECT_EQ(stable.n_nodes(), 1u);
  EXPECT_TRUE(stable.edges.empty());
}

TEST(BuildGraph, FilteredGraphIsInducedSubgraph) {
  std::mt19937_64 rng(4);
  auto w = random_graph(25, 0.15, rng);
  for (int i = 0; i < 25; i += 4) w.residents[i].is_adult = false;
  const auto full = lf::build_graph(w.residents, w.links);
  const auto adult = lf::build_graph(w.residents, w.links, lf::NodeFilter::adult);
  std::size_t expected = 0;
  for (const auto& e : full.edges) expected += full.nodes[e.source]->is_adult && full.nodes[e.target]->is_adult;
  EXPECT_EQ(adult.edges.size(), expected);
}

TEST(GraphStats, BugonoAverageDegree) { EXPECT_NEAR(lf::average_degree(5035, 18129), 7.20, 0.005); }

TEST(GraphStats, Triangle) {
  const auto rs = people(3);
  const auto g = lf::build_graph(rs, {link(0, 1), link(1, 2), link(2, 0)});
  const auto s = lf::graph_stats(g);
  EXPECT_DOUBLE_EQ(s.transitivity, 1.0);
  EXPECT_DOUBLE_EQ(s.average_path_length, 1.0);
  EXPECT_DOUBLE_EQ(s.top_cc_coverage, 1.0);
  EXPECT_DOUBLE_EQ(s.average_degree, 2.0);
}

TEST(GraphStats, EmptyGraphIsDefined) {
  const auto rs = people(4);
  const auto s = lf::graph_stats(lf::build_graph(rs, {}));
  EXPECT_EQ(s.transitivity, 0.0);
  EXPECT_EQ(s.reciprocity, 0.0);
  EXPECT_EQ(s.average_path_length, 0.0);
  EXPECT_DOUBLE_EQ(s.top_cc_coverage, 0.25);
  EXPECT_FALSE(s.cross_household_fraction);
}

TEST(GraphStats, MatchExhaustiveOracles) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 30);
    const double p = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    const auto w = random_graph(n, p, rng);
    const auto g = lf::build_graph(w.residents, w.links);
    const auto s = lf::graph_stats(g);
    ASSERT_NEAR(s.transitivity, oracle::transitivity(w.og), 1e-12);
    ASSERT_NEAR(s.reciprocity, oracle::reciprocity(w.og), 1e-12);
    ASSERT_NEAR(s.average_path_length, oracle::average_path_length(w.og), 1e-12);
    ASSERT_NEAR(s.top_cc_coverage, oracle::top_component_share(w.og), 1e-12);
  }
}

TEST(GraphStats, PermutationInvariant) {
  std::mt19937_64 rng(12);
  auto w = random_graph(30, 0.1, rng);
  const auto a = lf::graph_stats(lf::build_graph(w.residents, w.links));
  std::shuffle(w.residents.begin(), w.residents.end(), rng);
  std::shuffle(w.links.begin(), w.links.end(), rng);
  const auto b = lf::graph_stats(lf::build_graph(w.residents, w.links));
  EXPECT_NEAR(a.transitivity, b.transitivity, 1e-12);
  EXPECT_NEAR(a.average_path_length, b.average_path_length, 1e-12);
  EXPECT_EQ(a.n_undirected_edges, b.n_undirected_edges);
  EXPECT_EQ(a.cross_household_fraction, b.cross_household_fraction);
}

TEST(GraphStats, CrossHousehold) {
  const auto rs = people(6);  // households {0,1,2}, {3,4,5}
  const auto g = lf::build_graph(rs, {link(0, 1), link(1, 0), link(2, 3), link(4, 5)});
  EXPECT_DOUBLE_EQ(*lf::cross_household_fraction(g), 1.0 / 3.0);
}

TEST(GraphStats, SampledPathLengthFlagged) {
  std::mt19937_64 rng(2);
  const auto w = random_graph(30, 0.2, rng);
  const auto g = lf::build_graph(w.residents, w.links);
  lf::StatsOptions opt;
  opt.path_sources = 10;
  const auto s = lf::graph_stats(g, opt);
  EXPECT_TRUE(s.path_length_sampled);
  EXPECT_NEAR(s.average_path_length, oracle::average_path_length(w.og), 0.5);
}

TEST(Assortativity, SameCategoryCliques) {
  auto rs = people(8);
  std::vector<lf::Link> links;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      if (a != b && a % 2 == b % 2) links.push_back(link(a, b));
  const auto g = lf::build_graph(rs, links);
  EXPECT_NEAR(*lf::assortativity_discrete(g, lf::discrete_attribute(g, "village")), 1.0, 1e-12);
}

TEST(Assortativity, BalancedBipartite) {
  auto rs = people(8);
  std::vector<lf::Link> links;
  for (int a = 0; a < 8; a += 2)
    for (int b = 1; b < 8; b += 2) links.push_back(link(a, b));
  const auto g = lf::build_graph(rs, links);
  EXPECT_NEAR(*lf::assortativity_discrete(g, lf::discrete_attribute(g, "village")), -1.0, 1e-12);
}

TEST(Assortativity, SingleCategoryIsUndefined) {
  auto rs = people(4);
  for (auto& r : rs) r.village = "Same";
  const auto g = lf::build_graph(rs, {link(0, 1), link(2, 3)});
  EXPECT_FALSE(lf::assortativity_discrete(g, lf::discrete_attribute(g, "village")));
  EXPECT_FALSE(lf::assortativity_discrete(lf::build_graph(rs, {}), lf::discrete_attribute(g, "village")));
}

TEST(Assortativity, MatchesMixingMatrixOracle) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 300; ++rep) {
    auto w = random_graph(20, 0.15, rng);
    std::vector<std::optional<int>> cat(20);
    std::vector<std::optional<double>> val(20);
    for (int i = 0; i < 20; ++i) {
      if (rng() % 5) {
        cat[i] = static_cast<int>(rng() % 3);
        w.residents[i].covariates.education = "level" + std::to_string(*cat[i]);
      }
      if (rng() % 5) {
        w.residents[i].age = static_cast<int>(rng() % 80);
        val[i] = *w.residents[i].age;
      } else {
        w.residents[i].age.reset();
      }
    }
    const auto g = lf::build_graph(w.residents, w.links);
    const auto got = lf::assortativity_discrete(g, lf::discrete_attribute(g, "education"));
    const auto want = oracle::assortativity_discrete(w.og, cat);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) {
      ASSERT_NEAR(*got, *want, 1e-12);
    }
    const auto gc = lf::assortativity_continuous(g, lf::age_attribute(g));
    const auto wc = oracle::pearson_edges(w.og, val);
    ASSERT_EQ(gc.has_value(), wc.has_value());
    if (gc) {
      ASSERT_NEAR(*gc, *wc, 1e-12);
    }
  }
}

TEST(Assortativity, ContinuousEqualAges) {
  auto rs = people(6);
  for (int i = 0; i < 6; ++i) rs[i].age = 20 + 10 * (i / 2);
  const auto g = lf::build_graph(rs, {link(0, 1), link(2, 3), link(4, 5)});
  EXPECT_NEAR(*lf::assortativity_continuous(g, lf::age_attribute(g)), 1.0, 1e-12);
}

TEST(Assortativity, ContinuousHandComputed) {
  // edges (20,30) (30,40) (20,40) (40,50), each counted in both orientations
  auto rs = people(4);
  for (int i = 0; i < 4; ++i) rs[i].age = 20 + 10 * i;
  const auto g = lf::build_graph(rs, {link(0, 1), link(1, 2), link(0, 2), link(2, 3)});
  const double mean = (20 + 30 + 30 + 40 + 20 + 40 + 40 + 50) / 8.0;
  double sxy = 0, sxx = 0;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{20, 30}, {30, 40}, {20, 40}, {40, 50}}) {
    sxy += 2 * (a - mean) * (b - mean);
    sxx += (a - mean) * (a - mean) + (b - mean) * (b - mean);
  }
  EXPECT_NEAR(*lf::assortativity_continuous(g, lf::age_attribute(g)), sxy / sxx, 1e-12);
}

TEST(Assortativity, AffineAndRelabelInvariant) {
  std::mt19937_64 rng(8);
  auto w = random_graph(20, 0.2, rng);
  const auto g = lf::build_graph(w.residents, w.links);
  auto ages = lf::age_attribute(g);
  auto shifted = ages;
  for (auto& a : shifted) *a = 3.5 * *a - 7;
  EXPECT_NEAR(*lf::assortativity_continuous(g, ages), *lf::assortativity_continuous(g, shifted), 1e-12);
  auto v = lf::discrete_attribute(g, "village");
  auto renamed = v;
  for (auto& x : renamed) *x = *x == "East" ? "Z" : "A";
  EXPECT_NEAR(*lf::assortativity_discrete(g, v), *lf::assortativity_discrete(g, renamed), 1e-12);
}

TEST(Assortativity, IndependentAgesNearZero) {
  std::mt19937_64 rng(99);
  const int n = 2000;
  std::vector<lf::ResidentRecord> rs(n);
  for (int i = 0; i < n; ++i) {
    rs[i].resident_id = "P" + std::to_string(i);
    rs[i].age = static_cast<int>(rng() % 80);
  }
  std::vector<lf::Link> links;
  while (links.size() < 10000) {
    int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    if (a != b) links.push_back(link(a, b));
  }
  const auto g = lf::build_graph(rs, links);
  EXPECT_LT(std::abs(*lf::assortativity_continuous(g, lf::age_attribute(g))), 0.05);
}

TEST(Export, GraphmlAndCsv) {
  auto rs = people(3);
  rs[0].resident_id = "P<0>";
  const auto g = lf::build_graph(rs, {{"P<0>", "P1", lf::Domain::food}});
  const auto xml = lf::graphml(g);
  EXPECT_NE(xml.find("P&lt;0&gt;"), std::string::npos);
  EXPECT_NE(xml.find("<data key=\"domains\">food</data>"), std::string::npos);
  const auto edges = lf::edges_table(g);
  ASSERT_EQ(edges.rows.size(), 1u);
  EXPECT_EQ(edges.rows[0], (lf::csv::Row{"P<0>", "P1", "food", "1"}));
  EXPECT_EQ(lf::nodes_table(g).rows.size(), 3u);
}
