#include <gtest/gtest.h>

#include "evidentia/enumeration.hpp"
#include "evidentia/junction_tree.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace evidentia;

namespace {

StateSpace binary(const NodeId& v) { return {v, {"true", "false"}, false}; }

// 40 -> 41 with prior 0.5 and the testimony table (0.9, 0.2).
DiscreteBayesNet testimony() {
  return DiscreteBayesNet(Dag({"40", "41"}, {{"40", "41"}}), {binary("40"), binary("41")},
                          {{"40", {}, {{0.5, 0.5}}}, {"41", {"40"}, {{0.9, 0.1}, {0.2, 0.8}}}});
}

DiscreteBayesNet chain_net() {
  return DiscreteBayesNet(Dag({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}), {binary("A"), binary("B"), binary("C")},
                          {{"A", {}, {{0.3, 0.7}}},
                           {"B", {"A"}, {{0.8, 0.2}, {0.25, 0.75}}},
                           {"C", {"B"}, {{0.6, 0.4}, {0.1, 0.9}}}});
}

DiscreteBayesNet collider_net() {
  return DiscreteBayesNet(Dag({"A", "B", "C"}, {{"A", "C"}, {"B", "C"}}), {binary("A"), binary("B"), binary("C")},
                          {{"A", {}, {{0.3, 0.7}}},
                           {"B", {}, {{0.6, 0.4}}},
                           {"C", {"A", "B"}, {{0.9, 0.1}, {0.5, 0.5}, {0.4, 0.6}, {0.05, 0.95}}}});
}

bool has_code(const ValidationReport& r, const std::string& code) {
  for (const auto& f : r)
    if (f.code == code) return true;
  return false;
}

void expect_matches_oracle(const DiscreteBayesNet& net, const EvidenceSet& ev, double tol) {
  auto truth = oracle::posterior(net, ev);
  if (truth.evidence_probability < kImpossibleEvidenceMass) {
    EXPECT_THROW(posterior_marginals(net, ev), ImpossibleEvidence);
    return;
  }
  auto r = posterior_marginals(net, ev);
  EXPECT_NEAR(r.evidence_probability, truth.evidence_probability, tol);
  for (const auto& [v, m] : truth.marginals)
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(r.marginals.at(v)[i], m[i], tol) << v;
}

}  // namespace

TEST(Validate, WellFormedIsEmpty) {
  EXPECT_TRUE(validate(testimony()).empty());
  EXPECT_TRUE(validate(collider_net()).empty());
}

TEST(Validate, Findings) {
  DiscreteBayesNet unnormalized(Dag({"A"}), {binary("A")}, {{"A", {}, {{0.5, 0.3}}}});
  auto r = validate(unnormalized);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].code, "unnormalized-row");

  DiscreteBayesNet mismatch(Dag({"A", "B"}, {{"A", "B"}}), {binary("A"), binary("B")},
                            {{"A", {}, {{0.5, 0.5}}}, {"B", {}, {{0.5, 0.5}}}});
  EXPECT_TRUE(has_code(validate(mismatch), "parent-mismatch"));

  DiscreteBayesNet orphan(Dag({"A"}), {binary("A"), binary("Z")}, {{"A", {}, {{0.5, 0.5}}}, {"Z", {}, {{1, 0}}}});
  EXPECT_TRUE(has_code(validate(orphan), "orphan-cpt"));

  DiscreteBayesNet rows(Dag({"A", "B"}, {{"A", "B"}}), {binary("A"), binary("B")},
                        {{"A", {}, {{0.5, 0.5}}}, {"B", {"A"}, {{0.5, 0.5}}}});
  EXPECT_TRUE(has_code(validate(rows), "dimension-mismatch"));

  DiscreteBayesNet single(Dag({"A"}), {{"A", {"only"}, false}}, {{"A", {}, {{1.0}}}});
  EXPECT_TRUE(has_code(validate(single), "too-few-states"));
  DiscreteBayesNet constant(Dag({"A"}), {{"A", {"only"}, true}}, {{"A", {}, {{1.0}}}});
  EXPECT_TRUE(validate(constant).empty());
}

TEST(Validate, NearNormalizedRowsAreRenormalized) {
  DiscreteBayesNet net(Dag({"A"}), {binary("A")}, {{"A", {}, {{0.3, 0.7000004}}}});
  EXPECT_TRUE(validate(net).empty());
  EXPECT_NEAR(net.cpt("A").rows[0][0] + net.cpt("A").rows[0][1], 1.0, 1e-15);
}

TEST(JointProbability, Examples) {
  EXPECT_NEAR(joint_probability(testimony(), {{"40", "true"}, {"41", "true"}}), 0.45, 1e-15);
  EXPECT_THROW(joint_probability(testimony(), {{"40", "true"}}), IncompleteAssignment);
  EXPECT_THROW(joint_probability(testimony(), {{"40", "true"}, {"41", "maybe"}}), UnknownState);
}

TEST(JointProbability, ChainRuleAndNormalization) {
  gen::Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto net = gen::net(rng, 5, 3, 512);
    double total = 0.0;
    oracle::for_each_assignment(net, [&](const std::map<NodeId, std::size_t>& x) {
      std::map<NodeId, std::string> named;
      for (const auto& [v, s] : x) named[v] = net.space(v).states[s];
      double p = joint_probability(net, named);
      double chained = 1.0;
      for (const auto& v : topological_order(net.dag())) {
        const Cpt& c = net.cpt(v);
        std::vector<std::size_t> ps;
        for (const auto& pa : c.parents) ps.push_back(x.at(pa));
        chained *= c.rows[net.row_index(v, ps)][x.at(v)];
      }
      EXPECT_NEAR(p, oracle::joint(net, x), 1e-15);
      EXPECT_NEAR(p, chained, 1e-12);
      total += p;
    });
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(EnumerateJoint, Examples) {
  DiscreteBayesNet one(Dag({"A"}), {binary("A")}, {{"A", {}, {{0.3, 0.7}}}});
  auto t = enumerate_joint(one);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t.probability(0), 0.3);
  EXPECT_DOUBLE_EQ(t.probability(1), 0.7);

  NodeSet ids;
  std::vector<StateSpace> spaces;
  std::vector<Cpt> cpts;
  for (int i = 0; i < 12; ++i) {
    NodeId v = "N" + std::to_string(i);
    ids.insert(v);
    spaces.push_back(binary(v));
    cpts.push_back({v, {}, {{0.1 + 0.05 * i, 0.9 - 0.05 * i}}});
  }
  auto big = enumerate_joint(DiscreteBayesNet(Dag(ids), spaces, cpts));
  EXPECT_EQ(big.size(), 4096u);
  double sum = 0.0;
  for (double p : big.probabilities()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_THROW(enumerate_joint(DiscreteBayesNet(Dag(ids), spaces, cpts), 1000), TooLarge);
}

TEST(JunctionTree, ChainAndCollider) {
  CliqueTree chain(chain_net());
  auto cliques = chain.cliques();
  ASSERT_EQ(cliques.size(), 2u);
  std::set<NodeSet> got(cliques.begin(), cliques.end());
  EXPECT_EQ(got, (std::set<NodeSet>{{"A", "B"}, {"B", "C"}}));
  ASSERT_EQ(chain.separators().size(), 1u);
  EXPECT_EQ(std::get<2>(chain.separators()[0]), (NodeSet{"B"}));

  CliqueTree collider(collider_net());
  ASSERT_EQ(collider.clique_count(), 1u);
  EXPECT_EQ(collider.cliques()[0], (NodeSet{"A", "B", "C"}));
}

TEST(JunctionTree, RunningIntersectionAndFamilies) {
  gen::Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    auto net = gen::net(rng, 8, 2, 1 << 12);
    CliqueTree jt(net);
    auto cliques = jt.cliques();
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (const auto& [a, b, _] : jt.separators()) links.emplace_back(a, b);
    EXPECT_EQ(links.size() + 1, cliques.size());
    EXPECT_TRUE(oracle::running_intersection(cliques, links));
    for (const auto& v : net.dag().nodes()) {
      NodeSet family = net.dag().parents(v);
      family.insert(v);
      bool contained = false;
      for (const auto& c : cliques)
        contained = contained || std::includes(c.begin(), c.end(), family.begin(), family.end());
      EXPECT_TRUE(contained) << v;
    }
  }
}

TEST(Posterior, TestimonyFixture) {
  auto r = posterior_marginals(testimony(), {{{"41", "true"}}, {}});
  EXPECT_NEAR(r.marginals["40"][0], 0.45 / 0.55, 1e-9);
  EXPECT_NEAR(r.evidence_probability, 0.55, 1e-12);
  EXPECT_NEAR(probability_of_evidence(testimony(), {{{"41", "true"}}, {}}), 0.55, 1e-12);
}

TEST(Posterior, EmptyEvidenceGivesPriors) {
  auto net = chain_net();
  auto r = posterior_marginals(net, {});
  EXPECT_DOUBLE_EQ(r.evidence_probability, 1.0);
  EXPECT_DOUBLE_EQ(probability_of_evidence(net, {}), 1.0);
  auto truth = oracle::posterior(net, {});
  for (const auto& [v, m] : truth.marginals)
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(r.marginals[v][i], m[i], 1e-12);
}

TEST(Posterior, ContradictingDeterministicTableIsImpossible) {
  DiscreteBayesNet det(Dag({"A", "B"}, {{"A", "B"}}), {binary("A"), binary("B")},
                       {{"A", {}, {{1.0, 0.0}}}, {"B", {"A"}, {{1.0, 0.0}, {0.0, 1.0}}}});
  EXPECT_THROW(posterior_marginals(det, {{{"B", "false"}}, {}}), ImpossibleEvidence);
  EXPECT_THROW(probability_of_evidence(det, {{{"A", "false"}}, {}}), ImpossibleEvidence);
}

TEST(Posterior, HardEvidenceOnAllNodesIsJoint) {
  auto net = collider_net();
  EvidenceSet ev{{{"A", "true"}, {"B", "false"}, {"C", "true"}}, {}};
  EXPECT_NEAR(probability_of_evidence(net, ev), joint_probability(net, ev.hard), 1e-15);
}

TEST(Posterior, RejectsBadEvidence) {
  EXPECT_THROW(posterior_marginals(testimony(), {{{"41", "maybe"}}, {}}), UnknownState);
  EXPECT_THROW(posterior_marginals(testimony(), {{{"99", "true"}}, {}}), UnknownNode);
  EXPECT_THROW(posterior_marginals(testimony(), {{}, {{"41", {1.0, 1.0, 1.0}}}}), InvalidWeights);
}

TEST(Posterior, MatchesOracleOnRandomNets) {
  gen::Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    auto net = gen::net(rng, 7, 3, 2048, 0.1);
    for (int k = 0; k < 4; ++k) expect_matches_oracle(net, gen::evidence(rng, net), 1e-9);
  }
}

TEST(Posterior, MarginalsSumToOne) {
  gen::Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = gen::net(rng, 7, 3, 2048);
    auto r = posterior_marginals(net, gen::evidence(rng, net));
    for (const auto& [v, m] : r.marginals) {
      double s = 0.0;
      for (double p : m) s += p;
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(SoftEvidence, Examples) {
  DiscreteBayesNet one(Dag({"40"}), {binary("40")}, {{"40", {}, {{0.5, 0.5}}}});
  auto r = posterior_marginals(one, apply_soft_evidence({}, "40", {0.9, 0.2}));
  EXPECT_NEAR(r.marginals["40"][0], 0.45 / 0.55, 1e-12);

  auto net = chain_net();
  auto flat = posterior_marginals(net, apply_soft_evidence({}, "B", {0.4, 0.4}));
  auto prior = posterior_marginals(net, {});
  for (const auto& [v, m] : prior.marginals)
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(flat.marginals[v][i], m[i], 1e-12);

  auto degenerate = posterior_marginals(net, apply_soft_evidence({}, "B", {1.0, 0.0}));
  auto hard = posterior_marginals(net, {{{"B", "true"}}, {}});
  for (const auto& [v, m] : hard.marginals)
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(degenerate.marginals[v][i], m[i], 1e-12);
}

TEST(SoftEvidence, Errors) {
  EXPECT_THROW(apply_soft_evidence({{{"B", "true"}}, {}}, "B", {1, 1}), ConflictingEvidence);
  EXPECT_THROW(apply_soft_evidence({}, "B", {0, 0}), InvalidWeights);
  EXPECT_THROW(apply_soft_evidence({}, "B", {-1, 2}), InvalidWeights);
}

// Soft evidence equals hard evidence on an added child whose table column is
// the weight vector.
TEST(SoftEvidence, EqualsDummyChild) {
  gen::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = gen::net(rng, 5, 3, 512);
    NodeId target = *net.dag().nodes().begin();
    std::size_t k = net.cardinality(target);
    auto w = gen::distribution(rng, k);
    double top = *std::max_element(w.begin(), w.end());
    for (auto& x : w) x /= top;

    Dag g = net.dag().add_node("dummy").add_edge(target, "dummy");
    std::vector<StateSpace> spaces;
    std::vector<Cpt> cpts;
    for (const auto& [_, s] : net.spaces()) spaces.push_back(s);
    for (const auto& [_, c] : net.cpts()) cpts.push_back(c);
    spaces.push_back(binary("dummy"));
    Cpt dummy{"dummy", {target}, {}};
    for (double x : w) dummy.rows.push_back({x, 1.0 - x});
    cpts.push_back(dummy);
    DiscreteBayesNet augmented(g, spaces, cpts);

    auto soft = posterior_marginals(net, apply_soft_evidence({}, target, w));
    auto hard = posterior_marginals(augmented, {{{"dummy", "true"}}, {}});
    for (const auto& [v, m] : soft.marginals)
      for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(hard.marginals[v][i], m[i], 1e-12);
  }
}

TEST(NumericCi, Examples) {
  DiscreteBayesNet apart(Dag({"A", "B"}), {binary("A"), binary("B")},
                         {{"A", {}, {{0.3, 0.7}}}, {"B", {}, {{0.6, 0.4}}}});
  EXPECT_TRUE(numeric_ci_check(apart, {{"A"}, {"B"}, {}}, 1e-9));
  EXPECT_TRUE(numeric_ci_check(chain_net(), {{"A"}, {"C"}, {"B"}}, 1e-9));
  EXPECT_FALSE(numeric_ci_check(chain_net(), {{"A"}, {"C"}, {}}, 1e-9));
  EXPECT_FALSE(numeric_ci_check(collider_net(), {{"A"}, {"B"}, {"C"}}, 1e-9));
  EXPECT_TRUE(numeric_ci_check(collider_net(), {{"A"}, {"B"}, {}}, 1e-9));
}

TEST(ImpossibleEvidence, RaisedIffOracleMassIsZero) {
  gen::Rng rng(37);
  int impossible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto net = gen::net(rng, 5, 2, 256, 0.4);
    auto ev = gen::evidence(rng, net);
    auto truth = oracle::posterior(net, ev);
    if (truth.evidence_probability < kImpossibleEvidenceMass) {
      ++impossible;
      EXPECT_THROW(probability_of_evidence(net, ev), ImpossibleEvidence);
    } else {
      EXPECT_NO_THROW(probability_of_evidence(net, ev));
    }
  }
  EXPECT_GT(impossible, 0);
}
