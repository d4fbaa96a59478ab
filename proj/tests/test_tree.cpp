#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "robsched/errors.hpp"
#include "robsched/tree.hpp"

using namespace robsched;

namespace {

int find_leaf(const ScenarioTree& t, const std::vector<int>& started,
              const std::vector<int>& finished) {
  for (int id : t.leaves()) {
    const TreeNode& nd = t.node(id);
    if (nd.started == started && nd.finished == finished) return id;
  }
  return -1;
}

}  // namespace

TEST_CASE("closed-form state counts") {
  StateCounts c32 = count_states(3, 2);
  CHECK(c32.scheduler_nodes == 1);
  CHECK(c32.leaves == 12);
  StateCounts c42 = count_states(4, 2);
  CHECK(c42.scheduler_nodes == 13);
  CHECK(c42.leaves == 96);
  StateCounts c52 = count_states(5, 2);
  CHECK(c52.scheduler_nodes == 141);
  CHECK(c52.leaves == 960);
  StateCounts c53 = count_states(5, 3);
  CHECK(c53.scheduler_nodes == 31);
  CHECK(c53.leaves == 1080);
  CHECK_THROWS_AS(count_states(2, 2), InvalidInputError);
  CHECK_THROWS_AS(count_states(3, 1), InvalidInputError);
}

TEST_CASE("built trees match the closed-form counts") {
  const int shapes[][2] = {{3, 2}, {4, 2}, {5, 2}, {5, 3}, {6, 2}, {6, 3}};
  for (auto [n, m] : shapes) {
    CAPTURE(n);
    CAPTURE(m);
    ScenarioTree t = ScenarioTree::build(State::initial(n, m));
    StateCounts c = count_states(n, m);
    CHECK(t.scheduler_node_count() == c.scheduler_nodes);
    CHECK(t.leaf_count() == c.leaves);
  }
}

TEST_CASE("child ordering and node kinds on the three-task tree") {
  ScenarioTree t = ScenarioTree::build(State::initial(3, 2));
  const TreeNode& root = t.node(t.root());
  CHECK(root.kind == NodeKind::scheduler);
  REQUIRE(root.children.size() == 3);
  CHECK(t.batch_into(root.children[0]) == std::vector<int>{0, 1});
  CHECK(t.batch_into(root.children[1]) == std::vector<int>{0, 2});
  CHECK(t.batch_into(root.children[2]) == std::vector<int>{1, 2});
  for (int c : root.children) {
    const TreeNode& nd = t.node(c);
    CHECK(nd.kind == NodeKind::adversary);
    REQUIRE(nd.children.size() == 2);
    // after the first completion only one task remains: it starts without a decision
    for (int g : nd.children) {
      const TreeNode& gn = t.node(g);
      CHECK(gn.kind == NodeKind::adversary);
      CHECK(gn.started.size() == 3);
      CHECK(t.batch_into(g).size() == 1);
    }
  }
  // leaf ranges are contiguous and partition the leaf list
  CHECK(root.leaf_begin == 0);
  CHECK(root.leaf_end == 12);
  CHECK(t.node(root.children[0]).leaf_end == t.node(root.children[1]).leaf_begin);
}

TEST_CASE("leaf encodings on the four-task tree from the initial state") {
  ScenarioTree t = ScenarioTree::build(State::initial(4, 2));

  SUBCASE("completion order equal to start order") {
    int leaf = find_leaf(t, {0, 1, 2, 3}, {0, 1, 2, 3});
    REQUIRE(leaf >= 0);
    LeafEncoding enc = t.leaf_encoding(leaf);
    REQUIRE(enc.E.size() == 3);
    CHECK(enc.E[0] == std::vector<double>{1, -1, 0, 0});
    CHECK(enc.E[1] == std::vector<double>{-1, 1, -1, 0});
    CHECK(enc.E[2] == std::vector<double>{1, -1, 1, -1});
    for (double hv : enc.h) CHECK(hv == 0.0);
    CHECK(enc.e == std::vector<double>{0, 1, 0, 1});
    CHECK(enc.e_const == 0.0);
    CHECK(enc.witness == 3);
  }

  SUBCASE("interleaved completion order") {
    int leaf = find_leaf(t, {0, 1, 2, 3}, {0, 2, 1, 3});
    REQUIRE(leaf >= 0);
    LeafEncoding enc = t.leaf_encoding(leaf);
    REQUIRE(enc.E.size() == 3);
    CHECK(enc.E[0] == std::vector<double>{0, 0, -1, 0});
    CHECK(enc.E[1] == std::vector<double>{1, -1, 1, 0});
    CHECK(enc.E[2] == std::vector<double>{-1, 1, -1, -1});
    CHECK(enc.e == std::vector<double>{1, 0, 1, 1});
    CHECK(enc.witness == 3);
  }
}

TEST_CASE("common history of two leaves") {
  ScenarioTree t = ScenarioTree::build(State::initial(4, 2));
  int a = find_leaf(t, {0, 1, 2, 3}, {0, 2, 1, 3});
  int b = find_leaf(t, {0, 1, 2, 3}, {0, 2, 3, 1});
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  auto [lca, shared] = t.common_history(a, b);
  CHECK(t.node(lca).kind == NodeKind::adversary);
  CHECK(shared == std::vector<int>{0, 2});

  // different opening batches share nothing
  int c = find_leaf(t, {0, 2, 1, 3}, {0, 1, 2, 3});
  REQUIRE(c >= 0);
  auto [root_lca, none] = t.common_history(a, c);
  CHECK(root_lca == t.root());
  CHECK(none.empty());

  auto [self, full] = t.common_history(a, a);
  CHECK(self == a);
  CHECK(full == std::vector<int>{0, 2, 1, 3});
}

TEST_CASE("mid-execution tree carries elapsed offsets into the encodings") {
  State s = State::initial(4, 2);
  s = start_tasks(s, {0, 1});
  s = advance_state(s, 0, Duration::from_real(2.0));
  s = start_tasks(s, {2});
  // now: task 1 has run 2 units, task 2 just started, task 3 unscheduled
  ScenarioTree t = ScenarioTree::build(s);
  CHECK(t.node(t.root()).kind == NodeKind::adversary);

  int leaf = find_leaf(t, {0, 1, 2, 3}, {0, 1, 2, 3});
  REQUIRE(leaf >= 0);
  LeafEncoding enc = t.leaf_encoding(leaf);
  REQUIRE(enc.E.size() == 2);
  CHECK(enc.E[0] == std::vector<double>{0, 1, -1, 0});
  CHECK(enc.h[0] == 2.0);
  CHECK(enc.E[1] == std::vector<double>{0, -1, 1, -1});
  CHECK(enc.h[1] == -2.0);
  CHECK(enc.e == std::vector<double>{0, 1, 0, 1});
  CHECK(enc.e_const == -2.0);
  CHECK(enc.witness == 3);
}

TEST_CASE("terminal states and capacity limits are rejected") {
  State s = State::initial(3, 2);
  s = start_tasks(s, {0, 1});
  s = advance_state(s, 0, Duration::from_real(1.0));
  s = start_tasks(s, {2});
  s = advance_state(s, 1, Duration::from_real(2.0));
  s = advance_state(s, 2, Duration::from_real(3.0));
  CHECK(s.is_terminal());
  CHECK_THROWS_AS(ScenarioTree::build(s), InvalidInputError);
  CHECK_THROWS_AS(ScenarioTree::build(State::initial(5, 2), 50), CapacityError);
}

TEST_CASE("dump lists every node") {
  ScenarioTree t = ScenarioTree::build(State::initial(3, 2));
  std::ostringstream os;
  t.dump(os);
  std::string text = os.str();
  CHECK(text.find("tree n=3 m=2") != std::string::npos);
  CHECK(text.find("scheduler=1") != std::string::npos);
  CHECK(text.find("leaves=12") != std::string::npos);
}
