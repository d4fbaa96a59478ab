#pragma once
#include <iosfwd>
#include <utility>
#include <vector>

#include "robsched/model.hpp"

namespace robsched {

enum class NodeKind { scheduler, adversary, leaf };

// One node of the decision/observation tree rooted at an execution state.
// `started`/`finished` extend the base state's history. Scheduler nodes branch over
// which tasks to start (one child per feasible batch); adversary nodes branch over
// which running task completes next (one child per running task). Starts that leave
// no choice (at most as many unstarted tasks as idle machines, or exactly filling
// the gap) are applied in place rather than materialized as single-child nodes.
struct TreeNode {
  int id = -1;
  int parent = -1;
  NodeKind kind = NodeKind::leaf;
  int entered_completion = -1;  // task whose completion labels the edge into this node
  std::vector<int> started;
  std::vector<int> finished;
  std::vector<int> children;
  int leaf_begin = 0, leaf_end = 0;  // contiguous range in leaves(), DFS order
  int depth = 0;
};

// Affine description of one leaf: the adversary may realize this completion order
// exactly when E d <= h, in which case the (relative) makespan equals e . d + e_const.
// Coefficients refer to all n duration coordinates; `witness` is the last finisher.
struct LeafEncoding {
  std::vector<std::vector<double>> E;
  std::vector<double> h;
  std::vector<double> e;
  double e_const = 0.0;
  int witness = -1;
};

class ScenarioTree {
 public:
  // Builds the full tree of decisions and completion observations reachable from
  // `base` (which may be mid-execution). Throws CapacityError past the node limit.
  static ScenarioTree build(const State& base, long node_limit = 10000000);

  const State& base() const { return base_; }
  int root() const { return 0; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const TreeNode& node(int id) const { return nodes_[id]; }
  const std::vector<int>& leaves() const { return leaves_; }

  LeafEncoding leaf_encoding(int leaf_id) const;

  // Deepest common ancestor of two leaves and its finished set: the completions both
  // histories share (and therefore observe identically).
  std::pair<int, std::vector<int>> common_history(int leaf_a, int leaf_b) const;

  unsigned long long scheduler_node_count() const { return scheduler_nodes_; }
  unsigned long long leaf_count() const { return leaves_.size(); }

  // Tasks newly started at `id` relative to its parent (the batch decided on the
  // edge into it, plus forced starts).
  std::vector<int> batch_into(int id) const;

  void dump(std::ostream& os) const;

 private:
  ScenarioTree() = default;
  State base_;
  std::vector<TreeNode> nodes_;
  std::vector<int> leaves_;
  unsigned long long scheduler_nodes_ = 0;
};

struct StateCounts {
  unsigned long long scheduler_nodes = 0;
  unsigned long long leaves = 0;
};

// Game value of the subtree when every duration is pinned to `d` (indexed by task):
// at each observation the realized completion is the running task with the smallest
// remaining time (lowest id on ties) and the scheduler reacts optimally. Returned
// relative to the base state's clock; `d` must be consistent with the base state.
// The adversary can only do better, so this lower-bounds the subtree's robust value.
double fixed_scenario_value(const ScenarioTree& tree, int subtree_root,
                            const std::vector<double>& d);

// Closed-form size of the tree built from the initial state of an (n, m) instance.
// Throws CapacityError if the counts overflow the representable range.
StateCounts count_states(int n, int m);

}  // namespace robsched
