#include "robsched/tree.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "robsched/errors.hpp"

namespace robsched {
namespace {

std::vector<int> set_difference_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

struct Builder {
  int n, m;
  long node_limit;
  std::vector<TreeNode>& nodes;
  std::vector<int>& leaves;
  unsigned long long scheduler_nodes = 0;

  int new_node(int parent, int entered, std::vector<int> started, std::vector<int> finished) {
    if (static_cast<long>(nodes.size()) >= node_limit)
      throw CapacityError("scenario tree exceeds the node limit");
    TreeNode nd;
    nd.id = static_cast<int>(nodes.size());
    nd.parent = parent;
    nd.entered_completion = entered;
    nd.started = std::move(started);
    nd.finished = std::move(finished);
    nd.depth = parent < 0 ? 0 : nodes[parent].depth + 1;
    nodes.push_back(std::move(nd));
    return nodes.back().id;
  }

  // Expands the node in place: applies forced starts, classifies it, and recurses.
  void expand(int id) {
    {
      TreeNode& nd = nodes[id];
      std::vector<int> sorted_started = nd.started;
      std::sort(sorted_started.begin(), sorted_started.end());
      std::vector<int> all(n);
      for (int i = 0; i < n; ++i) all[i] = i;
      std::vector<int> unstarted = set_difference_sorted(all, sorted_started);
      int idle = m - (static_cast<int>(nd.started.size()) - static_cast<int>(nd.finished.size()));
      if (idle > 0 && !unstarted.empty() && static_cast<int>(unstarted.size()) <= idle) {
        // no choice: every remaining task fits on an idle machine
        nd.started.insert(nd.started.end(), unstarted.begin(), unstarted.end());
        unstarted.clear();
        idle = m - (static_cast<int>(nd.started.size()) - static_cast<int>(nd.finished.size()));
      }
      if (!unstarted.empty() && idle > 0) {
        nd.kind = NodeKind::scheduler;
        ++scheduler_nodes;
        nd.leaf_begin = static_cast<int>(leaves.size());
        // one child per size-`idle` subset of the unstarted tasks, lexicographic
        std::vector<int> pick(idle);
        for (int i = 0; i < idle; ++i) pick[i] = i;
        const int u = static_cast<int>(unstarted.size());
        while (true) {
          std::vector<int> child_started = nodes[id].started;
          for (int p : pick) child_started.push_back(unstarted[p]);
          int child = new_node(id, -1, std::move(child_started), nodes[id].finished);
          nodes[id].children.push_back(child);
          expand(child);
          int pos = idle - 1;
          while (pos >= 0 && pick[pos] == u - idle + pos) --pos;
          if (pos < 0) break;
          ++pick[pos];
          for (int q = pos + 1; q < idle; ++q) pick[q] = pick[q - 1] + 1;
        }
        nodes[id].leaf_end = static_cast<int>(leaves.size());
        return;
      }
    }
    TreeNode& nd = nodes[id];
    std::vector<int> sorted_started = nd.started;
    std::sort(sorted_started.begin(), sorted_started.end());
    std::vector<int> sorted_finished = nd.finished;
    std::sort(sorted_finished.begin(), sorted_finished.end());
    std::vector<int> running = set_difference_sorted(sorted_started, sorted_finished);
    if (running.empty()) {
      nd.kind = NodeKind::leaf;
      nd.leaf_begin = static_cast<int>(leaves.size());
      leaves.push_back(id);
      nd.leaf_end = static_cast<int>(leaves.size());
      return;
    }
    nd.kind = NodeKind::adversary;
    nd.leaf_begin = static_cast<int>(leaves.size());
    for (int f : running) {
      std::vector<int> child_finished = nodes[id].finished;
      child_finished.push_back(f);
      int child = new_node(id, f, nodes[id].started, std::move(child_finished));
      nodes[id].children.push_back(child);
      expand(child);
    }
    nodes[id].leaf_end = static_cast<int>(leaves.size());
  }
};

}  // namespace

ScenarioTree ScenarioTree::build(const State& base, long node_limit) {
  base.validate();
  if (base.is_terminal()) throw InvalidInputError("cannot build a tree from a terminal state");
  ScenarioTree t;
  t.base_ = base;
  Builder b{base.n, base.m, node_limit, t.nodes_, t.leaves_};
  int root = b.new_node(-1, -1, base.started_order, base.finished_order);
  b.expand(root);
  t.scheduler_nodes_ = b.scheduler_nodes;
  return t;
}

LeafEncoding ScenarioTree::leaf_encoding(int leaf_id) const {
  const int n = base_.n;
  if (leaf_id < 0 || leaf_id >= size() || nodes_[leaf_id].kind != NodeKind::leaf)
    throw InvalidInputError("leaf_encoding: not a leaf id");
  std::vector<int> path;
  for (int v = leaf_id; v != -1; v = nodes_[v].parent) path.push_back(v);
  std::reverse(path.begin(), path.end());

  struct Expr {
    std::vector<double> c;
    double k = 0.0;
  };
  // start time of each task, relative to the base state's clock
  std::vector<Expr> start(n);
  for (auto& e : start) e.c.assign(n, 0.0);
  for (const auto& rt : base_.running) start[rt.task].k = -rt.elapsed.value();

  auto completion = [&](int task) {
    Expr e = start[task];
    e.c[task] += 1.0;
    return e;
  };

  Expr epoch;
  epoch.c.assign(n, 0.0);
  for (size_t idx = 0; idx < path.size(); ++idx) {
    const TreeNode& nd = nodes_[path[idx]];
    if (nd.entered_completion >= 0) epoch = completion(nd.entered_completion);
    const size_t prev =
        idx == 0 ? base_.started_order.size() : nodes_[path[idx - 1]].started.size();
    for (size_t j = prev; j < nd.started.size(); ++j) start[nd.started[j]] = epoch;
  }

  const std::vector<int>& fin = nodes_[leaf_id].finished;
  const size_t b = base_.finished_order.size();
  LeafEncoding enc;
  for (size_t j = b + 1; j < fin.size(); ++j) {
    Expr prev_c = completion(fin[j - 1]);
    Expr next_c = completion(fin[j]);
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) row[i] = prev_c.c[i] - next_c.c[i];
    enc.E.push_back(std::move(row));
    enc.h.push_back(next_c.k - prev_c.k);
  }
  Expr last = completion(fin.back());
  enc.e = std::move(last.c);
  enc.e_const = last.k;
  enc.witness = fin.back();
  return enc;
}

std::pair<int, std::vector<int>> ScenarioTree::common_history(int leaf_a, int leaf_b) const {
  int x = leaf_a, y = leaf_b;
  while (nodes_[x].depth > nodes_[y].depth) x = nodes_[x].parent;
  while (nodes_[y].depth > nodes_[x].depth) y = nodes_[y].parent;
  while (x != y) {
    x = nodes_[x].parent;
    y = nodes_[y].parent;
  }
  return {x, nodes_[x].finished};
}

std::vector<int> ScenarioTree::batch_into(int id) const {
  const TreeNode& nd = nodes_[id];
  const std::vector<int>& prev =
      nd.parent < 0 ? base_.started_order : nodes_[nd.parent].started;
  return {nd.started.begin() + static_cast<long>(prev.size()), nd.started.end()};
}

void ScenarioTree::dump(std::ostream& os) const {
  os << "tree n=" << base_.n << " m=" << base_.m << " nodes=" << size()
     << " scheduler=" << scheduler_nodes_ << " leaves=" << leaves_.size() << "\n";
  for (const TreeNode& nd : nodes_) {
    os << nd.id << " ";
    switch (nd.kind) {
      case NodeKind::scheduler: os << "S"; break;
      case NodeKind::adversary: os << "A"; break;
      case NodeKind::leaf: os << "L"; break;
    }
    os << " parent=" << nd.parent;
    if (nd.entered_completion >= 0) os << " done=" << nd.entered_completion + 1;
    os << " started=[";
    for (size_t i = 0; i < nd.started.size(); ++i) os << (i ? "," : "") << nd.started[i] + 1;
    os << "] finished=[";
    for (size_t i = 0; i < nd.finished.size(); ++i) os << (i ? "," : "") << nd.finished[i] + 1;
    os << "]\n";
  }
}

namespace {

unsigned long long checked_mul(unsigned long long a, unsigned long long b) {
  unsigned long long r;
  if (__builtin_mul_overflow(a, b, &r)) throw CapacityError("state count overflows");
  return r;
}

unsigned long long checked_add(unsigned long long a, unsigned long long b) {
  unsigned long long r;
  if (__builtin_add_overflow(a, b, &r)) throw CapacityError("state count overflows");
  return r;
}

unsigned long long factorial(int k) {
  unsigned long long r = 1;
  for (int i = 2; i <= k; ++i) r = checked_mul(r, static_cast<unsigned long long>(i));
  return r;
}

unsigned long long binomial(int n, int k) {
  unsigned long long r = 1;
  for (int i = 1; i <= k; ++i) {
    r = checked_mul(r, static_cast<unsigned long long>(n - k + i));
    r /= static_cast<unsigned long long>(i);
  }
  return r;
}

}  // namespace

double fixed_scenario_value(const ScenarioTree& tree, int subtree_root,
                            const std::vector<double>& d) {
  if (subtree_root != tree.root() && tree.node(subtree_root).parent != tree.root())
    throw InvalidInputError(
        "fixed_scenario_value: subtree root must be the root or a root child");
  if (static_cast<int>(d.size()) != tree.base().n)
    throw InvalidInputError("fixed_scenario_value: duration vector has the wrong dimension");
  const double base_clock = tree.base().clock.value();

  // applies the edge into `id`: the completion entering it, then its new starts
  auto enter = [&](const State& s, int id) {
    const TreeNode& nd = tree.node(id);
    State next = s;
    if (nd.entered_completion >= 0) {
      const int f = nd.entered_completion;
      double rem = std::max(d[f] - s.running_entry(f).elapsed.value(), 0.0);
      next = advance_state(next, f, Duration::from_real(next.clock.value() + rem));
    }
    std::vector<int> batch = tree.batch_into(id);
    if (!batch.empty()) next = start_tasks(next, batch);
    return next;
  };

  // scheduler takes the best child; the adversary's move is forced by the pinned
  // durations (exact ties realize the lowest task id, matching replay conventions)
  auto value = [&](auto&& self, int id, const State& s) -> double {
    const TreeNode& nd = tree.node(id);
    if (nd.kind == NodeKind::leaf) return s.clock.value() - base_clock;
    if (nd.kind == NodeKind::scheduler) {
      double best = std::numeric_limits<double>::infinity();
      for (int c : nd.children) best = std::min(best, self(self, c, enter(s, c)));
      return best;
    }
    int realized = -1;
    double best_rem = 0.0;
    for (const RunningTask& rt : s.running) {
      double rem = d[rt.task] - rt.elapsed.value();
      if (realized < 0 || rem < best_rem) {
        realized = rt.task;
        best_rem = rem;
      }
    }
    for (int c : nd.children)
      if (tree.node(c).entered_completion == realized) return self(self, c, enter(s, c));
    throw InvalidInputError("fixed_scenario_value: tree has no child for the realized completion");
  };

  State at = subtree_root == tree.root() ? tree.base() : enter(tree.base(), subtree_root);
  return value(value, subtree_root, at);
}

StateCounts count_states(int n, int m) {
  if (m < 2 || m >= n) throw InvalidInputError("count_states requires 2 <= m < n");
  StateCounts counts;
  unsigned long long pw = 1;
  for (int i = 0; i < n - m; ++i) pw = checked_mul(pw, static_cast<unsigned long long>(m));
  counts.leaves = checked_mul(factorial(n), pw);
  // decision nodes: the root plus, for each depth i of completed observations while
  // at least two tasks remain unscheduled, the number of distinct histories
  //   C(n,m) * (n-m)!/(n-m-i+1)! * m^i
  counts.scheduler_nodes = 1;
  for (int i = 1; i <= n - m - 1; ++i) {
    unsigned long long term = binomial(n, m);
    for (int v = n - m; v >= n - m - i + 2; --v)
      term = checked_mul(term, static_cast<unsigned long long>(v));
    unsigned long long mi = 1;
    for (int j = 0; j < i; ++j) mi = checked_mul(mi, static_cast<unsigned long long>(m));
    counts.scheduler_nodes = checked_add(counts.scheduler_nodes, checked_mul(term, mi));
  }
  return counts;
}

}  // namespace robsched
