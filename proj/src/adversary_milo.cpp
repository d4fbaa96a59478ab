#include "robsched/adversary_milo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robsched/errors.hpp"

namespace robsched {
namespace {

struct LeafBounds {
  bool feasible = true;
  double lo_box = 0.0, hi_box = 0.0;  // value range over the raw coordinate ranges
  double hi = 0.0;                    // value maximum over order-consistent members
};

bool chain_feasible_exact(const LeafEncoding& enc, const DurationVec& scen) {
  bool exact = true;
  for (const Duration& d : scen) exact = exact && d.exact();
  if (exact) {
    for (size_t r = 0; r < enc.E.size(); ++r) {
      long long lhs = 0;
      for (size_t i = 0; i < enc.E[r].size(); ++i) {
        long long coef = llround(enc.E[r][i]);
        if (coef != 0) lhs += coef * scen[i].hundredths();
      }
      if (lhs > llround(enc.h[r] * 100.0)) return false;
    }
    return true;
  }
  for (size_t r = 0; r < enc.E.size(); ++r) {
    double lhs = 0.0;
    for (size_t i = 0; i < enc.E[r].size(); ++i) lhs += enc.E[r][i] * scen[i].value();
    if (lhs > enc.h[r] + 1e-9) return false;
  }
  return true;
}

// Exact feasibility and value bounds of one completion order. Discrete sets are
// enumerated; box and budgeted sets solve a small linear program over the order rows
// (with a hair of slack so borderline orders stay in).
LeafBounds leaf_bounds(const LeafEncoding& enc, const UncertaintySet& set,
                       const std::vector<double>& clo, const std::vector<double>& chi,
                       const std::vector<int>& cons, const BudgetBox& bb) {
  const int n = static_cast<int>(enc.e.size());
  LeafBounds out;
  if (set.kind() == SetKind::discrete) {
    const auto& scen = set.discrete_data().scenarios;
    out.feasible = false;
    bool first_any = true, first_feas = true;
    for (int s : cons) {
      double val = enc.e_const;
      for (int i = 0; i < n; ++i) val += enc.e[i] * scen[s][i].value();
      out.lo_box = first_any ? val : std::min(out.lo_box, val);
      out.hi_box = first_any ? val : std::max(out.hi_box, val);
      first_any = false;
      if (chain_feasible_exact(enc, scen[s])) {
        out.feasible = true;
        out.hi = first_feas ? val : std::max(out.hi, val);
        first_feas = false;
      }
    }
    if (!out.feasible) out.hi = out.lo_box;
    return out;
  }
  out.lo_box = out.hi_box = enc.e_const;
  for (int i = 0; i < n; ++i) {
    out.lo_box += std::min(enc.e[i] * clo[i], enc.e[i] * chi[i]);
    out.hi_box += std::max(enc.e[i] * clo[i], enc.e[i] * chi[i]);
  }
  MixedIntegerProgram lp;
  lp.maximize = true;
  for (int i = 0; i < n; ++i)
    lp.add_var("d" + std::to_string(i), clo[i], chi[i], enc.e[i], false);
  if (set.kind() == SetKind::budgeted) {
    const BudgetedData& bd = set.budgeted_data();
    std::vector<std::pair<int, double>> budget;
    for (int i = 0; i < n; ++i) {
      int u = lp.add_var("u" + std::to_string(i), bb.lo[i], bb.hi[i], 0.0, false);
      lp.add_row({{i, 1.0}, {u, -bd.deviation[i]}}, Relation::eq, bd.nominal[i],
                 "link" + std::to_string(i));
      budget.push_back({u, 1.0});
    }
    lp.add_row(std::move(budget), Relation::le, bb.budget, "budget");
  }
  for (size_t r = 0; r < enc.E.size(); ++r) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < n; ++i)
      if (enc.E[r][i] != 0.0) row.push_back({i, enc.E[r][i]});
    lp.add_row(std::move(row), Relation::le, enc.h[r] + 1e-9, "order" + std::to_string(r));
  }
  LpSolution sol = solve_lp(lp);
  if (sol.status == SolveStatus::infeasible) {
    out.feasible = false;
    out.hi = out.lo_box;
  } else if (sol.status == SolveStatus::optimal) {
    out.hi = sol.objective + enc.e_const;
  } else {
    out.hi = out.hi_box;  // solver trouble: fall back to the coordinate-range bound
  }
  return out;
}

struct WarmChoice {
  std::vector<double> d;  // duration vector to play
  std::vector<double> u;  // its budget spend per coordinate, for budgeted sets
  double value = 0.0;     // fixed-play value of the subtree under d
  int scenario = -1;      // index into the discrete scenario list, if any
};

// Picks the most damaging duration vector among a few cheap candidates by playing
// each one through the subtree.
WarmChoice choose_warm(const ScenarioTree& tree, const UncertaintySet& set, int subtree_root) {
  const int n = set.dimension();
  WarmChoice best;
  bool have = false;
  auto consider = [&](std::vector<double> d, int scenario, std::vector<double> u) {
    double val = fixed_scenario_value(tree, subtree_root, d);
    if (!have || val > best.value) {
      have = true;
      best = WarmChoice{std::move(d), std::move(u), val, scenario};
    }
  };
  if (set.kind() == SetKind::discrete) {
    const auto& scen = set.discrete_data().scenarios;
    std::vector<int> cons = set.consistent_scenarios();
    if (cons.empty()) throw EmptySetError("no scenario is consistent with the observed history");
    for (int s : cons) consider(to_doubles(scen[s]), s, {});
    return best;
  }
  if (set.kind() == SetKind::box) {
    std::vector<double> lo(n), hi(n);
    for (int i = 0; i < n; ++i) set.coordinate_range(i, lo[i], hi[i]);
    consider(std::move(hi), -1, {});
    return best;
  }
  const BudgetedData& bd = set.budgeted_data();
  BudgetBox bb = set.budget_box();
  if (!bb.feasible)
    throw EmptySetError("no duration vector is consistent with the observed history");
  // spend the spare budget greedily along `order`; an empty order keeps the floor
  auto spend = [&](const std::vector<int>& order) {
    std::vector<double> u = bb.lo;
    double left = bb.budget;
    for (double v : u) left -= v;
    for (int i : order) {
      if (left <= 0.0) break;
      double add = std::min(bb.hi[i] - bb.lo[i], left);
      u[i] += add;
      left -= add;
    }
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = bd.nominal[i] + bd.deviation[i] * u[i];
    consider(std::move(d), -1, std::move(u));
  };
  spend({});
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return bd.deviation[a] > bd.deviation[b]; });
  spend(order);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return bd.nominal[a] + bd.deviation[a] > bd.nominal[b] + bd.deviation[b];
  });
  spend(order);
  return best;
}

}  // namespace

std::pair<std::vector<double>, double> best_fixed_scenario(const ScenarioTree& tree,
                                                           const UncertaintySet& set,
                                                           int subtree_root) {
  WarmChoice wc = choose_warm(tree, set, subtree_root);
  return {std::move(wc.d), wc.value};
}

AdversaryMilo build_adversary_milo(const ScenarioTree& tree, const UncertaintySet& set,
                                   int subtree_root, const AdversaryMiloOptions& opts) {
  const int n = tree.base().n;
  if (set.dimension() != n)
    throw InvalidInputError("build_adversary_milo: set dimension does not match the tree");
  if (subtree_root != tree.root() && tree.node(subtree_root).parent != tree.root())
    throw InvalidInputError("build_adversary_milo: subtree root must be the root or a root child");

  std::vector<double> clo(n), chi(n);
  for (int i = 0; i < n; ++i) set.coordinate_range(i, clo[i], chi[i]);
  double big_m = 1.0;
  for (int i = 0; i < n; ++i) big_m += chi[i];

  // subtree traversal orders
  std::vector<int> preorder, postorder;
  {
    std::vector<std::pair<int, size_t>> stack{{subtree_root, 0}};
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == 0) preorder.push_back(v);
      const auto& kids = tree.node(v).children;
      if (next < kids.size()) {
        int c = kids[next++];
        stack.push_back({c, 0});
      } else {
        postorder.push_back(v);
        stack.pop_back();
      }
    }
  }

  std::vector<LeafEncoding> enc(tree.size());
  std::vector<char> alive(tree.size(), 0);
  std::vector<int> cons;
  BudgetBox bb;
  if (set.kind() == SetKind::discrete) {
    cons = set.consistent_scenarios();
    if (cons.empty()) throw EmptySetError("no scenario is consistent with the observed history");
  } else if (set.kind() == SetKind::budgeted) {
    bb = set.budget_box();
    if (!bb.feasible)
      throw EmptySetError("no duration vector is consistent with the observed history");
  }

  long total_leaves = 0;
  std::vector<double> lo_box(tree.size(), 0.0), hi_box(tree.size(), 0.0);
  std::vector<double> vlo(tree.size(), 0.0), vhi(tree.size(), 0.0);
  for (int v : postorder) {
    const TreeNode& nd = tree.node(v);
    if (nd.kind == NodeKind::leaf) {
      ++total_leaves;
      enc[v] = tree.leaf_encoding(v);
      LeafBounds lb = leaf_bounds(enc[v], set, clo, chi, cons, bb);
      alive[v] = opts.presolve ? lb.feasible : 1;
      lo_box[v] = lb.lo_box;
      hi_box[v] = lb.hi_box;
      vlo[v] = lb.lo_box;
      vhi[v] = lb.feasible ? lb.hi : lb.lo_box;
    } else {
      // value range by backward induction: the adversary achieves the best child,
      // the scheduler the worst
      bool first = true;
      for (int c : nd.children) {
        if (!alive[c]) continue;
        alive[v] = 1;
        if (nd.kind == NodeKind::adversary) {
          vlo[v] = first ? vlo[c] : std::max(vlo[v], vlo[c]);
          vhi[v] = first ? vhi[c] : std::max(vhi[v], vhi[c]);
        } else {
          vlo[v] = first ? vlo[c] : std::min(vlo[v], vlo[c]);
          vhi[v] = first ? vhi[c] : std::min(vhi[v], vhi[c]);
        }
        first = false;
      }
    }
  }
  if (!alive[subtree_root])
    throw EmptySetError("every completion order below the subtree root is unrealizable");

  // deactivated leaves must pin their value variable strictly below every node's
  // conceivable value, so the drop is anchored at the smallest value bound anywhere
  double gvlo = vlo[subtree_root];
  for (int v : postorder)
    if (alive[v] && tree.node(v).kind == NodeKind::leaf) gvlo = std::min(gvlo, lo_box[v]);
  std::vector<double> drop(tree.size(), 0.0);    // deactivation drop of a leaf's value
  std::vector<double> floor_(tree.size(), 0.0);  // value its variable can always reach
  for (int v : postorder) {
    if (!alive[v]) continue;
    const TreeNode& nd = tree.node(v);
    if (nd.kind == NodeKind::leaf) {
      drop[v] = hi_box[v] - gvlo + 1.0;
      floor_[v] = lo_box[v] - drop[v];
    } else {
      bool first = true;
      for (int c : nd.children) {
        if (!alive[c]) continue;
        if (nd.kind == NodeKind::adversary)
          floor_[v] = first ? floor_[c] : std::max(floor_[v], floor_[c]);
        else
          floor_[v] = first ? floor_[c] : std::min(floor_[v], floor_[c]);
        first = false;
      }
    }
  }

  AdversaryMilo out;
  out.big_m = big_m;
  out.total_leaves = total_leaves;
  MixedIntegerProgram& prog = out.prog;
  prog.maximize = true;

  // shallow observation picks shape the largest subtrees, so they branch first
  int max_depth = 0;
  for (int v : preorder) max_depth = std::max(max_depth, tree.node(v).depth);
  // padding absorbs the linear-programming tolerance in the leaf value bounds; it
  // must exceed the simplex feasibility tolerance (or value variables can ride their
  // padded bounds while violating a value row by less than that tolerance) yet keep
  // twice its size below the solver's absolute gap (or optimal-valued nodes cannot
  // be pruned against an optimal incumbent)
  const double pad = 4e-8;

  // one duration variable per observed completion: every leaf sharing that
  // observation history shares the variable, which is exactly the tie requirement
  std::vector<int> t_col(tree.size(), -1);
  std::vector<int> obs_col(tree.size(), -1);  // at node entered by a completion
  std::vector<int> obs_u_col(tree.size(), -1);
  std::vector<int> z_col(tree.size(), -1);
  std::vector<int> y_col(tree.size(), -1);
  std::vector<int> w_col(tree.size(), -1);  // per child: column of its pick indicator

  for (int v : preorder) {
    if (!alive[v]) continue;
    const TreeNode& nd = tree.node(v);
    const std::string vid = std::to_string(v);
    t_col[v] = prog.add_var("t_" + vid, floor_[v] - pad, vhi[v] + pad,
                            v == subtree_root ? 1.0 : 0.0, false);
    if (nd.entered_completion >= 0) {
      const int f = nd.entered_completion;
      obs_col[v] = prog.add_var("d_" + vid + "_" + std::to_string(f + 1), clo[f], chi[f], 0.0,
                                false);
      if (set.kind() == SetKind::budgeted)
        obs_u_col[v] = prog.add_var("u_" + vid + "_" + std::to_string(f + 1), bb.lo[f], bb.hi[f],
                                    0.0, false);
    }
    if (nd.kind == NodeKind::leaf) {
      ++out.alive_leaves;
      z_col[v] = prog.add_var("z_" + vid, 0.0, 1.0, 0.0, true);
      out.branch_priority.resize(prog.num_vars(), 0);
      out.branch_priority[z_col[v]] = 1;
      if (set.kind() == SetKind::discrete) {
        for (size_t k = 0; k < cons.size(); ++k) {
          int col = prog.add_var("y_" + vid + "_" + std::to_string(cons[k] + 1), 0.0, 1.0, 0.0,
                                 true);
          if (k == 0) y_col[v] = col;
        }
      }
    } else if (nd.kind == NodeKind::adversary) {
      int alive_children = 0;
      for (int c : nd.children) alive_children += alive[c];
      if (alive_children > 1)
        for (int c : nd.children)
          if (alive[c]) {
            w_col[c] = prog.add_var("w_" + vid + "_" + std::to_string(c), 0.0, 1.0, 0.0, true);
            out.branch_priority.resize(prog.num_vars(), 0);
            out.branch_priority[w_col[c]] = 2 + max_depth - nd.depth;
          }
    }
  }
  out.value_var = t_col[subtree_root];

  // maps each coordinate to the node whose entering observation completes it, along
  // the walk's current path; coordinates completed before the tree's base state have
  // no observation and contribute their pinned value as a constant
  std::vector<int> coord_node(n, -1);
  const BudgetedData* bd = set.kind() == SetKind::budgeted ? &set.budgeted_data() : nullptr;
  double fixed_u = 0.0;  // budget consumed by coordinates pinned before the base state
  if (bd)
    for (int i : tree.base().finished_order) fixed_u += bb.lo[i];

  struct Frame {
    int node;
    size_t next = 0;
  };
  std::vector<Frame> walk{{subtree_root, 0}};
  while (!walk.empty()) {
    const int v = walk.back().node;
    const TreeNode& nd = tree.node(v);
    const std::string vid = std::to_string(v);
    if (walk.back().next == 0) {
      if (nd.entered_completion >= 0) {
        const int f = nd.entered_completion;
        coord_node[f] = v;
        if (bd)
          prog.add_row({{obs_col[v], 1.0}, {obs_u_col[v], -bd->deviation[f]}}, Relation::eq,
                       bd->nominal[f], "link_" + vid);
      }
      if (nd.kind == NodeKind::scheduler) {
        for (int c : nd.children)
          if (alive[c])
            prog.add_row({{t_col[v], 1.0}, {t_col[c], -1.0}}, Relation::le, 0.0,
                         "sched_" + vid + "_" + std::to_string(c));
      } else if (nd.kind == NodeKind::adversary) {
        std::vector<std::pair<int, double>> card;
        int alive_children = 0;
        for (int c : nd.children) alive_children += alive[c];
        for (int c : nd.children) {
          if (!alive[c]) continue;
          std::vector<std::pair<int, double>> row{{t_col[v], 1.0}, {t_col[c], -1.0}};
          if (alive_children > 1) {
            // slack covers the gap between this node's value and a deselected child's
            // variable, which deactivated leaves below can pin as low as floor_[c]
            double m_vc = vhi[v] - floor_[c] + 2.0 * pad;
            row.push_back({w_col[c], -m_vc});
            card.push_back({w_col[c], 1.0});
          }
          prog.add_row(std::move(row), Relation::le, 0.0,
                       "pick_" + vid + "_" + std::to_string(c));
        }
        if (alive_children > 1)
          prog.add_row(std::move(card), Relation::le, alive_children - 1.0, "card_" + vid);
      } else {
        // t = e.d + c unless deactivated (z = 1), which drops the value below any
        // node's conceivable worth
        std::vector<std::pair<int, double>> val{{t_col[v], 1.0}, {z_col[v], drop[v]}};
        double val_rhs = enc[v].e_const;
        for (int i = 0; i < n; ++i) {
          if (enc[v].e[i] == 0.0) continue;
          if (coord_node[i] >= 0)
            val.push_back({obs_col[coord_node[i]], -enc[v].e[i]});
          else
            val_rhs += enc[v].e[i] * clo[i];  // pinned coordinate: clo == chi
        }
        prog.add_row(std::move(val), Relation::eq, val_rhs, "makespan_" + vid);
        for (size_t r = 0; r < enc[v].E.size(); ++r) {
          // z = 1 relaxes the order row to its maximum over the coordinate ranges
          double row_max = 0.0;
          for (int i = 0; i < n; ++i)
            row_max += enc[v].E[r][i] > 0 ? enc[v].E[r][i] * chi[i] : enc[v].E[r][i] * clo[i];
          double m_row = std::max(row_max - enc[v].h[r], 0.0);
          double rhs = enc[v].h[r];
          std::vector<std::pair<int, double>> row{{z_col[v], -m_row}};
          for (int i = 0; i < n; ++i) {
            if (enc[v].E[r][i] == 0.0) continue;
            if (coord_node[i] >= 0)
              row.push_back({obs_col[coord_node[i]], enc[v].E[r][i]});
            else
              rhs -= enc[v].E[r][i] * clo[i];
          }
          prog.add_row(std::move(row), Relation::le, rhs,
                       "chain_" + vid + "_" + std::to_string(r));
        }
        if (bd) {
          std::vector<std::pair<int, double>> budget;
          for (int i = 0; i < n; ++i)
            if (coord_node[i] >= 0) budget.push_back({obs_u_col[coord_node[i]], 1.0});
          prog.add_row(std::move(budget), Relation::le, bb.budget - fixed_u, "budget_" + vid);
        } else if (set.kind() == SetKind::discrete) {
          const auto& scen = set.discrete_data().scenarios;
          for (int i = 0; i < n; ++i) {
            if (coord_node[i] < 0) continue;
            std::vector<std::pair<int, double>> row{{obs_col[coord_node[i]], 1.0}};
            for (size_t k = 0; k < cons.size(); ++k)
              row.push_back({y_col[v] + static_cast<int>(k), -scen[cons[k]][i].value()});
            prog.add_row(std::move(row), Relation::eq, 0.0,
                         "dsel_" + vid + "_" + std::to_string(i + 1));
          }
          std::vector<std::pair<int, double>> one;
          for (size_t k = 0; k < cons.size(); ++k)
            one.push_back({y_col[v] + static_cast<int>(k), 1.0});
          prog.add_row(std::move(one), Relation::eq, 1.0, "pickone_" + vid);
          // an active leaf must select a scenario realizing its completion order
          std::vector<std::pair<int, double>> cut{{z_col[v], 1.0}};
          for (size_t k = 0; k < cons.size(); ++k)
            if (chain_feasible_exact(enc[v], scen[cons[k]]))
              cut.push_back({y_col[v] + static_cast<int>(k), 1.0});
          prog.add_row(std::move(cut), Relation::ge, 1.0, "cut_" + vid);
        }
      }
    }
    bool descended = false;
    while (walk.back().next < nd.children.size()) {
      int c = nd.children[walk.back().next++];
      if (alive[c]) {
        walk.push_back({c, 0});
        descended = true;
        break;
      }
    }
    if (!descended) {
      if (nd.entered_completion >= 0) coord_node[nd.entered_completion] = -1;
      walk.pop_back();
    }
  }

  out.branch_priority.resize(prog.num_vars(), 0);

  // feasible start point: play the best fixed duration choice, route every adversary
  // node toward its most valuable child, and activate exactly the leaves whose
  // completion order holds under that choice
  {
    WarmChoice wc = choose_warm(tree, set, subtree_root);
    int k0 = -1;
    for (size_t k = 0; k < cons.size(); ++k)
      if (cons[k] == wc.scenario) k0 = static_cast<int>(k);
    std::vector<double> x0(prog.num_vars(), 0.0);
    std::vector<double> tval(tree.size(), 0.0);
    for (int v : postorder) {
      if (!alive[v]) continue;
      const TreeNode& nd = tree.node(v);
      if (obs_col[v] >= 0) x0[obs_col[v]] = wc.d[nd.entered_completion];
      if (obs_u_col[v] >= 0) x0[obs_u_col[v]] = wc.u[nd.entered_completion];
      if (nd.kind == NodeKind::leaf) {
        double mk = enc[v].e_const;
        for (int i = 0; i < n; ++i) mk += enc[v].e[i] * wc.d[i];
        bool ok = true;
        if (set.kind() == SetKind::discrete) {
          ok = chain_feasible_exact(enc[v], set.discrete_data().scenarios[wc.scenario]);
        } else {
          for (size_t r = 0; r < enc[v].E.size() && ok; ++r) {
            double lhs = 0.0;
            for (int i = 0; i < n; ++i) lhs += enc[v].E[r][i] * wc.d[i];
            ok = lhs <= enc[v].h[r] + 1e-9;
          }
        }
        x0[z_col[v]] = ok ? 0.0 : 1.0;
        if (k0 >= 0) x0[y_col[v] + k0] = 1.0;
        tval[v] = ok ? mk : mk - drop[v];
      } else if (nd.kind == NodeKind::scheduler) {
        bool first = true;
        for (int c : nd.children) {
          if (!alive[c]) continue;
          tval[v] = first ? tval[c] : std::min(tval[v], tval[c]);
          first = false;
        }
      } else {
        int pick = -1;
        for (int c : nd.children) {
          if (!alive[c]) continue;
          if (pick < 0 || tval[c] > tval[v]) {
            pick = c;
            tval[v] = tval[c];
          }
        }
        for (int c : nd.children)
          if (w_col[c] >= 0) x0[w_col[c]] = c == pick ? 0.0 : 1.0;
      }
      x0[t_col[v]] = tval[v];
    }
    out.warm_value = tval[subtree_root];
    out.warm_start = std::move(x0);
  }
  return out;
}

}  // namespace robsched
