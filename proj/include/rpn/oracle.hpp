#pragma once
// Ground-truth domain rules (preconditions and dependencies) and hand-coded
// experts that produce demonstrations.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rpn/goal.hpp"
#include "rpn/graph.hpp"
#include "rpn/world.hpp"

namespace rpn {

template <class State>
struct DemoStep {
  State snapshot;  // state before the step's goal is executed
  Goal goal;
};

template <class State>
struct DemoTrajectory {
  Goal final_goal;
  std::vector<DemoStep<State>> steps;
  State final_snapshot;
  std::vector<std::pair<int, int>> dependency_edges;  // (i depends on j) over final-goal atoms
};

struct DependencyGraph {
  Goal nodes;
  std::vector<std::pair<int, int>> edges;
};

class Unsolvable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void add_unique(std::vector<Atom>& v, const Atom& a) {
  if (std::find(v.begin(), v.end(), a) == v.end()) v.push_back(a);
}

// Canonical (ground-atom) order, so oracle outputs compare directly with
// node-head predictions.
inline Goal canonical(std::vector<Atom> atoms, const PlanningSpace& sp) {
  std::sort(atoms.begin(), atoms.end(),
            [&](const Atom& a, const Atom& b) { return sp.node_of(a) < sp.node_of(b); });
  return Goal(std::move(atoms));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grid world rules

class GridOracle {
 public:
  explicit GridOracle(GridWorld w) : world_(w) {}
  const GridWorld& world() const { return world_; }

  // i depends on j.
  bool depends(const grid::GridState&, const Atom& i, const Atom& j) const {
    using namespace grid;
    if (i.negated || j.negated) return false;
    // Tile c sits in the room behind door c.
    return i.predicate == kOn && j.predicate == kOpen && i.args[0] - 2 * kColors == j.args[0];
  }

  std::optional<Goal> precondition(const grid::GridState& s, const Goal& block) const {
    using namespace grid;
    if (world_.execute(s, block).success) return std::nullopt;
    std::vector<Atom> out;
    for (const auto& a : block) {
      if (world_.holds(s, a) || a.negated) continue;
      const auto& o = s.objects[a.args[0]];
      if (a.predicate == kOpen && o.state == ObjectState::Locked) {
        const auto& key = s.objects[key_of(o.color)];
        if (key.state == ObjectState::Closed) rpn::detail::add_unique(out, holding_atom(o.color));
      } else if (a.predicate == kOn) {
        if (s.objects[door_of(o.color)].state != ObjectState::Open) rpn::detail::add_unique(out, open_atom(o.color));
      }
    }
    if (out.empty()) return std::nullopt;
    return rpn::detail::canonical(std::move(out), world_.space());
  }

 private:
  GridWorld world_;
};

// ---------------------------------------------------------------------------
// Kitchen rules

class KitchenOracle {
 public:
  KitchenOracle() = default;
  const KitchenWorld& world() const { return world_; }

  bool depends(const kitchen::KitchenState&, const Atom& i, const Atom& j) const {
    using namespace kitchen;
    if (i.negated || j.negated) return false;
    const bool i_on = i.predicate == kOn, j_on = j.predicate == kOn;
    // Plating waits for cooking.
    if (i_on && is_ingredient(i.args[0]) && is_plate(i.args[1]))
      return j.predicate == kCooked && j.args[0] == i.args[0];
    // Serving waits for every ingredient on the plate.
    if (i_on && is_plate(i.args[0]))
      return j_on && is_ingredient(j.args[0]) && j.args[1] == i.args[0];
    if (i.predicate == kCooked) {
      const auto x = i.args[0];
      return (j.predicate == kCleaned && j.args[0] == x) ||
             (j_on && j.args[0] == cookware_for(x) && j.args[1] == kStove) ||
             (j.predicate == kActivated && j.args[0] == kStove);
    }
    // Cookware placement and stove activation form one block.
    if (i_on && is_cookware(i.args[0]) && i.args[1] == kStove)
      return j.predicate == kActivated && j.args[0] == kStove;
    if (i.predicate == kActivated && i.args[0] == kStove)
      return j_on && is_cookware(j.args[0]) && j.args[1] == kStove;
    if (i.predicate == kCleaned) return j.predicate == kActivated && j.args[0] == kSink;
    return false;
  }

  std::optional<Goal> precondition(const kitchen::KitchenState& s, const Goal& block) const {
    using namespace kitchen;
    if (world_.execute(s, block).success) return std::nullopt;
    std::vector<Atom> out;
    auto need = [&](const Atom& a) {
      if (!world_.holds(s, a)) rpn::detail::add_unique(out, a);
    };
    for (const auto& a : block) {
      if (world_.holds(s, a) || a.negated) continue;
      if (a.predicate == kCooked) {
        const auto x = a.args[0];
        need(cleaned_atom(x));
        need(on_atom(cookware_for(x), kStove));
        need(activated_atom(kStove));
      } else if (a.predicate == kCleaned) {
        need(activated_atom(kSink));
      }
    }
    if (out.empty()) return std::nullopt;
    return rpn::detail::canonical(std::move(out), world_.space());
  }

 private:
  KitchenWorld world_;
};

template <class Oracle, class State>
DependencyGraph oracle_dependencies(const Oracle& o, const Goal& g, const State& s) {
  DependencyGraph d{g, {}};
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (i != j && o.depends(s, g[i], g[j])) d.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return d;
}

template <class Oracle, class State>
ScoreMatrix oracle_dependency_matrix(const Oracle& o, const Goal& g, const State& s) {
  ScoreMatrix m = ScoreMatrix::Zero(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  for (auto [i, j] : oracle_dependencies(o, g, s).edges) m(i, j) = 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Scripted experts. Each completes the unsatisfied final-goal atoms in the
// order of the lowest ground-atom index among the ready ones.

namespace detail {

template <class W, class Next>
DemoTrajectory<typename W::State> run_expert(const W& world, const typename W::State& start, const Goal& g,
                                             Next next_goal, int max_steps) {
  DemoTrajectory<typename W::State> d;
  d.final_goal = g;
  auto s = start;
  for (int i = 0; i < max_steps && !world_satisfies(world, s, g); ++i) {
    Goal step = next_goal(s);
    auto t = world.execute(s, step);
    if (!t.success) throw Unsolvable("expert step rejected by the controller");
    d.steps.push_back({s, step});
    s = std::move(t.next);
  }
  if (!world_satisfies(world, s, g)) throw Unsolvable("expert did not reach the goal");
  d.final_snapshot = s;
  return d;
}

}  // namespace detail

inline DemoTrajectory<grid::GridState> demonstrate(const GridOracle& oracle, const grid::GridState& s0,
                                                   const Goal& g) {
  using namespace grid;
  const auto& world = oracle.world();
  const auto& sp = world.space();
  auto next_goal = [&](const GridState& s) -> Goal {
    const Atom* target = nullptr;
    for (const auto& a : g)
      if (!world.holds(s, a) && (!target || sp.node_of(a) < sp.node_of(*target))) target = &a;
    if (!target || target->negated) throw Unsolvable("unsupported goal atom");
    const auto& o = s.objects[target->args[0]];
    if (target->predicate == kOn) {
      const auto& door = s.objects[door_of(o.color)];
      if (door.state == ObjectState::Locked && s.objects[key_of(o.color)].state != ObjectState::Held)
        return Goal::single(holding_atom(o.color));
      if (door.state != ObjectState::Open) return Goal::single(open_atom(o.color));
      return Goal::single(*target);
    }
    if (target->predicate == kOpen && o.state == ObjectState::Locked &&
        s.objects[key_of(o.color)].state != ObjectState::Held)
      return Goal::single(holding_atom(o.color));
    return Goal::single(*target);
  };
  auto d = rpn::detail::run_expert(world, s0, g, next_goal, 64);
  d.dependency_edges = oracle_dependencies(oracle, g, s0).edges;
  return d;
}

inline DemoTrajectory<kitchen::KitchenState> demonstrate(const KitchenOracle& oracle,
                                                         const kitchen::KitchenState& s0, const Goal& g) {
  using namespace kitchen;
  const auto& world = oracle.world();
  auto next_goal = [&](const KitchenState& s) -> Goal {
    auto done = [&](const Atom& a) { return world.holds(s, a); };
    // Serve a plate whose ingredients are all placed.
    // Plate an ingredient that is cooked.
    // Otherwise prepare the lowest-indexed uncooked ingredient.
    std::optional<Atom> serve, plate, cook;
    for (const auto& a : g) {
      if (done(a)) continue;
      if (a.predicate == kOn && is_plate(a.args[0])) {
        bool ready = true;
        for (const auto& b : g)
          if (b.predicate == kOn && b.args[1] == a.args[0] && !done(b)) ready = false;
        if (ready && (!serve || a < *serve)) serve = a;
      } else if (a.predicate == kOn && is_ingredient(a.args[0])) {
        if (s.cooked[a.args[0]] && (!plate || a.args[0] < plate->args[0])) plate = a;
      } else if (a.predicate == kCooked) {
        if (!cook || a.args[0] < cook->args[0]) cook = a;
      }
    }
    // On atoms precede Cooked atoms in ground order; ingredient On slots come
    // before plate On slots.
    if (plate) return Goal::single(*plate);
    if (serve) return Goal::single(*serve);
    if (!cook) throw Unsolvable("no kitchen step applies");
    const auto x = cook->args[0];
    const auto cw = cookware_for(x);
    if (s.location[cw] != kStove) {
      Goal setup;
      setup.push_back(on_atom(cw, kStove));
      if (!s.stove_on) setup.push_back(activated_atom(kStove));
      return setup;
    }
    if (!s.cleaned[x]) {
      if (!s.sink_on) return Goal::single(activated_atom(kSink));
      return Goal::single(cleaned_atom(x));
    }
    if (!s.stove_on) return Goal::single(activated_atom(kStove));
    return Goal::single(*cook);
  };
  auto d = rpn::detail::run_expert(world, s0, g, next_goal, 256);
  d.dependency_edges = oracle_dependencies(oracle, g, s0).edges;
  return d;
}

}  // namespace rpn
