#pragma once
// Uniform adaptor over the environments used by planners, oracles and the
// episode runner.

#include <concepts>
#include <optional>
#include <string>
#include <utility>

#include "rpn/controller.hpp"
#include "rpn/entity.hpp"
#include "rpn/envs/grid.hpp"
#include "rpn/envs/kitchen.hpp"
#include "rpn/goal.hpp"

namespace rpn {

template <class State>
struct Transition {
  bool success = false;
  std::optional<ControllerFailure> failure;
  State next;
};

template <class W>
concept World = requires(const W& w, const typename W::State& s, const Atom& a, const Goal& g) {
  { w.space() } -> std::same_as<const PlanningSpace&>;
  { w.encode(s) } -> std::same_as<EntitySet>;
  { w.holds(s, a) } -> std::same_as<bool>;
  { w.execute(s, g) } -> std::same_as<Transition<typename W::State>>;
  { w.steps(s) } -> std::convertible_to<int>;
  { w.units(g) } -> std::convertible_to<int>;
  { w.units_done(s, g) } -> std::convertible_to<int>;
};

template <class W>
bool world_satisfies(const W& w, const typename W::State& s, const Goal& g) {
  for (const auto& a : g)
    if (!w.holds(s, a)) return false;
  return true;
}

class GridWorld {
 public:
  using State = grid::GridState;

  explicit GridWorld(grid::GridDomain d) : domain_(d) {}

  grid::GridDomain domain() const { return domain_; }
  const PlanningSpace& space() const { return grid::space(domain_); }
  EntitySet encode(const State& s) const { return grid::encode_entities(s); }
  bool holds(const State& s, const Atom& a) const { return grid::evaluate_atom(s, a); }
  int steps(const State& s) const { return s.step_count; }

  Transition<State> execute(const State& s, const Goal& g) const {
    auto [r, next] = grid::run_controller(s, g);
    return {r.success, r.failure, std::move(next)};
  }

  // Completion units are the goal atoms.
  int units(const Goal& g) const { return static_cast<int>(g.size()); }
  int units_done(const State& s, const Goal& g) const {
    int n = 0;
    for (const auto& a : g) n += holds(s, a) ? 1 : 0;
    return n;
  }

 private:
  grid::GridDomain domain_;
};

class KitchenWorld {
 public:
  using State = kitchen::KitchenState;

  const PlanningSpace& space() const { return kitchen::space(); }
  EntitySet encode(const State& s) const { return kitchen::encode_entities(s); }
  bool holds(const State& s, const Atom& a) const { return kitchen::evaluate_atom(s, a); }
  int steps(const State& s) const { return s.step_count; }

  Transition<State> execute(const State& s, const Goal& g) const {
    auto [r, next] = kitchen::run_macro(s, g);
    return {r.success, r.failure, std::move(next)};
  }

  // Completion units are ingredient preparations: cooked, on its plate, and
  // that plate served.
  int units(const Goal& g) const {
    int n = 0;
    for (const auto& a : g) n += a.predicate == kitchen::kCooked ? 1 : 0;
    return n;
  }
  int units_done(const State& s, const Goal& g) const {
    int n = 0;
    for (const auto& a : g) {
      if (a.predicate != kitchen::kCooked) continue;
      const auto x = a.args[0];
      bool done = holds(s, a);
      bool placed = false;
      for (const auto& b : g) {
        if (b.predicate != kitchen::kOn || b.args[0] != x || !kitchen::is_plate(b.args[1])) continue;
        placed = holds(s, b);
        for (const auto& c : g)
          if (c.predicate == kitchen::kOn && c.args[0] == b.args[1]) placed = placed && holds(s, c);
      }
      n += done && placed ? 1 : 0;
    }
    return n;
  }
};

}  // namespace rpn
