#pragma once
// Subgoal serialization and recursive regression planning over any set of
// heads (learned networks or oracle rules).

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rpn/goal.hpp"
#include "rpn/graph.hpp"
#include "rpn/oracle.hpp"
#include "rpn/world.hpp"

namespace rpn {

inline constexpr double kThreshold = 0.5;
inline constexpr int kDefaultDepth = 10;

// Heads consume an observation type of their choice (entity features for
// networks, raw state for oracles).
template <class H>
concept PlanningHeads = requires(const H& h, const typename H::Obs& o, const Goal& g, const Atom& a) {
  { h.satisfied(o, a) } -> std::convertible_to<double>;
  { h.dependency(o, g) } -> std::convertible_to<ScoreMatrix>;
  { h.reachable(o, g) } -> std::convertible_to<double>;
  { h.precondition(o, g) } -> std::convertible_to<Goal>;
  { h.space() } -> std::same_as<const PlanningSpace&>;
};

enum class Termination { Reachable, AllSat, NoPrec, MaxIter };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Reachable: return "Reachable";
    case Termination::AllSat: return "AllSat";
    case Termination::NoPrec: return "NoPrec";
    case Termination::MaxIter: return "MaxIter";
  }
  return "?";
}

struct Serialization {
  Goal unsatisfied;
  ScoreMatrix dependency;
  Goal block;  // empty when every subgoal is judged satisfied
};

struct TraceStep {
  Goal goal;
  Goal unsatisfied;
  ScoreMatrix dependency;
  Goal block;
  double reachable = 0.0;
  Goal precondition;
};

struct PlanTrace {
  std::vector<TraceStep> steps;
  Termination termination = Termination::AllSat;
  Goal result;  // nonempty iff termination == Reachable
};

// Unsatisfied subgoals -> dependency graph -> the sink block to complete first.
template <PlanningHeads H>
Serialization subgoal_serialization(const H& heads, const typename H::Obs& obs, const Goal& g) {
  Serialization out;
  for (const auto& a : g)
    if (heads.satisfied(obs, a) < kThreshold) out.unsatisfied.push_back(a);
  if (out.unsatisfied.empty()) return out;
  out.dependency = heads.dependency(obs, out.unsatisfied);
  std::vector<std::size_t> priority;
  for (const auto& a : out.unsatisfied) priority.push_back(heads.space().node_of(a));
  const BlockGraph bg = find_blocks(out.dependency, kThreshold);
  std::vector<std::size_t> members;
  for (int i : choose_sink(bg, priority)) members.push_back(static_cast<std::size_t>(i));
  out.block = out.unsatisfied.subset(members);
  return out;
}

template <PlanningHeads H>
PlanTrace regression_planning(const H& heads, const typename H::Obs& obs, const Goal& g, int max_depth = kDefaultDepth) {
  PlanTrace trace;
  Goal goal = g;
  for (int depth = 0; depth < max_depth; ++depth) {
    auto ser = subgoal_serialization(heads, obs, goal);
    TraceStep step{goal, ser.unsatisfied, ser.dependency, ser.block, 0.0, {}};
    if (ser.block.empty()) {
      trace.steps.push_back(std::move(step));
      trace.termination = Termination::AllSat;
      return trace;
    }
    step.reachable = heads.reachable(obs, ser.block);
    if (step.reachable > kThreshold) {
      trace.steps.push_back(std::move(step));
      trace.termination = Termination::Reachable;
      trace.result = ser.block;
      return trace;
    }
    step.precondition = heads.precondition(obs, ser.block);
    goal = step.precondition;
    trace.steps.push_back(std::move(step));
    if (goal.empty()) {
      trace.termination = Termination::NoPrec;
      return trace;
    }
  }
  trace.termination = Termination::MaxIter;
  return trace;
}

// Indented regression trace, one line per depth.
inline void print_trace(std::ostream& os, const PlanTrace& t, const DomainSchema& schema) {
  auto fmt = [&](const Goal& g) { return g.empty() ? std::string("{}") : format_goal(g, schema); };
  for (std::size_t d = 0; d < t.steps.size(); ++d) {
    const auto& s = t.steps[d];
    const std::string pad(2 * d, ' ');
    os << pad << "goal: " << fmt(s.goal) << '\n';
    os << pad << "  unsatisfied: " << fmt(s.unsatisfied) << '\n';
    if (s.block.empty()) continue;
    os << pad << "  block: " << fmt(s.block) << "  reachable=" << s.reachable << '\n';
    if (s.reachable <= kThreshold) os << pad << "  precondition: " << fmt(s.precondition) << '\n';
  }
  os << "=> " << to_string(t.termination);
  if (t.termination == Termination::Reachable) os << ": " << fmt(t.result);
  os << '\n';
}

// Oracle-backed heads: exact rules over the environment state.
template <class Oracle>
class OracleHeads {
 public:
  using Obs = typename std::remove_cvref_t<decltype(std::declval<Oracle>().world())>::State;

  explicit OracleHeads(const Oracle& o) : oracle_(o) {}

  const PlanningSpace& space() const { return oracle_.world().space(); }
  double satisfied(const Obs& s, const Atom& a) const { return oracle_.world().holds(s, a) ? 1.0 : 0.0; }
  ScoreMatrix dependency(const Obs& s, const Goal& g) const { return oracle_dependency_matrix(oracle_, g, s); }
  double reachable(const Obs& s, const Goal& g) const { return oracle_.world().execute(s, g).success ? 1.0 : 0.0; }
  Goal precondition(const Obs& s, const Goal& g) const { return oracle_.precondition(s, g).value_or(Goal{}); }

 private:
  const Oracle& oracle_;
};

}  // namespace rpn
