#pragma once
// High-level planners: RPN and the three ablations (E2E, RP-only, SS-only),
// plus the oracle-headed RPN used as a reference.

#include <functional>
#include <optional>
#include <string>

#include "rpn/model.hpp"
#include "rpn/planning.hpp"

namespace rpn {

enum class PlannerKind { RPN, E2E, RPOnly, SSOnly, Oracle };

inline const char* to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::RPN: return "rpn";
    case PlannerKind::E2E: return "e2e";
    case PlannerKind::RPOnly: return "rp-only";
    case PlannerKind::SSOnly: return "ss-only";
    case PlannerKind::Oracle: return "oracle";
  }
  return "?";
}

inline std::optional<PlannerKind> parse_planner(std::string_view s) {
  for (auto k : {PlannerKind::RPN, PlannerKind::E2E, PlannerKind::RPOnly, PlannerKind::SSOnly, PlannerKind::Oracle})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

inline std::vector<HeadTag> heads_for(PlannerKind k) {
  switch (k) {
    case PlannerKind::RPN:
      return {HeadTag::Satisfied, HeadTag::Dependency, HeadTag::Reachable, HeadTag::Precondition};
    case PlannerKind::E2E: return {HeadTag::E2E};
    case PlannerKind::RPOnly: return {HeadTag::Satisfied, HeadTag::RpReachable, HeadTag::RpPrecondition};
    case PlannerKind::SSOnly: return {HeadTag::Satisfied, HeadTag::Dependency, HeadTag::SsNext};
    case PlannerKind::Oracle: return {};
  }
  return {};
}

// Regression without serialization: the unsatisfied part of the goal is one block.
template <PlanningHeads H>
PlanTrace rp_only_plan(const H& heads, const typename H::Obs& obs, const Goal& g, int max_depth = kDefaultDepth) {
  PlanTrace trace;
  Goal goal = g;
  for (int depth = 0; depth < max_depth; ++depth) {
    TraceStep step{goal, {}, {}, {}, 0.0, {}};
    for (const auto& a : goal)
      if (heads.satisfied(obs, a) < kThreshold) step.unsatisfied.push_back(a);
    step.block = step.unsatisfied;
    if (step.block.empty()) {
      trace.steps.push_back(std::move(step));
      trace.termination = Termination::AllSat;
      return trace;
    }
    step.reachable = heads.reachable(obs, step.block);
    if (step.reachable > kThreshold) {
      trace.result = step.block;
      trace.steps.push_back(std::move(step));
      trace.termination = Termination::Reachable;
      return trace;
    }
    step.precondition = heads.precondition(obs, step.block);
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

// Serialization, then a single network call from the chosen block to the next goal.
inline PlanTrace ss_only_plan(const LearnedHeads& heads, const ObsMatrix& obs, const Goal& g) {
  PlanTrace trace;
  auto ser = subgoal_serialization(heads, obs, g);
  TraceStep step{g, ser.unsatisfied, ser.dependency, ser.block, 0.0, {}};
  if (ser.block.empty()) {
    trace.steps.push_back(std::move(step));
    trace.termination = Termination::AllSat;
    return trace;
  }
  Goal next = heads.node_goal(HeadTag::SsNext, obs, ser.block);
  step.precondition = next;
  trace.steps.push_back(std::move(step));
  trace.termination = next.empty() ? Termination::NoPrec : Termination::Reachable;
  trace.result = next;
  return trace;
}

inline PlanTrace e2e_plan(const LearnedHeads& heads, const ObsMatrix& obs, const Goal& g) {
  PlanTrace trace;
  Goal next = heads.node_goal(HeadTag::E2E, obs, g);
  trace.steps.push_back(TraceStep{g, {}, {}, {}, 0.0, next});
  trace.termination = next.empty() ? Termination::AllSat : Termination::Reachable;
  trace.result = next;
  return trace;
}

inline PlanTrace plan_learned(PlannerKind kind, const Model& model, const ObsMatrix& obs, const Goal& g,
                              int max_depth = kDefaultDepth) {
  switch (kind) {
    case PlannerKind::RPN: return regression_planning(LearnedHeads(model), obs, g, max_depth);
    case PlannerKind::RPOnly:
      return rp_only_plan(LearnedHeads(model, HeadTag::RpReachable, HeadTag::RpPrecondition), obs, g, max_depth);
    case PlannerKind::SSOnly: return ss_only_plan(LearnedHeads(model), obs, g);
    case PlannerKind::E2E: return e2e_plan(LearnedHeads(model), obs, g);
    case PlannerKind::Oracle: break;
  }
  throw std::invalid_argument("oracle planner needs an oracle, not a model");
}

// A planner maps (state, final goal) to a trace whose result is handed to the controller.
template <class State>
using PlannerFn = std::function<PlanTrace(const State&, const Goal&)>;

template <World W>
PlannerFn<typename W::State> learned_planner(const W& world, PlannerKind kind, const Model& model,
                                             int max_depth = kDefaultDepth) {
  // Dependency is only queried for goals with two or more unsatisfied atoms,
  // which some domains never produce.
  for (auto h : heads_for(kind))
    if (h != HeadTag::Dependency && !model.has(h))
      throw std::invalid_argument(std::string("checkpoint lacks the ") + to_string(h) + " head needed by " +
                                  to_string(kind));
  return [&world, kind, &model, max_depth](const typename W::State& s, const Goal& g) {
    return plan_learned(kind, model, to_obs(world.encode(s)), g, max_depth);
  };
}

template <class Oracle>
auto oracle_planner(const Oracle& oracle, int max_depth = kDefaultDepth) {
  using State = typename OracleHeads<Oracle>::Obs;
  return PlannerFn<State>([&oracle, max_depth](const State& s, const Goal& g) {
    return regression_planning(OracleHeads<Oracle>(oracle), s, g, max_depth);
  });
}

}  // namespace rpn
