#pragma once
// Symbolic kitchen: ingredients are cleaned at an active sink and cooked in the
// kind-matching cookware (fruit: pan, vegetable: pot) on an active stove, then
// plated and served. Each macro (one place, one activation, one clean/cook
// step) costs one step.

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rpn/controller.hpp"
#include "rpn/entity.hpp"
#include "rpn/goal.hpp"
#include "rpn/random.hpp"

namespace rpn::kitchen {

// Roster indices.
inline constexpr EntityIndex kApple = 0, kBanana = 1, kPeach = 2, kCabbage = 3, kCarrot = 4, kTomato = 5;
inline constexpr EntityIndex kPan = 6, kPot = 7, kStove = 8, kSink = 9;
inline constexpr EntityIndex kPlate0 = 10, kArea0 = 13, kTable = 16, kTray = 17;
inline constexpr int kIngredients = 6, kPlates = 3, kObjects = 18;

inline constexpr PredicateIndex kOn = 0, kCooked = 1, kCleaned = 2, kActivated = 3;

inline constexpr int kCategories = 8;  // fruit vegetable cookware stove sink plate area surface
inline constexpr int kZones = 10;      // table sink stove tray plate_0..2 area_0..2
inline constexpr int kUnaryDim = kObjects + kCategories + 3 + kZones;
inline constexpr int kFeatureDim = 2 * kUnaryDim + 1;

enum class Action : std::uint8_t { Place, Activate, Deactivate, Clean, Cook };

struct Macro {
  Action action = Action::Place;
  EntityIndex object = kNoEntity;
  EntityIndex target = kNoEntity;
  friend bool operator==(const Macro&, const Macro&) = default;
};

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Place: return "place";
    case Action::Activate: return "activate";
    case Action::Deactivate: return "deactivate";
    case Action::Clean: return "clean";
    case Action::Cook: return "cook";
  }
  return "?";
}

struct KitchenState {
  // Support of each object: an ingredient rests on the table, the sink, a
  // cookware or a plate; cookware on the tray or stove; plates on the table or
  // an area. Fixed objects point at themselves.
  std::array<EntityIndex, kObjects> location{};
  std::array<bool, kIngredients> cleaned{};
  std::array<bool, kIngredients> cooked{};
  bool stove_on = false;
  bool sink_on = false;
  int step_count = 0;
  friend bool operator==(const KitchenState&, const KitchenState&) = default;
};

struct MealTask {
  int ingredients = 3;
  int dishes = 2;
};

using KitchenControllerResult = ControllerResult<Macro>;

inline bool is_ingredient(EntityIndex e) { return e < kIngredients; }
inline bool is_fruit(EntityIndex e) { return e < 3; }
inline bool is_cookware(EntityIndex e) { return e == kPan || e == kPot; }
inline bool is_plate(EntityIndex e) { return e >= kPlate0 && e < kPlate0 + kPlates; }
inline bool is_area(EntityIndex e) { return e >= kArea0 && e < kArea0 + kPlates; }
inline bool is_appliance(EntityIndex e) { return e == kStove || e == kSink; }
inline EntityIndex cookware_for(EntityIndex ingredient) { return is_fruit(ingredient) ? kPan : kPot; }

inline DomainSchema make_schema() {
  std::vector<Predicate> preds{
      {"On",
       2,
       {{"fruit", "sink"},
        {"fruit", "cookware"},
        {"fruit", "plate"},
        {"vegetable", "sink"},
        {"vegetable", "cookware"},
        {"vegetable", "plate"},
        {"cookware", "stove"},
        {"plate", "area"}}},
      {"Cooked", 1, {{"fruit"}, {"vegetable"}}},
      {"Cleaned", 1, {{"fruit"}, {"vegetable"}}},
      {"Activated", 1, {{"stove"}, {"sink"}}},
  };
  std::vector<EntityDecl> ents{{"apple", "fruit"},     {"banana", "fruit"},     {"peach", "fruit"},
                               {"cabbage", "vegetable"}, {"carrot", "vegetable"}, {"tomato", "vegetable"},
                               {"pan", "cookware"},    {"pot", "cookware"},     {"stove", "stove"},
                               {"sink", "sink"},       {"plate_0", "plate"},    {"plate_1", "plate"},
                               {"plate_2", "plate"},   {"area_0", "area"},      {"area_1", "area"},
                               {"area_2", "area"},     {"table", "surface"},    {"tray", "surface"}};
  return DomainSchema("kitchen", std::move(preds), std::move(ents), kFeatureDim);
}

inline int category_of(EntityIndex e) {
  if (e < 3) return 0;
  if (e < 6) return 1;
  if (is_cookware(e)) return 2;
  if (e == kStove) return 3;
  if (e == kSink) return 4;
  if (is_plate(e)) return 5;
  if (is_area(e)) return 6;
  return 7;
}

inline FeatureLayout feature_layout() {
  std::vector<FeatureBlock> blocks;
  for (int side = 0; side < 2; ++side) {
    const int o = side * kUnaryDim;
    const std::string p = side == 0 ? "a." : "b.";
    blocks.push_back({p + "identity", o, kObjects, true});
    blocks.push_back({p + "category", o + kObjects, kCategories, true});
    blocks.push_back({p + "flags", o + kObjects + kCategories, 3, false});
    blocks.push_back({p + "zone", o + kObjects + kCategories + 3, kZones, true});
  }
  blocks.push_back({"on", 2 * kUnaryDim, 1, false});
  return FeatureLayout{std::move(blocks)};
}

// Roster: every object as a unary entity, then every pair referenced by an On slot.
inline const PlanningSpace& space() {
  static const PlanningSpace sp = [] {
    auto schema = make_schema();
    std::vector<EntityKey> roster;
    for (int i = 0; i < kObjects; ++i) roster.push_back({static_cast<EntityIndex>(i)});
    for (const auto& a : ground_atoms(schema))
      if (a.arity == 2) roster.push_back({a.args[0], a.args[1]});
    return PlanningSpace(std::move(schema), std::move(roster), feature_layout());
  }();
  return sp;
}

inline Atom on_atom(EntityIndex a, EntityIndex b) { return Atom::binary(kOn, a, b); }
inline Atom cooked_atom(EntityIndex a) { return Atom::unary(kCooked, a); }
inline Atom cleaned_atom(EntityIndex a) { return Atom::unary(kCleaned, a); }
inline Atom activated_atom(EntityIndex a) { return Atom::unary(kActivated, a); }

// ---------------------------------------------------------------------------

inline KitchenState initial_state() {
  KitchenState s;
  for (int i = 0; i < kObjects; ++i) s.location[i] = static_cast<EntityIndex>(i);
  for (int i = 0; i < kIngredients; ++i) s.location[i] = kTable;
  s.location[kPan] = kTray;
  s.location[kPot] = kTray;
  for (int p = 0; p < kPlates; ++p) s.location[kPlate0 + p] = kTable;
  return s;
}

inline bool evaluate_atom(const KitchenState& s, const Atom& a) {
  for (int i = 0; i < a.arity; ++i)
    if (a.args[i] >= kObjects) throw EnvError(EnvErrc::UnknownEntity, "kitchen atom references an unknown entity");
  bool v = false;
  switch (a.predicate) {
    case kOn: v = a.arity == 2 && s.location[a.args[0]] == a.args[1] && a.args[0] != a.args[1]; break;
    case kCooked: v = is_ingredient(a.args[0]) && s.cooked[a.args[0]]; break;
    case kCleaned: v = is_ingredient(a.args[0]) && s.cleaned[a.args[0]]; break;
    case kActivated: v = (a.args[0] == kStove && s.stove_on) || (a.args[0] == kSink && s.sink_on); break;
    default: throw EnvError(EnvErrc::UnknownEntity, "kitchen atom with unknown predicate");
  }
  return a.negated ? !v : v;
}

inline bool satisfies(const KitchenState& s, const Goal& g) {
  for (const auto& a : g)
    if (!evaluate_atom(s, a)) return false;
  return true;
}

// Contents react to appliances: washing at an active sink, cooking of clean
// ingredients in their own cookware on an active stove.
inline void settle(KitchenState& s) {
  for (EntityIndex i = 0; i < kIngredients; ++i) {
    const EntityIndex at = s.location[i];
    if (at == kSink && s.sink_on) s.cleaned[i] = true;
    if (at == cookware_for(i) && s.location[at] == kStove && s.stove_on && s.cleaned[i]) s.cooked[i] = true;
  }
}

inline bool area_occupied(const KitchenState& s, EntityIndex area, EntityIndex except) {
  for (int p = 0; p < kPlates; ++p) {
    const auto plate = static_cast<EntityIndex>(kPlate0 + p);
    if (plate != except && s.location[plate] == area) return true;
  }
  return false;
}

// Applies one macro; returns false (state untouched) when it is not executable.
inline bool apply_macro(KitchenState& s, const Macro& m) {
  switch (m.action) {
    case Action::Place: {
      const auto o = m.object, t = m.target;
      bool ok = (is_ingredient(o) && (t == kTable || t == kSink || is_cookware(t) || is_plate(t))) ||
                (is_cookware(o) && (t == kTray || t == kStove)) ||
                (is_plate(o) && (t == kTable || (is_area(t) && !area_occupied(s, t, o))));
      if (!ok) return false;
      s.location[o] = t;
      break;
    }
    case Action::Activate:
    case Action::Deactivate:
      if (!is_appliance(m.object)) return false;
      (m.object == kStove ? s.stove_on : s.sink_on) = m.action == Action::Activate;
      break;
    case Action::Clean:
      if (!is_ingredient(m.object) || !s.sink_on) return false;
      s.location[m.object] = kSink;
      break;
    case Action::Cook: {
      const auto cw = is_ingredient(m.object) ? cookware_for(m.object) : kNoEntity;
      if (cw == kNoEntity || !s.cleaned[m.object] || s.location[cw] != kStove || !s.stove_on) return false;
      s.location[m.object] = cw;
      break;
    }
  }
  ++s.step_count;
  settle(s);
  return true;
}

inline bool is_setup_atom(const Atom& a) {
  return !a.negated && (a.predicate == kActivated || (a.predicate == kOn && is_cookware(a.args[0])));
}

namespace detail {

inline std::optional<Macro> macro_for(const KitchenState& s, const Atom& a) {
  if (a.negated) {
    if (a.predicate == kActivated && is_appliance(a.args[0])) return Macro{Action::Deactivate, a.args[0]};
    return std::nullopt;
  }
  switch (a.predicate) {
    case kOn: return Macro{Action::Place, a.args[0], a.args[1]};
    case kActivated:
      if (!is_appliance(a.args[0])) return std::nullopt;
      return Macro{Action::Activate, a.args[0]};
    case kCleaned: return Macro{Action::Clean, a.args[0]};
    case kCooked: return Macro{Action::Cook, a.args[0]};
    default: (void)s; return std::nullopt;
  }
}

}  // namespace detail

// Accepts one unsatisfied atom, or several when all of them are setup atoms
// (activations and cookware placement), executed in goal order.
inline std::pair<KitchenControllerResult, KitchenState> run_macro(const KitchenState& s, const Goal& g) {
  std::vector<Atom> pending;
  for (const auto& a : g)
    if (!evaluate_atom(s, a)) pending.push_back(a);
  if (pending.empty()) return {KitchenControllerResult{true, {}, std::nullopt}, s};
  if (pending.size() > 1)
    for (const auto& a : pending)
      if (!is_setup_atom(a)) return {KitchenControllerResult::fail(ControllerFailure::InvalidGoal), s};
  KitchenState next = s;
  KitchenControllerResult r{true, {}, std::nullopt};
  for (const auto& a : pending) {
    if (evaluate_atom(next, a)) continue;
    auto m = detail::macro_for(next, a);
    if (!m || !apply_macro(next, *m)) return {KitchenControllerResult::fail(ControllerFailure::InvalidGoal), s};
    r.actions.push_back(*m);
  }
  if (!satisfies(next, g)) return {KitchenControllerResult::fail(ControllerFailure::InvalidGoal), s};
  return {std::move(r), std::move(next)};
}

// ---------------------------------------------------------------------------
// Features

inline int zone_of(const KitchenState& s, EntityIndex e) {
  auto zone_index = [](EntityIndex place) -> int {
    if (place == kTable) return 0;
    if (place == kSink) return 1;
    if (place == kStove) return 2;
    if (place == kTray) return 3;
    if (is_plate(place)) return 4 + (place - kPlate0);
    if (is_area(place)) return 7 + (place - kArea0);
    return 0;
  };
  if (is_ingredient(e)) {
    const auto at = s.location[e];
    return zone_index(is_cookware(at) ? s.location[at] : at);
  }
  if (is_cookware(e) || is_plate(e)) return zone_index(s.location[e]);
  return zone_index(e);
}

inline void write_unary(const KitchenState& s, EntityIndex e, double* out) {
  out[e] = 1.0;
  out[kObjects + category_of(e)] = 1.0;
  double* flags = out + kObjects + kCategories;
  if (is_ingredient(e)) {
    flags[0] = s.cleaned[e] ? 1.0 : 0.0;
    flags[1] = s.cooked[e] ? 1.0 : 0.0;
  }
  if (e == kStove) flags[2] = s.stove_on ? 1.0 : 0.0;
  if (e == kSink) flags[2] = s.sink_on ? 1.0 : 0.0;
  out[kObjects + kCategories + 3 + zone_of(s, e)] = 1.0;
}

inline EntitySet encode_entities(const KitchenState& s) {
  const auto& sp = space();
  const auto& keys = *sp.roster();
  FeatureMatrix f = FeatureMatrix::Zero(static_cast<Eigen::Index>(keys.size()), kFeatureDim);
  for (std::size_t r = 0; r < keys.size(); ++r) {
    double* row = f.data() + r * kFeatureDim;
    const auto& k = keys[r];
    write_unary(s, k.first, row);
    if (k.is_pair()) {
      write_unary(s, k.second, row + kUnaryDim);
      row[2 * kUnaryDim] = s.location[k.first] == k.second ? 1.0 : 0.0;
    } else {
      write_unary(s, k.first, row + kUnaryDim);
    }
  }
  return EntitySet(sp.roster(), std::move(f));
}

// ---------------------------------------------------------------------------
// Tasks

inline std::pair<KitchenState, Goal> sample_meal_task(const MealTask& task, std::uint64_t seed) {
  if (task.dishes < 1 || task.dishes > kPlates || task.ingredients < task.dishes || task.ingredients > kIngredients)
    throw EnvError(EnvErrc::InvalidParams, "meal task requires 1 <= D <= 3 and D <= I <= 6");
  Rng rng(mix_seed(seed, 37));
  KitchenState s = initial_state();
  for (int i = 0; i < kIngredients; ++i) s.cleaned[i] = rng.coin();

  std::vector<EntityIndex> ings{0, 1, 2, 3, 4, 5};
  rng.shuffle(ings);
  ings.resize(static_cast<std::size_t>(task.ingredients));
  std::sort(ings.begin(), ings.end());
  std::vector<EntityIndex> plates{kPlate0, kPlate0 + 1, kPlate0 + 2};
  rng.shuffle(plates);
  plates.resize(static_cast<std::size_t>(task.dishes));
  std::vector<EntityIndex> areas{kArea0, kArea0 + 1, kArea0 + 2};
  rng.shuffle(areas);

  // Each dish gets at least one ingredient; the rest are spread at random.
  std::vector<int> dish_of(ings.size());
  std::vector<std::size_t> order(ings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t k = 0; k < order.size(); ++k)
    dish_of[order[k]] = k < plates.size() ? static_cast<int>(k) : rng.range(0, task.dishes - 1);

  Goal g;
  for (int d = 0; d < task.dishes; ++d) {
    for (std::size_t i = 0; i < ings.size(); ++i) {
      if (dish_of[i] != d) continue;
      g.push_back(cooked_atom(ings[i]));
      g.push_back(on_atom(ings[i], plates[d]));
    }
    g.push_back(on_atom(plates[d], areas[d]));
  }
  return {s, g};
}

// ---------------------------------------------------------------------------
// Snapshot records: header, appliances, one object per line as
// id,kind,location,cleaned,cooked.

inline std::string to_snapshot(const KitchenState& s) {
  const auto& schema = space().schema();
  std::ostringstream os;
  os << "kitchenstate v1 " << s.step_count << '\n';
  os << "appliances," << (s.stove_on ? 1 : 0) << ',' << (s.sink_on ? 1 : 0) << '\n';
  for (int i = 0; i < kObjects; ++i) {
    const auto& e = schema.entities()[i];
    os << e.id << ',' << e.kind << ',' << schema.entities()[s.location[i]].id << ',';
    os << (i < kIngredients && s.cleaned[i] ? 1 : 0) << ',' << (i < kIngredients && s.cooked[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

inline KitchenState from_snapshot(const std::string& text) {
  auto fail = [](const std::string& why) -> KitchenState { throw EnvError(EnvErrc::CorruptSnapshot, why); };
  const auto& schema = space().schema();
  std::istringstream is(text);
  std::string line;
  KitchenState s = initial_state();
  if (!std::getline(is, line)) return fail("empty snapshot");
  {
    std::istringstream hs(line);
    std::string magic, version;
    hs >> magic >> version >> s.step_count;
    if (!hs || magic != "kitchenstate" || version != "v1") return fail("bad header");
  }
  auto split = [](const std::string& l) {
    std::vector<std::string> f(1);
    for (char c : l) {
      if (c == ',')
        f.emplace_back();
      else
        f.back() += c;
    }
    return f;
  };
  if (!std::getline(is, line)) return fail("missing appliances");
  auto ap = split(line);
  if (ap.size() != 3 || ap[0] != "appliances") return fail("bad appliances line");
  s.stove_on = ap[1] == "1";
  s.sink_on = ap[2] == "1";
  std::array<bool, kObjects> seen{};
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != 5) return fail("bad object line: " + line);
    auto e = schema.find_entity(f[0]);
    auto at = schema.find_entity(f[2]);
    if (!e || !at) return fail("unknown object in: " + line);
    seen[*e] = true;
    s.location[*e] = *at;
    if (*e < kIngredients) {
      s.cleaned[*e] = f[3] == "1";
      s.cooked[*e] = f[4] == "1";
    }
  }
  for (bool b : seen)
    if (!b) return fail("missing object record");
  return s;
}

}  // namespace rpn::kitchen
