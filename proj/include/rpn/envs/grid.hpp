#pragma once
// Deterministic 2D grid environments (DoorKey, RoomGoal) with an A*-based
// low-level controller and object-centric feature encoding.
//
// Coordinates: x grows right, y grows down. Facing: 0=+x, 1=+y, 2=-x, 3=-y.
// Keys and closed doors block movement; open doors and tiles do not.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rpn/controller.hpp"
#include "rpn/entity.hpp"
#include "rpn/goal.hpp"
#include "rpn/random.hpp"

namespace rpn::grid {

enum class GridDomain : std::uint8_t { DoorKey, RoomGoal };
enum class ObjectType : std::uint8_t { Door, Key, Tile };
enum class Color : std::uint8_t { Red, Green, Blue, Purple, Yellow, Grey };
enum class ObjectState : std::uint8_t { Open, Closed, Locked, Held, Consumed };
enum class Action : std::uint8_t { Left, Right, Forward, Pickup, Toggle };
enum class RoomTask : std::uint8_t { KeyDoor, DoorGoal, KeyDoorGoal };

inline constexpr int kColors = 6;
inline constexpr std::array<const char*, kColors> kColorNames{"red", "green", "blue", "purple", "yellow", "grey"};
inline constexpr int kWidth = 13;
inline constexpr int kHeight = 13;
inline constexpr int kFeatureDim = 3 + kColors + 4 + 2;

// Predicate indices in the grid schema.
inline constexpr PredicateIndex kOpen = 0, kLocked = 1, kHolding = 2, kOn = 3;

struct Pos {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pos&, const Pos&) = default;
};

struct GridObject {
  ObjectType type = ObjectType::Door;
  Color color = Color::Red;
  ObjectState state = ObjectState::Closed;
  Pos pos;
  friend bool operator==(const GridObject&, const GridObject&) = default;
};

struct GridState {
  GridDomain domain = GridDomain::DoorKey;
  int width = kWidth;
  int height = kHeight;
  Pos agent;
  int facing = 0;
  std::vector<GridObject> objects;  // parallel to the schema entity roster
  std::vector<std::uint8_t> walls;  // width * height
  int step_count = 0;

  bool wall(Pos p) const { return walls[static_cast<std::size_t>(p.y * width + p.x)] != 0; }
  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  friend bool operator==(const GridState&, const GridState&) = default;
};

struct GridTask {
  GridDomain domain = GridDomain::DoorKey;
  int doors = 2;
  RoomTask room = RoomTask::KeyDoor;
};

using GridControllerResult = ControllerResult<Action>;

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::Forward: return "forward";
    case Action::Pickup: return "pickup";
    case Action::Toggle: return "toggle";
  }
  return "?";
}

inline const char* to_string(RoomTask t) {
  switch (t) {
    case RoomTask::KeyDoor: return "k-d";
    case RoomTask::DoorGoal: return "d-g";
    case RoomTask::KeyDoorGoal: return "k-d-g";
  }
  return "?";
}

inline const char* to_string(ObjectState s) {
  switch (s) {
    case ObjectState::Open: return "open";
    case ObjectState::Closed: return "closed";
    case ObjectState::Locked: return "locked";
    case ObjectState::Held: return "held";
    case ObjectState::Consumed: return "consumed";
  }
  return "?";
}

inline const char* to_string(ObjectType t) {
  switch (t) {
    case ObjectType::Door: return "door";
    case ObjectType::Key: return "key";
    case ObjectType::Tile: return "tile";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Schema and planning space

inline DomainSchema make_schema(GridDomain d) {
  std::vector<Predicate> preds{
      {"Open", 1, {{"door"}}},
      {"Locked", 1, {{"door"}}},
      {"Holding", 1, {{"key"}}},
      {"On", 1, {{"tile"}}},
  };
  std::vector<EntityDecl> ents;
  for (auto c : kColorNames) ents.push_back({std::string("door_") + c, "door"});
  for (auto c : kColorNames) ents.push_back({std::string("key_") + c, "key"});
  if (d == GridDomain::RoomGoal)
    for (auto c : kColorNames) ents.push_back({std::string("tile_") + c, "tile"});
  return DomainSchema(d == GridDomain::DoorKey ? "doorkey" : "roomgoal", std::move(preds), std::move(ents),
                      kFeatureDim);
}

inline FeatureLayout feature_layout() {
  return FeatureLayout{{{"type", 0, 3, true},
                        {"color", 3, kColors, true},
                        {"state", 3 + kColors, 4, true},
                        {"location", 3 + kColors + 4, 2, false}}};
}

inline const PlanningSpace& space(GridDomain d) {
  static const PlanningSpace doorkey = [] {
    auto s = make_schema(GridDomain::DoorKey);
    std::vector<EntityKey> roster;
    for (std::size_t i = 0; i < s.entities().size(); ++i) roster.push_back({static_cast<EntityIndex>(i)});
    return PlanningSpace(std::move(s), std::move(roster), feature_layout());
  }();
  static const PlanningSpace roomgoal = [] {
    auto s = make_schema(GridDomain::RoomGoal);
    std::vector<EntityKey> roster;
    for (std::size_t i = 0; i < s.entities().size(); ++i) roster.push_back({static_cast<EntityIndex>(i)});
    return PlanningSpace(std::move(s), std::move(roster), feature_layout());
  }();
  return d == GridDomain::DoorKey ? doorkey : roomgoal;
}

inline EntityIndex door_of(Color c) { return static_cast<EntityIndex>(c); }
inline EntityIndex key_of(Color c) { return static_cast<EntityIndex>(kColors + static_cast<int>(c)); }
inline EntityIndex tile_of(Color c) { return static_cast<EntityIndex>(2 * kColors + static_cast<int>(c)); }

inline Atom open_atom(Color c) { return Atom::unary(kOpen, door_of(c)); }
inline Atom locked_atom(Color c) { return Atom::unary(kLocked, door_of(c)); }
inline Atom holding_atom(Color c) { return Atom::unary(kHolding, key_of(c)); }
inline Atom on_atom(Color c) { return Atom::unary(kOn, tile_of(c)); }

// ---------------------------------------------------------------------------
// Dynamics

inline Pos step_pos(Pos p, int facing) {
  static constexpr int dx[4] = {1, 0, -1, 0};
  static constexpr int dy[4] = {0, 1, 0, -1};
  return {p.x + dx[facing], p.y + dy[facing]};
}

// Index of the object occupying a cell on the floor (held/consumed keys are not).
inline int object_at(const GridState& s, Pos p, ObjectType type) {
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    if (o.type != type || !(o.pos == p)) continue;
    if (o.type == ObjectType::Key && o.state != ObjectState::Closed) continue;
    return static_cast<int>(i);
  }
  return -1;
}

inline bool passable(const GridState& s, Pos p) {
  if (!s.in_bounds(p) || s.wall(p)) return false;
  for (const auto& o : s.objects) {
    if (!(o.pos == p)) continue;
    if (o.type == ObjectType::Door && o.state != ObjectState::Open) return false;
    if (o.type == ObjectType::Key && o.state == ObjectState::Closed) return false;
  }
  return true;
}

inline int held_key(const GridState& s) {
  for (std::size_t i = 0; i < s.objects.size(); ++i)
    if (s.objects[i].type == ObjectType::Key && s.objects[i].state == ObjectState::Held) return static_cast<int>(i);
  return -1;
}

inline void apply_action(GridState& s, Action a) {
  ++s.step_count;
  const Pos front = step_pos(s.agent, s.facing);
  switch (a) {
    case Action::Left: s.facing = (s.facing + 3) % 4; break;
    case Action::Right: s.facing = (s.facing + 1) % 4; break;
    case Action::Forward:
      if (passable(s, front)) s.agent = front;
      break;
    case Action::Pickup: {
      int k = object_at(s, front, ObjectType::Key);
      if (k < 0) break;
      int h = held_key(s);
      if (h >= 0) {
        s.objects[h].state = ObjectState::Closed;
        s.objects[h].pos = front;
      }
      s.objects[k].state = ObjectState::Held;
      break;
    }
    case Action::Toggle: {
      int d = object_at(s, front, ObjectType::Door);
      if (d < 0) break;
      auto& door = s.objects[d];
      if (door.state == ObjectState::Open) {
        door.state = ObjectState::Closed;
      } else if (door.state == ObjectState::Closed) {
        door.state = ObjectState::Open;
      } else {
        int h = held_key(s);
        if (h >= 0 && s.objects[h].color == door.color) {
          door.state = ObjectState::Open;
          s.objects[h].state = ObjectState::Consumed;
          s.objects[h].pos = door.pos;
        }
      }
      break;
    }
  }
  int h = held_key(s);
  if (h >= 0) s.objects[h].pos = s.agent;
}

// ---------------------------------------------------------------------------
// Atom semantics and features

inline bool evaluate_atom(const GridState& s, const Atom& a) {
  if (a.arity != 1 || a.args[0] >= s.objects.size())
    throw EnvError(EnvErrc::UnknownEntity, "grid atom references an unknown entity");
  const auto& o = s.objects[a.args[0]];
  bool v = false;
  switch (a.predicate) {
    case kOpen: v = o.type == ObjectType::Door && o.state == ObjectState::Open; break;
    case kLocked: v = o.type == ObjectType::Door && o.state == ObjectState::Locked; break;
    case kHolding: v = o.type == ObjectType::Key && o.state == ObjectState::Held; break;
    case kOn: v = o.type == ObjectType::Tile && o.pos == s.agent; break;
    default: throw EnvError(EnvErrc::UnknownEntity, "grid atom with unknown predicate");
  }
  return a.negated ? !v : v;
}

inline bool satisfies(const GridState& s, const Goal& g) {
  for (const auto& a : g)
    if (!evaluate_atom(s, a)) return false;
  return true;
}

// State channel (open, closed, locked, holding). A key on the floor reads as
// closed, a spent key as open; tiles are inert (closed).
inline int state_channel(const GridObject& o) {
  switch (o.state) {
    case ObjectState::Open: return 0;
    case ObjectState::Closed: return 1;
    case ObjectState::Locked: return 2;
    case ObjectState::Held: return 3;
    case ObjectState::Consumed: return 0;
  }
  return 1;
}

inline EntitySet encode_entities(const GridState& s) {
  const auto& sp = space(s.domain);
  FeatureMatrix f = FeatureMatrix::Zero(static_cast<Eigen::Index>(s.objects.size()), kFeatureDim);
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    const auto r = static_cast<Eigen::Index>(i);
    f(r, static_cast<int>(o.type)) = 1.0;
    f(r, 3 + static_cast<int>(o.color)) = 1.0;
    f(r, 3 + kColors + state_channel(o)) = 1.0;
    f(r, 3 + kColors + 4) = static_cast<double>(o.pos.x - s.agent.x) / s.width;
    f(r, 3 + kColors + 5) = static_cast<double>(o.pos.y - s.agent.y) / s.height;
  }
  return EntitySet(sp.roster(), std::move(f));
}

// ---------------------------------------------------------------------------
// A* over (cell, facing) with unit action costs.

template <class IsGoal, class Heuristic>
std::optional<std::vector<Action>> astar(const GridState& s, IsGoal is_goal, Heuristic h) {
  const int W = s.width, H = s.height;
  auto id = [&](Pos p, int d) { return (p.y * W + p.x) * 4 + d; };
  const int n = W * H * 4;
  std::vector<int> g(n, -1), parent(n, -1);
  std::vector<Action> via(n, Action::Left);
  using Entry = std::tuple<int, int, int>;  // f, g, node id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  const int start = id(s.agent, s.facing);
  g[start] = 0;
  open.emplace(h(s.agent), 0, start);
  while (!open.empty()) {
    auto [f, gc, u] = open.top();
    open.pop();
    if (gc != g[u]) continue;
    const int d = u % 4;
    const Pos p{(u / 4) % W, (u / 4) / W};
    if (is_goal(p, d)) {
      std::vector<Action> path;
      for (int v = u; v != start; v = parent[v]) path.push_back(via[v]);
      return std::vector<Action>(path.rbegin(), path.rend());
    }
    const std::array<std::pair<Action, int>, 3> moves{
        std::pair{Action::Left, id(p, (d + 3) % 4)}, std::pair{Action::Right, id(p, (d + 1) % 4)},
        std::pair{Action::Forward, -1}};
    for (auto [act, v] : moves) {
      Pos q = p;
      if (act == Action::Forward) {
        q = step_pos(p, d);
        if (!passable(s, q)) continue;
        v = id(q, d);
      }
      const int ng = gc + 1;
      if (g[v] < 0 || ng < g[v]) {
        g[v] = ng;
        parent[v] = u;
        via[v] = act;
        open.emplace(ng + h(q), ng, v);
      }
    }
  }
  return std::nullopt;
}

inline int manhattan(Pos a, Pos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

// Path that ends facing `target` from an adjacent passable cell.
inline std::optional<std::vector<Action>> path_to_face(const GridState& s, Pos target) {
  return astar(
      s, [&](Pos p, int d) { return step_pos(p, d) == target; },
      [&](Pos p) { return std::max(0, manhattan(p, target) - 1); });
}

inline std::optional<std::vector<Action>> path_to_cell(const GridState& s, Pos target) {
  return astar(s, [&](Pos p, int) { return p == target; }, [&](Pos p) { return manhattan(p, target); });
}

// ---------------------------------------------------------------------------
// Low-level controller: one pick, one door operation or one navigation.

inline std::pair<GridControllerResult, GridState> run_controller(const GridState& s, const Goal& g) {
  std::vector<Atom> pending;
  for (const auto& a : g)
    if (!evaluate_atom(s, a)) pending.push_back(a);
  if (pending.empty()) return {GridControllerResult{true, {}, std::nullopt}, s};
  if (pending.size() > 1) return {GridControllerResult::fail(ControllerFailure::InvalidGoal), s};

  const Atom a = pending.front();
  const auto& o = s.objects[a.args[0]];
  std::optional<std::vector<Action>> path;
  std::optional<Action> last;
  if (a.negated) return {GridControllerResult::fail(ControllerFailure::InvalidGoal), s};
  switch (a.predicate) {
    case kHolding:
      if (o.type != ObjectType::Key || o.state != ObjectState::Closed)
        return {GridControllerResult::fail(ControllerFailure::InvalidGoal), s};
      path = path_to_face(s, o.pos);
      last = Action::Pickup;
      break;
    case kOpen: {
      if (o.type != ObjectType::Door) return {GridControllerResult::fail(ControllerFailure::InvalidGoal), s};
      if (o.state == ObjectState::Locked) {
        int h = held_key(s);
        if (h < 0 || s.objects[h].color != o.color)
          return {GridControllerResult::fail(ControllerFailure::InvalidGoal), s};
      }
      path = path_to_face(s, o.pos);
      last = Action::Toggle;
      break;
    }
    case kOn:
      if (o.type != ObjectType::Tile) return {GridControllerResult::fail(ControllerFailure::InvalidGoal), s};
      path = path_to_cell(s, o.pos);
      break;
    default:  // Locked(...) cannot be established by any controller
      return {GridControllerResult::fail(ControllerFailure::InvalidGoal), s};
  }
  if (!path) return {GridControllerResult::fail(ControllerFailure::Unreachable), s};
  if (last) path->push_back(*last);
  GridState next = s;
  for (auto act : *path) apply_action(next, act);
  return {GridControllerResult{true, std::move(*path), std::nullopt}, std::move(next)};
}

// ---------------------------------------------------------------------------
// Layouts and task sampling

inline GridState empty_room(GridDomain d) {
  GridState s;
  s.domain = d;
  s.walls.assign(static_cast<std::size_t>(kWidth * kHeight), 0);
  auto set_wall = [&](int x, int y) { s.walls[static_cast<std::size_t>(y * kWidth + x)] = 1; };
  for (int i = 0; i < kWidth; ++i) {
    set_wall(i, 0);
    set_wall(i, kHeight - 1);
    set_wall(0, i);
    set_wall(kWidth - 1, i);
  }
  if (d == GridDomain::DoorKey) {
    for (int x = 0; x < kWidth; ++x) set_wall(x, 4);
  } else {
    for (int x = 0; x < kWidth; ++x) {
      set_wall(x, 4);
      set_wall(x, 8);
    }
    for (int y = 1; y <= 3; ++y) {
      set_wall(4, y);
      set_wall(8, y);
    }
    for (int y = 9; y <= 11; ++y) {
      set_wall(4, y);
      set_wall(8, y);
    }
  }
  return s;
}

namespace detail {

// Every floor key and every door can be approached from the agent's cell.
inline bool layout_accessible(const GridState& s) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(s.width * s.height), 0);
  std::vector<Pos> stack{s.agent};
  seen[static_cast<std::size_t>(s.agent.y * s.width + s.agent.x)] = 1;
  while (!stack.empty()) {
    Pos p = stack.back();
    stack.pop_back();
    for (int d = 0; d < 4; ++d) {
      Pos q = step_pos(p, d);
      if (!passable(s, q)) continue;
      auto& m = seen[static_cast<std::size_t>(q.y * s.width + q.x)];
      if (!m) {
        m = 1;
        stack.push_back(q);
      }
    }
  }
  auto approachable = [&](Pos t) {
    for (int d = 0; d < 4; ++d) {
      Pos q = step_pos(t, d);
      if (s.in_bounds(q) && seen[static_cast<std::size_t>(q.y * s.width + q.x)]) return true;
    }
    return false;
  };
  for (const auto& o : s.objects) {
    if (o.type == ObjectType::Key && o.state == ObjectState::Closed && !approachable(o.pos)) return false;
    if (o.type == ObjectType::Door && !approachable(o.pos)) return false;
  }
  return true;
}

inline ObjectState random_door_state(Rng& rng, bool allow_open) {
  int k = allow_open ? rng.range(0, 2) : rng.range(1, 2);
  return k == 0 ? ObjectState::Open : (k == 1 ? ObjectState::Closed : ObjectState::Locked);
}

inline std::vector<Pos> free_cells(const GridState& s, int x0, int x1, int y0, int y1, const std::vector<Pos>& avoid) {
  std::vector<Pos> out;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      Pos p{x, y};
      if (s.wall(p)) continue;
      if (std::find(avoid.begin(), avoid.end(), p) != avoid.end()) continue;
      out.push_back(p);
    }
  return out;
}

inline std::pair<GridState, Goal> sample_doorkey(int doors, Rng& rng) {
  GridState s = empty_room(GridDomain::DoorKey);
  std::vector<int> slots{1, 3, 5, 7, 9, 11};
  rng.shuffle(slots);
  std::vector<int> order{0, 1, 2, 3, 4, 5};
  rng.shuffle(order);
  std::vector<bool> in_goal(kColors, false);
  Goal goal;
  for (int i = 0; i < doors; ++i) {
    in_goal[order[i]] = true;
    goal.push_back(open_atom(static_cast<Color>(order[i])));
  }
  s.objects.resize(2 * kColors);
  std::vector<Pos> approach;
  for (int c = 0; c < kColors; ++c) {
    auto& d = s.objects[door_of(static_cast<Color>(c))];
    d.type = ObjectType::Door;
    d.color = static_cast<Color>(c);
    d.pos = {slots[c], 4};
    d.state = random_door_state(rng, !in_goal[c]);
    s.walls[static_cast<std::size_t>(4 * kWidth + slots[c])] = 0;
    approach.push_back({slots[c], 5});
  }
  auto cells = free_cells(s, 1, kWidth - 2, 5, kHeight - 2, approach);
  rng.shuffle(cells);
  for (int c = 0; c < kColors; ++c) {
    auto& k = s.objects[key_of(static_cast<Color>(c))];
    k.type = ObjectType::Key;
    k.color = static_cast<Color>(c);
    k.state = ObjectState::Closed;
    k.pos = cells[c];
  }
  auto agent_cells = free_cells(s, 1, kWidth - 2, 5, kHeight - 2, {});
  std::vector<Pos> open_cells;
  for (auto p : agent_cells)
    if (passable(s, p)) open_cells.push_back(p);
  s.agent = rng.pick(open_cells);
  s.facing = rng.range(0, 3);
  return {std::move(s), std::move(goal)};
}

inline std::pair<GridState, Goal> sample_roomgoal(RoomTask task, Rng& rng) {
  GridState s = empty_room(GridDomain::RoomGoal);
  // Rooms: top row then bottom row, left to right.
  const std::array<Pos, 6> door_pos{Pos{2, 4}, Pos{6, 4}, Pos{10, 4}, Pos{2, 8}, Pos{6, 8}, Pos{10, 8}};
  const std::array<int, 6> room_x0{1, 5, 9, 1, 5, 9};
  const std::array<int, 6> room_y0{1, 1, 1, 9, 9, 9};
  std::vector<int> colors{0, 1, 2, 3, 4, 5};
  rng.shuffle(colors);
  const int target = rng.range(0, kColors - 1);
  s.objects.resize(3 * kColors);
  std::vector<Pos> approach;
  for (int r = 0; r < 6; ++r) {
    const int c = colors[r];
    auto& d = s.objects[door_of(static_cast<Color>(c))];
    d.type = ObjectType::Door;
    d.color = static_cast<Color>(c);
    d.pos = door_pos[r];
    if (c == target) {
      d.state = task == RoomTask::DoorGoal      ? ObjectState::Closed
                : task == RoomTask::KeyDoorGoal ? ObjectState::Locked
                                                : random_door_state(rng, false);
    } else {
      d.state = random_door_state(rng, true);
    }
    s.walls[static_cast<std::size_t>(door_pos[r].y * kWidth + door_pos[r].x)] = 0;
    approach.push_back({door_pos[r].x, door_pos[r].y == 4 ? 5 : 7});
    auto& t = s.objects[tile_of(static_cast<Color>(c))];
    t.type = ObjectType::Tile;
    t.color = static_cast<Color>(c);
    t.state = ObjectState::Closed;
    t.pos = {room_x0[r] + rng.range(0, 2), room_y0[r] + rng.range(0, 2)};
  }
  auto cells = free_cells(s, 1, kWidth - 2, 5, 7, approach);
  rng.shuffle(cells);
  for (int c = 0; c < kColors; ++c) {
    auto& k = s.objects[key_of(static_cast<Color>(c))];
    k.type = ObjectType::Key;
    k.color = static_cast<Color>(c);
    k.state = ObjectState::Closed;
    k.pos = cells[c];
  }
  std::vector<Pos> open_cells;
  for (auto p : free_cells(s, 1, kWidth - 2, 5, 7, {}))
    if (passable(s, p)) open_cells.push_back(p);
  s.agent = rng.pick(open_cells);
  s.facing = rng.range(0, 3);
  const Color tc = static_cast<Color>(target);
  Goal goal = task == RoomTask::KeyDoor ? Goal::single(open_atom(tc)) : Goal::single(on_atom(tc));
  return {std::move(s), std::move(goal)};
}

}  // namespace detail

inline std::pair<GridState, Goal> sample_task(const GridTask& task, std::uint64_t seed) {
  if (task.domain == GridDomain::DoorKey && (task.doors < 1 || task.doors > kColors))
    throw EnvError(EnvErrc::InvalidParams, "DoorKey requires 1 <= D <= 6");
  Rng rng(mix_seed(seed, task.domain == GridDomain::DoorKey ? 11 : 23));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto sample = task.domain == GridDomain::DoorKey ? detail::sample_doorkey(task.doors, rng)
                                                     : detail::sample_roomgoal(task.room, rng);
    if (detail::layout_accessible(sample.first)) return sample;
  }
  throw EnvError(EnvErrc::InvalidParams, "could not sample an accessible layout");
}

// ---------------------------------------------------------------------------
// Snapshot records: header, agent, one wall row per line, one object per line
// as id,type,color,state,x,y.

inline std::string to_snapshot(const GridState& s) {
  const auto& schema = space(s.domain).schema();
  std::ostringstream os;
  os << "gridstate v1 " << schema.name() << ' ' << s.width << ' ' << s.height << ' ' << s.step_count << '\n';
  os << "agent," << s.agent.x << ',' << s.agent.y << ',' << s.facing << '\n';
  for (int y = 0; y < s.height; ++y) {
    os << "walls,";
    for (int x = 0; x < s.width; ++x) os << (s.wall({x, y}) ? '#' : '.');
    os << '\n';
  }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    os << schema.entities()[i].id << ',' << to_string(o.type) << ',' << kColorNames[static_cast<int>(o.color)]
       << ',' << to_string(o.state) << ',' << o.pos.x << ',' << o.pos.y << '\n';
  }
  return os.str();
}

inline GridState from_snapshot(const std::string& text) {
  auto fail = [](const std::string& why) -> GridState { throw EnvError(EnvErrc::CorruptSnapshot, why); };
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) return fail("empty snapshot");
  std::istringstream hs(line);
  std::string magic, version, domain;
  GridState s;
  hs >> magic >> version >> domain >> s.width >> s.height >> s.step_count;
  if (!hs || magic != "gridstate" || version != "v1") return fail("bad header");
  if (domain == "doorkey")
    s.domain = GridDomain::DoorKey;
  else if (domain == "roomgoal")
    s.domain = GridDomain::RoomGoal;
  else
    return fail("unknown domain " + domain);
  auto split = [](const std::string& l) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : l) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    return f;
  };
  if (!std::getline(is, line)) return fail("missing agent");
  auto a = split(line);
  if (a.size() != 4 || a[0] != "agent") return fail("bad agent line");
  s.agent = {std::stoi(a[1]), std::stoi(a[2])};
  s.facing = std::stoi(a[3]);
  s.walls.assign(static_cast<std::size_t>(s.width * s.height), 0);
  for (int y = 0; y < s.height; ++y) {
    if (!std::getline(is, line)) return fail("missing wall row");
    auto w = split(line);
    if (w.size() != 2 || w[0] != "walls" || static_cast<int>(w[1].size()) != s.width) return fail("bad wall row");
    for (int x = 0; x < s.width; ++x) s.walls[static_cast<std::size_t>(y * s.width + x)] = w[1][x] == '#';
  }
  const auto& schema = space(s.domain).schema();
  s.objects.resize(schema.entities().size());
  std::vector<bool> seen(s.objects.size(), false);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != 6) return fail("bad object line: " + line);
    auto idx = schema.find_entity(f[0]);
    if (!idx) return fail("unknown object " + f[0]);
    auto& o = s.objects[*idx];
    seen[*idx] = true;
    o.type = f[1] == "door" ? ObjectType::Door : f[1] == "key" ? ObjectType::Key : ObjectType::Tile;
    int color = -1;
    for (int c = 0; c < kColors; ++c)
      if (f[2] == kColorNames[c]) color = c;
    if (color < 0) return fail("unknown color " + f[2]);
    o.color = static_cast<Color>(color);
    const std::array<ObjectState, 5> states{ObjectState::Open, ObjectState::Closed, ObjectState::Locked,
                                            ObjectState::Held, ObjectState::Consumed};
    bool ok = false;
    for (auto st : states)
      if (f[3] == to_string(st)) {
        o.state = st;
        ok = true;
      }
    if (!ok) return fail("unknown state " + f[3]);
    o.pos = {std::stoi(f[4]), std::stoi(f[5])};
  }
  for (bool b : seen)
    if (!b) return fail("missing object record");
  return s;
}

}  // namespace rpn::grid
