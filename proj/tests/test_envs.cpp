#include <gtest/gtest.h>

#include <deque>

#include "rpn/envs/grid.hpp"
#include "rpn/envs/kitchen.hpp"
#include "rpn/world.hpp"

using namespace rpn;

namespace {

// Breadth-first search over (cell, facing): fewest actions until the agent
// stands next to `target` facing it.
int bfs_face_distance(const grid::GridState& s, grid::Pos target) {
  const int W = s.width, H = s.height;
  std::vector<int> dist(W * H * 4, -1);
  auto id = [&](grid::Pos p, int d) { return (p.y * W + p.x) * 4 + d; };
  std::deque<std::pair<grid::Pos, int>> q{{s.agent, s.facing}};
  dist[id(s.agent, s.facing)] = 0;
  while (!q.empty()) {
    auto [p, d] = q.front();
    q.pop_front();
    const int here = dist[id(p, d)];
    if (grid::step_pos(p, d) == target) return here;
    std::vector<std::pair<grid::Pos, int>> next{{p, (d + 1) % 4}, {p, (d + 3) % 4}};
    const auto f = grid::step_pos(p, d);
    if (grid::passable(s, f)) next.push_back({f, d});
    for (auto [np, nd] : next)
      if (dist[id(np, nd)] < 0) {
        dist[id(np, nd)] = here + 1;
        q.push_back({np, nd});
      }
  }
  return -1;
}

grid::GridState doorkey_state(int doors, std::uint64_t seed) {
  return grid::sample_task({grid::GridDomain::DoorKey, doors, grid::RoomTask::KeyDoor}, seed).first;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

TEST(GridSample, DeterministicPerSeed) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const grid::GridTask t{grid::GridDomain::DoorKey, 3, grid::RoomTask::KeyDoor};
    const auto a = grid::sample_task(t, seed), b = grid::sample_task(t, seed);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
  }
  EXPECT_NE(doorkey_state(2, 1), doorkey_state(2, 2));
}

TEST(GridSample, DoorKeyGoalDoorsStartShut) {
  for (int d = 1; d <= grid::kColors; ++d)
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto [s, g] = grid::sample_task({grid::GridDomain::DoorKey, d, grid::RoomTask::KeyDoor}, seed);
      ASSERT_EQ(static_cast<int>(g.size()), d);
      for (const auto& a : g) {
        EXPECT_EQ(a.predicate, grid::kOpen);
        EXPECT_FALSE(grid::evaluate_atom(s, a));
      }
    }
}

TEST(GridSample, RoomGoalTasks) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto [s1, g1] = grid::sample_task({grid::GridDomain::RoomGoal, 0, grid::RoomTask::KeyDoorGoal}, seed);
    ASSERT_EQ(g1.size(), 1u);
    EXPECT_EQ(g1[0].predicate, grid::kOn);
    const auto door = s1.objects[g1[0].args[0] - 2 * grid::kColors];
    EXPECT_EQ(door.state, grid::ObjectState::Locked);
    const auto [s2, g2] = grid::sample_task({grid::GridDomain::RoomGoal, 0, grid::RoomTask::DoorGoal}, seed);
    EXPECT_EQ(s2.objects[g2[0].args[0] - 2 * grid::kColors].state, grid::ObjectState::Closed);
    const auto [s3, g3] = grid::sample_task({grid::GridDomain::RoomGoal, 0, grid::RoomTask::KeyDoor}, seed);
    EXPECT_EQ(g3[0].predicate, grid::kOpen);
    EXPECT_FALSE(grid::evaluate_atom(s3, g3[0]));
  }
}

TEST(GridSample, InvalidDoorCount) {
  for (int d : {0, 7}) {
    try {
      doorkey_state(d, 1);
      FAIL();
    } catch (const EnvError& e) {
      EXPECT_EQ(e.code(), EnvErrc::InvalidParams);
    }
  }
}

TEST(GridAstar, MatchesBreadthFirstDistance) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto s = doorkey_state(1 + static_cast<int>(seed % 6), seed);
    for (const auto& o : s.objects) {
      const int want = bfs_face_distance(s, o.pos);
      const auto path = grid::path_to_face(s, o.pos);
      ASSERT_EQ(path.has_value(), want >= 0);
      if (!path) continue;
      EXPECT_EQ(static_cast<int>(path->size()), want);
      auto t = s;
      for (auto a : *path) grid::apply_action(t, a);
      EXPECT_EQ(grid::step_pos(t.agent, t.facing), o.pos);
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(GridAstar, UnreachableReturnsNothing) {
  auto s = grid::empty_room(grid::GridDomain::DoorKey);
  s.agent = {3, 7};
  EXPECT_FALSE(grid::path_to_cell(s, {3, 2}).has_value());
  EXPECT_EQ(grid::path_to_cell(s, {3, 7})->size(), 0u);
}

TEST(GridDynamics, PickupToggleAndConsume) {
  auto s = doorkey_state(1, 5);
  const auto door = grid::door_of(grid::Color::Red);
  const auto key = grid::key_of(grid::Color::Red);
  s.objects[door].state = grid::ObjectState::Locked;
  const Goal open = Goal::single(grid::open_atom(grid::Color::Red));
  EXPECT_EQ(grid::run_controller(s, open).first.failure, ControllerFailure::InvalidGoal);

  auto [r1, s1] = grid::run_controller(s, Goal::single(grid::holding_atom(grid::Color::Red)));
  ASSERT_TRUE(r1.success);
  EXPECT_EQ(r1.actions.back(), grid::Action::Pickup);
  EXPECT_EQ(s1.objects[key].state, grid::ObjectState::Held);
  EXPECT_EQ(s1.step_count, static_cast<int>(r1.actions.size()));

  auto [r2, s2] = grid::run_controller(s1, open);
  ASSERT_TRUE(r2.success);
  EXPECT_TRUE(grid::evaluate_atom(s2, grid::open_atom(grid::Color::Red)));
  EXPECT_EQ(s2.objects[key].state, grid::ObjectState::Consumed);
  EXPECT_EQ(grid::held_key(s2), -1);
  // The spent key cannot be picked up again.
  EXPECT_EQ(grid::run_controller(s2, Goal::single(grid::holding_atom(grid::Color::Red))).first.failure,
            ControllerFailure::InvalidGoal);
}

TEST(GridDynamics, PickupSwapsHeldKey) {
  auto s = doorkey_state(2, 9);
  auto [r1, s1] = grid::run_controller(s, Goal::single(grid::holding_atom(grid::Color::Blue)));
  ASSERT_TRUE(r1.success);
  auto [r2, s2] = grid::run_controller(s1, Goal::single(grid::holding_atom(grid::Color::Green)));
  ASSERT_TRUE(r2.success);
  const auto& blue = s2.objects[grid::key_of(grid::Color::Blue)];
  EXPECT_EQ(blue.state, grid::ObjectState::Closed);
  EXPECT_EQ(blue.pos, grid::step_pos(s2.agent, s2.facing));
  EXPECT_EQ(grid::held_key(s2), grid::key_of(grid::Color::Green));
}

TEST(GridDynamics, ToggleClosesOpenDoorAndForwardBlocked) {
  auto s = grid::empty_room(grid::GridDomain::DoorKey);
  s.objects.resize(2 * grid::kColors);
  for (int c = 0; c < grid::kColors; ++c) {
    s.objects[c] = {grid::ObjectType::Door, static_cast<grid::Color>(c), grid::ObjectState::Closed, {2 * c + 1, 4}};
    s.objects[grid::kColors + c] = {grid::ObjectType::Key, static_cast<grid::Color>(c), grid::ObjectState::Closed,
                                    {2 * c + 1, 11}};
  }
  s.walls[4 * grid::kWidth + 1] = 0;
  s.agent = {1, 5};
  s.facing = 3;  // north, at the red door
  grid::apply_action(s, grid::Action::Forward);
  EXPECT_EQ(s.agent, (grid::Pos{1, 5}));
  grid::apply_action(s, grid::Action::Toggle);
  EXPECT_EQ(s.objects[0].state, grid::ObjectState::Open);
  grid::apply_action(s, grid::Action::Forward);
  EXPECT_EQ(s.agent, (grid::Pos{1, 4}));
  grid::apply_action(s, grid::Action::Forward);
  EXPECT_EQ(s.agent, (grid::Pos{1, 3}));
  EXPECT_EQ(s.step_count, 4);
}

TEST(GridController, RejectsCompoundAndLockedGoals) {
  const auto s = doorkey_state(2, 3);
  Goal two;
  two.push_back(grid::holding_atom(grid::Color::Red));
  two.push_back(grid::holding_atom(grid::Color::Blue));
  EXPECT_EQ(grid::run_controller(s, two).first.failure, ControllerFailure::InvalidGoal);
  const auto held = grid::run_controller(s, Goal::single(grid::holding_atom(grid::Color::Red))).second;
  EXPECT_EQ(grid::run_controller(held, Goal::single(grid::holding_atom(grid::Color::Red).negation())).first.failure,
            ControllerFailure::InvalidGoal);
  Goal locked = Goal::single(grid::locked_atom(grid::Color::Grey));
  if (!grid::evaluate_atom(s, locked[0]))
    EXPECT_EQ(grid::run_controller(s, locked).first.failure, ControllerFailure::InvalidGoal);
  // A satisfied goal succeeds with no actions.
  const auto [r, t] = grid::run_controller(s, Goal::single(grid::holding_atom(grid::Color::Red).negation()));
  EXPECT_TRUE(r.success);
  EXPECT_TRUE(r.actions.empty());
  EXPECT_EQ(t, s);
}

TEST(GridAtoms, EvaluateAgainstState) {
  auto s = doorkey_state(1, 4);
  for (int c = 0; c < grid::kColors; ++c) {
    const auto col = static_cast<grid::Color>(c);
    const auto st = s.objects[grid::door_of(col)].state;
    EXPECT_EQ(grid::evaluate_atom(s, grid::open_atom(col)), st == grid::ObjectState::Open);
    EXPECT_EQ(grid::evaluate_atom(s, grid::locked_atom(col)), st == grid::ObjectState::Locked);
    EXPECT_EQ(grid::evaluate_atom(s, grid::locked_atom(col).negation()), st != grid::ObjectState::Locked);
    EXPECT_FALSE(grid::evaluate_atom(s, grid::holding_atom(col)));
  }
  EXPECT_THROW(grid::evaluate_atom(s, Atom::unary(grid::kOpen, 40)), EnvError);
}

TEST(GridFeatures, Encoding) {
  const auto s = doorkey_state(2, 8);
  const auto e = grid::encode_entities(s);
  ASSERT_EQ(e.features().rows(), 12);
  ASSERT_EQ(e.features().cols(), grid::kFeatureDim);
  for (int i = 0; i < 12; ++i) {
    const auto& o = s.objects[i];
    const auto row = e.features().row(i);
    EXPECT_DOUBLE_EQ(row.segment(0, 3).sum(), 1.0);
    EXPECT_DOUBLE_EQ(row(i < 6 ? 0 : 1), 1.0);
    EXPECT_DOUBLE_EQ(row.segment(3, grid::kColors).sum(), 1.0);
    EXPECT_DOUBLE_EQ(row(3 + static_cast<int>(o.color)), 1.0);
    EXPECT_DOUBLE_EQ(row.segment(3 + grid::kColors, 4).sum(), 1.0);
    EXPECT_DOUBLE_EQ(row(13), static_cast<double>(o.pos.x - s.agent.x) / grid::kWidth);
    EXPECT_DOUBLE_EQ(row(14), static_cast<double>(o.pos.y - s.agent.y) / grid::kHeight);
  }
  EXPECT_EQ(e.features(), grid::encode_entities(s).features());
  // A held key reads in the holding channel.
  const auto [r, t] = grid::run_controller(s, Goal::single(grid::holding_atom(grid::Color::Yellow)));
  ASSERT_TRUE(r.success);
  EXPECT_DOUBLE_EQ(grid::encode_entities(t).features()(grid::key_of(grid::Color::Yellow), 3 + grid::kColors + 3), 1.0);
}

TEST(GridSnapshot, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto s = seed % 2 ? doorkey_state(3, seed)
                      : grid::sample_task({grid::GridDomain::RoomGoal, 0, grid::RoomTask::KeyDoorGoal}, seed).first;
    const auto [r, t] = grid::run_controller(s, Goal::single(grid::holding_atom(grid::Color::Grey)));
    for (const auto& x : {s, t}) {
      const auto text = grid::to_snapshot(x);
      EXPECT_EQ(grid::from_snapshot(text), x);
      EXPECT_EQ(grid::to_snapshot(grid::from_snapshot(text)), text);
    }
  }
}

TEST(GridSnapshot, CorruptInput) {
  const auto text = grid::to_snapshot(doorkey_state(2, 1));
  for (const std::string bad : {std::string(), std::string("gridstate v9 doorkey 13 13 0\n"), text.substr(0, text.size() / 2),
                                text.substr(0, text.find("key_red"))}) {
    try {
      grid::from_snapshot(bad);
      FAIL() << bad;
    } catch (const EnvError& e) {
      EXPECT_EQ(e.code(), EnvErrc::CorruptSnapshot);
    }
  }
}

// ---------------------------------------------------------------------------
// Kitchen

namespace {

std::vector<kitchen::Macro> all_macros() {
  std::vector<kitchen::Macro> out;
  using kitchen::Action;
  for (EntityIndex o = 0; o < kitchen::kObjects; ++o) {
    for (EntityIndex t = 0; t < kitchen::kObjects; ++t) out.push_back({Action::Place, o, t});
    for (auto a : {Action::Activate, Action::Deactivate, Action::Clean, Action::Cook}) out.push_back({a, o});
  }
  return out;
}

void check_invariants(const kitchen::KitchenState& s) {
  using namespace kitchen;
  for (EntityIndex i = 0; i < kIngredients; ++i) {
    const auto at = s.location[i];
    EXPECT_TRUE(at == kTable || at == kSink || is_cookware(at) || is_plate(at));
    if (s.cooked[i]) EXPECT_TRUE(s.cleaned[i]);
  }
  for (EntityIndex c : {kPan, kPot}) EXPECT_TRUE(s.location[c] == kTray || s.location[c] == kStove);
  for (int p = 0; p < kPlates; ++p) {
    const auto at = s.location[kPlate0 + p];
    EXPECT_TRUE(at == kTable || is_area(at));
    for (int q = p + 1; q < kPlates; ++q)
      if (is_area(at)) EXPECT_NE(at, s.location[kPlate0 + q]);
  }
  for (EntityIndex e : {kStove, kSink, kTable, kTray}) EXPECT_EQ(s.location[e], e);
  for (int a = 0; a < kPlates; ++a) EXPECT_EQ(s.location[kArea0 + a], kArea0 + a);
}

}  // namespace

TEST(KitchenDynamics, RandomMacrosKeepInvariants) {
  const auto macros = all_macros();
  Rng rng(3);
  for (int run = 0; run < 50; ++run) {
    auto s = kitchen::sample_meal_task({6, 3}, static_cast<std::uint64_t>(run)).first;
    for (int step = 0; step < 200; ++step) {
      const auto& m = rng.pick(macros);
      auto t = s;
      const bool ok = kitchen::apply_macro(t, m);
      if (!ok) {
        EXPECT_EQ(t, s);
        continue;
      }
      EXPECT_EQ(t.step_count, s.step_count + 1);
      // Preparation flags never revert.
      for (int i = 0; i < kitchen::kIngredients; ++i) {
        EXPECT_GE(t.cleaned[i], s.cleaned[i]);
        EXPECT_GE(t.cooked[i], s.cooked[i]);
      }
      s = t;
      check_invariants(s);
    }
  }
}

TEST(KitchenDynamics, WashAndCook) {
  using namespace kitchen;
  auto s = initial_state();
  EXPECT_FALSE(apply_macro(s, {Action::Clean, kCarrot}));
  ASSERT_TRUE(apply_macro(s, {Action::Activate, kSink}));
  ASSERT_TRUE(apply_macro(s, {Action::Clean, kCarrot}));
  EXPECT_TRUE(s.cleaned[kCarrot]);
  EXPECT_EQ(s.location[kCarrot], kSink);
  EXPECT_FALSE(apply_macro(s, {Action::Cook, kCarrot}));
  ASSERT_TRUE(apply_macro(s, {Action::Place, kPot, kStove}));
  ASSERT_TRUE(apply_macro(s, {Action::Activate, kStove}));
  EXPECT_FALSE(apply_macro(s, {Action::Cook, kApple}));  // dirty
  ASSERT_TRUE(apply_macro(s, {Action::Cook, kCarrot}));
  EXPECT_TRUE(s.cooked[kCarrot]);
  EXPECT_EQ(s.location[kCarrot], kPot);
  // Placing a dirty fruit into the wrong cookware never cooks it.
  ASSERT_TRUE(apply_macro(s, {Action::Place, kPeach, kPot}));
  EXPECT_FALSE(s.cooked[kPeach]);
  ASSERT_TRUE(apply_macro(s, {Action::Place, kPlate0, kArea0}));
  EXPECT_FALSE(apply_macro(s, {Action::Place, kPlate0 + 1, kArea0}));
  EXPECT_TRUE(evaluate_atom(s, on_atom(kPlate0, kArea0)));
  EXPECT_TRUE(evaluate_atom(s, activated_atom(kStove)));
  EXPECT_FALSE(evaluate_atom(s, activated_atom(kSink).negation()));
}

TEST(KitchenController, SetupAtomsBatch) {
  using namespace kitchen;
  const auto s = initial_state();
  Goal setup;
  setup.push_back(on_atom(kPan, kStove));
  setup.push_back(activated_atom(kStove));
  setup.push_back(activated_atom(kSink));
  const auto [r, t] = run_macro(s, setup);
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.actions.size(), 3u);
  EXPECT_TRUE(satisfies(t, setup));

  Goal two;
  two.push_back(cleaned_atom(kApple));
  two.push_back(activated_atom(kSink));
  EXPECT_EQ(run_macro(s, two).first.failure, ControllerFailure::InvalidGoal);
  EXPECT_EQ(run_macro(s, Goal::single(cooked_atom(kApple))).first.failure, ControllerFailure::InvalidGoal);
  EXPECT_EQ(run_macro(s, Goal::single(on_atom(kApple, kArea0))).first.failure, ControllerFailure::InvalidGoal);
}

TEST(KitchenTask, GoalShape) {
  for (int i = 1; i <= 6; ++i)
    for (int d = 1; d <= std::min(i, 3); ++d)
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto [s, g] = kitchen::sample_meal_task({i, d}, seed);
        EXPECT_EQ(static_cast<int>(g.size()), 2 * i + d);
        EXPECT_EQ(KitchenWorld().units(g), i);
        EXPECT_EQ(KitchenWorld().units_done(s, g), 0);
        EXPECT_EQ(s, kitchen::sample_meal_task({i, d}, seed).first);
      }
  EXPECT_THROW(kitchen::sample_meal_task({2, 3}, 0), EnvError);
  EXPECT_THROW(kitchen::sample_meal_task({7, 3}, 0), EnvError);
  EXPECT_THROW(kitchen::sample_meal_task({3, 0}, 0), EnvError);
}

TEST(KitchenFeatures, Encoding) {
  using namespace kitchen;
  auto s = initial_state();
  s.cleaned[kApple] = true;
  const auto e = encode_entities(s);
  const auto& keys = *space().roster();
  ASSERT_EQ(e.features().rows(), static_cast<Eigen::Index>(keys.size()));
  for (std::size_t r = 0; r < keys.size(); ++r) {
    const auto row = e.features().row(static_cast<Eigen::Index>(r));
    EXPECT_DOUBLE_EQ(row(keys[r].first), 1.0);
    EXPECT_DOUBLE_EQ(row.segment(0, kObjects).sum(), 1.0);
    const double rel = row(2 * kUnaryDim);
    EXPECT_EQ(rel == 1.0, keys[r].is_pair() && s.location[keys[r].first] == keys[r].second);
  }
  const auto apple = *e.row_of({kApple});
  EXPECT_DOUBLE_EQ(e.features()(static_cast<Eigen::Index>(apple), kObjects + kCategories), 1.0);
}

TEST(KitchenSnapshot, RoundTrip) {
  const auto macros = all_macros();
  Rng rng(5);
  auto s = kitchen::sample_meal_task({4, 2}, 1).first;
  for (int step = 0; step < 300; ++step) {
    kitchen::apply_macro(s, rng.pick(macros));
    const auto text = kitchen::to_snapshot(s);
    ASSERT_EQ(kitchen::from_snapshot(text), s) << text;
  }
  EXPECT_THROW(kitchen::from_snapshot("kitchenstate v2 0\n"), EnvError);
  const auto text = kitchen::to_snapshot(s);
  EXPECT_THROW(kitchen::from_snapshot(text.substr(0, text.find("tray"))), EnvError);
}
