#pragma once
// Task specs, demonstration generation, the closed-loop episode runner,
// multi-seed evaluation and report emission.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rpn/dataset.hpp"
#include "rpn/oracle.hpp"
#include "rpn/planners.hpp"
#include "rpn/world.hpp"

namespace rpn {

// ---------------------------------------------------------------------------
// Tasks. Task strings: doorkey "D=4" (or "4"), roomgoal "k-d" | "d-g" |
// "k-d-g", kitchen "I=6,D=3" (or "6x3").

struct TaskSpec {
  std::string domain;
  int doors = 2;
  grid::RoomTask room = grid::RoomTask::KeyDoor;
  kitchen::MealTask meal;

  std::string name() const {
    if (domain == "doorkey") return "doorkey:D=" + std::to_string(doors);
    if (domain == "roomgoal") return std::string("roomgoal:") + grid::to_string(room);
    return "kitchen:I=" + std::to_string(meal.ingredients) + ",D=" + std::to_string(meal.dishes);
  }
};

namespace detail {

inline int parse_int(std::string_view s, const std::string& what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("bad " + what + ": '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline TaskSpec parse_task(const std::string& domain, const std::string& task) {
  TaskSpec t;
  t.domain = domain;
  if (domain == "doorkey") {
    std::string_view v = task;
    if (v.starts_with("D=")) v.remove_prefix(2);
    t.doors = detail::parse_int(v, "door count");
    if (t.doors < 1 || t.doors > grid::kColors) throw std::invalid_argument("DoorKey requires 1 <= D <= 6");
  } else if (domain == "roomgoal") {
    if (task == "k-d") t.room = grid::RoomTask::KeyDoor;
    else if (task == "d-g") t.room = grid::RoomTask::DoorGoal;
    else if (task == "k-d-g") t.room = grid::RoomTask::KeyDoorGoal;
    else throw std::invalid_argument("unknown RoomGoal task '" + task + "'");
  } else if (domain == "kitchen") {
    std::string s = task;
    for (auto& c : s)
      if (c == 'x' || c == ',') c = ' ';
    std::istringstream is(s);
    std::string a, b;
    if (!(is >> a >> b)) throw std::invalid_argument("kitchen task must look like I=6,D=3");
    auto strip = [](std::string w, char k) {
      if (w.size() > 2 && w[0] == k && w[1] == '=') w = w.substr(2);
      return w;
    };
    t.meal.ingredients = detail::parse_int(strip(a, 'I'), "ingredient count");
    t.meal.dishes = detail::parse_int(strip(b, 'D'), "dish count");
    if (t.meal.ingredients < 1 || t.meal.ingredients > kitchen::kIngredients || t.meal.dishes < 1 ||
        t.meal.dishes > kitchen::kPlates || t.meal.dishes > t.meal.ingredients)
      throw std::invalid_argument("kitchen task needs 1 <= D <= 3 and D <= I <= 6");
  } else {
    throw std::invalid_argument("unknown domain '" + domain + "'");
  }
  return t;
}

inline grid::GridTask grid_task(const TaskSpec& t) {
  return {t.domain == "doorkey" ? grid::GridDomain::DoorKey : grid::GridDomain::RoomGoal, t.doors, t.room};
}

// Calls f(world, oracle, sampler) with the domain's concrete types; the
// sampler maps a seed to (initial state, final goal).
template <class F>
decltype(auto) with_domain(const TaskSpec& t, F&& f) {
  if (t.domain == "kitchen") {
    static const KitchenOracle oracle{};
    auto sampler = [meal = t.meal](std::uint64_t seed) { return kitchen::sample_meal_task(meal, seed); };
    return f(oracle.world(), oracle, sampler);
  }
  static const GridOracle doorkey{GridWorld(grid::GridDomain::DoorKey)};
  static const GridOracle roomgoal{GridWorld(grid::GridDomain::RoomGoal)};
  const auto gt = grid_task(t);
  const GridOracle& oracle = gt.domain == grid::GridDomain::DoorKey ? doorkey : roomgoal;
  auto sampler = [gt](std::uint64_t seed) { return grid::sample_task(gt, seed); };
  return f(oracle.world(), oracle, sampler);
}

// Seed streams for demonstrations and for evaluation episodes are disjoint.
inline std::uint64_t demo_seed(std::uint64_t seed, int i) { return mix_seed(mix_seed(seed, 0x64656d6f), i); }
inline std::uint64_t episode_seed(std::uint64_t seed, int i) { return mix_seed(mix_seed(seed, 0x6576616c), i); }

// Appends n expert demonstrations of task t, numbered from ds's next free id.
inline void generate_demos(Dataset& ds, const TaskSpec& t, int n, std::uint64_t seed) {
  int next_id = 0;
  for (const auto& o : ds.observations) next_id = std::max(next_id, o.demo + 1);
  with_domain(t, [&](const auto&, const auto& oracle, const auto& sampler) {
    for (int i = 0; i < n; ++i) {
      auto [s0, g] = sampler(demo_seed(seed, i));
      append_demo(ds, oracle, demonstrate(oracle, s0, g), next_id++);
    }
  });
}

// ---------------------------------------------------------------------------
// Episodes

enum class ErrorClass { None, AllSat, NoPrec, MaxIter, Controller, BadGoal, MaxStep };
inline constexpr int kErrorClasses = 7;

inline const char* to_string(ErrorClass e) {
  switch (e) {
    case ErrorClass::None: return "None";
    case ErrorClass::AllSat: return "AllSat";
    case ErrorClass::NoPrec: return "NoPrec";
    case ErrorClass::MaxIter: return "MaxIter";
    case ErrorClass::Controller: return "Controller";
    case ErrorClass::BadGoal: return "BadGoal";
    case ErrorClass::MaxStep: return "MaxStep";
  }
  return "?";
}

struct EpisodeLimits {
  int max_steps = 400;
  int max_depth = kDefaultDepth;
  int max_calls = 100;  // planner invocations per episode
};

struct EpisodeResult {
  bool success = false;
  ErrorClass error = ErrorClass::None;
  int steps = 0;
  int calls = 0;
  int units = 0;
  int units_done = 0;
};

template <World W>
EpisodeResult run_episode(const W& world, typename W::State s, const Goal& g, const PlannerFn<typename W::State>& plan,
                          const EpisodeLimits& lim = {}) {
  EpisodeResult r;
  r.units = world.units(g);
  auto finish = [&](ErrorClass e) {
    r.error = e;
    r.success = e == ErrorClass::None;
    r.steps = world.steps(s);
    r.units_done = world.units_done(s, g);
    return r;
  };
  for (;;) {
    if (world_satisfies(world, s, g)) return finish(ErrorClass::None);
    if (r.calls >= lim.max_calls || world.steps(s) >= lim.max_steps) return finish(ErrorClass::MaxStep);
    ++r.calls;
    const auto trace = plan(s, g);
    switch (trace.termination) {
      case Termination::Reachable: break;
      case Termination::AllSat: return finish(ErrorClass::AllSat);
      case Termination::NoPrec: return finish(ErrorClass::NoPrec);
      case Termination::MaxIter: return finish(ErrorClass::MaxIter);
    }
    auto t = world.execute(s, trace.result);
    if (!t.success)
      return finish(t.failure == ControllerFailure::InvalidGoal ? ErrorClass::BadGoal : ErrorClass::Controller);
    s = std::move(t.next);
    if (world.steps(s) > lim.max_steps) return finish(ErrorClass::MaxStep);
  }
}

// ---------------------------------------------------------------------------
// Evaluation

struct SeedResult {
  std::uint64_t seed = 0;
  double success = 0.0;
  double completion = 0.0;
};

struct TaskReport {
  std::string planner;
  std::string task;
  int episodes = 0;  // per seed
  std::vector<SeedResult> seeds;
  double success = 0.0;  // mean over seeds
  double success_se = 0.0;
  double completion = 0.0;
  double completion_se = 0.0;
  std::array<int, kErrorClasses> errors{};  // summed over seeds
  double mean_steps = 0.0;

  int error_count(ErrorClass e) const { return errors[static_cast<int>(e)]; }
  // Most frequent failure class (None when no failures).
  ErrorClass top_failure() const {
    ErrorClass best = ErrorClass::None;
    int n = 0;
    for (int e = 1; e < kErrorClasses; ++e)
      if (errors[e] > n) {
        n = errors[e];
        best = static_cast<ErrorClass>(e);
      }
    return best;
  }
};

namespace detail {

inline std::pair<double, double> mean_se(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()))};
}

}  // namespace detail

// Runs `episodes` episodes of task t per entry of `seeds`. `planner_for(seed)`
// supplies the planner used for that seed group (e.g. the model trained with
// that seed). Success and completion are averaged per seed, then across seeds.
template <class PlannerFor>
TaskReport evaluate(const std::string& planner_name, const TaskSpec& t, int episodes,
                    const std::vector<std::uint64_t>& seeds, PlannerFor&& planner_for, const EpisodeLimits& lim = {}) {
  TaskReport rep;
  rep.planner = planner_name;
  rep.task = t.name();
  rep.episodes = episodes;
  double steps = 0.0;
  with_domain(t, [&](const auto& world, const auto& oracle, const auto& sampler) {
    using State = typename std::decay_t<decltype(world)>::State;
    for (auto seed : seeds) {
      const PlannerFn<State> plan = planner_for(world, oracle, seed);
      int ok = 0;
      double comp = 0.0;
      for (int i = 0; i < episodes; ++i) {
        auto [s0, g] = sampler(episode_seed(seed, i));
        const auto r = run_episode(world, s0, g, plan, lim);
        ok += r.success ? 1 : 0;
        comp += r.units > 0 ? static_cast<double>(r.units_done) / r.units : 1.0;
        ++rep.errors[static_cast<int>(r.error)];
        steps += r.steps;
      }
      rep.seeds.push_back({seed, static_cast<double>(ok) / episodes, comp / episodes});
    }
  });
  std::vector<double> s, c;
  for (const auto& x : rep.seeds) {
    s.push_back(x.success);
    c.push_back(x.completion);
  }
  std::tie(rep.success, rep.success_se) = detail::mean_se(s);
  std::tie(rep.completion, rep.completion_se) = detail::mean_se(c);
  rep.mean_steps = rep.seeds.empty() ? 0.0 : steps / (static_cast<double>(episodes) * rep.seeds.size());
  return rep;
}

// Evaluates one planner kind. For learned planners `models[k]` is used with
// `seeds[k]`; the oracle planner ignores models.
inline TaskReport evaluate_planner(PlannerKind kind, const std::vector<const Model*>& models, const TaskSpec& t,
                                   int episodes, const std::vector<std::uint64_t>& seeds,
                                   const EpisodeLimits& lim = {}) {
  if (kind != PlannerKind::Oracle && models.size() != seeds.size())
    throw std::invalid_argument("one model per evaluation seed is required");
  auto planner_for = [&](const auto& world, const auto& oracle, std::uint64_t seed) {
    using W = std::decay_t<decltype(world)>;
    if (kind == PlannerKind::Oracle) return oracle_planner(oracle, lim.max_depth);
    std::size_t k = 0;
    while (seeds[k] != seed) ++k;
    if (models[k]->domain != t.domain)
      throw std::invalid_argument("checkpoint domain " + models[k]->domain + " does not match task domain " + t.domain);
    return learned_planner<W>(world, kind, *models[k], lim.max_depth);
  };
  return evaluate(to_string(kind), t, episodes, seeds, planner_for, lim);
}

// ---------------------------------------------------------------------------
// Reports

struct Report {
  std::vector<TaskReport> rows;
  EpisodeLimits limits;

  const TaskReport* find(const std::string& planner, const std::string& task) const {
    for (const auto& r : rows)
      if (r.planner == planner && r.task == task) return &r;
    return nullptr;
  }
};

inline void write_csv(std::ostream& os, const Report& rep) {
  os << "planner,task,episodes,seeds,success,success_se,completion,completion_se,mean_steps";
  for (int e = 1; e < kErrorClasses; ++e) os << ',' << to_string(static_cast<ErrorClass>(e));
  os << '\n';
  for (const auto& r : rep.rows) {
    os << r.planner << ',' << r.task << ',' << r.episodes << ',' << r.seeds.size() << ',' << std::setprecision(6)
       << r.success << ',' << r.success_se << ',' << r.completion << ',' << r.completion_se << ',' << r.mean_steps;
    for (int e = 1; e < kErrorClasses; ++e) os << ',' << r.errors[e];
    os << '\n';
  }
}

// Tasks as rows, planners as columns; cells are success% (± s.e.) and completion%.
inline void write_table(std::ostream& os, const Report& rep) {
  std::vector<std::string> tasks, planners;
  auto add = [](std::vector<std::string>& v, const std::string& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& r : rep.rows) {
    add(tasks, r.task);
    add(planners, r.planner);
  }
  os << "limits: max_steps " << rep.limits.max_steps << ", max_calls " << rep.limits.max_calls << ", max_depth "
     << rep.limits.max_depth << '\n';
  if (!rep.rows.empty()) {
    os << "seeds:";
    for (const auto& x : rep.rows.front().seeds) os << ' ' << x.seed;
    os << " (" << rep.rows.front().episodes << " episodes each)\n\n";
  }
  std::size_t w0 = 6;
  for (const auto& t : tasks) w0 = std::max(w0, t.size());
  const int w = 22;
  os << std::left << std::setw(static_cast<int>(w0) + 2) << "task";
  for (const auto& p : planners) os << std::setw(w) << p;
  os << '\n';
  for (const auto& t : tasks) {
    os << std::setw(static_cast<int>(w0) + 2) << t;
    for (const auto& p : planners) {
      const auto* r = rep.find(p, t);
      std::ostringstream cell;
      if (r)
        cell << std::fixed << std::setprecision(1) << 100 * r->success << "±" << 100 * r->success_se << " ("
             << 100 * r->completion << ")";
      else
        cell << "-";
      os << std::setw(w) << cell.str();
    }
    os << '\n';
  }
  os << "\nfailure classes (episodes, summed over seeds)\n";
  os << std::setw(static_cast<int>(w0) + 12) << "task/planner";
  for (int e = 1; e < kErrorClasses; ++e) os << std::setw(11) << to_string(static_cast<ErrorClass>(e));
  os << '\n';
  for (const auto& r : rep.rows) {
    os << std::setw(static_cast<int>(w0) + 12) << (r.task + " " + r.planner);
    for (int e = 1; e < kErrorClasses; ++e) os << std::setw(11) << r.errors[e];
    os << '\n';
  }
  os << std::right;
}

// Success rate per task, one polyline per planner.
inline void write_svg(std::ostream& os, const Report& rep) {
  std::vector<std::string> tasks, planners;
  auto add = [](std::vector<std::string>& v, const std::string& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& r : rep.rows) {
    add(tasks, r.task);
    add(planners, r.planner);
  }
  const int W = 640, H = 360, L = 60, R = 140, T = 20, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto xpos = [&](std::size_t i) { return L + (tasks.size() < 2 ? pw / 2 : pw * i / (tasks.size() - 1)); };
  auto ypos = [&](double v) { return T + ph * (1.0 - v); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = ypos(k / 4.0);
    os << "<line x1=\"" << L << "\" y1=\"" << y << "\" x2=\"" << L + pw << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
       << k * 25 << "%</text>\n";
  }
  for (std::size_t i = 0; i < tasks.size(); ++i)
    os << "<text x=\"" << xpos(i) << "\" y=\"" << H - B + 20 << "\" font-size=\"11\" text-anchor=\"middle\">"
       << tasks[i] << "</text>\n";
  for (std::size_t p = 0; p < planners.size(); ++p) {
    const char* c = colors[p % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (const auto* r = rep.find(planners[p], tasks[i])) os << xpos(i) << ',' << ypos(r->success) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << L + pw + 12 << "\" y=\"" << T + 16 * (p + 1) << "\" font-size=\"12\" fill=\"" << c << "\">"
       << planners[p] << "</text>\n";
  }
  os << "</svg>\n";
}

// Writes <base>.csv and <base>.txt, plus <base>.svg when `plot` is set.
inline void emit_report(const std::string& base, const Report& rep, bool plot = false) {
  auto open = [](const std::string& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p);
    return os;
  };
  {
    auto os = open(base + ".csv");
    write_csv(os, rep);
  }
  {
    auto os = open(base + ".txt");
    write_table(os, rep);
  }
  if (plot) {
    auto os = open(base + ".svg");
    write_svg(os, rep);
  }
}

}  // namespace rpn
