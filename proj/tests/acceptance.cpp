// Acceptance suite: one PASS/FAIL line per criterion. Trained checkpoints and
// evaluation tables are cached under --work so criteria sharing a run reuse it.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "brute_serializer.hpp"
#include "rpn/gradcheck.hpp"
#include "rpn/harness.hpp"
#include "rpn/train.hpp"

namespace fs = std::filesystem;
using namespace rpn;

namespace {

// ---------------------------------------------------------------------------
// Pinned protocol and tolerances

const std::vector<std::uint64_t> kSeeds{1, 2, 3};
constexpr int kEpisodes = 500;
constexpr int kRoomGoalDemos = 2500;  // per training task
constexpr int kDoorKeyDemos = 5000;
constexpr int kKitchenDemos = 2000;
constexpr double kHoldout = 0.1;

constexpr double kRoomTrainMin = 0.95;
constexpr double kRoomZeroShotMin = 0.90;
constexpr double kRoomBaselineMax = 0.20;
constexpr double kRoomBudgetSec = 45 * 60;

constexpr double kDoorKeyD2Min = 0.90;
constexpr double kDoorKeyD4Min = 0.70;
constexpr double kDoorKeyD6Min = 0.45;

constexpr double kKitchenTrainMin = 0.90;
constexpr double kKitchenZeroShotMin = 0.75;
constexpr double kKitchenRpMax = 0.25;
constexpr double kKitchenGapMin = 0.15;
constexpr double kKitchenBudgetSec = 2 * 3600;

constexpr double kPreconditionMatchMin = 0.95;
constexpr double kSatisfiedMatchMin = 0.99;
constexpr int kExpertDemosPerTask = 300;

constexpr int kRandomGraphs = 10000;
constexpr double kSerializerBudgetSec = 60;

constexpr int kGradcheckNets = 100;
constexpr double kGradcheckTol = 1e-4;

const std::vector<PlannerKind> kPlanners{PlannerKind::E2E, PlannerKind::RPOnly, PlannerKind::SSOnly, PlannerKind::RPN};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100 * v << '%';
  return os.str();
}

bool verdict(int id, bool ok, const std::string& summary) {
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << summary << std::endl;
  return ok;
}

// ---------------------------------------------------------------------------
// Training runs

struct Run {
  std::string name;
  std::string domain;
  std::vector<std::string> train_tasks;
  int demos = 0;  // per training task
};

const Run kRoomGoalRun{"roomgoal", "roomgoal", {"k-d", "d-g"}, kRoomGoalDemos};
const Run kDoorKeyRun{"doorkey", "doorkey", {"D=2"}, kDoorKeyDemos};
const Run kKitchenRun{"kitchen", "kitchen", {"I=3,D=2"}, kKitchenDemos};

class Lab {
 public:
  explicit Lab(fs::path work) : work_(std::move(work)) { fs::create_directories(work_); }

  // Demonstrations of every training task; per-task seeds derive from the run seed.
  Dataset dataset(const Run& run, std::uint64_t seed) const {
    Dataset ds = make_dataset(run.domain);
    for (std::size_t k = 0; k < run.train_tasks.size(); ++k)
      generate_demos(ds, parse_task(run.domain, run.train_tasks[k]), run.demos, mix_seed(seed, static_cast<int>(k)));
    return ds;
  }

  std::pair<Dataset, Dataset> splits(const Run& run, std::uint64_t seed) const {
    return split(dataset(run, seed), 1.0 - kHoldout, seed);
  }

  // Trained model for (run, seed), from cache when present. Training CPU
  // seconds are stored next to the checkpoint.
  const Model& model(const Run& run, std::uint64_t seed) {
    const auto key = run.name + "_s" + std::to_string(seed);
    if (auto it = models_.find(key); it != models_.end()) return it->second;
    const auto ckpt = work_ / (key + ".ckpt");
    const auto secs = work_ / (key + ".sec");
    if (fs::exists(ckpt) && fs::exists(secs)) {
      std::ifstream is(secs);
      is >> train_sec_[key];
      return models_.emplace(key, load_checkpoint(ckpt.string())).first->second;
    }
    const double t0 = cpu_seconds();
    auto [tr, ho] = splits(run, seed);
    TrainConfig cfg;
    cfg.epochs = 40;
    const std::vector<HeadTag> heads(kAllHeads.begin(), kAllHeads.end());
    auto res = train(tr, ho, heads, cfg, seed, false);
    const double dt = cpu_seconds() - t0;
    save_checkpoint(ckpt.string(), res.model);
    std::ofstream(secs) << std::setprecision(17) << dt << '\n';
    train_sec_[key] = dt;
    std::cout << "  trained " << key << " in " << std::fixed << std::setprecision(0) << dt << " s cpu" << std::endl;
    return models_.emplace(key, std::move(res.model)).first->second;
  }

  std::vector<const Model*> models(const Run& run) {
    std::vector<const Model*> out;
    for (auto s : kSeeds) out.push_back(&model(run, s));
    return out;
  }

  double train_seconds(const Run& run) {
    double t = 0;
    for (auto s : kSeeds) {
      model(run, s);
      t += train_sec_[run.name + "_s" + std::to_string(s)];
    }
    return t;
  }

  // Evaluation of one planner on one task over all seeds, cached as text.
  struct Cell {
    TaskReport rep;
    double seconds = 0.0;
  };

  Cell eval(const Run& run, PlannerKind kind, const std::string& task) {
    const auto file = work_ / (run.name + "_eval_" + to_string(kind) + "_" + sanitize(task) + ".txt");
    if (fs::exists(file)) return load_cell(file);
    const auto ms = models(run);
    const double t0 = cpu_seconds();
    Cell c{evaluate_planner(kind, ms, parse_task(run.domain, task), kEpisodes, kSeeds), 0.0};
    c.seconds = cpu_seconds() - t0;
    save_cell(file, c);
    return c;
  }

 private:
  static std::string sanitize(std::string s) {
    for (auto& ch : s)
      if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
    return s;
  }

  static void save_cell(const fs::path& p, const Cell& c) {
    std::ofstream os(p);
    const auto& r = c.rep;
    os << std::setprecision(17) << r.planner << ' ' << r.task << ' ' << r.episodes << ' ' << c.seconds << ' '
       << r.success << ' ' << r.success_se << ' ' << r.completion << ' ' << r.completion_se << ' ' << r.mean_steps
       << '\n';
    for (int e : r.errors) os << e << ' ';
    os << '\n' << r.seeds.size() << '\n';
    for (const auto& s : r.seeds) os << s.seed << ' ' << s.success << ' ' << s.completion << '\n';
  }

  static Cell load_cell(const fs::path& p) {
    std::ifstream is(p);
    Cell c;
    auto& r = c.rep;
    std::size_t n = 0;
    is >> r.planner >> r.task >> r.episodes >> c.seconds >> r.success >> r.success_se >> r.completion >>
        r.completion_se >> r.mean_steps;
    for (auto& e : r.errors) is >> e;
    is >> n;
    r.seeds.resize(n);
    for (auto& s : r.seeds) is >> s.seed >> s.success >> s.completion;
    if (!is) throw std::runtime_error("corrupt evaluation cache " + p.string());
    return c;
  }

  fs::path work_;
  std::map<std::string, Model> models_;
  std::map<std::string, double> train_sec_;
};

void print_cell(const Lab::Cell& c) {
  const auto& r = c.rep;
  std::cout << "  " << std::left << std::setw(18) << r.task << std::setw(9) << r.planner << std::right
            << " success " << std::setw(6) << pct(r.success) << " (se " << pct(r.success_se) << ")  completion "
            << std::setw(6) << pct(r.completion) << "  failures";
  for (int e = 1; e < kErrorClasses; ++e)
    if (r.errors[e]) std::cout << ' ' << to_string(static_cast<ErrorClass>(e)) << '=' << r.errors[e];
  std::cout << std::endl;
}

// ---------------------------------------------------------------------------
// Criteria

bool roomgoal_training_tasks(Lab& lab) {
  const double train_sec = lab.train_seconds(kRoomGoalRun);
  double eval_sec = 0;
  bool ok = true;
  double worst = 1.0;
  for (const std::string task : {"k-d", "d-g"})
    for (auto k : kPlanners) {
      const auto c = lab.eval(kRoomGoalRun, k, task);
      print_cell(c);
      eval_sec += c.seconds;
      worst = std::min(worst, c.rep.success);
      ok = ok && c.rep.success >= kRoomTrainMin;
    }
  const double total = train_sec + eval_sec;
  std::cout << "  cpu: training " << std::fixed << std::setprecision(0) << train_sec << " s, evaluation " << eval_sec
            << " s" << std::endl;
  const bool in_budget = total < kRoomBudgetSec;
  return verdict(1, ok && in_budget,
                 "RoomGoal k-d, d-g: lowest planner success " + pct(worst) + " (need >= " + pct(kRoomTrainMin) +
                     "), cpu " + std::to_string(static_cast<int>(total)) + " s (need < " +
                     std::to_string(static_cast<int>(kRoomBudgetSec)) + ")");
}

bool roomgoal_zero_shot(Lab& lab) {
  const double train_sec = lab.train_seconds(kRoomGoalRun);
  double eval_sec = 0;
  std::map<PlannerKind, double> s;
  for (auto k : kPlanners) {
    const auto c = lab.eval(kRoomGoalRun, k, "k-d-g");
    print_cell(c);
    eval_sec += c.seconds;
    s[k] = c.rep.success;
  }
  const bool ok = s[PlannerKind::RPN] >= kRoomZeroShotMin && s[PlannerKind::RPOnly] >= kRoomZeroShotMin &&
                  s[PlannerKind::E2E] <= kRoomBaselineMax && s[PlannerKind::SSOnly] <= kRoomBaselineMax;
  const bool in_budget = train_sec + eval_sec < kRoomBudgetSec;
  return verdict(2, ok && in_budget,
                 "RoomGoal k-d-g: rpn " + pct(s[PlannerKind::RPN]) + ", rp-only " + pct(s[PlannerKind::RPOnly]) +
                     " (need >= " + pct(kRoomZeroShotMin) + "); e2e " + pct(s[PlannerKind::E2E]) + ", ss-only " +
                     pct(s[PlannerKind::SSOnly]) + " (need <= " + pct(kRoomBaselineMax) + ")");
}

std::map<std::string, std::map<PlannerKind, Lab::Cell>> doorkey_cells(Lab& lab, bool print) {
  std::map<std::string, std::map<PlannerKind, Lab::Cell>> out;
  for (const std::string task : {"D=2", "D=4", "D=6"})
    for (auto k : kPlanners) {
      out[task][k] = lab.eval(kDoorKeyRun, k, task);
      if (print) print_cell(out[task][k]);
    }
  return out;
}

bool doorkey_generalization(Lab& lab) {
  auto cells = doorkey_cells(lab, true);
  auto s = [&](const std::string& t, PlannerKind k) { return cells[t][k].rep.success; };
  bool ok = s("D=2", PlannerKind::RPN) >= kDoorKeyD2Min;
  for (const std::string t : {"D=4", "D=6"}) {
    const double weakest = std::max(s(t, PlannerKind::RPOnly), s(t, PlannerKind::E2E));
    const bool order = s(t, PlannerKind::RPN) > s(t, PlannerKind::SSOnly) && s(t, PlannerKind::SSOnly) > weakest;
    std::cout << "  " << t << " ordering rpn > ss-only > max(rp-only, e2e): " << (order ? "holds" : "violated")
              << std::endl;
    ok = ok && order;
  }
  ok = ok && s("D=4", PlannerKind::RPN) >= kDoorKeyD4Min && s("D=6", PlannerKind::RPN) >= kDoorKeyD6Min;
  return verdict(3, ok,
                 "DoorKey rpn D=2 " + pct(s("D=2", PlannerKind::RPN)) + ", D=4 " + pct(s("D=4", PlannerKind::RPN)) +
                     ", D=6 " + pct(s("D=6", PlannerKind::RPN)) + "; ss-only D=4 " +
                     pct(s("D=4", PlannerKind::SSOnly)) + ", D=6 " + pct(s("D=6", PlannerKind::SSOnly)));
}

// The named class is the most frequent failure: at least one failure, and no
// class strictly more frequent.
bool top_failure_is(const TaskReport& r, ErrorClass want) {
  int best = 0;
  for (int e = 1; e < kErrorClasses; ++e) best = std::max(best, r.errors[e]);
  return best > 0 && r.error_count(want) == best;
}

bool doorkey_error_shape(Lab& lab) {
  auto cells = doorkey_cells(lab, false);
  std::string summary;
  bool ok = true;
  for (auto [k, want] : std::vector<std::pair<PlannerKind, ErrorClass>>{{PlannerKind::RPN, ErrorClass::NoPrec},
                                                                         {PlannerKind::E2E, ErrorClass::BadGoal},
                                                                         {PlannerKind::SSOnly, ErrorClass::BadGoal}}) {
    const auto& r = cells["D=6"][k].rep;
    print_cell(cells["D=6"][k]);
    const bool hit = top_failure_is(r, want);
    ok = ok && hit;
    if (!summary.empty()) summary += "; ";
    summary += std::string(to_string(k)) + " top failure " +
               (r.top_failure() == ErrorClass::None ? std::string("none") : to_string(r.top_failure())) +
               " (want " + to_string(want) + ")";
  }
  return verdict(4, ok, "DoorKey D=6: " + summary);
}

bool kitchen_generalization(Lab& lab) {
  const double train_sec = lab.train_seconds(kKitchenRun);
  double eval_sec = 0;
  auto cell = [&](PlannerKind k, const std::string& t) {
    auto c = lab.eval(kKitchenRun, k, t);
    print_cell(c);
    eval_sec += c.seconds;
    return c.rep;
  };
  const auto rpn_train = cell(PlannerKind::RPN, "I=3,D=2");
  const auto rpn_zero = cell(PlannerKind::RPN, "I=6,D=3");
  const auto rp_zero = cell(PlannerKind::RPOnly, "I=6,D=3");
  const double gap = rp_zero.completion - rp_zero.success;
  const double total = train_sec + eval_sec;
  std::cout << "  cpu: training " << std::fixed << std::setprecision(0) << train_sec << " s, evaluation " << eval_sec
            << " s" << std::endl;
  const bool ok = rpn_train.success >= kKitchenTrainMin && rpn_zero.success >= kKitchenZeroShotMin &&
                  rp_zero.success <= kKitchenRpMax && gap >= kKitchenGapMin && total <= kKitchenBudgetSec;
  return verdict(5, ok,
                 "Kitchen rpn I=3,D=2 " + pct(rpn_train.success) + ", I=6,D=3 " + pct(rpn_zero.success) +
                     "; rp-only I=6,D=3 success " + pct(rp_zero.success) + ", completion " +
                     pct(rp_zero.completion) + "; cpu " + std::to_string(static_cast<int>(total)) + " s");
}

bool oracle_equivalence(Lab& lab) {
  bool ok = true;
  std::string summary;
  // Learned heads against the oracle on held-out demo states.
  for (const Run* run : {&kDoorKeyRun, &kRoomGoalRun, &kKitchenRun}) {
    double prec = 0, sat = 0;
    for (auto seed : kSeeds) {
      const Model& m = lab.model(*run, seed);
      const auto ho = lab.splits(*run, seed).second;
      std::size_t pn = 0, pk = 0, sn = 0, sk = 0;
      const auto& ph = m.get<NodeHead<float>>(HeadTag::Precondition);
      const auto& sh = m.get<ScoreHead<float>>(HeadTag::Satisfied);
      for (const auto& s : ho.samples) {
        const auto& obs = ho.observations[s.obs].features;
        if (s.head == HeadTag::Precondition) {
          ++pn;
          pk += same_nodes(predict_nodes(ph, obs, m.spec, s.goal), s.target) ? 1 : 0;
        } else if (s.head == HeadTag::Satisfied) {
          ++sn;
          sk += (predict_satisfied(sh, obs, m.spec, s.goal.front()) >= kThreshold) == (s.label > 0.5f) ? 1 : 0;
        }
      }
      prec += static_cast<double>(pk) / std::max<std::size_t>(pn, 1) / kSeeds.size();
      sat += static_cast<double>(sk) / std::max<std::size_t>(sn, 1) / kSeeds.size();
    }
    std::cout << "  " << std::left << std::setw(9) << run->name << std::right << " precondition match " << pct(prec)
              << ", satisfied match " << pct(sat) << std::endl;
    ok = ok && prec >= kPreconditionMatchMin && sat >= kSatisfiedMatchMin;
    summary += run->name + " prec " + pct(prec) + " sat " + pct(sat) + "; ";
  }
  // Oracle-headed regression against the scripted expert, every task.
  std::size_t states = 0, same = 0;
  const std::vector<std::pair<std::string, std::string>> tasks{
      {"doorkey", "D=1"},     {"doorkey", "D=2"},     {"doorkey", "D=4"},     {"doorkey", "D=6"},
      {"roomgoal", "k-d"},    {"roomgoal", "d-g"},    {"roomgoal", "k-d-g"},  {"kitchen", "I=1,D=1"},
      {"kitchen", "I=3,D=2"}, {"kitchen", "I=4,D=2"}, {"kitchen", "I=6,D=3"}};
  for (const auto& [d, t] : tasks) {
    with_domain(parse_task(d, t), [&](const auto&, const auto& oracle, const auto& sampler) {
      using O = std::decay_t<decltype(oracle)>;
      const OracleHeads<O> heads(oracle);
      for (int i = 0; i < kExpertDemosPerTask; ++i) {
        auto [s0, g] = sampler(mix_seed(0xacce, i));
        const auto demo = demonstrate(oracle, s0, g);
        for (const auto& st : demo.steps) {
          const auto tr = regression_planning(heads, st.snapshot, g);
          ++states;
          same += tr.termination == Termination::Reachable && tr.result == st.goal ? 1 : 0;
        }
      }
    });
  }
  const double reproduced = static_cast<double>(same) / states;
  std::cout << "  oracle-headed regression reproduces " << same << " / " << states << " expert goals" << std::endl;
  ok = ok && same == states;
  return verdict(6, ok, summary + "expert next goal " + pct(reproduced));
}

bool serializer_exactness() {
  const double t0 = cpu_seconds();
  const auto& sp = grid::space(grid::GridDomain::DoorKey);
  const auto atoms = ground_atoms(sp.schema());
  Rng rng(2024);
  std::size_t graphs = 0, agree = 0;
  // Ground-truth heads: the dependency matrix of a fixed digraph, nothing satisfied.
  struct Heads {
    using Obs = int;
    const std::vector<std::uint32_t>* adj = nullptr;
    const PlanningSpace& space() const { return grid::space(grid::GridDomain::DoorKey); }
    double satisfied(const Obs&, const Atom&) const { return 0.0; }
    ScoreMatrix dependency(const Obs&, const Goal& g) const {
      const auto k = static_cast<Eigen::Index>(g.size());
      ScoreMatrix m = ScoreMatrix::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
          if (i != j && ((*adj)[i] >> j & 1)) m(i, j) = 1.0;
      return m;
    }
    double reachable(const Obs&, const Goal&) const { return 1.0; }
    Goal precondition(const Obs&, const Goal&) const { return {}; }
  };
  auto check = [&](const std::vector<std::uint32_t>& adj) {
    const int k = static_cast<int>(adj.size());
    std::vector<Atom> pool = atoms;
    rng.shuffle(pool);
    Goal g;
    std::vector<std::size_t> prio;
    for (int i = 0; i < k; ++i) {
      g.push_back(pool[i]);
      prio.push_back(sp.node_of(pool[i]));
    }
    Heads h{&adj};
    const auto got = subgoal_serialization(h, 0, g).block;
    std::vector<std::size_t> want_idx;
    for (int i : testing::brute_serialize(adj, prio)) want_idx.push_back(static_cast<std::size_t>(i));
    ++graphs;
    agree += got.atoms() == g.subset(want_idx).atoms() ? 1 : 0;
  };
  std::size_t exhaustive = 0;
  for (int k = 1; k <= 4; ++k) {
    const int pairs = k * (k - 1);
    for (std::uint32_t mask = 0; mask < (1u << pairs); ++mask) {
      std::vector<std::uint32_t> adj(k, 0);
      int bit = 0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          if (i != j && (mask >> bit++ & 1)) adj[i] |= 1u << j;
      check(adj);
      ++exhaustive;
    }
  }
  for (int n = 0; n < kRandomGraphs; ++n) {
    const int k = rng.range(5, 8);
    const double p = rng.uniform(0.05, 0.7);
    std::vector<std::uint32_t> adj(k, 0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j && rng.uniform() < p) adj[i] |= 1u << j;
    check(adj);
  }
  const double dt = cpu_seconds() - t0;
  std::cout << "  exhaustive K<=4: " << exhaustive << " graphs; random K in 5..8: " << kRandomGraphs << std::endl;
  return verdict(7, agree == graphs && dt < kSerializerBudgetSec,
                 std::to_string(agree) + " / " + std::to_string(graphs) + " agree with brute force in " +
                     std::to_string(dt).substr(0, 5) + " s cpu");
}

bool numerics() {
  const auto cases = random_gradchecks(kGradcheckNets, 1);
  const double worst = max_rel_error(cases);
  std::cout << "  gradcheck: " << cases.size() << " nets, max relative error " << worst << std::endl;

  auto ckpt_text = [](const Model& m) {
    std::ostringstream os;
    write_checkpoint(os, m);
    return os.str();
  };
  Dataset ds = make_dataset("doorkey");
  generate_demos(ds, parse_task("doorkey", "D=2"), 200, 11);
  const auto [tr, ho] = split(ds, 0.9, 11);
  TrainConfig cfg;
  cfg.epochs = 3;
  const std::vector<HeadTag> heads(kAllHeads.begin(), kAllHeads.end());
  const auto a = ckpt_text(train(tr, ho, heads, cfg, 42).model);
  const auto b = ckpt_text(train(tr, ho, heads, cfg, 42).model);
  const bool identical = a == b;
  std::cout << "  checkpoints from identical seeds: " << (identical ? "bit-identical" : "DIFFER") << " ("
            << a.size() << " bytes)" << std::endl;

  std::istringstream cin_(a);
  const bool ckpt_rt = ckpt_text(read_checkpoint(cin_)) == a;
  bool data_rt = true;
  for (auto [d, t] : std::vector<std::pair<std::string, std::string>>{
           {"doorkey", "D=3"}, {"roomgoal", "k-d-g"}, {"kitchen", "I=4,D=2"}}) {
    Dataset x = make_dataset(d);
    generate_demos(x, parse_task(d, t), 50, 5);
    std::stringstream ss;
    write_dataset(ss, x);
    const auto text = ss.str();
    const auto back = read_dataset(ss);
    std::ostringstream again;
    write_dataset(again, back);
    data_rt = data_rt && back == x && again.str() == text;
  }
  std::cout << "  round trip: checkpoint " << (ckpt_rt ? "lossless" : "LOSSY") << ", datasets "
            << (data_rt ? "lossless" : "LOSSY") << std::endl;
  std::ostringstream w;
  w << std::scientific << std::setprecision(2) << worst;
  return verdict(8, worst < kGradcheckTol && identical && ckpt_rt && data_rt,
                 "gradcheck max " + w.str() + " (need < 1e-4), deterministic checkpoints " +
                     (identical ? "yes" : "no") + ", round trips " + (ckpt_rt && data_rt ? "lossless" : "lossy"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> which;
  std::string work = "acceptance_work";
  app.add_option("--criterion", which, "criteria to run (default: all)")->check(CLI::Range(1, 8));
  app.add_option("--work", work, "cache directory for checkpoints and evaluation tables")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};

  Lab lab{fs::path(work)};
  bool all = true;
  for (int c : which) {
    try {
      switch (c) {
        case 1: all = roomgoal_training_tasks(lab) && all; break;
        case 2: all = roomgoal_zero_shot(lab) && all; break;
        case 3: all = doorkey_generalization(lab) && all; break;
        case 4: all = doorkey_error_shape(lab) && all; break;
        case 5: all = kitchen_generalization(lab) && all; break;
        case 6: all = oracle_equivalence(lab) && all; break;
        case 7: all = serializer_exactness() && all; break;
        case 8: all = numerics() && all; break;
      }
    } catch (const std::exception& e) {
      all = verdict(c, false, std::string("error: ") + e.what()) && all;
    }
  }
  return all ? 0 : 1;
}
