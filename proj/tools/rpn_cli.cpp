// rpn: data generation, training, evaluation and trace inspection.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rpn/gradcheck.hpp"
#include "rpn/harness.hpp"
#include "rpn/train.hpp"

namespace {

using namespace rpn;

// Creates the directory that will hold `path`.
void ensure_parent(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::vector<std::string> split_list(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& s : in) {
    std::stringstream ss(s);
    std::string x;
    while (std::getline(ss, x, ','))
      if (!x.empty()) out.push_back(x);
  }
  return out;
}

// Head names, planner names (their required heads) or "all".
std::vector<HeadTag> parse_heads(const std::vector<std::string>& names) {
  std::vector<HeadTag> out;
  auto add = [&](HeadTag h) {
    if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
  };
  for (const auto& n : split_list(names)) {
    if (n == "all") {
      for (auto h : kAllHeads) add(h);
    } else if (auto h = parse_head(n)) {
      add(*h);
    } else if (auto k = parse_planner(n); k && *k != PlannerKind::Oracle) {
      for (auto x : heads_for(*k)) add(x);
    } else {
      throw std::invalid_argument("unknown head or planner '" + n + "'");
    }
  }
  return out;
}

struct GenArgs {
  std::string domain;
  std::vector<std::string> tasks;
  int n = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

int gen_data(const GenArgs& a) {
  Dataset ds = make_dataset(a.domain);
  for (std::size_t k = 0; k < a.tasks.size(); ++k) {
    const auto t = parse_task(a.domain, a.tasks[k]);
    generate_demos(ds, t, a.n, mix_seed(a.seed, static_cast<int>(k)));
    std::cerr << t.name() << ": " << a.n << " demos\n";
  }
  ensure_parent(a.out);
  save_dataset(a.out, ds);
  std::cout << "wrote " << a.out << ": " << ds.observations.size() << " observations, " << ds.samples.size()
            << " samples\n";
  for (auto h : kAllHeads) std::cout << "  " << to_string(h) << ' ' << ds.count(h) << '\n';
  return 0;
}

struct TrainArgs {
  std::vector<std::string> heads{"all"};
  std::string data;
  TrainConfig cfg;
  double holdout = 0.1;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;
};

int train_cmd(TrainArgs a) {
  const auto heads = parse_heads(a.heads);
  const Dataset ds = load_dataset(a.data);
  auto [tr, ho] = split(ds, 1.0 - a.holdout, a.seed);
  if (!a.quiet) a.cfg.log = &std::cerr;
  for (auto h : heads)
    if (tr.count(h) == 0) std::cerr << "note: no samples for " << to_string(h) << ", head skipped\n";
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = train(tr, ho, heads, a.cfg, a.seed, false);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ensure_parent(a.out);
  save_checkpoint(a.out, res.model);
  std::ofstream curves(a.out + ".curves.csv");
  curves << "head,epoch,train_loss,holdout_loss,holdout_accuracy\n";
  for (const auto& r : res.reports)
    for (const auto& m : r.curve)
      curves << to_string(r.head) << ',' << m.epoch << ',' << m.train_loss << ',' << m.holdout_loss << ','
             << m.holdout_accuracy << '\n';
  std::cout << "wrote " << a.out << " (" << secs << " s)\n";
  for (const auto& r : res.reports)
    std::cout << "  " << to_string(r.head) << ": best epoch " << r.best_epoch << ", holdout loss " << r.best_loss
              << ", holdout accuracy " << r.best_accuracy << " (" << r.train_items << " train, " << r.holdout_items
              << " holdout items)\n";
  return 0;
}

struct EvalArgs {
  std::vector<std::string> planners{"rpn"};
  std::vector<std::string> checkpoints;
  std::string domain;
  std::vector<std::string> tasks;
  int episodes = 500;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string report;
  bool plot = false;
  EpisodeLimits lim;
};

int eval_cmd(const EvalArgs& a) {
  std::vector<Model> models;
  for (const auto& c : a.checkpoints) models.push_back(load_checkpoint(c));
  std::vector<const Model*> per_seed;
  for (std::size_t k = 0; k < a.seeds.size() && !models.empty(); ++k)
    per_seed.push_back(&models[models.size() == 1 ? 0 : k]);
  if (models.size() > 1 && models.size() != a.seeds.size())
    throw std::invalid_argument("give one checkpoint, or one per evaluation seed");
  Report rep;
  rep.limits = a.lim;
  for (const auto& task : split_list(a.tasks)) {
    const auto t = parse_task(a.domain, task);
    for (const auto& p : split_list(a.planners)) {
      const auto kind = parse_planner(p);
      if (!kind) throw std::invalid_argument("unknown planner '" + p + "'");
      if (*kind != PlannerKind::Oracle && models.empty()) throw std::invalid_argument(p + " needs --checkpoint");
      rep.rows.push_back(evaluate_planner(*kind, per_seed, t, a.episodes, a.seeds, a.lim));
      const auto& r = rep.rows.back();
      std::cerr << r.task << ' ' << r.planner << ": success " << r.success << ", completion " << r.completion
                << ", top failure " << to_string(r.top_failure()) << '\n';
    }
  }
  write_table(std::cout, rep);
  if (!a.report.empty()) {
    ensure_parent(a.report);
    emit_report(a.report, rep, a.plot);
  }
  return 0;
}

struct TraceArgs {
  std::string planner = "rpn";
  std::string checkpoint;
  std::string domain;
  std::string task;
  std::uint64_t seed = 1;
  EpisodeLimits lim;
};

// Runs one episode, printing every planner call and the controller outcome.
int plan_trace(const TraceArgs& a) {
  const auto kind = parse_planner(a.planner);
  if (!kind) throw std::invalid_argument("unknown planner '" + a.planner + "'");
  std::optional<Model> model;
  if (*kind != PlannerKind::Oracle) {
    if (a.checkpoint.empty()) throw std::invalid_argument(a.planner + " needs --checkpoint");
    model = load_checkpoint(a.checkpoint);
  }
  const auto t = parse_task(a.domain, a.task);
  return with_domain(t, [&](const auto& world, const auto& oracle, const auto& sampler) {
    using W = std::decay_t<decltype(world)>;
    const PlannerFn<typename W::State> plan =
        model ? learned_planner<W>(world, *kind, *model, a.lim.max_depth) : oracle_planner(oracle, a.lim.max_depth);
    const auto& schema = world.space().schema();
    auto [s, g] = sampler(a.seed);
    std::cout << "task " << t.name() << " seed " << a.seed << "\nfinal goal: " << format_goal(g, schema) << "\n";
    for (int call = 1; call <= a.lim.max_calls; ++call) {
      if (world_satisfies(world, s, g)) {
        std::cout << "success after " << world.steps(s) << " steps\n";
        return 0;
      }
      std::cout << "\n[call " << call << ", step " << world.steps(s) << "]\n";
      const auto trace = plan(s, g);
      print_trace(std::cout, trace, schema);
      if (trace.termination != Termination::Reachable) {
        std::cout << "planner stopped: " << to_string(trace.termination) << '\n';
        return 1;
      }
      auto tr = world.execute(s, trace.result);
      if (!tr.success) {
        std::cout << "controller failed: " << to_string(*tr.failure) << '\n';
        return 1;
      }
      s = std::move(tr.next);
      if (world.steps(s) > a.lim.max_steps) break;
    }
    std::cout << "step or call budget exhausted\n";
    return 1;
  });
}

int gradcheck_cmd(int nets, std::uint64_t seed, double tol) {
  const auto cs = random_gradchecks(nets, seed);
  std::map<std::string, double> worst;
  for (const auto& c : cs) worst[c.kind] = std::max(worst[c.kind], c.max_rel_error);
  for (const auto& [k, v] : worst) std::cout << "  " << k << ": " << v << '\n';
  const double m = max_rel_error(cs);
  std::cout << nets << " nets, max relative error " << m << (m < tol ? " (ok)" : " (FAIL)") << '\n';
  return m < tol ? 0 : 1;
}

void add_limits(CLI::App* c, EpisodeLimits& lim) {
  c->add_option("--max-steps", lim.max_steps, "primitive step budget per episode")->capture_default_str();
  c->add_option("--max-calls", lim.max_calls, "planner invocations per episode")->capture_default_str();
  c->add_option("--depth", lim.max_depth, "regression depth limit M")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression planning networks: data, training, evaluation"};
  app.require_subcommand(1);
  int rc = 0;

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "generate expert demonstrations and per-head samples");
  g->add_option("domain", gen.domain, "doorkey | roomgoal | kitchen")->required();
  g->add_option("task", gen.tasks, "task(s), e.g. D=2, k-d d-g, I=3,D=2")->required();
  g->add_option("--n", gen.n, "demonstrations per task")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out)->required();
  g->callback([&] { rc = gen_data(gen); });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train heads on a dataset");
  t->add_option("--heads", tr.heads, "head or planner names, comma separated, or 'all'")->capture_default_str();
  t->add_option("--data", tr.data)->required();
  t->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
  t->add_option("--patience", tr.cfg.patience)->capture_default_str();
  t->add_option("--min-delta", tr.cfg.min_delta, "holdout-loss decrease that counts as improvement")
      ->capture_default_str();
  t->add_option("--batch", tr.cfg.batch)->capture_default_str();
  t->add_option("--lr", tr.cfg.lr)->capture_default_str();
  t->add_option("--hidden", tr.cfg.hidden, "hidden width (0: domain default)")->capture_default_str();
  t->add_option("--e2e-hidden", tr.cfg.e2e_hidden, "E2E hidden width (0: domain default)")->capture_default_str();
  t->add_option("--holdout", tr.holdout, "holdout fraction of demos")->capture_default_str();
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_option("--out", tr.out)->required();
  t->add_flag("--quiet", tr.quiet, "no per-epoch log");
  t->callback([&] { rc = train_cmd(tr); });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "evaluate planners and write a report");
  e->add_option("--planner", ev.planners, "rpn, e2e, rp-only, ss-only, oracle (comma separated)")
      ->capture_default_str();
  e->add_option("--checkpoint", ev.checkpoints, "one checkpoint, or one per seed");
  e->add_option("--domain", ev.domain)->required();
  e->add_option("--task", ev.tasks)->required();
  e->add_option("--episodes", ev.episodes, "episodes per seed")->capture_default_str();
  e->add_option("--seeds", ev.seeds)->capture_default_str();
  e->add_option("--report", ev.report, "output base path for .csv/.txt(/.svg)");
  e->add_flag("--plot", ev.plot, "also write an SVG plot");
  add_limits(e, ev.lim);
  e->callback([&] { rc = eval_cmd(ev); });

  TraceArgs pt;
  auto* p = app.add_subcommand("plan-trace", "run one episode and print every planning trace");
  p->add_option("--planner", pt.planner)->capture_default_str();
  p->add_option("--checkpoint", pt.checkpoint);
  p->add_option("--domain", pt.domain)->required();
  p->add_option("--task", pt.task)->required();
  p->add_option("--seed", pt.seed)->capture_default_str();
  add_limits(p, pt.lim);
  p->callback([&] { rc = plan_trace(pt); });

  int nets = 100;
  std::uint64_t gseed = 1;
  double tol = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of backprop on random nets");
  gc->add_option("--nets", nets)->capture_default_str();
  gc->add_option("--seed", gseed)->capture_default_str();
  gc->add_option("--tol", tol)->capture_default_str();
  gc->callback([&] { rc = gradcheck_cmd(nets, gseed, tol); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return rc;
}
