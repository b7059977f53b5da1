#pragma once
// Mini-batch Adam training of each head with per-epoch holdout evaluation and
// best-holdout-loss selection.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "rpn/dataset.hpp"
#include "rpn/model.hpp"

namespace rpn {

enum class TrainErrc { EmptyDataset, DivergedLoss };

class TrainError : public std::runtime_error {
 public:
  TrainError(TrainErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  TrainErrc code() const { return code_; }

 private:
  TrainErrc code_;
};

struct TrainConfig {
  int epochs = 30;
  int patience = 5;         // epochs without holdout-loss improvement before stopping
  double min_delta = 1e-4;  // smaller holdout-loss decreases do not count as improvement
  int batch = 128;
  double lr = 1e-3;
  int hidden = 0;       // 0: domain default
  int e2e_hidden = 0;   // 0: domain default
  std::ostream* log = nullptr;
};

struct EpochMetric {
  int epoch = 0;
  double train_loss = 0.0;
  double holdout_loss = 0.0;
  double holdout_accuracy = 0.0;
};

struct HeadReport {
  HeadTag head = HeadTag::Satisfied;
  std::size_t train_items = 0;
  std::size_t holdout_items = 0;
  std::vector<EpochMetric> curve;
  double best_loss = 0.0;
  double best_accuracy = 0.0;
  int best_epoch = 0;
};

struct TrainResult {
  Model model;
  std::vector<HeadReport> reports;
};

namespace detail {

// One training item: a sample, plus the ordered pair for dependency samples.
struct Item {
  int sample = 0;
  int i = -1;
  int j = -1;
};

inline std::vector<Item> items_for(const Dataset& ds, HeadTag h) {
  std::vector<Item> out;
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    const auto& x = ds.samples[s];
    if (x.head != h) continue;
    if (h != HeadTag::Dependency) {
      out.push_back({static_cast<int>(s)});
      continue;
    }
    const int k = static_cast<int>(x.goal.size());
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j) out.push_back({static_cast<int>(s), i, j});
  }
  return out;
}

struct Eval {
  double loss = 0.0;
  std::size_t correct = 0;
};

// Forward (and optionally backward) over one batch; works for any head kind.
inline Eval run_batch(AnyHead& head, HeadTag tag, const Dataset& ds, const InputSpec& spec,
                      const std::vector<Item>& items, std::size_t lo, std::size_t hi, bool learn) {
  Eval ev;
  auto sample = [&](std::size_t k) -> const Sample& { return ds.samples[items[k].sample]; };
  auto obs = [&](std::size_t k) -> const ObsMatrix& { return ds.observations[sample(k).obs].features; };
  const std::size_t n = hi - lo;
  std::visit(
      [&](auto& h) {
        using H = std::decay_t<decltype(h)>;
        typename H::Batch b;
        if constexpr (std::is_same_v<H, NodeHead<float>>) {
          std::vector<int> labels;
          labels.reserve(n * static_cast<std::size_t>(spec.nodes));
          for (std::size_t k = lo; k < hi; ++k) {
            H::add_sample(b, obs(k), spec, sample(k).goal);
            std::vector<int> lab(spec.nodes, static_cast<int>(NodeClass::Null));
            for (const auto& t : sample(k).target) lab[t.node] = static_cast<int>(class_of(t));
            labels.insert(labels.end(), lab.begin(), lab.end());
          }
          auto p = h.forward(b);
          auto lg = nn::cross_entropy(p.logits, labels);
          ev.loss = lg.loss;
          for (std::size_t s = 0; s < n; ++s) {
            bool ok = true;
            for (int nd = 0; nd < spec.nodes && ok; ++nd) {
              Eigen::Index c = 0;
              const auto r = static_cast<Eigen::Index>(s * spec.nodes + nd);
              p.logits.row(r).maxCoeff(&c);
              ok = c == labels[r];
            }
            ev.correct += ok ? 1 : 0;
          }
          if (learn) h.backward(b, p, lg.grad);
        } else {
          std::vector<float> y;
          for (std::size_t k = lo; k < hi; ++k) {
            const auto& s = sample(k);
            if constexpr (std::is_same_v<H, ReachHead<float>>) {
              H::add_sample(b, obs(k), spec, s.goal);
              y.push_back(s.label);
            } else if (tag == HeadTag::Dependency) {
              H::add_pair(b, obs(k), spec, s.goal[items[k].i], s.goal[items[k].j]);
              y.push_back(static_cast<float>(s.matrix[items[k].i * s.goal.size() + items[k].j]));
            } else {
              H::add_atom(b, obs(k), spec, s.goal.at(0));
              y.push_back(s.label);
            }
          }
          auto p = h.forward(b);
          auto lg = nn::bce_with_logits(p.logits, y);
          ev.loss = lg.loss;
          for (std::size_t s = 0; s < n; ++s)
            ev.correct += ((p.logits(static_cast<Eigen::Index>(s), 0) > 0.0f) == (y[s] > 0.5f)) ? 1 : 0;
          if (learn) h.backward(b, p, lg.grad);
        }
      },
      head);
  return ev;
}

struct Score {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean loss and accuracy over all items (loss weighted by batch size).
inline Score score(AnyHead& head, HeadTag tag, const Dataset& ds, const InputSpec& spec,
                   const std::vector<Item>& items, int batch) {
  Score sc;
  if (items.empty()) return sc;
  std::size_t correct = 0;
  for (std::size_t lo = 0; lo < items.size(); lo += static_cast<std::size_t>(batch)) {
    const auto hi = std::min(items.size(), lo + static_cast<std::size_t>(batch));
    const auto ev = run_batch(head, tag, ds, spec, items, lo, hi, false);
    correct += ev.correct;
    sc.loss += ev.loss * static_cast<double>(hi - lo);
  }
  sc.loss /= static_cast<double>(items.size());
  sc.accuracy = static_cast<double>(correct) / static_cast<double>(items.size());
  return sc;
}

}  // namespace detail

// Trains one head in place on `model`; returns its learning curve.
inline HeadReport train_head(Model& model, HeadTag tag, const Dataset& train, const Dataset& holdout,
                             const TrainConfig& cfg, std::uint64_t seed) {
  auto items = detail::items_for(train, tag);
  const auto hold = detail::items_for(holdout, tag);
  if (items.empty()) throw TrainError(TrainErrc::EmptyDataset, std::string("no samples for head ") + to_string(tag));

  int hidden = tag == HeadTag::E2E ? cfg.e2e_hidden : cfg.hidden;
  if (hidden <= 0) hidden = default_hidden(tag, model.domain);
  Rng init_rng(mix_seed(seed, 100 + static_cast<int>(tag)));
  AnyHead& head = model.add(tag, hidden, init_rng);
  auto params = head_params(head);
  nn::AdamState<float> adam;
  adam.lr = cfg.lr;
  Rng order_rng(mix_seed(seed, 200 + static_cast<int>(tag)));

  HeadReport rep;
  rep.head = tag;
  rep.train_items = items.size();
  rep.holdout_items = hold.size();
  AnyHead best = head;
  int stale = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(items);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < items.size(); lo += static_cast<std::size_t>(cfg.batch)) {
      const auto hi = std::min(items.size(), lo + static_cast<std::size_t>(cfg.batch));
      nn::zero_grad(params);
      detail::Eval ev;
      try {
        ev = detail::run_batch(head, tag, train, model.spec, items, lo, hi, true);
      } catch (const nn::NnError& e) {
        if (e.code() != nn::NnErrc::NonFiniteLoss) throw;
        throw TrainError(TrainErrc::DivergedLoss, std::string("loss diverged for head ") + to_string(tag));
      }
      nn::adam_step(adam, params);
      loss_sum += ev.loss;
      ++batches;
    }
    const auto& eval_items = hold.empty() ? items : hold;
    const auto& eval_set = hold.empty() ? train : holdout;
    const auto sc = detail::score(head, tag, eval_set, model.spec, eval_items, 512);
    rep.curve.push_back({epoch, loss_sum / static_cast<double>(batches), sc.loss, sc.accuracy});
    if (cfg.log)
      *cfg.log << "  " << to_string(tag) << " epoch " << epoch << " loss " << loss_sum / batches << " holdout loss "
               << sc.loss << " acc " << sc.accuracy << '\n'
               << std::flush;
    const bool improved = epoch == 1 || sc.loss < rep.best_loss - cfg.min_delta;
    if (epoch == 1 || sc.loss < rep.best_loss) {
      rep.best_loss = sc.loss;
      rep.best_accuracy = sc.accuracy;
      rep.best_epoch = epoch;
      best = head;
    }
    if (improved) {
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  model.heads.insert_or_assign(tag, std::move(best));
  return rep;
}

// Trains the requested heads. Heads without samples are skipped unless
// `required` is set, in which case EmptyDataset is raised.
inline TrainResult train(const Dataset& train_set, const Dataset& holdout, const std::vector<HeadTag>& heads,
                         const TrainConfig& cfg, std::uint64_t seed, bool required = true) {
  TrainResult r{empty_model(train_set.domain), {}};
  for (auto tag : heads) {
    if (!required && train_set.count(tag) == 0) continue;
    r.reports.push_back(train_head(r.model, tag, train_set, holdout, cfg, seed));
  }
  return r;
}

}  // namespace rpn
