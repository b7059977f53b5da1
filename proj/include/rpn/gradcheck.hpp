#pragma once
// Finite-difference check of backprop over randomly shaped networks: plain
// MLPs under each loss, and every head kind on a grid input spec.

#include <algorithm>
#include <vector>

#include "rpn/envs/grid.hpp"
#include "rpn/heads.hpp"

namespace rpn {

struct GradcheckCase {
  std::string kind;
  std::size_t params = 0;
  double max_rel_error = 0.0;
};

namespace detail {

inline int pick(Rng& rng, int n) { return static_cast<int>(rng.below(static_cast<std::uint64_t>(n))); }

inline nn::Matrix<double> random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  nn::Matrix<double> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

inline std::size_t count_params(const nn::ParamRefs<double>& ps) {
  std::size_t n = 0;
  for (auto* p : ps) n += static_cast<std::size_t>(p->value.size());
  return n;
}

inline GoalNodes random_goal(Rng& rng, const InputSpec& spec) {
  GoalNodes g;
  const int k = 1 + pick(rng, 3);
  for (int i = 0; i < k; ++i) g.push_back({static_cast<std::uint16_t>(pick(rng, spec.nodes)), pick(rng, 2) == 1});
  return g;
}

inline GradcheckCase check_mlp(Rng& rng) {
  std::vector<int> sizes{1 + pick(rng, 6)};
  const int layers = 1 + pick(rng, 4);
  for (int l = 0; l < layers; ++l) sizes.push_back(1 + pick(rng, 8));
  const int loss_kind = pick(rng, 3);
  if (loss_kind == 0) sizes.back() = 1;
  if (loss_kind == 1) sizes.back() = std::max(2, sizes.back());
  nn::Mlp<double> net("mlp", sizes, loss_kind == 2 && pick(rng, 2) == 1);
  net.init(rng);
  const Eigen::Index batch = 1 + pick(rng, 5);
  const auto x = random_matrix(rng, batch, sizes.front());
  std::vector<double> y;
  std::vector<int> labels;
  for (Eigen::Index i = 0; i < batch; ++i) {
    y.push_back(pick(rng, 2));
    labels.push_back(pick(rng, sizes.back()));
  }
  const auto target = random_matrix(rng, batch, sizes.back());
  auto loss_of = [&](const nn::Matrix<double>& z) {
    if (loss_kind == 0) return nn::bce_with_logits(z, y);
    if (loss_kind == 1) return nn::cross_entropy(z, labels);
    return nn::squared_error(z, target);
  };
  nn::ParamRefs<double> ps;
  net.collect(ps);
  const double err = nn::gradcheck(
      ps, [&] { return loss_of(net.forward(x)).loss; },
      [&] {
        typename nn::Mlp<double>::Cache c;
        const auto z = net.forward(x, &c);
        net.backward(c, loss_of(z).grad, false);
      });
  static const char* names[] = {"mlp/bce", "mlp/ce", "mlp/mse"};
  return {names[loss_kind], count_params(ps), err};
}

template <class Head, class Fill, class Loss>
GradcheckCase check_head(const char* kind, Head& h, Fill&& fill, Loss&& loss_of) {
  typename Head::Batch b;
  fill(b);
  nn::ParamRefs<double> ps;
  h.collect(ps);
  const double err = nn::gradcheck(
      ps, [&] { return loss_of(h.forward(b).logits).loss; },
      [&] {
        auto p = h.forward(b);
        h.backward(b, p, loss_of(p.logits).grad);
      });
  return {kind, count_params(ps), err};
}

}  // namespace detail

// Runs `nets` checks, cycling through MLP, node, reach and score heads.
inline std::vector<GradcheckCase> random_gradchecks(int nets, std::uint64_t seed) {
  const auto spec = InputSpec::from(grid::space(grid::GridDomain::DoorKey));
  Rng rng(seed);
  std::vector<GradcheckCase> out;
  for (int i = 0; i < nets; ++i) {
    using detail::pick;
    const int hidden = 2 + pick(rng, 6);
    const int batch = 1 + pick(rng, 3);
    std::vector<nn::Matrix<double>> obs;
    std::vector<GoalNodes> goals;
    for (int s = 0; s < batch; ++s) {
      obs.push_back(detail::random_matrix(rng, spec.entities, spec.entity_dim));
      goals.push_back(detail::random_goal(rng, spec));
    }
    std::vector<double> y;
    for (int s = 0; s < batch; ++s) y.push_back(pick(rng, 2));
    auto bce = [&](const nn::Matrix<double>& z) { return nn::bce_with_logits(z, y); };
    switch (i % 4) {
      case 0: out.push_back(detail::check_mlp(rng)); break;
      case 1: {
        NodeHead<double> h("node", spec.nodes, spec.width(), hidden);
        h.init(rng);
        std::vector<int> labels;
        for (int k = 0; k < batch * spec.nodes; ++k) labels.push_back(pick(rng, 3));
        out.push_back(detail::check_head(
            "node", h,
            [&](auto& b) {
              for (int s = 0; s < batch; ++s) NodeHead<double>::add_sample(b, obs[s], spec, goals[s]);
            },
            [&](const nn::Matrix<double>& z) { return nn::cross_entropy(z, labels); }));
        break;
      }
      case 2: {
        ReachHead<double> h("reach", spec.entity_dim, spec.width(), hidden);
        h.init(rng);
        out.push_back(detail::check_head(
            "reach", h,
            [&](auto& b) {
              for (int s = 0; s < batch; ++s) ReachHead<double>::add_sample(b, obs[s], spec, goals[s]);
            },
            bce));
        break;
      }
      default: {
        const bool pair = pick(rng, 2) == 1;
        ScoreHead<double> h(pair ? "pair" : "atom", (pair ? 2 : 1) * spec.width(), hidden);
        h.init(rng);
        out.push_back(detail::check_head(
            pair ? "pair" : "atom", h,
            [&](auto& b) {
              for (int s = 0; s < batch; ++s) {
                const auto& g = goals[s];
                if (pair) ScoreHead<double>::add_pair(b, obs[s], spec, g[0], g.size() > 1 ? g[1] : g[0]);
                else ScoreHead<double>::add_atom(b, obs[s], spec, g[0]);
              }
            },
            bce));
      }
    }
  }
  return out;
}

inline double max_rel_error(const std::vector<GradcheckCase>& cs) {
  double m = 0.0;
  for (const auto& c : cs) m = std::max(m, c.max_rel_error);
  return m;
}

}  // namespace rpn
