#pragma once
// Network heads over object-centric inputs.
//
// Every ground-atom node n gets the input
//   x_n = [entity row of n | predicate one-hot | class one-hot (True, False, Null)]
// where the class is taken from the goal being encoded (Null when absent).

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rpn/entity.hpp"
#include "rpn/goal.hpp"
#include "rpn/nn.hpp"

namespace rpn {

using ObsMatrix = nn::Matrix<float>;

enum class NodeClass : std::uint8_t { True = 0, False = 1, Null = 2 };

struct GoalNode {
  std::uint16_t node = 0;
  bool negated = false;
  friend bool operator==(const GoalNode&, const GoalNode&) = default;
};
using GoalNodes = std::vector<GoalNode>;

inline GoalNodes goal_nodes(const PlanningSpace& sp, const Goal& g) {
  GoalNodes out;
  for (const auto& a : g) out.push_back({static_cast<std::uint16_t>(sp.node_of(a)), a.negated});
  return out;
}

inline Goal nodes_to_goal(const PlanningSpace& sp, const GoalNodes& nodes) {
  Goal g;
  for (const auto& n : nodes) {
    Atom a = sp.nodes()[n.node];
    a.negated = n.negated;
    g.push_back(a);
  }
  return g;
}

inline bool same_nodes(const GoalNodes& a, const GoalNodes& b) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a)
    if (std::find(b.begin(), b.end(), x) == b.end()) return false;
  return true;
}

struct InputSpec {
  int entity_dim = 0;
  int predicates = 0;
  int nodes = 0;
  int entities = 0;
  std::vector<int> rows;   // node -> entity row
  std::vector<int> preds;  // node -> predicate

  int width() const { return entity_dim + predicates + 3; }

  static InputSpec from(const PlanningSpace& sp) {
    InputSpec s;
    s.entity_dim = sp.feature_dim();
    s.predicates = sp.num_predicates();
    s.nodes = static_cast<int>(sp.nodes().size());
    s.entities = static_cast<int>(sp.roster()->size());
    s.rows = sp.node_rows();
    for (const auto& a : sp.nodes().slots()) s.preds.push_back(a.predicate);
    return s;
  }
};

template <class T, class Row>
void put_node(Row&& out, const nn::Matrix<T>& obs, const InputSpec& spec, int node, NodeClass cls) {
  out.setZero();
  out.head(spec.entity_dim) = obs.row(spec.rows[node]);
  out(spec.entity_dim + spec.preds[node]) = T(1);
  out(spec.entity_dim + spec.predicates + static_cast<int>(cls)) = T(1);
}

inline NodeClass class_of(const GoalNode& n) { return n.negated ? NodeClass::False : NodeClass::True; }

// Grows a batch matrix geometrically so that appending samples stays linear.
template <class T>
void ensure_rows(nn::Matrix<T>& m, Eigen::Index need, Eigen::Index cols) {
  if (m.cols() != cols && m.rows() == 0) m.resize(0, cols);
  if (m.rows() < need) m.conservativeResize(std::max(need, 2 * m.rows()), cols);
}

// ---------------------------------------------------------------------------
// Node classification head: one MLP over the concatenated inputs of all N
// nodes, emitting 3 logits per node. Used for precondition, E2E and the
// SS-only next goal.

template <class T>
class NodeHead {
 public:
  struct Batch {
    nn::Matrix<T> x;  // B x (N*F), first `rows` used
    Eigen::Index rows = 0;
    int nodes = 0;
  };
  struct Pass {
    typename nn::Mlp<T>::Cache net;
    nn::Matrix<T> logits;  // (B*N) x 3
  };

  NodeHead() = default;
  NodeHead(const std::string& name, int nodes, int width, int hidden)
      : nodes_(nodes), width_(width), net_(name + ".net", {nodes * width, hidden, hidden, hidden, 3 * nodes}) {}

  int hidden() const { return net_.sizes()[1]; }
  int width() const { return width_; }
  int nodes() const { return nodes_; }
  nn::Mlp<T>& net() { return net_; }

  void init(Rng& rng) { net_.init(rng); }
  void collect(nn::ParamRefs<T>& ps) { net_.collect(ps); }

  template <class U>
  NodeHead<U> cast() const {
    NodeHead<U> h;
    h.nodes_ = nodes_;
    h.width_ = width_;
    h.net() = net_.template cast<U>();
    return h;
  }

  static void add_sample(Batch& b, const nn::Matrix<T>& obs, const InputSpec& spec, const GoalNodes& goal) {
    const int F = spec.width();
    const Eigen::Index r = b.rows++;
    b.nodes = spec.nodes;
    ensure_rows(b.x, b.rows, static_cast<Eigen::Index>(spec.nodes) * F);
    std::vector<NodeClass> cls(spec.nodes, NodeClass::Null);
    for (const auto& g : goal) cls[g.node] = class_of(g);
    for (int n = 0; n < spec.nodes; ++n) put_node(b.x.row(r).segment(static_cast<Eigen::Index>(n) * F, F), obs, spec, n, cls[n]);
  }

  Pass forward(const Batch& b) const {
    Pass p;
    nn::Matrix<T> z = net_.forward(b.x.topRows(b.rows), &p.net);
    p.logits = Eigen::Map<const nn::Matrix<T>>(z.data(), b.rows * nodes_, 3);
    return p;
  }

  void backward(const Batch& b, const Pass& p, const nn::Matrix<T>& dlogits) {
    nn::Matrix<T> dz = Eigen::Map<const nn::Matrix<T>>(dlogits.data(), b.rows, 3 * static_cast<Eigen::Index>(nodes_));
    net_.backward(p.net, dz, false);
  }

 private:
  template <class>
  friend class NodeHead;
  int nodes_ = 0;
  int width_ = 0;
  nn::Mlp<T> net_;
};

// ---------------------------------------------------------------------------
// Scalar head over a pooled goal context and goal-conditioned entity encodings:
//   c = mean_n rho(x_n);  score = sigmoid(readout([mean_e enc([e | c]) | c])).

template <class T>
class ReachHead {
 public:
  struct Batch {
    nn::Matrix<T> ents;  // (B*E) x D
    nn::Matrix<T> goal;  // (total goal nodes) x F, first goal_rows used
    std::vector<int> goal_count;
    int entities = 0;
    Eigen::Index goal_rows = 0;
  };
  struct Pass {
    typename nn::Mlp<T>::Cache enc, rho, out;
    nn::Matrix<T> logits;
  };

  ReachHead() = default;
  ReachHead(const std::string& name, int entity_dim, int width, int hidden)
      : enc_(name + ".enc", {entity_dim + hidden, hidden, hidden}, true),
        rho_(name + ".rho", {width, hidden, hidden}, true),
        readout_(name + ".readout", {2 * hidden, hidden, hidden / 2, hidden / 2, 1}) {}

  int hidden() const { return enc_.out(); }
  nn::Mlp<T>& enc() { return enc_; }
  nn::Mlp<T>& rho() { return rho_; }
  nn::Mlp<T>& readout() { return readout_; }

  void init(Rng& rng) {
    enc_.init(rng);
    rho_.init(rng);
    readout_.init(rng);
  }
  void collect(nn::ParamRefs<T>& ps) {
    enc_.collect(ps);
    rho_.collect(ps);
    readout_.collect(ps);
  }
  template <class U>
  ReachHead<U> cast() const {
    ReachHead<U> h;
    h.enc() = enc_.template cast<U>();
    h.rho() = rho_.template cast<U>();
    h.readout() = readout_.template cast<U>();
    return h;
  }

  static void add_sample(Batch& b, const nn::Matrix<T>& obs, const InputSpec& spec, const GoalNodes& goal) {
    const Eigen::Index e0 = static_cast<Eigen::Index>(b.goal_count.size()) * spec.entities;
    b.entities = spec.entities;
    ensure_rows(b.ents, e0 + spec.entities, spec.entity_dim);
    b.ents.middleRows(e0, spec.entities) = obs;
    const Eigen::Index g0 = b.goal_rows;
    b.goal_rows += static_cast<Eigen::Index>(goal.size());
    ensure_rows(b.goal, b.goal_rows, spec.width());
    for (std::size_t i = 0; i < goal.size(); ++i)
      put_node(b.goal.row(g0 + static_cast<Eigen::Index>(i)), obs, spec, goal[i].node, class_of(goal[i]));
    b.goal_count.push_back(static_cast<int>(goal.size()));
  }

  Pass forward(const Batch& b) const {
    Pass p;
    const int B = static_cast<int>(b.goal_count.size());
    const int H = hidden();
    const int E = b.entities;
    const int D = static_cast<int>(b.ents.cols());
    nn::Matrix<T> hr = b.goal_rows ? rho_.forward(b.goal.topRows(b.goal_rows), &p.rho) : nn::Matrix<T>(0, H);
    nn::Matrix<T> c = nn::Matrix<T>::Zero(B, H);
    Eigen::Index k = 0;
    for (int s = 0; s < B; ++s) {
      const int cnt = b.goal_count[s];
      if (cnt) c.row(s) = hr.middleRows(k, cnt).colwise().mean();
      k += cnt;
    }
    nn::Matrix<T> ec(static_cast<Eigen::Index>(B) * E, D + H);
    ec.leftCols(D) = b.ents.topRows(static_cast<Eigen::Index>(B) * E);
    for (int s = 0; s < B; ++s) ec.block(static_cast<Eigen::Index>(s) * E, D, E, H).rowwise() = c.row(s);
    nn::Matrix<T> he = enc_.forward(ec, &p.enc);
    nn::Matrix<T> q(B, 2 * H);
    for (int s = 0; s < B; ++s) {
      q.row(s).head(H) = he.middleRows(static_cast<Eigen::Index>(s) * E, E).colwise().mean();
      q.row(s).tail(H) = c.row(s);
    }
    p.logits = readout_.forward(q, &p.out);
    return p;
  }

  void backward(const Batch& b, const Pass& p, const nn::Matrix<T>& dlogits) {
    const int B = static_cast<int>(b.goal_count.size());
    const int H = hidden();
    const int E = b.entities;
    const int D = static_cast<int>(b.ents.cols());
    nn::Matrix<T> dq = readout_.backward(p.out, dlogits, true);
    nn::Matrix<T> de(static_cast<Eigen::Index>(B) * E, H);
    for (int s = 0; s < B; ++s)
      de.middleRows(static_cast<Eigen::Index>(s) * E, E).rowwise() = dq.row(s).head(H) / static_cast<T>(E);
    nn::Matrix<T> dec = enc_.backward(p.enc, de, true);
    if (!b.goal_rows) return;
    nn::Matrix<T> dr(b.goal_rows, H);
    Eigen::Index k = 0;
    for (int s = 0; s < B; ++s) {
      const int cnt = b.goal_count[s];
      if (!cnt) continue;
      Eigen::Matrix<T, 1, Eigen::Dynamic> dc =
          dq.row(s).tail(H) + dec.block(static_cast<Eigen::Index>(s) * E, D, E, H).colwise().sum();
      dr.middleRows(k, cnt).rowwise() = dc / static_cast<T>(cnt);
      k += cnt;
    }
    rho_.backward(p.rho, dr, false);
  }

 private:
  nn::Mlp<T> enc_, rho_, readout_;
};

// ---------------------------------------------------------------------------
// Plain scalar head over a fixed-width row: the satisfied head (one node input)
// and the dependency head (two node inputs side by side).

template <class T>
class ScoreHead {
 public:
  struct Batch {
    nn::Matrix<T> x;
    Eigen::Index rows = 0;
  };
  struct Pass {
    typename nn::Mlp<T>::Cache net;
    nn::Matrix<T> logits;
  };

  ScoreHead() = default;
  ScoreHead(const std::string& name, int width, int hidden) : net_(name + ".net", {width, hidden, hidden, hidden, 1}) {}

  int hidden() const { return net_.sizes()[1]; }
  int width() const { return net_.in(); }
  nn::Mlp<T>& net() { return net_; }

  void init(Rng& rng) { net_.init(rng); }
  void collect(nn::ParamRefs<T>& ps) { net_.collect(ps); }
  template <class U>
  ScoreHead<U> cast() const {
    ScoreHead<U> h;
    h.net() = net_.template cast<U>();
    return h;
  }

  static void add_atom(Batch& b, const nn::Matrix<T>& obs, const InputSpec& spec, const GoalNode& a) {
    const Eigen::Index r = b.rows++;
    ensure_rows(b.x, b.rows, spec.width());
    put_node(b.x.row(r), obs, spec, a.node, class_of(a));
  }

  static void add_pair(Batch& b, const nn::Matrix<T>& obs, const InputSpec& spec, const GoalNode& i,
                       const GoalNode& j) {
    const Eigen::Index r = b.rows++;
    const int f = spec.width();
    ensure_rows(b.x, b.rows, 2 * f);
    put_node(b.x.row(r).head(f), obs, spec, i.node, class_of(i));
    put_node(b.x.row(r).tail(f), obs, spec, j.node, class_of(j));
  }

  Pass forward(const Batch& b) const {
    Pass p;
    p.logits = net_.forward(b.x.topRows(b.rows), &p.net);
    return p;
  }

  void backward(const Batch&, const Pass& p, const nn::Matrix<T>& dlogits) { net_.backward(p.net, dlogits, false); }

 private:
  nn::Mlp<T> net_;
};

}  // namespace rpn
