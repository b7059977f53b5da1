#pragma once
// The learned model: a named collection of heads, its checkpoint format and
// the planning adaptor that runs the heads on entity features.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "rpn/envs/grid.hpp"
#include "rpn/envs/kitchen.hpp"
#include "rpn/heads.hpp"
#include "rpn/planning.hpp"

namespace rpn {

enum class HeadTag : std::uint8_t {
  Dependency,
  Precondition,
  Satisfied,
  Reachable,
  E2E,
  SsNext,
  RpPrecondition,
  RpReachable,
};

inline constexpr std::array<HeadTag, 8> kAllHeads{HeadTag::Dependency, HeadTag::Precondition, HeadTag::Satisfied,
                                                  HeadTag::Reachable,  HeadTag::E2E,          HeadTag::SsNext,
                                                  HeadTag::RpPrecondition, HeadTag::RpReachable};

inline const char* to_string(HeadTag h) {
  switch (h) {
    case HeadTag::Dependency: return "dependency";
    case HeadTag::Precondition: return "precondition";
    case HeadTag::Satisfied: return "satisfied";
    case HeadTag::Reachable: return "reachable";
    case HeadTag::E2E: return "e2e";
    case HeadTag::SsNext: return "ss_next";
    case HeadTag::RpPrecondition: return "rp_precondition";
    case HeadTag::RpReachable: return "rp_reachable";
  }
  return "?";
}

inline std::optional<HeadTag> parse_head(std::string_view s) {
  for (auto h : kAllHeads)
    if (s == to_string(h)) return h;
  return std::nullopt;
}

enum class HeadKind { Node, Reach, Atom, Pair };

inline HeadKind kind_of(HeadTag h) {
  switch (h) {
    case HeadTag::Dependency: return HeadKind::Pair;
    case HeadTag::Satisfied: return HeadKind::Atom;
    case HeadTag::Reachable:
    case HeadTag::RpReachable: return HeadKind::Reach;
    default: return HeadKind::Node;
  }
}

inline const PlanningSpace& planning_space(std::string_view domain) {
  if (domain == "doorkey") return grid::space(grid::GridDomain::DoorKey);
  if (domain == "roomgoal") return grid::space(grid::GridDomain::RoomGoal);
  if (domain == "kitchen") return kitchen::space();
  throw std::invalid_argument("unknown domain '" + std::string(domain) + "'");
}

// Layer widths: grid domains use half the kitchen sizes.
struct ModelSizes {
  int hidden = 64;
  int e2e_hidden = 128;

  static ModelSizes for_domain(std::string_view domain) {
    return domain == "kitchen" ? ModelSizes{128, 256} : ModelSizes{64, 128};
  }
};

using AnyHead = std::variant<NodeHead<float>, ReachHead<float>, ScoreHead<float>>;

inline AnyHead make_head(HeadTag tag, const InputSpec& spec, int hidden) {
  const std::string name = to_string(tag);
  switch (kind_of(tag)) {
    case HeadKind::Node: return NodeHead<float>(name, spec.nodes, spec.width(), hidden);
    case HeadKind::Reach: return ReachHead<float>(name, spec.entity_dim, spec.width(), hidden);
    case HeadKind::Atom: return ScoreHead<float>(name, spec.width(), hidden);
    case HeadKind::Pair: return ScoreHead<float>(name, 2 * spec.width(), hidden);
  }
  throw std::logic_error("unreachable");
}

inline int head_hidden(const AnyHead& h) {
  return std::visit([](const auto& x) { return x.hidden(); }, h);
}

inline nn::ParamRefs<float> head_params(AnyHead& h) {
  nn::ParamRefs<float> ps;
  std::visit([&](auto& x) { x.collect(ps); }, h);
  return ps;
}

struct Model {
  std::string domain;
  InputSpec spec;
  std::map<HeadTag, AnyHead> heads;

  bool has(HeadTag t) const { return heads.count(t) != 0; }

  template <class H>
  const H& get(HeadTag t) const {
    auto it = heads.find(t);
    if (it == heads.end()) throw std::invalid_argument(std::string("model has no ") + to_string(t) + " head");
    return std::get<H>(it->second);
  }

  // Adds a freshly initialized head.
  AnyHead& add(HeadTag t, int hidden, Rng& rng) {
    auto [it, _] = heads.insert_or_assign(t, make_head(t, spec, hidden));
    std::visit([&](auto& x) { x.init(rng); }, it->second);
    return it->second;
  }
};

inline Model empty_model(const std::string& domain) {
  Model m;
  m.domain = domain;
  m.spec = InputSpec::from(planning_space(domain));
  return m;
}

inline int default_hidden(HeadTag t, std::string_view domain) {
  const auto s = ModelSizes::for_domain(domain);
  return t == HeadTag::E2E ? s.e2e_hidden : s.hidden;
}

// ---------------------------------------------------------------------------
// Checkpoint: "rpnckpt v1", domain, then per head its tag, width and tensors
// (hexfloat values, bit-exact).

inline constexpr const char* kCheckpointVersion = "v1";

inline void write_checkpoint(std::ostream& os, const Model& m) {
  os << "rpnckpt " << kCheckpointVersion << '\n' << "domain " << m.domain << '\n';
  for (const auto& [tag, head] : m.heads) {
    os << "head " << to_string(tag) << ' ' << head_hidden(head) << '\n';
    auto copy = head;
    for (auto* p : head_params(copy)) nn::write_tensor(os, p->name, p->value);
  }
  os << "end\n";
}

inline Model read_checkpoint(std::istream& is) {
  std::string magic, version, key, domain;
  if (!(is >> magic >> version) || magic != "rpnckpt") throw nn::NnError(nn::NnErrc::CorruptCheckpoint, "not a checkpoint");
  if (version != kCheckpointVersion)
    throw nn::NnError(nn::NnErrc::VersionMismatch, "checkpoint version " + version);
  if (!(is >> key >> domain) || key != "domain") throw nn::NnError(nn::NnErrc::CorruptCheckpoint, "missing domain");
  Model m = empty_model(domain);
  while (is >> key) {
    if (key == "end") return m;
    std::string name;
    int hidden = 0;
    if (key != "head" || !(is >> name >> hidden)) throw nn::NnError(nn::NnErrc::CorruptCheckpoint, "bad head line");
    auto tag = parse_head(name);
    if (!tag) throw nn::NnError(nn::NnErrc::CorruptCheckpoint, "unknown head " + name);
    auto [it, _] = m.heads.insert_or_assign(*tag, make_head(*tag, m.spec, hidden));
    for (auto* p : head_params(it->second)) nn::read_tensor(is, p->name, p->value);
  }
  throw nn::NnError(nn::NnErrc::CorruptCheckpoint, "truncated checkpoint");
}

inline void save_checkpoint(const std::string& path, const Model& m) {
  std::ofstream os(path);
  if (!os) throw nn::NnError(nn::NnErrc::IoError, "cannot write " + path);
  write_checkpoint(os, m);
  if (!os) throw nn::NnError(nn::NnErrc::IoError, "write failed: " + path);
}

inline Model load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw nn::NnError(nn::NnErrc::IoError, "cannot read " + path);
  return read_checkpoint(is);
}

// ---------------------------------------------------------------------------
// Inference

inline ObsMatrix to_obs(const EntitySet& e) { return e.features().cast<float>(); }

inline GoalNodes predict_nodes(const NodeHead<float>& h, const ObsMatrix& obs, const InputSpec& spec,
                               const GoalNodes& goal) {
  NodeHead<float>::Batch b;
  NodeHead<float>::add_sample(b, obs, spec, goal);
  const auto p = h.forward(b);
  GoalNodes out;
  for (int n = 0; n < spec.nodes; ++n) {
    Eigen::Index c = 0;
    p.logits.row(n).maxCoeff(&c);
    if (c != static_cast<Eigen::Index>(NodeClass::Null))
      out.push_back({static_cast<std::uint16_t>(n), c == static_cast<Eigen::Index>(NodeClass::False)});
  }
  return out;
}

inline double predict_reach(const ReachHead<float>& h, const ObsMatrix& obs, const InputSpec& spec,
                            const GoalNodes& goal) {
  ReachHead<float>::Batch b;
  ReachHead<float>::add_sample(b, obs, spec, goal);
  return nn::sigmoid(static_cast<double>(h.forward(b).logits(0, 0)));
}

inline double predict_satisfied(const ScoreHead<float>& h, const ObsMatrix& obs, const InputSpec& spec,
                                const GoalNode& a) {
  ScoreHead<float>::Batch b;
  ScoreHead<float>::add_atom(b, obs, spec, a);
  return nn::sigmoid(static_cast<double>(h.forward(b).logits(0, 0)));
}

inline ScoreMatrix predict_dependency(const ScoreHead<float>& h, const ObsMatrix& obs, const InputSpec& spec,
                                      const GoalNodes& g) {
  const auto k = static_cast<Eigen::Index>(g.size());
  ScoreMatrix m = ScoreMatrix::Zero(k, k);
  if (k < 2) return m;
  ScoreHead<float>::Batch b;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (i != j) ScoreHead<float>::add_pair(b, obs, spec, g[i], g[j]);
  const auto p = h.forward(b);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (i != j) m(i, j) = nn::sigmoid(static_cast<double>(p.logits(r++, 0)));
  return m;
}

// Network-backed heads for the planning algorithms. The reachable and
// precondition slots can be pointed at the variant heads used by RP-only.
class LearnedHeads {
 public:
  using Obs = ObsMatrix;

  LearnedHeads(const Model& m, HeadTag reach = HeadTag::Reachable, HeadTag prec = HeadTag::Precondition)
      : model_(m), space_(planning_space(m.domain)), reach_(reach), prec_(prec) {}

  const PlanningSpace& space() const { return space_; }
  const Model& model() const { return model_; }

  double satisfied(const Obs& o, const Atom& a) const {
    const GoalNode n{static_cast<std::uint16_t>(space_.node_of(a)), a.negated};
    return predict_satisfied(model_.get<ScoreHead<float>>(HeadTag::Satisfied), o, model_.spec, n);
  }
  ScoreMatrix dependency(const Obs& o, const Goal& g) const {
    if (g.size() < 2) return ScoreMatrix::Zero(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    return predict_dependency(model_.get<ScoreHead<float>>(HeadTag::Dependency), o, model_.spec, goal_nodes(space_, g));
  }
  double reachable(const Obs& o, const Goal& g) const {
    return predict_reach(model_.get<ReachHead<float>>(reach_), o, model_.spec, goal_nodes(space_, g));
  }
  Goal precondition(const Obs& o, const Goal& g) const { return node_goal(prec_, o, g); }

  Goal node_goal(HeadTag tag, const Obs& o, const Goal& g) const {
    return nodes_to_goal(space_, predict_nodes(model_.get<NodeHead<float>>(tag), o, model_.spec, goal_nodes(space_, g)));
  }

 private:
  const Model& model_;
  const PlanningSpace& space_;
  HeadTag reach_, prec_;
};

}  // namespace rpn
