#pragma once
// Supervised samples for every head, derived from demonstrations, and their
// line-based file format.
//
// Labels at each demo snapshot come from the oracle-headed regression trace
// that leads to the expert's next goal: G_0 (final goal), block B_0,
// precondition G_1 = P_1, block B_1, ..., reachable block B_L.

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rpn/heads.hpp"
#include "rpn/model.hpp"
#include "rpn/oracle.hpp"
#include "rpn/planning.hpp"

namespace rpn {

enum class DataErrc { IoError, VersionMismatch, CorruptRecord, MalformedDemo, InvalidFractions, EmptyDataset };

class DataError : public std::runtime_error {
 public:
  DataError(DataErrc code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), code_(code), line_(line) {}
  DataErrc code() const { return code_; }
  std::size_t line() const { return line_; }

 private:
  DataErrc code_;
  std::size_t line_;
};

struct Observation {
  int demo = 0;
  int step = 0;
  ObsMatrix features;
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Sample {
  HeadTag head = HeadTag::Satisfied;
  int demo = 0;
  int step = 0;
  int obs = 0;           // index into Dataset::observations
  GoalNodes goal;        // input goal (a single atom for the satisfied head)
  GoalNodes target;      // node heads
  float label = 0.0f;    // satisfied / reachable heads
  std::vector<std::uint8_t> matrix;  // dependency head, K x K row-major
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::string domain;
  int feature_dim = 0;
  std::vector<Observation> observations;
  std::vector<Sample> samples;
  friend bool operator==(const Dataset&, const Dataset&) = default;

  std::size_t count(HeadTag h) const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.head == h ? 1 : 0;
    return n;
  }
};

inline Dataset make_dataset(const std::string& domain) {
  Dataset d;
  d.domain = domain;
  d.feature_dim = planning_space(domain).feature_dim();
  return d;
}

// ---------------------------------------------------------------------------
// Sample construction

template <class Oracle, class State>
void append_demo(Dataset& ds, const Oracle& oracle, const DemoTrajectory<State>& demo, int demo_id) {
  const auto& world = oracle.world();
  const auto& sp = world.space();
  OracleHeads<Oracle> heads(oracle);
  const Goal& final_goal = demo.final_goal;
  const int T = static_cast<int>(demo.steps.size());

  for (int t = 0; t <= T; ++t) {
    const State& s = t < T ? demo.steps[t].snapshot : demo.final_snapshot;
    const int obs = static_cast<int>(ds.observations.size());
    ds.observations.push_back({demo_id, t, to_obs(world.encode(s))});
    auto add = [&](Sample x) {
      x.demo = demo_id;
      x.step = t;
      x.obs = obs;
      ds.samples.push_back(std::move(x));
    };
    auto unsat = [&](const Goal& g) {
      Goal u;
      for (const auto& a : g)
        if (!world.holds(s, a)) u.push_back(a);
      return u;
    };

    std::vector<Atom> sat_atoms(final_goal.begin(), final_goal.end());
    auto note = [&](const Goal& g) {
      for (const auto& a : g)
        if (std::find(sat_atoms.begin(), sat_atoms.end(), a) == sat_atoms.end()) sat_atoms.push_back(a);
    };
    if (t > 0) note(demo.steps[t - 1].goal);

    if (t < T) {
      const auto trace = regression_planning(heads, s, final_goal);
      if (trace.termination != Termination::Reachable || !(trace.result == demo.steps[t].goal))
        throw DataError(DataErrc::MalformedDemo, "demo step is not the oracle's next goal (demo " +
                                                     std::to_string(demo_id) + ", step " + std::to_string(t) + ")");
      const int L = static_cast<int>(trace.steps.size()) - 1;
      const Goal& next = trace.result;

      for (int d = 0; d <= L; ++d) {
        const auto& st = trace.steps[d];
        note(st.goal);
        add({HeadTag::Reachable, 0, 0, 0, goal_nodes(sp, st.block), {}, d == L ? 1.0f : 0.0f, {}});
        if (d < L) add({HeadTag::Precondition, 0, 0, 0, goal_nodes(sp, st.block), goal_nodes(sp, st.precondition), 0, {}});
        const Goal u = unsat(st.goal);
        if (u.size() >= 2) {
          Sample dep{HeadTag::Dependency, 0, 0, 0, goal_nodes(sp, u), {}, 0, {}};
          const auto m = oracle_dependency_matrix(oracle, u, s);
          for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) dep.matrix.push_back(m(i, j) > 0.5 ? 1 : 0);
          add(std::move(dep));
        }
      }
      add({HeadTag::E2E, 0, 0, 0, goal_nodes(sp, final_goal), goal_nodes(sp, next), 0, {}});
      add({HeadTag::SsNext, 0, 0, 0, goal_nodes(sp, trace.steps[0].block), goal_nodes(sp, next), 0, {}});

      // Whole-goal regression chain for the variant without serialization.
      std::vector<Goal> chain;
      for (int d = 0; d <= L; ++d) chain.push_back(unsat(trace.steps[d].goal));
      if (!(chain.back() == next)) chain.push_back(next);
      for (std::size_t i = 0; i < chain.size(); ++i) {
        const bool last = i + 1 == chain.size();
        add({HeadTag::RpReachable, 0, 0, 0, goal_nodes(sp, chain[i]), {}, last ? 1.0f : 0.0f, {}});
        if (!last) add({HeadTag::RpPrecondition, 0, 0, 0, goal_nodes(sp, chain[i]), goal_nodes(sp, chain[i + 1]), 0, {}});
      }
    }
    for (const auto& a : sat_atoms)
      add({HeadTag::Satisfied, 0, 0, 0, goal_nodes(sp, Goal::single(a)), {}, world.holds(s, a) ? 1.0f : 0.0f, {}});
  }
}

// Per-demo partition by seeded shuffle; returns (train, holdout).
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
    throw DataError(DataErrc::InvalidFractions, "fractions must lie in [0, 1] and sum to 1");
  std::vector<int> demos;
  for (const auto& o : ds.observations)
    if (demos.empty() || demos.back() != o.demo) demos.push_back(o.demo);
  std::sort(demos.begin(), demos.end());
  demos.erase(std::unique(demos.begin(), demos.end()), demos.end());
  Rng rng(mix_seed(seed, 0x5eed));
  rng.shuffle(demos);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(demos.size())));
  std::map<int, bool> in_train;
  for (std::size_t i = 0; i < demos.size(); ++i) in_train[demos[i]] = i < n_train;

  std::pair<Dataset, Dataset> out{make_dataset(ds.domain), make_dataset(ds.domain)};
  std::vector<int> remap(ds.observations.size(), -1);
  for (std::size_t i = 0; i < ds.observations.size(); ++i) {
    auto& side = in_train[ds.observations[i].demo] ? out.first : out.second;
    remap[i] = static_cast<int>(side.observations.size());
    side.observations.push_back(ds.observations[i]);
  }
  for (const auto& s : ds.samples) {
    auto& side = in_train[s.demo] ? out.first : out.second;
    Sample c = s;
    c.obs = remap[s.obs];
    side.samples.push_back(std::move(c));
  }
  return out;
}

inline void merge_into(Dataset& dst, const Dataset& src) {
  if (dst.domain != src.domain) throw DataError(DataErrc::CorruptRecord, "cannot merge datasets of different domains");
  const int base = static_cast<int>(dst.observations.size());
  dst.observations.insert(dst.observations.end(), src.observations.begin(), src.observations.end());
  for (auto s : src.samples) {
    s.obs += base;
    dst.samples.push_back(std::move(s));
  }
}

// ---------------------------------------------------------------------------
// File format. Line 1: "rpnset v1 <domain> <feature_dim>". Each following line
// is one record ending in '$':
//   obs <demo> <step> <rows> <nnz> <flat index>:<value> ... $
//   <head> <demo> <step> goal <node:T|F,...> target <...> $
// where target is a node list (node heads), 0/1 (score heads) or a K*K bit
// string (dependency). '-' stands for an empty node list. Values use the
// shortest decimal form that reads back to the same float.

inline constexpr const char* kDatasetVersion = "v1";

namespace detail {

inline std::string float_text(float v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string nodes_text(const GoalNodes& g) {
  if (g.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(g[i].node);
    s += g[i].negated ? ":F" : ":T";
  }
  return s;
}

}  // namespace detail

inline void write_dataset(std::ostream& os, const Dataset& ds) {
  os << "rpnset " << kDatasetVersion << ' ' << ds.domain << ' ' << ds.feature_dim << '\n';
  // Observations precede the samples that reference them.
  std::vector<std::vector<std::size_t>> by_obs(ds.observations.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_obs.at(ds.samples[i].obs).push_back(i);
  for (std::size_t o = 0; o < ds.observations.size(); ++o) {
    const auto& ob = ds.observations[o];
    std::size_t nnz = 0;
    for (Eigen::Index i = 0; i < ob.features.size(); ++i) nnz += ob.features.data()[i] != 0.0f ? 1 : 0;
    os << "obs " << ob.demo << ' ' << ob.step << ' ' << ob.features.rows() << ' ' << nnz;
    for (Eigen::Index i = 0; i < ob.features.size(); ++i) {
      const float v = ob.features.data()[i];
      if (v != 0.0f) os << ' ' << i << ':' << detail::float_text(v);
    }
    os << " $\n";
    for (auto si : by_obs[o]) {
      const auto& s = ds.samples[si];
      os << to_string(s.head) << ' ' << s.demo << ' ' << s.step << " goal " << detail::nodes_text(s.goal) << " target ";
      switch (kind_of(s.head)) {
        case HeadKind::Node: os << detail::nodes_text(s.target); break;
        case HeadKind::Reach:
        case HeadKind::Atom: os << (s.label > 0.5f ? 1 : 0); break;
        case HeadKind::Pair:
          for (auto b : s.matrix) os << static_cast<char>('0' + b);
          if (s.matrix.empty()) os << '-';
          break;
      }
      os << " $\n";
    }
  }
}

namespace detail {

class RecordParser {
 public:
  RecordParser(const std::string& line, std::size_t lineno) : is_(line), line_(lineno) {}

  std::string word() {
    std::string w;
    if (!(is_ >> w)) fail("truncated record");
    return w;
  }
  long integer() {
    const auto w = word();
    long v = 0;
    auto r = std::from_chars(w.data(), w.data() + w.size(), v);
    if (r.ec != std::errc() || r.ptr != w.data() + w.size()) fail("bad integer '" + w + "'");
    return v;
  }
  void expect(const std::string& w) {
    if (word() != w) fail("expected '" + w + "'");
  }
  void end() {
    expect("$");
    std::string extra;
    if (is_ >> extra) fail("trailing data");
  }
  [[noreturn]] void fail(const std::string& why) const { throw DataError(DataErrc::CorruptRecord, why, line_); }

  GoalNodes nodes(int limit) {
    const auto w = word();
    GoalNodes g;
    if (w == "-") return g;
    std::size_t pos = 0;
    while (pos <= w.size()) {
      auto comma = w.find(',', pos);
      if (comma == std::string::npos) comma = w.size();
      const auto item = w.substr(pos, comma - pos);
      const auto colon = item.find(':');
      if (colon == std::string::npos || colon + 2 != item.size()) fail("bad node '" + item + "'");
      int n = 0;
      auto r = std::from_chars(item.data(), item.data() + colon, n);
      if (r.ec != std::errc() || r.ptr != item.data() + colon || n < 0 || n >= limit) fail("bad node '" + item + "'");
      const char c = item[colon + 1];
      if (c != 'T' && c != 'F') fail("bad node class '" + item + "'");
      g.push_back({static_cast<std::uint16_t>(n), c == 'F'});
      pos = comma + 1;
    }
    return g;
  }

 private:
  std::istringstream is_;
  std::size_t line_;
};

}  // namespace detail

inline Dataset read_dataset(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw DataError(DataErrc::CorruptRecord, "missing header", 1);
  Dataset ds;
  {
    std::istringstream hs(line);
    std::string magic, version;
    if (!(hs >> magic >> version) || magic != "rpnset") throw DataError(DataErrc::CorruptRecord, "bad header", 1);
    if (version != kDatasetVersion) throw DataError(DataErrc::VersionMismatch, "dataset version " + version, 1);
    if (!(hs >> ds.domain >> ds.feature_dim)) throw DataError(DataErrc::CorruptRecord, "bad header", 1);
  }
  const auto& sp = planning_space(ds.domain);
  if (ds.feature_dim != sp.feature_dim()) throw DataError(DataErrc::CorruptRecord, "feature dim mismatch", 1);
  const int nodes = static_cast<int>(sp.nodes().size());
  std::map<std::pair<int, int>, int> obs_index;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    detail::RecordParser p(line, lineno);
    const auto tag = p.word();
    if (tag == "obs") {
      Observation o;
      o.demo = static_cast<int>(p.integer());
      o.step = static_cast<int>(p.integer());
      const long rows = p.integer();
      const long nnz = p.integer();
      if (rows <= 0 || nnz < 0) p.fail("bad observation shape");
      o.features = ObsMatrix::Zero(rows, ds.feature_dim);
      for (long k = 0; k < nnz; ++k) {
        const auto w = p.word();
        const auto colon = w.find(':');
        long idx = -1;
        float v = 0;
        if (colon == std::string::npos) p.fail("bad value '" + w + "'");
        auto r1 = std::from_chars(w.data(), w.data() + colon, idx);
        auto r2 = std::from_chars(w.data() + colon + 1, w.data() + w.size(), v);
        if (r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != w.data() + w.size() || idx < 0 ||
            idx >= o.features.size())
          p.fail("bad value '" + w + "'");
        o.features.data()[idx] = v;
      }
      p.end();
      obs_index[{o.demo, o.step}] = static_cast<int>(ds.observations.size());
      ds.observations.push_back(std::move(o));
      continue;
    }
    auto head = parse_head(tag);
    if (!head) p.fail("unknown record tag '" + tag + "'");
    Sample s;
    s.head = *head;
    s.demo = static_cast<int>(p.integer());
    s.step = static_cast<int>(p.integer());
    auto it = obs_index.find({s.demo, s.step});
    if (it == obs_index.end()) p.fail("sample references a missing observation");
    s.obs = it->second;
    p.expect("goal");
    s.goal = p.nodes(nodes);
    p.expect("target");
    switch (kind_of(s.head)) {
      case HeadKind::Node: s.target = p.nodes(nodes); break;
      case HeadKind::Reach:
      case HeadKind::Atom: {
        const auto w = p.word();
        if (w != "0" && w != "1") p.fail("bad label '" + w + "'");
        s.label = w == "1" ? 1.0f : 0.0f;
        break;
      }
      case HeadKind::Pair: {
        const auto w = p.word();
        if (w != "-") {
          if (w.size() != s.goal.size() * s.goal.size()) p.fail("dependency matrix size");
          for (char c : w) {
            if (c != '0' && c != '1') p.fail("bad dependency bit");
            s.matrix.push_back(static_cast<std::uint8_t>(c - '0'));
          }
        }
        break;
      }
    }
    p.end();
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path);
  if (!os) throw DataError(DataErrc::IoError, "cannot write " + path);
  write_dataset(os, ds);
  if (!os) throw DataError(DataErrc::IoError, "write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError(DataErrc::IoError, "cannot read " + path);
  return read_dataset(is);
}

// Node-label class counts of a node head (True, False, Null).
inline std::array<std::size_t, 3> class_counts(const Dataset& ds, HeadTag h, int nodes) {
  std::array<std::size_t, 3> c{};
  for (const auto& s : ds.samples) {
    if (s.head != h) continue;
    for (const auto& n : s.target) ++c[n.negated ? 1 : 0];
    c[2] += static_cast<std::size_t>(nodes) - s.target.size();
  }
  return c;
}

}  // namespace rpn
