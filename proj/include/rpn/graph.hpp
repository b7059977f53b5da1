#pragma once
// Subgoal blocks from a pairwise dependency score matrix.
//
// Entry (i, j) >= threshold means subgoal i depends on subgoal j (j must be
// completed first). Mutually dependent subgoals form cliques (Bron-Kerbosch on
// the mutual-edge graph); overlapping cliques and any remaining directed
// cycles are merged so that the block graph is a DAG.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace rpn {

using ScoreMatrix = Eigen::MatrixXd;

struct BlockGraph {
  std::vector<std::vector<int>> blocks;  // member indices, ascending
  std::vector<std::pair<int, int>> edges;  // (dependent block, prerequisite block)
  std::vector<int> order;  // topological, dependents first; sinks last
};

namespace detail {

inline void bron_kerbosch(std::uint64_t r, std::uint64_t p, std::uint64_t x, const std::vector<std::uint64_t>& adj,
                          std::vector<std::uint64_t>& out) {
  if (p == 0 && x == 0) {
    out.push_back(r);
    return;
  }
  // Pivot on the vertex with most neighbours in p.
  const std::uint64_t px = p | x;
  int pivot = -1, best = -1;
  for (int u = 0; u < 64; ++u) {
    if (!(px >> u & 1)) continue;
    int c = std::popcount(p & adj[u]);
    if (c > best) {
      best = c;
      pivot = u;
    }
  }
  std::uint64_t cand = p & ~adj[pivot];
  while (cand) {
    const int v = std::countr_zero(cand);
    const std::uint64_t bit = std::uint64_t(1) << v;
    cand &= ~bit;
    bron_kerbosch(r | bit, p & adj[v], x & adj[v], adj, out);
    p &= ~bit;
    x |= bit;
  }
}

// Tarjan's strongly connected components; components emitted in reverse
// topological order (sinks first).
inline std::vector<int> scc(const std::vector<std::vector<int>>& g, int& count) {
  const int n = static_cast<int>(g.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on(n, false);
  int next = 0;
  count = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = next++;
    stack.push_back(v);
    on[v] = true;
    for (int w : g[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp[w] = count;
      } while (w != v);
      ++count;
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return comp;
}

}  // namespace detail

inline std::vector<std::vector<int>> maximal_cliques(const std::vector<std::uint64_t>& adj) {
  std::vector<std::uint64_t> found;
  const int n = static_cast<int>(adj.size());
  const std::uint64_t all = n == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << n) - 1;
  if (n > 0) detail::bron_kerbosch(0, all, 0, adj, found);
  std::vector<std::vector<int>> out;
  for (auto m : found) {
    std::vector<int> c;
    for (int i = 0; i < n; ++i)
      if (m >> i & 1) c.push_back(i);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline BlockGraph find_blocks(const ScoreMatrix& dep, double threshold = 0.5) {
  const int k = static_cast<int>(dep.rows());
  if (dep.cols() != k || k > 64) throw std::invalid_argument("find_blocks: need a square matrix with K <= 64");
  auto edge = [&](int i, int j) { return i != j && dep(i, j) >= threshold; };

  std::vector<std::uint64_t> mutual(k, 0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (edge(i, j) && edge(j, i)) mutual[i] |= std::uint64_t(1) << j;

  // Initial blocks: maximal cliques of the mutual graph, overlapping ones united.
  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int v) { return parent[v] == v ? v : parent[v] = root(parent[v]); };
  for (const auto& c : maximal_cliques(mutual))
    for (std::size_t i = 1; i < c.size(); ++i) parent[root(c[i])] = root(c[0]);

  std::vector<int> initial(k, -1);
  int nb = 0;
  for (int i = 0; i < k; ++i)
    if (root(i) == i) initial[i] = nb++;
  for (int i = 0; i < k; ++i) initial[i] = initial[root(i)];

  std::vector<std::vector<int>> bg(nb);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (edge(i, j) && initial[i] != initial[j]) bg[initial[i]].push_back(initial[j]);

  int ncomp = 0;
  auto comp = detail::scc(bg, ncomp);

  BlockGraph out;
  out.blocks.assign(ncomp, {});
  for (int i = 0; i < k; ++i) out.blocks[comp[initial[i]]].push_back(i);
  std::vector<std::vector<bool>> linked(ncomp, std::vector<bool>(ncomp, false));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const int a = comp[initial[i]], b = comp[initial[j]];
      if (edge(i, j) && a != b && !linked[a][b]) {
        linked[a][b] = true;
        out.edges.emplace_back(a, b);
      }
    }
  std::sort(out.edges.begin(), out.edges.end());
  // Tarjan numbers prerequisites before dependents; reverse for "dependents first".
  for (int c = ncomp - 1; c >= 0; --c) out.order.push_back(c);
  return out;
}

// Blocks with no outgoing dependency: the ones that can be completed first.
inline std::vector<int> sink_blocks(const BlockGraph& g) {
  std::vector<bool> has_out(g.blocks.size(), false);
  for (auto [a, b] : g.edges) has_out[a] = true;
  std::vector<int> out;
  for (int b : g.order)
    if (!has_out[b]) out.push_back(b);
  return out;
}

// Sink chosen by the smallest priority key among its members (lower first).
inline std::vector<int> choose_sink(const BlockGraph& g, const std::vector<std::size_t>& priority) {
  std::vector<int> best;
  std::size_t best_key = static_cast<std::size_t>(-1);
  for (int b : sink_blocks(g)) {
    std::size_t key = static_cast<std::size_t>(-1);
    for (int m : g.blocks[b]) key = std::min(key, priority[m]);
    if (best.empty() || key < best_key) {
      best = g.blocks[b];
      best_key = key;
    }
  }
  return best;
}

}  // namespace rpn
