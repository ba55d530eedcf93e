#pragma once

#include <random>

#include "search.hpp"

namespace hlab {

using PropertyRef = std::shared_ptr<const HereditaryProperty>;

struct Instance {
  PropertyRef H;
  ContextRef ctx;
};

inline Instance make_instance(HereditaryProperty H, int max_list_bits = 24) {
  auto p = std::make_shared<const HereditaryProperty>(std::move(H));
  return {p, make_context(p, max_list_bits)};
}

// Type of the first r points of a small structure, variables in order.
inline TypeCode type_of(const TypeLayout& L, const Structure& M) {
  std::vector<int> a(L.r());
  std::iota(a.begin(), a.end(), 0);
  return qftp0(L, M, a.data());
}

// One value set per k-subset of [n], colex order; bit v is value v.
struct SetGraph {
  int n = 0, k = 2;
  std::vector<uint64_t> c;
  bool operator==(const SetGraph&) const = default;
  bool operator<(const SetGraph& o) const { return std::tie(n, k, c) < std::tie(o.n, o.k, o.c); }
  bool complete() const {
    return std::all_of(c.begin(), c.end(), [](uint64_t x) { return x != 0; });
  }
  BigInt weight() const {
    BigInt w = 1;
    for (auto x : c) w *= std::popcount(x);
    return w;
  }
};

inline std::vector<uint64_t> choice_values(const Template& T, const std::vector<TypeCode>& value_types) {
  std::vector<uint64_t> out(T.subset_count(), 0);
  for (size_t i = 0; i < out.size(); ++i)
    for (TypeCode p : T.choices(i))
      for (size_t v = 0; v < value_types.size(); ++v)
        if (value_types[v] == p) out[i] |= uint64_t(1) << v;
  return out;
}

inline Template template_from_values(const ContextRef& ctx, int n, const std::vector<uint64_t>& c,
                                     const std::vector<TypeCode>& value_types) {
  Template T(ctx, n);
  if (c.size() != T.subset_count()) throw std::invalid_argument("value map has wrong length");
  for (size_t i = 0; i < c.size(); ++i) {
    if (!c[i]) throw std::invalid_argument("set-graph is not complete");
    std::vector<TypeCode> v;
    for (size_t b = 0; b < value_types.size(); ++b)
      if (c[i] >> b & 1) v.push_back(value_types[b]);
    if (c[i] >> value_types.size()) throw std::invalid_argument("value out of range");
    T.set_choices(i, v);
  }
  return T;
}

// all sets of floor(n/2) pairwise disjoint pairs, as lists of colex pair ranks
inline std::vector<std::vector<size_t>> maximum_matchings(int n) {
  std::vector<std::vector<size_t>> out;
  std::vector<size_t> cur;
  std::vector<bool> used(n, false);
  int need = n / 2;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == need) {
      out.push_back(cur);
      return;
    }
    int first = start;
    while (first < n && used[first]) ++first;
    if (first >= n) return;
    int unmatched_left = 0;
    for (int x = first; x < n; ++x) unmatched_left += !used[x];
    used[first] = true;
    for (int y = first + 1; y < n; ++y)
      if (!used[y]) {
        used[y] = true;
        cur.push_back(colex_rank({first + 1, y + 1}));
        rec(first + 1);
        cur.pop_back();
        used[y] = false;
      }
    used[first] = false;
    // leave `first` unmatched when n is odd and no vertex was skipped yet
    if (unmatched_left - 2 * (need - static_cast<int>(cur.size())) > 0) {
      used[first] = true;
      rec(first + 1);
      used[first] = false;
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------- metric

inline SigRef metric_signature(int r) {
  std::vector<Relation> rels;
  for (int i = 1; i <= r; ++i) rels.push_back({"R" + std::to_string(i), 2});
  return make_signature(rels);
}

inline bool violating_triple(int i, int j, int k) { return !(std::abs(i - j) <= k && k <= i + j); }

inline int metric_m(int r) { return (r + 2) / 2; }

// distance of each pair, or 0 when the structure is not a distance assignment
inline std::optional<std::vector<int>> metric_distances(const Structure& M, int r) {
  int n = M.n();
  std::vector<int> d(n * n, 0);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int found = 0, cnt = 0;
      for (int i = 0; i < r; ++i) {
        int t[2] = {x, y};
        if (M.holds(i, t)) {
          found = i + 1;
          ++cnt;
        }
      }
      if (x == y ? cnt != 0 : cnt != 1) return std::nullopt;
      d[x * n + y] = found;
    }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (d[x * n + y] != d[y * n + x]) return std::nullopt;
  return d;
}

inline bool is_metric_structure(const Structure& M, int r) {
  auto d = metric_distances(M, r);
  if (!d) return false;
  int n = M.n();
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      for (int z = y + 1; z < n; ++z)
        if (violating_triple((*d)[x * n + y], (*d)[y * n + z], (*d)[x * n + z])) return false;
  return true;
}

inline Structure metric_structure(const SigRef& sig, int n, const std::vector<int>& pair_distance) {
  Structure M(sig, n);
  auto pairs = subsets_colex(n, 2);
  for (size_t i = 0; i < pairs.size(); ++i) {
    int rel = pair_distance.at(i) - 1;
    M.add_tuple(rel, {pairs[i][0], pairs[i][1]});
    M.add_tuple(rel, {pairs[i][1], pairs[i][0]});
  }
  return M;
}

inline HereditaryProperty metric_property(int r) {
  if (r < 3) throw std::invalid_argument("metric instance needs r >= 3");
  HereditaryProperty H;
  H.name = "metric-r" + std::to_string(r);
  H.sig = metric_signature(r);
  H.predicate = [r](const Structure& M) { return is_metric_structure(M, r); };
  for (auto& F : minimal_forbidden(H.sig, H.predicate, 3)) H.forbidden.push_back({F, EmbedMode::induced});
  return H;
}

struct MetricInstance : Instance {
  int r = 3;
  std::vector<TypeCode> p;  // p[i-1] = distance i
};

inline MetricInstance metric_instance(int r) {
  MetricInstance mi;
  static_cast<Instance&>(mi) = make_instance(metric_property(r));
  mi.r = r;
  for (int i = 1; i <= r; ++i) mi.p.push_back(type_of(*mi.ctx->L, metric_structure(mi.H->sig, 2, {i})));
  return mi;
}

inline SetGraph metric_psi(const MetricInstance& mi, const Template& T) {
  auto v = choice_values(T, mi.p);
  for (auto& x : v) x <<= 1;
  return {T.n(), 2, v};
}

inline Template metric_psi_inverse(const MetricInstance& mi, const SetGraph& g) {
  std::vector<uint64_t> c(g.c);
  for (auto& x : c) {
    if (x & 1) throw std::invalid_argument("distance 0 is not allowed");
    x >>= 1;
  }
  return template_from_values(mi.ctx, g.n, c, mi.p);
}

inline uint64_t interval_mask(int lo, int hi) {
  uint64_t m = 0;
  for (int i = lo; i <= hi; ++i) m |= uint64_t(1) << i;
  return m;
}

inline uint64_t metric_L(int r) { return r % 2 ? interval_mask((r - 1) / 2, r - 1) : interval_mask(r / 2, r); }
inline uint64_t metric_U(int r) { return r % 2 ? interval_mask((r + 1) / 2, r) : interval_mask(r / 2, r); }

inline BigInt metric_oracle(int r, int n) {
  BigInt m = metric_m(r);
  uint64_t pairs = binom(n, 2);
  if (r % 2 == 0) return big_pow(m, pairs);
  return big_pow(m, pairs - n / 2) * big_pow(m + 1, n / 2);
}

inline std::vector<SetGraph> metric_tilde_C(int r, int n) {
  size_t N = binom(n, 2);
  if (r % 2 == 0) return {SetGraph{n, 2, std::vector<uint64_t>(N, metric_L(r))}};
  std::vector<SetGraph> out;
  auto pairs = subsets_colex(n, 2);
  for (auto& rgs : set_partitions(n)) {
    SetGraph g{n, 2, std::vector<uint64_t>(N)};
    for (size_t i = 0; i < N; ++i)
      g.c[i] = rgs[pairs[i][0] - 1] == rgs[pairs[i][1] - 1] ? metric_L(r) : metric_U(r);
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<SetGraph> metric_tilde_E(int r, int n) {
  if (r % 2 == 0) throw std::invalid_argument("tilde-E is defined for odd r");
  std::vector<SetGraph> out;
  size_t N = binom(n, 2);
  for (auto& mt : maximum_matchings(n)) {
    SetGraph g{n, 2, std::vector<uint64_t>(N, metric_U(r))};
    for (auto e : mt) g.c[e] = metric_U(r) | metric_L(r);
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// the extremal family the oracle predicts for the Psi-images of R_ex
inline std::vector<SetGraph> metric_extremal_family(int r, int n) {
  return r % 2 == 0 ? metric_tilde_C(r, n) : metric_tilde_E(r, n);
}

struct Multigraph {
  int n = 0;
  std::vector<int> w;  // colex pair order
};

struct MultigraphReport {
  BigInt P = 0;
  bool is_3_3a = false, is_3_3a1 = false;
  BigInt bound_a, bound_b;
  bool in_U1 = false, in_U2 = false;
  bool holds = true;
};

inline bool is_sq_graph(const Multigraph& G, int s, int q) {
  auto pairs_of = subsets_colex(s, 2);
  for (auto& X : subsets_colex(G.n, s)) {
    long sum = 0;
    for (auto& pr : pairs_of) sum += G.w[colex_rank({X[pr[0] - 1], X[pr[1] - 1]})];
    if (sum > q) return false;
  }
  return true;
}

inline MultigraphReport check_multigraph_bound(const Multigraph& G, int a) {
  if (G.n < 3) throw std::invalid_argument("multigraph bound needs n >= 3");
  if (a < 1) throw std::invalid_argument("a must be positive");
  MultigraphReport rep;
  rep.P = 1;
  for (int x : G.w) rep.P *= x;
  uint64_t pairs = binom(G.n, 2);
  int f = G.n / 2;
  rep.bound_a = big_pow(a, pairs);
  rep.bound_b = big_pow(a, pairs - f) * big_pow(a + 1, f);
  rep.is_3_3a = is_sq_graph(G, 3, 3 * a);
  rep.is_3_3a1 = is_sq_graph(G, 3, 3 * a + 1);
  rep.in_U1 = std::all_of(G.w.begin(), G.w.end(), [&](int x) { return x == a; });
  for (auto& mt : maximum_matchings(G.n)) {
    std::vector<int> want(pairs, a);
    for (auto e : mt) want[e] = a + 1;
    if (want == G.w) rep.in_U2 = true;
  }
  if (rep.is_3_3a) rep.holds = rep.holds && rep.P <= rep.bound_a && ((rep.P == rep.bound_a) == rep.in_U1);
  if (rep.is_3_3a1) rep.holds = rep.holds && rep.P <= rep.bound_b && ((rep.P == rep.bound_b) == rep.in_U2);
  return rep;
}

// ---------------------------------------------------------------- digraphs

struct Digraph {
  int n = 0;
  std::vector<uint8_t> arc;  // n*n, 0-based
  bool has(int u, int v) const { return arc[u * n + v]; }
  bool operator==(const Digraph&) const = default;
  bool operator<(const Digraph& o) const { return std::tie(n, arc) < std::tie(o.n, o.arc); }
};

inline Digraph digraph_of(const Structure& M) {
  Digraph D{M.n(), std::vector<uint8_t>(M.n() * M.n(), 0)};
  for (auto& t : M.tuples(0)) D.arc[(t[0] - 1) * M.n() + t[1] - 1] = 1;
  return D;
}

inline Structure structure_of(const SigRef& sig, const Digraph& D) {
  Structure M(sig, D.n);
  for (int u = 0; u < D.n; ++u)
    for (int v = 0; v < D.n; ++v)
      if (D.has(u, v)) M.add_tuple(0, {u + 1, v + 1});
  return M;
}

// contains a transitive tournament on s vertices as a subdigraph
inline bool has_transitive_tournament(const Digraph& D, int s) {
  if (s > D.n) return false;
  for (auto& X : subsets_colex(D.n, s)) {
    std::vector<int> order(X);
    do {
      bool ok = true;
      for (int i = 0; i < s && ok; ++i)
        for (int j = i + 1; j < s && ok; ++j) ok = D.has(order[i] - 1, order[j] - 1);
      if (ok) return true;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return false;
}

inline HereditaryProperty digraph_property(int k) {
  if (k < 2) throw std::invalid_argument("digraph instance needs k >= 2");
  HereditaryProperty H;
  H.name = "digraph-k" + std::to_string(k);
  H.sig = make_signature({{"E", 2}});
  H.mode = EmbedMode::non_induced;
  Structure loop(H.sig, 1);
  loop.add_tuple(0, {1, 1});
  H.forbidden.push_back({loop, EmbedMode::non_induced});
  Structure T(H.sig, k + 1);
  for (int i = 1; i <= k + 1; ++i)
    for (int j = i + 1; j <= k + 1; ++j) T.add_tuple(0, {i, j});
  H.forbidden.push_back({T, EmbedMode::non_induced});
  H.predicate = [k](const Structure& M) {
    auto D = digraph_of(M);
    for (int u = 0; u < D.n; ++u)
      if (D.has(u, u)) return false;
    return !has_transitive_tournament(D, k + 1);
  };
  return H;
}

struct DigraphInstance : Instance {
  int k = 2;
  TypeCode p1, p2, p3, p4;
};

inline DigraphInstance digraph_instance(int k) {
  DigraphInstance di;
  static_cast<Instance&>(di) = make_instance(digraph_property(k));
  di.k = k;
  const auto& L = *di.ctx->L;
  auto two = [&](std::vector<std::pair<int, int>> arcs) {
    Structure M(di.H->sig, 2);
    for (auto [u, v] : arcs) M.add_tuple(0, {u, v});
    return type_of(L, M);
  };
  di.p1 = two({{1, 2}});
  di.p2 = two({{2, 1}});
  di.p3 = two({{1, 2}, {2, 1}});
  di.p4 = two({});
  return di;
}

inline Digraph digraph_psi(const DigraphInstance& di, const Template& T) {
  Digraph D{T.n(), std::vector<uint8_t>(T.n() * T.n(), 0)};
  auto pairs = subsets_colex(T.n(), 2);
  for (size_t i = 0; i < pairs.size(); ++i) {
    int u = pairs[i][0] - 1, v = pairs[i][1] - 1;
    for (TypeCode p : T.choices(i)) {
      if (p == di.p1 || p == di.p3) D.arc[u * D.n + v] = 1;
      if (p == di.p2 || p == di.p3) D.arc[v * D.n + u] = 1;
    }
  }
  return D;
}

inline Template digraph_psi_inverse(const DigraphInstance& di, const Digraph& D) {
  Template T(di.ctx, D.n);
  auto pairs = subsets_colex(D.n, 2);
  for (size_t i = 0; i < pairs.size(); ++i) {
    int u = pairs[i][0] - 1, v = pairs[i][1] - 1;
    std::vector<TypeCode> ch{di.p4};
    if (D.has(u, v)) ch.push_back(di.p1);
    if (D.has(v, u)) ch.push_back(di.p2);
    if (D.has(u, v) && D.has(v, u)) ch.push_back(di.p3);
    T.set_choices(i, ch);
  }
  return T;
}

inline bool digraph_set_downward_closed(const DigraphInstance& di, const std::vector<TypeCode>& ch) {
  auto has = [&](TypeCode p) { return std::binary_search(ch.begin(), ch.end(), p); };
  return has(di.p4) && (has(di.p3) == (has(di.p1) && has(di.p2)));
}

inline bool is_downward_closed(const DigraphInstance& di, const Template& T) {
  for (size_t i = 0; i < T.subset_count(); ++i)
    if (!digraph_set_downward_closed(di, T.choices(i))) return false;
  return true;
}

inline Template downward_close(const DigraphInstance& di, const Template& T) {
  return digraph_psi_inverse(di, digraph_psi(di, T));
}

// choice-set filter for the search: downward-closed sets only
inline std::function<bool(uint64_t)> digraph_downward_filter(const DigraphInstance& di) {
  std::vector<TypeCode> S = di.ctx->S;
  return [di, S](uint64_t mask) {
    std::vector<TypeCode> ch;
    for (size_t b = 0; b < S.size(); ++b)
      if (mask >> b & 1) ch.push_back(S[b]);
    return digraph_set_downward_closed(di, ch);
  };
}

inline std::vector<int> turan_part_sizes(int k, int n) {
  std::vector<int> sizes(k, n / k);
  for (int i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

inline uint64_t turan_edges(int k, int n) {
  uint64_t e = binom(n, 2);
  for (int s : turan_part_sizes(k, n)) e -= binom(s, 2);
  return e;
}

// a doubled Turan pair allows all four arc patterns
inline BigInt digraph_oracle(int k, int n) { return big_pow(4, turan_edges(k, n)); }

// doubled k-partite Turan graphs on [n]
inline std::vector<Digraph> digraph_DT(int k, int n) {
  auto want = turan_part_sizes(k, n);
  want.erase(std::remove(want.begin(), want.end(), 0), want.end());
  std::sort(want.begin(), want.end());
  std::set<Digraph> out;
  for (auto& rgs : set_partitions(n)) {
    int parts = *std::max_element(rgs.begin(), rgs.end()) + 1;
    std::vector<int> sizes(parts, 0);
    for (int x : rgs) ++sizes[x];
    std::sort(sizes.begin(), sizes.end());
    if (sizes != want) continue;
    Digraph D{n, std::vector<uint8_t>(n * n, 0)};
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (u != v && rgs[u] != rgs[v]) D.arc[u * n + v] = 1;
    out.insert(D);
  }
  return {out.begin(), out.end()};
}

struct ArcCounts {
  uint64_t f1 = 0, f2 = 0;
};

inline ArcCounts arc_counts(const Digraph& D) {
  ArcCounts c;
  for (int u = 0; u < D.n; ++u)
    for (int v = u + 1; v < D.n; ++v) {
      int a = D.has(u, v) + D.has(v, u);
      if (a == 1) ++c.f1;
      if (a == 2) ++c.f2;
    }
  return c;
}

// number of full subdigraphs, 2^{f1} 4^{f2}
inline BigInt full_subdigraph_count(const Digraph& D) {
  auto c = arc_counts(D);
  return big_pow(2, c.f1) * big_pow(4, c.f2);
}

// ---------------------------------------------------------------- triples

struct Hypergraph {
  int n = 0, k = 3;
  std::vector<uint8_t> edge;  // colex k-subsets
  bool operator==(const Hypergraph&) const = default;
  bool operator<(const Hypergraph& o) const { return std::tie(n, k, edge) < std::tie(o.n, o.k, o.edge); }
  size_t edges() const { return std::count(edge.begin(), edge.end(), 1); }
};

inline bool is_uniform_hypergraph(const Structure& M) {
  int k = M.signature()[0].arity, n = M.n();
  bool ok = true;
  for_each_tuple(n, k, [&](const std::vector<int>& t) {
    if (!ok) return;
    std::vector<int> s(t);
    std::sort(s.begin(), s.end());
    bool distinct = std::adjacent_find(s.begin(), s.end()) == s.end();
    bool v = M.holds(0, t.data());
    if (!distinct) {
      if (v) ok = false;
      return;
    }
    if (v != M.holds(0, s.data())) ok = false;
  });
  return ok;
}

inline Hypergraph hypergraph_of(const Structure& M) {
  int k = M.signature()[0].arity;
  Hypergraph h{M.n(), k, {}};
  for (auto& A : subsets_colex(M.n(), k)) {
    std::vector<int> a0(A);
    for (int& x : a0) --x;
    h.edge.push_back(M.holds(0, a0.data()));
  }
  return h;
}

inline Structure structure_of(const SigRef& sig, const Hypergraph& h) {
  Structure M(sig, h.n);
  auto subs = subsets_colex(h.n, h.k);
  for (size_t i = 0; i < subs.size(); ++i) {
    if (!h.edge[i]) continue;
    std::vector<int> p(subs[i]);
    do M.add_tuple(0, p);
    while (std::next_permutation(p.begin(), p.end()));
  }
  return M;
}

inline bool hyper_has(const Hypergraph& h, std::vector<int> e) {
  std::sort(e.begin(), e.end());
  return h.edge[colex_rank(e)];
}

// contains {123,124,345} as a (not necessarily induced) subgraph
inline bool has_triangle_F(const Hypergraph& h) {
  int n = h.n;
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      for (int c = 1; c <= n; ++c) {
        if (c == a || c == b || !hyper_has(h, {a, b, c})) continue;
        for (int d = c + 1; d <= n; ++d) {
          if (d == a || d == b || !hyper_has(h, {a, b, d})) continue;
          for (int e = 1; e <= n; ++e)
            if (e != a && e != b && e != c && e != d && hyper_has(h, {c, d, e})) return true;
        }
      }
  return false;
}

inline HereditaryProperty triples_property() {
  HereditaryProperty H;
  H.name = "triangle-free-triples";
  H.sig = make_signature({{"E", 3}});
  H.mode = EmbedMode::non_induced;
  for (auto& F : minimal_forbidden(H.sig, is_uniform_hypergraph, 3)) H.forbidden.push_back({F, EmbedMode::induced});
  Hypergraph F{5, 3, std::vector<uint8_t>(binom(5, 3), 0)};
  for (auto e : std::vector<std::vector<int>>{{1, 2, 3}, {1, 2, 4}, {3, 4, 5}}) F.edge[colex_rank(e)] = 1;
  H.forbidden.push_back({structure_of(H.sig, F), EmbedMode::non_induced});
  H.predicate = [](const Structure& M) { return is_uniform_hypergraph(M) && !has_triangle_F(hypergraph_of(M)); };
  return H;
}

struct TriplesInstance : Instance {
  TypeCode p1, p2;  // edge, non-edge
};

inline TriplesInstance triples_instance() {
  TriplesInstance ti;
  static_cast<Instance&>(ti) = make_instance(triples_property(), 32);
  Hypergraph one{3, 3, {1}}, none{3, 3, {0}};
  ti.p1 = type_of(*ti.ctx->L, structure_of(ti.H->sig, one));
  ti.p2 = type_of(*ti.ctx->L, structure_of(ti.H->sig, none));
  return ti;
}

inline Hypergraph triples_psi(const TriplesInstance& ti, const Template& T) {
  Hypergraph h{T.n(), 3, std::vector<uint8_t>(T.subset_count(), 0)};
  for (size_t i = 0; i < T.subset_count(); ++i)
    h.edge[i] = std::binary_search(T.choices(i).begin(), T.choices(i).end(), ti.p1);
  return h;
}

inline Template triples_psi_inverse(const TriplesInstance& ti, const Hypergraph& h) {
  Template T(ti.ctx, h.n);
  for (size_t i = 0; i < T.subset_count(); ++i)
    T.set_choices(i, h.edge[i] ? std::vector<TypeCode>{ti.p1, ti.p2} : std::vector<TypeCode>{ti.p2});
  return T;
}

inline bool is_downward_closed(const TriplesInstance& ti, const Template& T) {
  for (size_t i = 0; i < T.subset_count(); ++i) {
    auto& c = T.choices(i);
    if (std::binary_search(c.begin(), c.end(), ti.p1) && !std::binary_search(c.begin(), c.end(), ti.p2)) return false;
  }
  return true;
}

// adds the non-edge type wherever only the edge type was allowed
inline Template triples_gstar(const TriplesInstance& ti, const Template& T) {
  Template out = T;
  for (size_t i = 0; i < T.subset_count(); ++i)
    if (T.choices(i) == std::vector<TypeCode>{ti.p1}) out.set_choices(i, {ti.p1, ti.p2});
  return out;
}

inline uint64_t triples_e(int n) {
  return static_cast<uint64_t>(n / 3) * ((n + 1) / 3) * ((n + 2) / 3);
}

// weight of a balanced tripartite template; a lower bound for ex
inline BigInt triples_tripartite_weight(int n) { return big_pow(2, triples_e(n)); }

// largest F-free 3-graph on [n], by brute force over edge sets
inline size_t triples_max_edges(int n) {
  size_t N = binom(n, 3);
  if (N > 24) throw std::invalid_argument("too many triples for brute force");
  size_t best = 0;
  Hypergraph h{n, 3, std::vector<uint8_t>(N, 0)};
  for (uint32_t m = 0; m < (uint32_t(1) << N); ++m) {
    size_t e = std::popcount(m);
    if (e <= best) continue;
    for (size_t i = 0; i < N; ++i) h.edge[i] = m >> i & 1;
    if (!has_triangle_F(h)) best = e;
  }
  return best;
}

// every subgraph of an F-free 3-graph is F-free, so ex = 2^{max edges}
inline BigInt triples_oracle(int n) { return big_pow(2, triples_max_edges(n)); }

// complete tripartite hypergraphs over equipartitions of [n]
inline std::vector<Hypergraph> balanced_tripartite(int n) {
  std::vector<int> want{n / 3, (n + 1) / 3, (n + 2) / 3};
  want.erase(std::remove(want.begin(), want.end(), 0), want.end());
  std::sort(want.begin(), want.end());
  std::set<Hypergraph> out;
  auto triples = subsets_colex(n, 3);
  for (auto& rgs : set_partitions(n)) {
    int parts = *std::max_element(rgs.begin(), rgs.end()) + 1;
    std::vector<int> sizes(parts, 0);
    for (int x : rgs) ++sizes[x];
    std::sort(sizes.begin(), sizes.end());
    if (sizes != want) continue;
    Hypergraph h{n, 3, std::vector<uint8_t>(triples.size(), 0)};
    for (size_t i = 0; i < triples.size(); ++i) {
      int a = rgs[triples[i][0] - 1], b = rgs[triples[i][1] - 1], c = rgs[triples[i][2] - 1];
      h.edge[i] = a != b && b != c && a != c;
    }
    out.insert(h);
  }
  return {out.begin(), out.end()};
}

inline bool is_balanced_tripartite(const Hypergraph& h) {
  auto all = balanced_tripartite(h.n);
  return std::find(all.begin(), all.end(), h) != all.end();
}

// ---------------------------------------------------------------- colored hypergraphs

struct ColorGraph {
  int n = 0, k = 2;
  std::vector<int> color;  // colex k-subsets, index into the color list
};

struct ColoredSpec {
  int k = 2;
  std::vector<std::string> colors;
  std::vector<ColorGraph> forbidden;
};

// some injective image of f in g carries the same colors on every k-set
inline bool contains_colored(const ColorGraph& g, const ColorGraph& f) {
  if (f.n > g.n) return false;
  auto fk = subsets_colex(f.n, f.k);
  for (auto& X : subsets_colex(g.n, f.n)) {
    std::vector<int> img(X);
    do {
      bool ok = true;
      for (size_t i = 0; i < fk.size() && ok; ++i) {
        std::vector<int> e;
        for (int x : fk[i]) e.push_back(img[x - 1]);
        std::sort(e.begin(), e.end());
        ok = g.color[colex_rank(e)] == f.color[i];
      }
      if (ok) return true;
    } while (std::next_permutation(img.begin(), img.end()));
  }
  return false;
}

inline bool colored_member(const ColoredSpec& spec, const ColorGraph& g) {
  for (auto& f : spec.forbidden)
    if (contains_colored(g, f)) return false;
  return true;
}

inline SigRef colored_signature(const ColoredSpec& spec) {
  std::vector<Relation> rels;
  for (auto& c : spec.colors) rels.push_back({"E_" + c, spec.k});
  return make_signature(rels);
}

inline Structure structure_of(const SigRef& sig, const ColorGraph& g) {
  Structure M(sig, g.n);
  auto subs = subsets_colex(g.n, g.k);
  for (size_t i = 0; i < subs.size(); ++i) {
    std::vector<int> p(subs[i]);
    do M.add_tuple(g.color[i], p);
    while (std::next_permutation(p.begin(), p.end()));
  }
  return M;
}

// the colored graph a structure encodes, if it encodes one
inline std::optional<ColorGraph> color_graph_of(const Structure& M, int k) {
  size_t C = M.signature().size();
  ColorGraph g{M.n(), k, {}};
  for (size_t rel = 0; rel < C; ++rel) {
    bool ok = true;
    for_each_tuple(M.n(), k, [&](const std::vector<int>& t) {
      if (!ok || !M.holds(static_cast<int>(rel), t.data())) return;
      std::vector<int> s(t);
      std::sort(s.begin(), s.end());
      if (std::adjacent_find(s.begin(), s.end()) != s.end()) ok = false;
    });
    if (!ok) return std::nullopt;
  }
  for (auto& A : subsets_colex(M.n(), k)) {
    std::vector<int> a0(A);
    for (int& x : a0) --x;
    int found = -1;
    for (size_t rel = 0; rel < C; ++rel) {
      std::vector<int> p(a0);
      int cnt = 0, total = 0;
      do {
        cnt += M.holds(static_cast<int>(rel), p.data());
        ++total;
      } while (std::next_permutation(p.begin(), p.end()));
      if (cnt != 0 && cnt != total) return std::nullopt;
      if (cnt) {
        if (found >= 0) return std::nullopt;
        found = static_cast<int>(rel);
      }
    }
    if (found < 0) return std::nullopt;
    g.color.push_back(found);
  }
  return g;
}

struct ColoredInstance : Instance {
  ColoredSpec spec;
  std::vector<TypeCode> p;  // p[c] = type of a k-set colored c
  std::vector<std::string> warnings;
};

inline ColoredInstance colored_instance(ColoredSpec spec) {
  if (spec.k < 2) throw std::invalid_argument("colored instance needs k >= 2");
  if (spec.colors.empty()) throw std::invalid_argument("color set is empty");
  for (auto& f : spec.forbidden) {
    if (f.k != spec.k || f.color.size() != binom(f.n, f.k)) throw std::invalid_argument("malformed forbidden graph");
    for (int c : f.color)
      if (c < 0 || c >= static_cast<int>(spec.colors.size())) throw std::invalid_argument("unknown color");
  }
  ColoredInstance ci;
  // drop colors no member can use on a single k-set
  std::vector<int> keep, remap(spec.colors.size(), -1);
  for (size_t c = 0; c < spec.colors.size(); ++c) {
    if (colored_member(spec, ColorGraph{spec.k, spec.k, {static_cast<int>(c)}})) {
      remap[c] = static_cast<int>(keep.size());
      keep.push_back(static_cast<int>(c));
    } else {
      ci.warnings.push_back("color " + spec.colors[c] + " is never realized and was dropped");
    }
  }
  if (keep.empty()) throw std::invalid_argument("no color is realized");
  ColoredSpec s2{spec.k, {}, {}};
  for (int c : keep) s2.colors.push_back(spec.colors[c]);
  for (auto& f : spec.forbidden) {
    ColorGraph g{f.n, f.k, {}};
    bool usable = true;
    for (int c : f.color) {
      if (remap[c] < 0) usable = false;
      g.color.push_back(remap[c]);
    }
    if (usable) s2.forbidden.push_back(g);
  }
  HereditaryProperty H;
  H.name = "colored-k" + std::to_string(spec.k);
  H.sig = colored_signature(s2);
  int k = s2.k;
  auto valid = [k](const Structure& M) { return color_graph_of(M, k).has_value(); };
  for (auto& F : minimal_forbidden(H.sig, valid, k)) H.forbidden.push_back({F, EmbedMode::induced});
  for (auto& f : s2.forbidden) H.forbidden.push_back({structure_of(H.sig, f), EmbedMode::induced});
  H.predicate = [s2](const Structure& M) {
    auto g = color_graph_of(M, s2.k);
    return g && colored_member(s2, *g);
  };
  H.warnings = ci.warnings;
  static_cast<Instance&>(ci) = make_instance(std::move(H));
  ci.spec = s2;
  for (size_t c = 0; c < s2.colors.size(); ++c)
    ci.p.push_back(type_of(*ci.ctx->L, structure_of(ci.H->sig, ColorGraph{k, k, {static_cast<int>(c)}})));
  return ci;
}

inline SetGraph colored_psi(const ColoredInstance& ci, const Template& T) {
  return {T.n(), ci.spec.k, choice_values(T, ci.p)};
}

inline Template colored_psi_inverse(const ColoredInstance& ci, const SetGraph& g) {
  return template_from_values(ci.ctx, g.n, g.c, ci.p);
}

struct ColoredMax {
  BigInt product = 0;  // 2^{max(n,P) C(n,k)}
  double max_density = 0;
  SetGraph witness;
};

// max(n,P) over P-good set-colored graphs, by brute force
inline ColoredMax colored_max_density(const ColoredSpec& spec, int n) {
  size_t N = binom(n, spec.k);
  int C = static_cast<int>(spec.colors.size());
  uint64_t top = (uint64_t(1) << C) - 1;
  ColoredMax best;
  SetGraph g{n, spec.k, std::vector<uint64_t>(N, 1)};
  ColorGraph sel{n, spec.k, std::vector<int>(N)};
  auto good = [&]() {
    std::vector<std::vector<int>> opts(N);
    for (size_t i = 0; i < N; ++i)
      for (int c = 0; c < C; ++c)
        if (g.c[i] >> c & 1) opts[i].push_back(c);
    std::vector<size_t> odo(N, 0);
    while (true) {
      for (size_t i = 0; i < N; ++i) sel.color[i] = opts[i][odo[i]];
      if (!colored_member(spec, sel)) return false;
      size_t i = 0;
      for (; i < N; ++i) {
        if (++odo[i] < opts[i].size()) break;
        odo[i] = 0;
      }
      if (i == N) return true;
    }
  };
  while (true) {
    BigInt w = g.weight();
    if (w > best.product && good()) {
      best.product = w;
      best.witness = g;
    }
    size_t i = 0;
    for (; i < N; ++i) {
      if (g.c[i] < top) {
        ++g.c[i];
        break;
      }
      g.c[i] = 1;
    }
    if (i == N) break;
  }
  best.max_density = static_cast<double>(log2_big(best.product) / N);
  return best;
}

inline ColoredSpec triangle_free_graph_spec() {
  ColoredSpec s{2, {"0", "1"}, {}};
  s.forbidden.push_back(ColorGraph{3, 2, {1, 1, 1}});
  return s;
}

// ---------------------------------------------------------------- mixed arity

// E ternary and unrestricted, R1..R3 binary forming a metric space
inline HereditaryProperty errorex_property() {
  HereditaryProperty H;
  H.name = "errorex";
  H.sig = make_signature({{"E", 3}, {"R1", 2}, {"R2", 2}, {"R3", 2}});
  H.unconstrained = 1;
  auto metric_sig = metric_signature(3);
  for (auto& F : minimal_forbidden(metric_sig, [](const Structure& M) { return is_metric_structure(M, 3); }, 3)) {
    Structure G(H.sig, F.n());
    for (int rel = 0; rel < 3; ++rel) G.table(rel + 1) = F.table(rel);
    H.forbidden.push_back({G, EmbedMode::induced});
  }
  H.predicate = [metric_sig](const Structure& M) {
    Structure D(metric_sig, M.n());
    for (int rel = 0; rel < 3; ++rel) D.table(rel) = M.table(rel + 1);
    return is_metric_structure(D, 3);
  };
  return H;
}

struct ErrorexInstance : Instance {
  TypeCode q1, q2;
};

// on (x1,x2,x3): all E facts; q1 has every distance 1, q2 has d(x1,x2)=2
inline ErrorexInstance errorex_instance() {
  ErrorexInstance ei;
  static_cast<Instance&>(ei) = make_instance(errorex_property());
  auto build = [&](int d12) {
    Structure M(ei.H->sig, 3);
    for_each_tuple(3, 3, [&](const std::vector<int>& t) { M.set(0, t, true); });
    int d[3] = {d12, 1, 1};
    int pr[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int i = 0; i < 3; ++i) {
      M.set(d[i], std::vector<int>{pr[i][0], pr[i][1]}, true);
      M.set(d[i], std::vector<int>{pr[i][1], pr[i][0]}, true);
    }
    return type_of(*ei.ctx->L, M);
  };
  ei.q1 = build(1);
  ei.q2 = build(2);
  return ei;
}

// on t,u,v,w = 1..4: Ch({1,2,3}) = {q1,q2}, q1 elsewhere
inline Template errorex_template(const ErrorexInstance& ei) {
  Template T(ei.ctx, 4);
  for (size_t i = 0; i < T.subset_count(); ++i) T.set_choices(i, {ei.q1});
  T.set_choices({1, 2, 3}, {ei.q1, ei.q2});
  return T;
}

template <class Rng>
Structure random_structure(const SigRef& sig, int n, Rng& rng, double density = 0.5) {
  std::bernoulli_distribution coin(density);
  Structure M(sig, n);
  for (size_t rel = 0; rel < sig->size(); ++rel)
    for (auto& v : M.table(static_cast<int>(rel))) v = coin(rng);
  return M;
}

template <class Rng>
std::vector<int> random_metric(int n, int r, Rng& rng) {
  std::uniform_int_distribution<int> pick(1, r);
  auto pairs = subsets_colex(n, 2);
  while (true) {
    std::vector<int> d(pairs.size());
    for (auto& x : d) x = pick(rng);
    bool ok = true;
    for (auto& T : subsets_colex(n, 3)) {
      int a = d[colex_rank({T[0], T[1]})], b = d[colex_rank({T[1], T[2]})], c = d[colex_rank({T[0], T[2]})];
      if (violating_triple(a, b, c)) ok = false;
    }
    if (ok) return d;
  }
}

template <class Rng>
Structure random_errorex_member(const ErrorexInstance& ei, int n, Rng& rng) {
  Structure M = random_structure(ei.H->sig, n, rng);
  for (int rel = 1; rel < 4; ++rel) std::fill(M.table(rel).begin(), M.table(rel).end(), 0);
  auto d = random_metric(n, 3, rng);
  auto pairs = subsets_colex(n, 2);
  for (size_t i = 0; i < pairs.size(); ++i) {
    M.add_tuple(d[i], {pairs[i][0], pairs[i][1]});
    M.add_tuple(d[i], {pairs[i][1], pairs[i][0]});
  }
  return M;
}

}  // namespace hlab
