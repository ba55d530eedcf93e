#pragma once

#include <map>

#include "distance.hpp"

namespace hlab {

// Vertices are located types (A, p) with A an r-subset of [n] and p in S_r(H),
// numbered rank(A)*|S| + index(p). Edges are syntactic k-diagrams, one vertex
// per r-subset of a k-set, kept sorted and grouped by that k-set.
struct ContainerHypergraph {
  ContextRef ctx;
  int n = 0, k = 0, r = 0;
  size_t s = 0;  // uniformity C(k,r)
  std::vector<std::vector<std::vector<uint32_t>>> groups;  // by colex rank of the k-set
  std::vector<size_t> alpha_per_subset;
  size_t alpha = 0;
  bool alpha_constant = true;
  size_t errors = 0;  // edges that are unsatisfiable diagrams

  size_t type_count() const { return ctx->S.size(); }
  size_t vertex_count() const { return binom(n, r) * type_count(); }
  size_t edge_count() const {
    size_t e = 0;
    for (auto& g : groups) e += g.size();
    return e;
  }
  uint32_t vertex(size_t subset_rank, TypeCode p) const {
    int i = ctx->idx(p);
    if (i < 0) throw std::invalid_argument("type " + type_id(p) + " is not in S_r(H)");
    return static_cast<uint32_t>(subset_rank * type_count() + i);
  }
  size_t subset_of(uint32_t v) const { return v / type_count(); }
  TypeCode type_of_vertex(uint32_t v) const { return ctx->S[v % type_count()]; }
};

// Every syntactic diagram on the 1-based set X drawn from options[t] on the
// t-th r-subset of X (colex inside X). visit gets the global vertex ids and the
// merged structure on |X| points, or nullopt when the diagram is unsatisfiable.
inline void for_each_local_diagram(const ContainerHypergraph& Hg, const std::vector<int>& X,
                                   const std::vector<std::vector<TypeCode>>& options,
                                   const std::function<void(const std::vector<uint32_t>&, const std::optional<Structure>&)>& visit,
                                   uint64_t* budget = nullptr) {
  const auto& L = *Hg.ctx->L;
  Geometry local(L, static_cast<int>(X.size()));
  size_t m = local.subsets.size();
  std::vector<size_t> grank(m);
  for (size_t t = 0; t < m; ++t) {
    std::vector<int> A;
    for (int x : local.subsets[t]) A.push_back(X[x]);
    grank[t] = colex_rank(A);
  }
  for (auto& o : options)
    if (o.empty()) return;
  std::vector<size_t> odo(m, 0);
  std::vector<TypeCode> chi(m);
  std::vector<uint32_t> ids(m);
  while (true) {
    if (budget) {
      if (*budget == 0) throw BudgetExhausted("diagram budget exhausted");
      --*budget;
    }
    for (size_t t = 0; t < m; ++t) {
      chi[t] = options[t][odo[t]];
      ids[t] = Hg.vertex(grank[t], chi[t]);
    }
    std::vector<uint32_t> sorted(ids);
    std::sort(sorted.begin(), sorted.end());
    visit(sorted, merge_choice(L, local, chi));
    size_t t = 0;
    for (; t < m; ++t) {
      if (++odo[t] < options[t].size()) break;
      odo[t] = 0;
    }
    if (t == m) return;
  }
}

// H(F, W) for the forbidden family of H, W = [n]
inline ContainerHypergraph build_hypergraph(const ContextRef& ctx, int k, int n, uint64_t budget = 50'000'000) {
  const auto& H = *ctx->H;
  if (H.forbidden.empty()) throw std::invalid_argument("forbidden family is empty");
  if (!ctx->enumerable) throw std::invalid_argument("S_r(H) is too large to list");
  int r = ctx->r();
  if (k < r) throw std::invalid_argument("k must be at least r");
  if (k < H.k()) throw std::invalid_argument("k is smaller than the largest forbidden structure");
  if (n < k) throw std::invalid_argument("n must be at least k");
  ContainerHypergraph Hg;
  Hg.ctx = ctx;
  Hg.n = n;
  Hg.k = k;
  Hg.r = r;
  Hg.s = binom(k, r);
  BigInt per_set = big_pow(ctx->S.size(), Hg.s);
  if (per_set * binom(n, k) > budget) throw BudgetExhausted("hypergraph exceeds the diagram budget");
  auto ksets = subsets_colex(n, k);
  Hg.groups.resize(ksets.size());
  std::vector<std::vector<TypeCode>> options(Hg.s, ctx->S);
  for (size_t g = 0; g < ksets.size(); ++g) {
    for_each_local_diagram(Hg, ksets[g], options, [&](const std::vector<uint32_t>& ids, const std::optional<Structure>& M) {
      if (!M) {
        Hg.groups[g].push_back(ids);
        ++Hg.errors;
      } else if (!H.is_member(*M)) {
        Hg.groups[g].push_back(ids);
      }
    });
    std::sort(Hg.groups[g].begin(), Hg.groups[g].end());
    Hg.alpha_per_subset.push_back(Hg.groups[g].size());
  }
  Hg.alpha = Hg.alpha_per_subset.front();
  for (auto a : Hg.alpha_per_subset) Hg.alpha_constant = Hg.alpha_constant && a == Hg.alpha;
  if (Hg.edge_count() != Hg.alpha * binom(n, k) && Hg.alpha_constant)
    throw std::logic_error("edge count differs from alpha C(n,k)");
  return Hg;
}

// union of the supports of a vertex set, 1-based and sorted
inline std::vector<int> support_of(const ContainerHypergraph& Hg, const std::vector<uint32_t>& sigma) {
  auto rsets = subsets_colex(Hg.n, Hg.r);
  std::set<int> u;
  for (auto v : sigma)
    for (int x : rsets.at(Hg.subset_of(v))) u.insert(x);
  return {u.begin(), u.end()};
}

// d(sigma): edges containing sigma
inline size_t degree(const ContainerHypergraph& Hg, std::vector<uint32_t> sigma) {
  for (auto v : sigma)
    if (v >= Hg.vertex_count()) throw std::invalid_argument("vertex out of range");
  std::sort(sigma.begin(), sigma.end());
  sigma.erase(std::unique(sigma.begin(), sigma.end()), sigma.end());
  auto U = support_of(Hg, sigma);
  if (static_cast<int>(U.size()) > Hg.k) return 0;
  size_t d = 0;
  auto ksets = subsets_colex(Hg.n, Hg.k);
  for (size_t g = 0; g < ksets.size(); ++g) {
    if (!std::includes(ksets[g].begin(), ksets[g].end(), U.begin(), U.end())) continue;
    for (auto& e : Hg.groups[g])
      if (std::includes(e.begin(), e.end(), sigma.begin(), sigma.end())) ++d;
  }
  return d;
}

// d^{(j)}(v) for every vertex: the largest degree of a j-set containing v.
// Only j-sets inside some edge have positive degree, so they are counted by
// walking the j-subsets of every edge.
inline std::vector<size_t> max_codegrees(const ContainerHypergraph& Hg, size_t j) {
  if (j < 1 || j > Hg.s) throw std::invalid_argument("j out of range");
  std::map<std::vector<uint32_t>, size_t> deg;
  for (auto& grp : Hg.groups)
    for (auto& e : grp)
      for (auto& pick : subsets_colex(static_cast<int>(Hg.s), static_cast<int>(j))) {
        std::vector<uint32_t> sigma;
        for (int t : pick) sigma.push_back(e[t - 1]);
        ++deg[sigma];
      }
  std::vector<size_t> out(Hg.vertex_count(), 0);
  for (auto& [sigma, d] : deg)
    for (auto v : sigma) out[v] = std::max(out[v], d);
  return out;
}

inline BigInt factorial_big(uint64_t x) {
  BigInt f = 1;
  for (uint64_t i = 2; i <= x; ++i) f *= i;
  return f;
}

// m(k, r) = max over r < l <= k of (C(l,r) - 1) / (l - r)
inline Rational exponent_m(int k, int r) {
  if (r < 2 || k <= r) throw std::invalid_argument("need 2 <= r < k");
  Rational m = 0;
  for (int l = r + 1; l <= k; ++l) m = std::max(m, Rational(static_cast<int64_t>(binom(l, r)) - 1, l - r));
  return m;
}

struct CodegreeReport {
  Rational tau, d;
  std::vector<Rational> delta_j;  // index j, entries 0 and 1 unused
  Rational delta;
  Rational threshold;
  bool threshold_met = false;
};

// delta_j tau^{j-1} v(H) d = sum_v d^{(j)}(v); threshold eps / (12 s!)
inline CodegreeReport codegree_function(const ContainerHypergraph& Hg, const Rational& tau, const Rational& eps) {
  if (Hg.vertex_count() == 0) throw std::invalid_argument("hypergraph has no vertices");
  if (tau <= 0) throw std::invalid_argument("tau must be positive");
  CodegreeReport rep;
  rep.tau = tau;
  size_t s = Hg.s;
  Rational N = Rational(Hg.vertex_count());
  rep.d = Rational(Hg.edge_count() * s) / N;
  rep.delta_j.assign(s + 1, 0);
  rep.delta = 0;
  if (rep.d != 0) {
    Rational tp = 1;
    for (size_t j = 2; j <= s; ++j) {
      tp *= tau;
      BigInt sum = 0;
      for (auto x : max_codegrees(Hg, j)) sum += x;
      rep.delta_j[j] = Rational(sum) / (tp * N * rep.d);
      rep.delta += rep.delta_j[j] / Rational(big_pow(2, binom(j - 1, 2)));
    }
    rep.delta *= Rational(big_pow(2, binom(s, 2))) / 2;
  }
  rep.threshold = eps / (12 * Rational(factorial_big(s)));
  rep.threshold_met = rep.delta <= rep.threshold;
  return rep;
}

// eps' = eps / |S_r(L)|^{C(k,r)}
inline Rational eps_prime(const TypeLayout& L, int k, const Rational& eps) {
  return eps / Rational(big_pow(type_space_size(L), binom(k, L.r())));
}

struct GammaCheck {
  Rational lhs, rhs;
  bool holds = false;
};

// 2^{C(s,2)+1} |S_r(L)| r! (k-r)^{k-r} gamma <= eps' / (12 s!), s = C(k,r)
inline GammaCheck gamma_inequality(const TypeLayout& L, int k, const Rational& eps, const Rational& gamma) {
  int r = L.r();
  if (k <= r) throw std::invalid_argument("need k > r");
  uint64_t s = binom(k, r);
  GammaCheck g;
  g.lhs = Rational(big_pow(2, binom(s, 2) + 1) * type_space_size(L) * factorial_big(r) * big_pow(k - r, k - r)) * gamma;
  g.rhs = eps_prime(L, k, eps) / (12 * Rational(factorial_big(s)));
  g.holds = g.lhs <= g.rhs;
  return g;
}

// tau = n^{-1/m} / gamma, rounded to a rational with 1e-12 resolution
inline Rational auto_tau(int n, const Rational& m, const Rational& gamma) {
  long double t = std::pow(static_cast<long double>(n), -1.0L / static_cast<long double>(to_double(m))) /
                  static_cast<long double>(to_double(gamma));
  return Rational(static_cast<int64_t>(std::llround(t * 1e12L)), static_cast<int64_t>(1'000'000'000'000LL));
}

// Diag^tp(M) as vertex ids
inline std::vector<uint32_t> diagram_vertices(const ContainerHypergraph& Hg, const Structure& M) {
  if (M.n() != Hg.n) throw std::invalid_argument("structure has the wrong domain size");
  Geometry G(*Hg.ctx->L, Hg.n);
  std::vector<uint32_t> out;
  for (size_t i = 0; i < G.subsets.size(); ++i) out.push_back(Hg.vertex(i, qftp0(*Hg.ctx->L, M, G.subsets[i].data())));
  std::sort(out.begin(), out.end());
  return out;
}

struct IndependenceReport {
  bool independent = true;
  std::vector<uint32_t> witness;
};

// scans every edge for containment in Diag^tp(M)
inline IndependenceReport independence_check(const ContainerHypergraph& Hg, const Structure& M) {
  auto D = diagram_vertices(Hg, M);
  IndependenceReport rep;
  for (auto& grp : Hg.groups)
    for (auto& e : grp)
      if (std::includes(D.begin(), D.end(), e.begin(), e.end())) {
        rep.independent = false;
        rep.witness = e;
        return rep;
      }
  return rep;
}

// sigma as a choice set per r-subset; every r-subset must be covered
inline std::vector<std::vector<TypeCode>> choice_sets_of(const ContainerHypergraph& Hg, const std::vector<uint32_t>& sigma) {
  std::vector<std::vector<TypeCode>> ch(binom(Hg.n, Hg.r));
  for (auto v : sigma) {
    if (v >= Hg.vertex_count()) throw std::invalid_argument("vertex out of range");
    ch[Hg.subset_of(v)].push_back(Hg.type_of_vertex(v));
  }
  for (auto& c : ch) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  return ch;
}

// D_sigma: Ch(A) = Ch_sigma(A)
inline Template template_from_diagram_set(const ContainerHypergraph& Hg, const std::vector<uint32_t>& sigma) {
  auto ch = choice_sets_of(Hg, sigma);
  Template T(Hg.ctx, Hg.n);
  for (size_t i = 0; i < ch.size(); ++i) {
    if (ch[i].empty()) throw std::invalid_argument("diagram set is not complete");
    T.set_choices(i, ch[i]);
  }
  T.require_complete();
  return T;
}

// options of sigma on the r-subsets of X, colex order inside X
inline std::vector<std::vector<TypeCode>> local_options(const ContainerHypergraph& Hg,
                                                        const std::vector<std::vector<TypeCode>>& ch,
                                                        const std::vector<int>& X) {
  std::vector<std::vector<TypeCode>> out;
  for (auto& A : subsets_colex(static_cast<int>(X.size()), Hg.r)) {
    std::vector<int> g;
    for (int x : A) g.push_back(X[x - 1]);
    out.push_back(ch[colex_rank(g)]);
  }
  return out;
}

struct SpanCounts {
  size_t forbidden = 0;  // satisfiable diagrams of structures in F(l) (cl_k(F) when l = k)
  size_t errors = 0;     // unsatisfiable diagrams
  size_t total() const { return forbidden + errors; }
};

// (Diag^tp(F(l)) and Err_l) intersected with Span(sigma); with `closure`,
// cl_l(F) replaces F(l)
inline SpanCounts span_counts(const ContainerHypergraph& Hg, const std::vector<uint32_t>& sigma, int l,
                              bool closure = false) {
  if (l < 1 || l > Hg.n) throw std::invalid_argument("l out of range");
  SpanCounts c;
  if (l < Hg.r) return c;
  auto ch = choice_sets_of(Hg, sigma);
  const auto& H = *Hg.ctx->H;
  for (auto& X : subsets_colex(Hg.n, l))
    for_each_local_diagram(Hg, X, local_options(Hg, ch, X), [&](const std::vector<uint32_t>&, const std::optional<Structure>& M) {
      if (!M)
        ++c.errors;
      else if (closure ? !H.is_member(*M) : H.violates_exactly(*M))
        ++c.forbidden;
    });
  return c;
}

struct InjectionCheck {
  int l = 0;
  size_t copies = 0, diagrams = 0;
  bool holds = false;
};

// |cop(F~(l), D_sigma)| <= |Diag^tp(F(l)) cap Span(sigma)| for l <= k, and
// |cop(E(l), D_sigma)| <= |Err_l cap Span(sigma)| for r < l <= 2r
inline std::pair<std::vector<InjectionCheck>, std::vector<InjectionCheck>> bounding_injections(
    const ContainerHypergraph& Hg, const std::vector<uint32_t>& sigma) {
  Template D = template_from_diagram_set(Hg, sigma);
  const auto& H = *Hg.ctx->H;
  std::vector<InjectionCheck> fs, es;
  for (int l = Hg.r; l <= std::min(Hg.k, Hg.n); ++l) {
    InjectionCheck ic;
    ic.l = l;
    auto pats = forbidden_patterns(H, D.layout(), l);
    pats.erase(std::remove_if(pats.begin(), pats.end(), [&](const Pattern& P) { return P.size != l; }), pats.end());
    for (auto& B : subsets_colex(Hg.n, l)) {
      Template DB = restrict(D, B);
      bool hit = false;
      if (is_error_free(DB)) {
        hit = find_tilde_f(DB, pats).has_value();
      } else {
        Geometry G(DB.layout(), l);
        for_each_choice_function(DB, [&](const std::vector<TypeCode>& chi) {
          auto M = merge_choice(DB.layout(), G, chi);
          if (M && H.violates_exactly(*M)) hit = true;
          return !hit;
        });
      }
      ic.copies += hit;
    }
    ic.diagrams = span_counts(Hg, sigma, l).forbidden;
    ic.holds = ic.copies <= ic.diagrams;
    fs.push_back(ic);
  }
  auto errs = detect_errors(D).errors;
  for (int l = Hg.r + 1; l <= std::min(2 * Hg.r, Hg.n); ++l) {
    InjectionCheck ic;
    ic.l = l;
    for (auto& X : errs) ic.copies += static_cast<int>(X.size()) == l;
    ic.diagrams = span_counts(Hg, sigma, l).errors;
    ic.holds = ic.copies <= ic.diagrams;
    es.push_back(ic);
  }
  return {fs, es};
}

struct GammaCounts {
  std::vector<size_t> gamma;  // index l, |Gamma(l)|
  bool implication_holds = true;
};

// If |Gamma(k)| <= eps C(n,k) then |Gamma(l)| <= eps C(n,l); checked at the
// tightest eps = |Gamma(k)| / C(n,k), exactly.
inline GammaCounts gamma_implication(const ContainerHypergraph& Hg, const std::vector<uint32_t>& sigma) {
  GammaCounts gc;
  gc.gamma.assign(Hg.k + 1, 0);
  for (int l = 1; l <= Hg.k; ++l) gc.gamma[l] = span_counts(Hg, sigma, l, l == Hg.k).total();
  Rational eps(gc.gamma[Hg.k], binom(Hg.n, Hg.k));
  for (int l = 1; l < Hg.k; ++l)
    if (Rational(gc.gamma[l]) > eps * Rational(binom(Hg.n, l))) gc.implication_holds = false;
  return gc;
}

}  // namespace hlab
