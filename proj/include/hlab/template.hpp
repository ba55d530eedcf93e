#pragma once

#include <functional>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "property.hpp"

namespace hlab {

// Per-property data shared by every template: the property, the type layout
// and S_r(H) when it is small enough to list.
struct TemplateContext {
  std::shared_ptr<const HereditaryProperty> H;
  LayoutRef L;
  std::vector<TypeCode> S;
  bool enumerable = false;
  std::unordered_map<TypeCode, int> index;

  int r() const { return L->r(); }

  bool realized(TypeCode p) const {
    if ((p & ~L->full_mask()) != 0) return false;
    if (enumerable) return index.count(p) > 0;
    return H->is_member(realize(*L, p));
  }

  int idx(TypeCode p) const {
    auto it = index.find(p);
    return it == index.end() ? -1 : it->second;
  }
};

using ContextRef = std::shared_ptr<const TemplateContext>;

inline ContextRef make_context(std::shared_ptr<const HereditaryProperty> H, int max_list_bits = 24) {
  auto ctx = std::make_shared<TemplateContext>();
  ctx->H = std::move(H);
  if (ctx->H->r() < 2) throw std::invalid_argument("signature needs maximum arity at least 2");
  ctx->L = make_layout(ctx->H->sig);
  if (ctx->L->fact_count() <= max_list_bits) {
    ctx->S = realized_type_space(*ctx->H, *ctx->L);
    ctx->enumerable = true;
    for (size_t i = 0; i < ctx->S.size(); ++i) ctx->index[ctx->S[i]] = static_cast<int>(i);
  }
  return ctx;
}

inline ContextRef make_context(const HereditaryProperty& H, int max_list_bits = 24) {
  return make_context(std::make_shared<const HereditaryProperty>(H), max_list_bits);
}

// Index data for templates on {1..n}: r-subsets in colex order, the global
// position of every atomic fact each subset's type talks about, and the pairs
// of subsets sharing atomic facts.
struct Geometry {
  struct Overlap {
    int i, j;  // i < j
    std::vector<std::pair<int, int>> slots;
  };

  int n = 0, r = 0;
  std::vector<std::vector<int>> subsets;  // 0-based
  std::vector<std::vector<uint32_t>> gidx;
  size_t nfacts = 0;
  std::vector<Overlap> overlaps;

  Geometry(const TypeLayout& L, int n_) : n(n_), r(L.r()) {
    for (auto s : subsets_colex(n, r)) {
      for (int& x : s) --x;
      subsets.push_back(s);
    }
    const auto& sig = *L.sig();
    std::vector<size_t> offset(sig.size() + 1, 0);
    for (size_t i = 0; i < sig.size(); ++i) offset[i + 1] = offset[i] + ipow(n, sig[i].arity);
    nfacts = offset.back();
    for (auto& A : subsets) {
      std::vector<uint32_t> g(L.fact_count());
      for (int j = 0; j < L.fact_count(); ++j) {
        const auto& s = L.slot(j);
        size_t idx = 0;
        for (int v : s.vars) idx = idx * n + A[v];
        g[j] = static_cast<uint32_t>(offset[s.rel] + idx);
      }
      gidx.push_back(std::move(g));
    }
    for (size_t i = 0; i < subsets.size(); ++i)
      for (size_t j = i + 1; j < subsets.size(); ++j) {
        Overlap o{static_cast<int>(i), static_cast<int>(j), {}};
        std::unordered_map<uint32_t, int> at;
        for (int b = 0; b < L.fact_count(); ++b) at[gidx[j][b]] = b;
        for (int a = 0; a < L.fact_count(); ++a) {
          auto it = at.find(gidx[i][a]);
          if (it != at.end()) o.slots.push_back({a, it->second});
        }
        if (!o.slots.empty()) overlaps.push_back(std::move(o));
      }
  }

  std::vector<int> one_based(size_t i) const {
    std::vector<int> a(subsets[i]);
    for (int& x : a) ++x;
    return a;
  }
};

inline bool clash(const Geometry::Overlap& o, TypeCode p, TypeCode q) {
  for (auto [a, b] : o.slots)
    if (((p >> a) ^ (q >> b)) & 1) return true;
  return false;
}

class Template {
 public:
  Template(ContextRef ctx, int n) : ctx_(std::move(ctx)), n_(n) {
    if (n < ctx_->r()) throw std::invalid_argument("template needs n >= r");
    ch_.assign(binom(n, ctx_->r()), {});
  }

  const ContextRef& ctx() const { return ctx_; }
  const TypeLayout& layout() const { return *ctx_->L; }
  int n() const { return n_; }
  int r() const { return ctx_->r(); }
  size_t subset_count() const { return ch_.size(); }

  static size_t rank_of(const std::vector<int>& A) { return colex_rank(A); }

  const std::vector<TypeCode>& choices(size_t i) const { return ch_.at(i); }
  const std::vector<TypeCode>& choices(std::vector<int> A) const {
    std::sort(A.begin(), A.end());
    check_subset(A);
    return ch_[rank_of(A)];
  }

  void set_choices(size_t i, std::vector<TypeCode> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (auto p : v)
      if (!ctx_->realized(p)) throw std::invalid_argument("type " + type_id(p) + " is not in S_r(H)");
    ch_.at(i) = std::move(v);
  }

  void set_choices(std::vector<int> A, std::vector<TypeCode> v) {
    std::sort(A.begin(), A.end());
    check_subset(A);
    set_choices(rank_of(A), std::move(v));
  }

  bool complete() const {
    for (auto& c : ch_)
      if (c.empty()) return false;
    return true;
  }

  void require_complete() const {
    if (!complete()) throw std::invalid_argument("template is not complete");
  }

  BigInt choice_count() const {
    require_complete();
    BigInt c = 1;
    for (auto& v : ch_) c *= v.size();
    return c;
  }

  bool operator==(const Template& o) const { return n_ == o.n_ && ch_ == o.ch_; }
  bool operator<(const Template& o) const { return n_ != o.n_ ? n_ < o.n_ : ch_ < o.ch_; }

  const std::vector<std::vector<TypeCode>>& all_choices() const { return ch_; }

 private:
  void check_subset(const std::vector<int>& A) const {
    if (static_cast<int>(A.size()) != r()) throw std::invalid_argument("subset size differs from r");
    for (size_t i = 0; i < A.size(); ++i)
      if (A[i] < 1 || A[i] > n_ || (i && A[i] == A[i - 1])) throw std::invalid_argument("bad subset");
  }

  ContextRef ctx_;
  int n_;
  std::vector<std::vector<TypeCode>> ch_;
};

// The singleton template of N: Ch(A) = {Diag^N(A)}
inline Template template_from_structure(const ContextRef& ctx, const Structure& N) {
  if (!ctx->H->member_direct(N)) throw std::invalid_argument("structure is not in H");
  Template T(ctx, N.n());
  Geometry G(*ctx->L, N.n());
  for (size_t i = 0; i < G.subsets.size(); ++i) T.set_choices(i, {qftp0(*ctx->L, N, G.subsets[i].data())});
  return T;
}

// Streams choice functions in lexicographic order of (subset, type id); the
// first subset varies slowest. visit returns false to stop.
inline void for_each_choice_function(const Template& T, const std::function<bool(const std::vector<TypeCode>&)>& visit) {
  T.require_complete();
  size_t N = T.subset_count();
  std::vector<size_t> odo(N, 0);
  std::vector<TypeCode> chi(N);
  for (size_t i = 0; i < N; ++i) chi[i] = T.choices(i)[0];
  while (true) {
    if (!visit(chi)) return;
    int i = static_cast<int>(N) - 1;
    while (i >= 0) {
      if (++odo[i] < T.choices(i).size()) {
        chi[i] = T.choices(i)[odo[i]];
        break;
      }
      odo[i] = 0;
      chi[i] = T.choices(i)[0];
      --i;
    }
    if (i < 0) return;
  }
}

// Merge of the located types chosen by chi; nothing when two of them clash.
inline std::optional<Structure> merge_choice(const TypeLayout& L, const Geometry& G, const std::vector<TypeCode>& chi) {
  std::vector<int8_t> val(G.nfacts, -1);
  for (size_t i = 0; i < G.subsets.size(); ++i) {
    const auto& g = G.gidx[i];
    for (int j = 0; j < L.fact_count(); ++j) {
      int8_t b = (chi[i] >> j) & 1;
      if (val[g[j]] < 0)
        val[g[j]] = b;
      else if (val[g[j]] != b)
        return std::nullopt;
    }
  }
  Structure M(L.sig(), G.n);
  size_t off = 0;
  for (size_t rel = 0; rel < L.sig()->size(); ++rel) {
    auto& tab = M.table(static_cast<int>(rel));
    for (size_t k = 0; k < tab.size(); ++k) tab[k] = val[off + k] == 1;
    off += tab.size();
  }
  return M;
}

inline std::optional<Structure> subpattern_of_choice(const Template& T, const std::vector<TypeCode>& chi) {
  if (chi.size() != T.subset_count()) throw std::invalid_argument("choice function has wrong length");
  for (size_t i = 0; i < chi.size(); ++i)
    if (!std::binary_search(T.choices(i).begin(), T.choices(i).end(), chi[i]))
      throw std::invalid_argument("choice not drawn from the template");
  Geometry G(T.layout(), T.n());
  return merge_choice(T.layout(), G, chi);
}

// Depth-first walk over choice functions with incremental merging; branches
// whose partial merge already clashes are cut. leaf(val) sees the fact table.
class ChoiceWalker {
 public:
  ChoiceWalker(const Template& T, const Geometry& G) : T_(T), G_(G), L_(T.layout()) {}

  template <class Leaf>
  void run(Leaf&& leaf) {
    val_.assign(G_.nfacts, -1);
    stop_ = false;
    rec(0, leaf);
  }

  void stop() { stop_ = true; }

  Structure structure() const {
    Structure M(L_.sig(), G_.n);
    size_t off = 0;
    for (size_t rel = 0; rel < L_.sig()->size(); ++rel) {
      auto& tab = M.table(static_cast<int>(rel));
      for (size_t k = 0; k < tab.size(); ++k) tab[k] = val_[off + k] == 1;
      off += tab.size();
    }
    return M;
  }

 private:
  template <class Leaf>
  void rec(size_t i, Leaf& leaf) {
    if (stop_) return;
    if (i == G_.subsets.size()) {
      leaf(*this);
      return;
    }
    const auto& g = G_.gidx[i];
    std::vector<uint32_t> undo;
    for (TypeCode p : T_.choices(i)) {
      undo.clear();
      bool ok = true;
      for (int j = 0; j < L_.fact_count(); ++j) {
        int8_t b = (p >> j) & 1;
        int8_t& v = val_[g[j]];
        if (v < 0) {
          v = b;
          undo.push_back(g[j]);
        } else if (v != b) {
          ok = false;
          break;
        }
      }
      if (ok) rec(i + 1, leaf);
      for (auto u : undo) val_[u] = -1;
      if (stop_) return;
    }
  }

  const Template& T_;
  const Geometry& G_;
  const TypeLayout& L_;
  std::vector<int8_t> val_;
  bool stop_ = false;
};

struct ErrorReport {
  std::vector<std::vector<int>> errors;  // unions X of clashing overlapping subsets, 1-based
  bool error_free() const { return errors.empty(); }
};

inline ErrorReport detect_errors(const Template& T, const Geometry& G) {
  T.require_complete();
  std::set<std::vector<int>> found;
  for (auto& o : G.overlaps) {
    bool bad = false;
    for (TypeCode p : T.choices(o.i)) {
      for (TypeCode q : T.choices(o.j))
        if (clash(o, p, q)) {
          bad = true;
          break;
        }
      if (bad) break;
    }
    if (bad) {
      std::set<int> X;
      for (int x : G.subsets[o.i]) X.insert(x + 1);
      for (int x : G.subsets[o.j]) X.insert(x + 1);
      found.insert({X.begin(), X.end()});
    }
  }
  return {{found.begin(), found.end()}};
}

inline ErrorReport detect_errors(const Template& T) { return detect_errors(T, Geometry(T.layout(), T.n())); }

inline bool is_error_free(const Template& T) { return detect_errors(T).error_free(); }

struct SubCount {
  BigInt count;
  bool error_free = true;
};

// Number of full subpatterns: the product of choice-set sizes when error-free,
// otherwise a walk over choice functions counting satisfiable merges.
inline SubCount sub_count(const Template& T) {
  Geometry G(T.layout(), T.n());
  SubCount out;
  out.error_free = detect_errors(T, G).error_free();
  if (out.error_free) {
    out.count = T.choice_count();
    return out;
  }
  BigInt c = 0;
  ChoiceWalker w(T, G);
  w.run([&](ChoiceWalker&) { ++c; });
  out.count = c;
  return out;
}

// sub by merging every choice function, without the error shortcut
inline BigInt sub_count_by_merging(const Template& T) {
  Geometry G(T.layout(), T.n());
  BigInt c = 0;
  for_each_choice_function(T, [&](const std::vector<TypeCode>& chi) {
    if (merge_choice(T.layout(), G, chi)) ++c;
    return true;
  });
  return c;
}

// One requirement per r-subset of an s-set: some chosen type p must satisfy
// (p & mask) == value.
struct Pattern {
  int size = 0;
  std::vector<std::pair<TypeCode, TypeCode>> req;  // indexed by colex rank inside the s-set
  bool operator<(const Pattern& o) const { return size != o.size ? size < o.size : req < o.req; }
  bool operator==(const Pattern& o) const = default;
};

// For each forbidden F with r <= |F| <= n, the requirements a template must meet
// on an |F|-set for some choice function to merge into a copy of F there.
inline std::vector<Pattern> forbidden_patterns(const HereditaryProperty& H, const TypeLayout& L, int n) {
  int r = L.r();
  TypeCode cmask = L.constrained_mask(H.unconstrained);
  std::set<Pattern> pats;
  for (auto& f : H.forbidden) {
    int s = f.structure.n();
    if (s < r || s > n) continue;
    auto locals = subsets_colex(s, r);
    std::vector<int> ginv(s);
    std::iota(ginv.begin(), ginv.end(), 0);
    do {
      // position t of the s-set carries element ginv[t] of F
      Pattern P;
      P.size = s;
      for (auto& A : locals) {
        std::vector<int> tup(r);
        for (int v = 0; v < r; ++v) tup[v] = ginv[A[v] - 1];
        TypeCode p = qftp0(L, f.structure, tup.data()) & cmask;
        if (f.mode == EmbedMode::induced)
          P.req.push_back({cmask, p});
        else
          P.req.push_back({p, p});
      }
      pats.insert(std::move(P));
    } while (std::next_permutation(ginv.begin(), ginv.end()));
  }
  return {pats.begin(), pats.end()};
}

// Some s-set B and choice function on T[B] merge to a forbidden copy on B.
// Assumes T is error-free so that choices on distinct subsets combine freely.
inline std::optional<std::vector<int>> find_tilde_f(const Template& T, const std::vector<Pattern>& pats) {
  int r = T.r();
  for (auto& P : pats) {
    for (auto& B : subsets_colex(T.n(), P.size)) {
      auto locals = subsets_colex(P.size, r);
      bool hit = true;
      for (size_t t = 0; t < locals.size() && hit; ++t) {
        std::vector<int> A(r);
        for (int v = 0; v < r; ++v) A[v] = B[locals[t][v] - 1];
        auto [mask, value] = P.req[t];
        bool any = false;
        for (TypeCode p : T.choices(A))
          if ((p & mask) == value) {
            any = true;
            break;
          }
        hit = any;
      }
      if (hit) return B;
    }
  }
  return std::nullopt;
}

inline bool is_tilde_f_free(const Template& T) {
  return !find_tilde_f(T, forbidden_patterns(*T.ctx()->H, T.layout(), T.n())).has_value();
}

// error-free and free of forbidden patterns
inline bool is_h_random(const Template& T) {
  T.require_complete();
  if (!is_error_free(T)) return false;
  return is_tilde_f_free(T);
}

// every choice function merges to a member of H
inline bool is_h_random_direct(const Template& T) {
  T.require_complete();
  Geometry G(T.layout(), T.n());
  bool ok = true;
  for_each_choice_function(T, [&](const std::vector<TypeCode>& chi) {
    auto M = merge_choice(T.layout(), G, chi);
    if (!M || !T.ctx()->H->member_direct(*M)) ok = false;
    return ok;
  });
  return ok;
}

// T[A] relabeled onto {1..|A|}
inline Template restrict(const Template& T, std::vector<int> A) {
  std::sort(A.begin(), A.end());
  A.erase(std::unique(A.begin(), A.end()), A.end());
  if (static_cast<int>(A.size()) < T.r()) throw std::invalid_argument("restriction needs |A| >= r");
  for (int x : A)
    if (x < 1 || x > T.n()) throw std::invalid_argument("restriction element out of range");
  Template out(T.ctx(), static_cast<int>(A.size()));
  for (auto& loc : subsets_colex(static_cast<int>(A.size()), T.r())) {
    std::vector<int> glob;
    for (int x : loc) glob.push_back(A[x - 1]);
    out.set_choices(loc, T.choices(glob));
  }
  return out;
}

// Raw L_H-structure: the list of true atoms R_p(a_1..a_r), tuples 1-based
struct RawTemplate {
  int n = 0;
  std::vector<std::pair<TypeCode, std::vector<int>>> atoms;
};

struct Validation {
  bool ok = true;
  bool complete = true;
  std::string axiom;  // "arity", "realized", "distinct", "coherence", "complete"
  std::vector<int> subset;
  std::string message;
};

// Normalizes a raw structure into canonical choice sets, checking that atoms
// sit on distinct elements, coherence under variable permutations, membership
// of every p in S_r(H), and completeness (reported separately).
inline std::pair<std::optional<Template>, Validation> normalize_raw(const ContextRef& ctx, const RawTemplate& raw) {
  const auto& L = *ctx->L;
  int r = L.r();
  Validation v;
  auto fail = [&](std::string axiom, std::vector<int> A, std::string msg) {
    v.ok = false;
    v.axiom = std::move(axiom);
    std::sort(A.begin(), A.end());
    v.subset = std::move(A);
    v.message = std::move(msg);
    return std::make_pair(std::optional<Template>{}, v);
  };
  std::set<std::pair<TypeCode, std::vector<int>>> atoms(raw.atoms.begin(), raw.atoms.end());
  std::map<std::vector<int>, std::set<TypeCode>> ch;
  for (auto& [p, a] : raw.atoms) {
    if (static_cast<int>(a.size()) != r) return fail("arity", a, "atom tuple length differs from r");
    for (int x : a)
      if (x < 1 || x > raw.n) return fail("arity", a, "atom element out of range");
    if (!ctx->realized(p)) return fail("realized", a, type_id(p) + " is not in S_r(H)");
    std::set<int> d(a.begin(), a.end());
    if (static_cast<int>(d.size()) != r) return fail("distinct", a, "atom on a tuple with repeated elements");
    auto c = canonical_located(L, p, a);
    ch[c.support].insert(c.code);
  }
  std::vector<int> perm(r);
  for (auto& [A, codes] : ch)
    for (TypeCode q : codes) {
      std::iota(perm.begin(), perm.end(), 0);
      do {
        std::vector<int> a(r);
        for (int i = 0; i < r; ++i) a[i] = A[perm[i]];
        TypeCode p = permute_type(L, q, perm);
        if (!atoms.count({p, a}))
          return fail("coherence", A, "atom " + type_id(p) + " missing on a permuted enumeration");
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  Template T(ctx, raw.n);
  for (auto& [A, codes] : ch) T.set_choices(A, {codes.begin(), codes.end()});
  for (size_t i = 0; i < T.subset_count(); ++i)
    if (T.choices(i).empty()) {
      v.complete = false;
      if (v.subset.empty()) {
        auto s = subsets_colex(raw.n, r)[i];
        v.subset = s;
        v.axiom = "complete";
        v.message = "no choice on this subset";
      }
    }
  return {T, v};
}

// The raw structure of a canonical template: every enumeration of every choice
inline RawTemplate to_raw(const Template& T) {
  RawTemplate raw;
  raw.n = T.n();
  int r = T.r();
  auto subs = subsets_colex(T.n(), r);
  std::vector<int> perm(r);
  for (size_t i = 0; i < subs.size(); ++i)
    for (TypeCode q : T.choices(i)) {
      std::iota(perm.begin(), perm.end(), 0);
      do {
        std::vector<int> a(r);
        for (int k = 0; k < r; ++k) a[k] = subs[i][perm[k]];
        raw.atoms.push_back({permute_type(T.layout(), q, perm), a});
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  return raw;
}

}  // namespace hlab
