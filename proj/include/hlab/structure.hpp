#pragma once

#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "core.hpp"

namespace hlab {

struct Relation {
  std::string name;
  int arity = 1;
  bool operator==(const Relation&) const = default;
};

class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<Relation> rels) : rels_(std::move(rels)) {
    std::set<std::string> seen;
    for (auto& r : rels_) {
      if (r.arity < 1) throw std::invalid_argument("relation " + r.name + " has arity < 1");
      if (!seen.insert(r.name).second) throw std::invalid_argument("duplicate relation " + r.name);
    }
  }

  const std::vector<Relation>& relations() const { return rels_; }
  size_t size() const { return rels_.size(); }
  const Relation& operator[](size_t i) const { return rels_[i]; }

  int r() const {
    int m = 0;
    for (auto& x : rels_) m = std::max(m, x.arity);
    return m;
  }

  int index_of(const std::string& name) const {
    for (size_t i = 0; i < rels_.size(); ++i)
      if (rels_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  bool operator==(const Signature&) const = default;

 private:
  std::vector<Relation> rels_;
};

using SigRef = std::shared_ptr<const Signature>;

inline SigRef make_signature(std::vector<Relation> rels) {
  return std::make_shared<const Signature>(std::move(rels));
}

inline bool same_signature(const SigRef& a, const SigRef& b) { return a == b || *a == *b; }

inline uint64_t ipow(uint64_t b, int e) {
  uint64_t v = 1;
  while (e-- > 0) v *= b;
  return v;
}

// Domain is {1..n}; internally elements are 0-based. Facts of a relation of
// arity a live in a flat table indexed base-n (first coordinate most significant).
class Structure {
 public:
  Structure() = default;
  Structure(SigRef sig, int n) : sig_(std::move(sig)), n_(n) {
    if (n < 0) throw std::invalid_argument("negative domain size");
    tables_.resize(sig_->size());
    for (size_t i = 0; i < sig_->size(); ++i) tables_[i].assign(ipow(n, (*sig_)[i].arity), 0);
  }

  const SigRef& sig() const { return sig_; }
  const Signature& signature() const { return *sig_; }
  int n() const { return n_; }

  size_t index(int rel, const int* t) const {
    size_t idx = 0;
    for (int i = 0; i < (*sig_)[rel].arity; ++i) idx = idx * n_ + t[i];
    return idx;
  }

  bool holds(int rel, const int* t) const { return tables_[rel][index(rel, t)]; }
  bool holds(int rel, const std::vector<int>& t) const { return holds(rel, t.data()); }
  void set(int rel, const int* t, bool v) { tables_[rel][index(rel, t)] = v; }
  void set(int rel, const std::vector<int>& t, bool v = true) { set(rel, t.data(), v); }

  // 1-based tuple helpers used at the JSON boundary
  void add_tuple(int rel, const std::vector<int>& one_based) {
    if (static_cast<int>(one_based.size()) != (*sig_)[rel].arity)
      throw std::invalid_argument("tuple length does not match arity of " + (*sig_)[rel].name);
    std::vector<int> t(one_based.size());
    for (size_t i = 0; i < t.size(); ++i) {
      if (one_based[i] < 1 || one_based[i] > n_)
        throw std::invalid_argument("tuple entry out of range for " + (*sig_)[rel].name);
      t[i] = one_based[i] - 1;
    }
    set(rel, t, true);
  }

  std::vector<std::vector<int>> tuples(int rel) const {
    std::vector<std::vector<int>> out;
    int a = (*sig_)[rel].arity;
    const auto& tab = tables_[rel];
    for (size_t idx = 0; idx < tab.size(); ++idx) {
      if (!tab[idx]) continue;
      std::vector<int> t(a);
      size_t x = idx;
      for (int i = a - 1; i >= 0; --i) {
        t[i] = static_cast<int>(x % n_) + 1;
        x /= n_;
      }
      out.push_back(std::move(t));
    }
    return out;
  }

  const std::vector<uint8_t>& table(int rel) const { return tables_[rel]; }
  std::vector<uint8_t>& table(int rel) { return tables_[rel]; }

  size_t fact_count() const {
    size_t c = 0;
    for (auto& t : tables_) c += std::count(t.begin(), t.end(), 1);
    return c;
  }

  bool operator==(const Structure& o) const {
    return n_ == o.n_ && same_signature(sig_, o.sig_) && tables_ == o.tables_;
  }

 private:
  SigRef sig_;
  int n_ = 0;
  std::vector<std::vector<uint8_t>> tables_;
};

// Iterate all tuples in {0..n-1}^a, calling f(t)
template <class F>
void for_each_tuple(int n, int a, F&& f) {
  std::vector<int> t(a, 0);
  if (a == 0) {
    f(t);
    return;
  }
  if (n == 0) return;
  while (true) {
    f(t);
    int i = a - 1;
    while (i >= 0 && t[i] == n - 1) t[i--] = 0;
    if (i < 0) break;
    ++t[i];
  }
}

// elements given 0-based, sorted or not; result relabels A[i] -> i
inline Structure induced_on(const Structure& M, const std::vector<int>& A0) {
  Structure out(M.sig(), static_cast<int>(A0.size()));
  const auto& sig = M.signature();
  int m = static_cast<int>(A0.size());
  std::vector<int> img;
  for (size_t rel = 0; rel < sig.size(); ++rel) {
    int a = sig[rel].arity;
    img.resize(a);
    for_each_tuple(m, a, [&](const std::vector<int>& t) {
      for (int i = 0; i < a; ++i) img[i] = A0[t[i]];
      if (M.holds(static_cast<int>(rel), img.data())) out.set(static_cast<int>(rel), t.data(), true);
    });
  }
  return out;
}

inline void check_subset(const Structure& M, const std::vector<int>& A) {
  if (A.empty()) throw std::invalid_argument("empty subset");
  std::set<int> seen;
  for (int x : A) {
    if (x < 1 || x > M.n()) throw std::invalid_argument("subset element out of range");
    if (!seen.insert(x).second) throw std::invalid_argument("repeated subset element");
  }
}

// M[A] relabeled onto {1..|A|} by the order-preserving bijection; A is 1-based
inline Structure induced_substructure(const Structure& M, std::vector<int> A) {
  check_subset(M, A);
  std::sort(A.begin(), A.end());
  for (int& x : A) --x;
  return induced_on(M, A);
}

struct LabeledStructure {
  Structure structure;
  std::vector<int> labels;  // labels[i] is the original element carried by i+1
};

// M[A] keeping the original names of the elements of A
inline LabeledStructure induced_unrelabeled(const Structure& M, std::vector<int> A) {
  check_subset(M, A);
  std::sort(A.begin(), A.end());
  std::vector<int> A0(A);
  for (int& x : A0) --x;
  return {induced_on(M, A0), A};
}

enum class EmbedMode { induced, non_induced };

using Embedding = std::vector<int>;  // 0-based map dom(F) -> dom(M)

// Backtracking search for an injective map F -> M. Relations whose bit is set in
// `skip` are ignored; induced mode requires facts to agree, non-induced only that
// facts of F are present in M.
class EmbeddingSearch {
 public:
  EmbeddingSearch(const Structure& F, const Structure& M, EmbedMode mode, uint64_t skip = 0)
      : F_(F), M_(M), mode_(mode) {
    if (!same_signature(F.sig(), M.sig())) throw std::invalid_argument("signature mismatch");
    int s = F.n();
    // tuples of F grouped by the largest element they mention
    by_last_.assign(s, {});
    const auto& sig = F.signature();
    for (size_t rel = 0; rel < sig.size(); ++rel) {
      if (rel < 64 && (skip >> rel & 1)) continue;
      for_each_tuple(s, sig[rel].arity, [&](const std::vector<int>& t) {
        bool f = F.holds(static_cast<int>(rel), t.data());
        if (mode_ == EmbedMode::non_induced && !f) return;
        int last = *std::max_element(t.begin(), t.end());
        by_last_[last].push_back({static_cast<int>(rel), t, f});
      });
    }
  }

  std::optional<Embedding> find() {
    int s = F_.n();
    if (s > M_.n()) return std::nullopt;
    map_.assign(s, -1);
    used_.assign(M_.n(), 0);
    if (rec(0)) return map_;
    return std::nullopt;
  }

 private:
  struct Tup {
    int rel;
    std::vector<int> t;
    bool val;
  };

  bool rec(int i) {
    if (i == F_.n()) return true;
    for (int v = 0; v < M_.n(); ++v) {
      if (used_[v]) continue;
      map_[i] = v;
      if (consistent(i)) {
        used_[v] = 1;
        if (rec(i + 1)) return true;
        used_[v] = 0;
      }
    }
    map_[i] = -1;
    return false;
  }

  bool consistent(int i) {
    int buf[16];
    for (const auto& tp : by_last_[i]) {
      for (size_t j = 0; j < tp.t.size(); ++j) buf[j] = map_[tp.t[j]];
      bool m = M_.holds(tp.rel, buf);
      if (mode_ == EmbedMode::induced ? m != tp.val : !m) return false;
    }
    return true;
  }

  const Structure& F_;
  const Structure& M_;
  EmbedMode mode_;
  std::vector<std::vector<Tup>> by_last_;
  std::vector<int> map_;
  std::vector<uint8_t> used_;
};

inline std::optional<Embedding> find_embedding(const Structure& F, const Structure& M, EmbedMode mode,
                                               uint64_t skip = 0) {
  return EmbeddingSearch(F, M, mode, skip).find();
}

inline std::optional<Embedding> isomorphism(const Structure& M, const Structure& N) {
  if (!same_signature(M.sig(), N.sig())) throw std::invalid_argument("signature mismatch");
  if (M.n() != N.n() || M.fact_count() != N.fact_count()) return std::nullopt;
  return find_embedding(M, N, EmbedMode::induced);
}

inline bool is_isomorphic(const Structure& M, const Structure& N) { return isomorphism(M, N).has_value(); }

// all A (1-based, sorted) with M[A] isomorphic to B
inline std::vector<std::vector<int>> copies(const Structure& B, const Structure& M) {
  if (!same_signature(B.sig(), M.sig())) throw std::invalid_argument("signature mismatch");
  std::vector<std::vector<int>> out;
  if (B.n() > M.n()) return out;
  for (auto& A : subsets_colex(M.n(), B.n())) {
    std::vector<int> A0(A);
    for (int& x : A0) --x;
    if (is_isomorphic(induced_on(M, A0), B)) out.push_back(A);
  }
  return out;
}

inline Rational density(const Structure& B, const Structure& M) {
  if (B.n() > M.n()) return 0;
  return Rational(copies(B, M).size(), binom(M.n(), B.n()));
}

// union of copies over a family
inline std::vector<std::vector<int>> copies(const std::vector<Structure>& Bs, const Structure& M) {
  std::set<std::vector<int>> all;
  for (auto& B : Bs)
    for (auto& A : copies(B, M)) all.insert(A);
  return {all.begin(), all.end()};
}

inline Rational max_density(const std::vector<Structure>& Bs, const Structure& M) {
  Rational best = 0;
  for (auto& B : Bs) best = std::max(best, density(B, M));
  return best;
}

// lexicographically least fact string over all relabelings; small n only
inline std::vector<uint8_t> canonical_code(const Structure& M) {
  int n = M.n();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<uint8_t> best, cur;
  const auto& sig = M.signature();
  std::vector<int> img;
  do {
    cur.clear();
    for (size_t rel = 0; rel < sig.size(); ++rel) {
      int a = sig[rel].arity;
      img.resize(a);
      for_each_tuple(n, a, [&](const std::vector<int>& t) {
        for (int i = 0; i < a; ++i) img[i] = perm[t[i]];
        cur.push_back(M.holds(static_cast<int>(rel), img.data()));
      });
    }
    if (best.empty() || cur < best) best = cur;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Structure from_canonical_code(const SigRef& sig, int n, const std::vector<uint8_t>& code) {
  Structure M(sig, n);
  size_t pos = 0;
  for (size_t rel = 0; rel < sig->size(); ++rel)
    for_each_tuple(n, (*sig)[rel].arity, [&](const std::vector<int>& t) {
      if (code[pos++]) M.set(static_cast<int>(rel), t.data(), true);
    });
  return M;
}

}  // namespace hlab
