#pragma once

#include <bit>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "structure.hpp"

namespace hlab {

// Truth assignment over all atomic facts on r ordered variables. Fact j of the
// layout is bit j.
using TypeCode = uint64_t;

struct FactSlot {
  int rel;
  std::vector<int> vars;  // 0-based variable indices, length = arity
  uint32_t varmask;       // set of variables mentioned
};

class TypeLayout {
 public:
  TypeLayout(SigRef sig, int r) : sig_(std::move(sig)), r_(r) {
    if (r < 1) throw std::invalid_argument("type arity must be positive");
    for (size_t rel = 0; rel < sig_->size(); ++rel) {
      for_each_tuple(r, (*sig_)[rel].arity, [&](const std::vector<int>& t) {
        uint32_t m = 0;
        for (int v : t) m |= 1u << v;
        slots_.push_back({static_cast<int>(rel), t, m});
      });
    }
    if (slots_.size() > 64) throw std::invalid_argument("more than 64 atomic facts per type");
  }

  const SigRef& sig() const { return sig_; }
  int r() const { return r_; }
  int fact_count() const { return static_cast<int>(slots_.size()); }
  const std::vector<FactSlot>& slots() const { return slots_; }
  const FactSlot& slot(int j) const { return slots_[j]; }

  TypeCode full_mask() const {
    return slots_.size() == 64 ? ~0ull : ((1ull << slots_.size()) - 1);
  }

  // bits of facts whose variables all lie in the given variable set
  TypeCode mask_within(uint32_t vars) const {
    TypeCode m = 0;
    for (size_t j = 0; j < slots_.size(); ++j)
      if ((slots_[j].varmask & ~vars) == 0) m |= 1ull << j;
    return m;
  }

  // bits of facts belonging to relations outside `skip`
  TypeCode constrained_mask(uint64_t skip) const {
    TypeCode m = 0;
    for (size_t j = 0; j < slots_.size(); ++j)
      if (!(skip >> slots_[j].rel & 1)) m |= 1ull << j;
    return m;
  }

  int slot_of(int rel, const std::vector<int>& vars) const {
    for (size_t j = 0; j < slots_.size(); ++j)
      if (slots_[j].rel == rel && slots_[j].vars == vars) return static_cast<int>(j);
    return -1;
  }

  std::string fact_name(int j) const {
    const auto& s = slots_[j];
    std::string out = (*sig_)[s.rel].name + "(";
    for (size_t i = 0; i < s.vars.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(s.vars[i] + 1);
    }
    return out + ")";
  }

 private:
  SigRef sig_;
  int r_;
  std::vector<FactSlot> slots_;
};

using LayoutRef = std::shared_ptr<const TypeLayout>;

inline LayoutRef make_layout(const SigRef& sig, int r = -1) {
  return std::make_shared<const TypeLayout>(sig, r < 0 ? sig->r() : r);
}

inline std::string type_id(TypeCode c) { return "t" + std::to_string(c); }

inline TypeCode parse_type_id(const std::string& s) {
  if (s.size() < 2 || s[0] != 't') throw std::invalid_argument("bad type id: " + s);
  size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s.substr(1), &pos);
  } catch (...) {
    throw std::invalid_argument("bad type id: " + s);
  }
  if (pos != s.size() - 1) throw std::invalid_argument("bad type id: " + s);
  return v;
}

// qftp of the tuple a (0-based, distinct) in M
inline TypeCode qftp0(const TypeLayout& L, const Structure& M, const int* a) {
  TypeCode c = 0;
  int buf[16];
  for (int j = 0; j < L.fact_count(); ++j) {
    const auto& s = L.slot(j);
    for (size_t i = 0; i < s.vars.size(); ++i) buf[i] = a[s.vars[i]];
    if (M.holds(s.rel, buf)) c |= 1ull << j;
  }
  return c;
}

inline TypeCode qftp(const TypeLayout& L, const Structure& M, const std::vector<int>& a) {
  if (static_cast<int>(a.size()) != L.r()) throw std::invalid_argument("tuple length differs from r");
  std::vector<int> a0(a);
  for (int& x : a0) {
    if (x < 1 || x > M.n()) throw std::invalid_argument("tuple element out of range");
    --x;
  }
  for (size_t i = 0; i < a0.size(); ++i)
    for (size_t j = i + 1; j < a0.size(); ++j)
      if (a0[i] == a0[j]) throw std::invalid_argument("qftp needs distinct elements");
  return qftp0(L, M, a0.data());
}

// the unique structure on {1..r} realizing p by the identity tuple
inline Structure realize(const TypeLayout& L, TypeCode p) {
  Structure M(L.sig(), L.r());
  for (int j = 0; j < L.fact_count(); ++j)
    if (p >> j & 1) M.set(L.slot(j).rel, L.slot(j).vars.data(), true);
  return M;
}

// S_r(L): every assignment of the atomic facts; listed in increasing code order
inline std::vector<TypeCode> type_space(const TypeLayout& L, int max_bits = 24) {
  if (L.fact_count() > max_bits)
    throw BudgetExhausted("type space has 2^" + std::to_string(L.fact_count()) + " elements");
  std::vector<TypeCode> out(size_t(1) << L.fact_count());
  for (size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

inline BigInt type_space_size(const TypeLayout& L) { return big_pow(2, L.fact_count()); }

// Code of p after renaming variables: result(x_1..x_r) = p(x_{perm[0]}, ...), i.e.
// fact R(x_{i1},...) in the result reads fact R(x_{perm[i1]},...) of p.
inline TypeCode permute_type(const TypeLayout& L, TypeCode p, const std::vector<int>& perm) {
  TypeCode q = 0;
  std::vector<int> v;
  for (int j = 0; j < L.fact_count(); ++j) {
    const auto& s = L.slot(j);
    v.resize(s.vars.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = perm[s.vars[i]];
    int k = L.slot_of(s.rel, v);
    if (p >> k & 1) q |= 1ull << j;
  }
  return q;
}

struct LocatedType {
  TypeCode code = 0;
  std::vector<int> support;  // sorted, 1-based; variable x_i is bound to support[i]
  bool operator==(const LocatedType&) const = default;
  bool operator<(const LocatedType& o) const {
    size_t a = colex_rank(support), b = colex_rank(o.support);
    if (support.size() != o.support.size()) return support.size() < o.support.size();
    if (a != b) return a < b;
    return code < o.code;
  }
};

// Convert p(c_{a_1},...,c_{a_r}) for an arbitrary enumeration into sorted form.
inline LocatedType canonical_located(const TypeLayout& L, TypeCode p, const std::vector<int>& enumeration) {
  int r = L.r();
  std::vector<int> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return enumeration[x] < enumeration[y]; });
  for (int i = 1; i < r; ++i)
    if (enumeration[order[i]] == enumeration[order[i - 1]])
      throw std::invalid_argument("enumeration has repeated elements");
  LocatedType out;
  out.support.resize(r);
  for (int i = 0; i < r; ++i) out.support[i] = enumeration[order[i]];
  // sorted variable i corresponds to original variable order[i]
  out.code = permute_type(L, p, order);
  return out;
}

// Diag^M(A)
inline LocatedType diagram(const TypeLayout& L, const Structure& M, std::vector<int> A) {
  if (static_cast<int>(A.size()) != L.r()) throw std::invalid_argument("diagram needs |A| = r");
  std::sort(A.begin(), A.end());
  return {qftp(L, M, A), A};
}

using SyntacticDiagram = std::vector<LocatedType>;

inline void normalize(SyntacticDiagram& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

// Diag^tp(M): one entry per r-subset, in colex order
inline SyntacticDiagram type_diagram(const TypeLayout& L, const Structure& M) {
  SyntacticDiagram out;
  for (auto& A : subsets_colex(M.n(), L.r())) out.push_back({qftp(L, M, A), A});
  return out;
}

inline std::vector<int> support_of(const SyntacticDiagram& s) {
  std::set<int> v;
  for (auto& e : s) v.insert(e.support.begin(), e.support.end());
  return {v.begin(), v.end()};
}

// true iff s has exactly one entry for each r-subset of its support
inline bool is_type_diagram(const TypeLayout& L, const SyntacticDiagram& s) {
  auto V = support_of(s);
  if (s.size() != binom(static_cast<int>(V.size()), L.r())) return false;
  std::set<std::vector<int>> seen;
  for (auto& e : s)
    if (!seen.insert(e.support).second) return false;
  return true;
}

// Merges located types into a fact table over the support; reports the first clash.
class FactMerger {
 public:
  FactMerger(const TypeLayout& L, int n) : L_(L), n_(n) {
    const auto& sig = *L.sig();
    offset_.resize(sig.size() + 1, 0);
    for (size_t i = 0; i < sig.size(); ++i) offset_[i + 1] = offset_[i] + ipow(n, sig[i].arity);
    val_.assign(offset_.back(), -1);
  }

  void clear() { std::fill(val_.begin(), val_.end(), -1); }

  size_t global(int j, const int* a0) const {
    const auto& s = L_.slot(j);
    size_t idx = 0;
    for (int v : s.vars) idx = idx * n_ + a0[v];
    return offset_[s.rel] + idx;
  }

  // a0: 0-based elements bound to x_1..x_r
  bool add(TypeCode p, const int* a0) {
    for (int j = 0; j < L_.fact_count(); ++j) {
      size_t g = global(j, a0);
      int8_t b = (p >> j) & 1;
      if (val_[g] < 0)
        val_[g] = b;
      else if (val_[g] != b)
        return false;
    }
    return true;
  }

  Structure to_structure() const {
    Structure M(L_.sig(), n_);
    const auto& sig = *L_.sig();
    for (size_t rel = 0; rel < sig.size(); ++rel) {
      auto& tab = M.table(static_cast<int>(rel));
      for (size_t i = 0; i < tab.size(); ++i) tab[i] = val_[offset_[rel] + i] == 1;
    }
    return M;
  }

 private:
  const TypeLayout& L_;
  int n_;
  std::vector<size_t> offset_;
  std::vector<int8_t> val_;
};

// Witness structure on {1..|V(s)|} (elements relabeled in increasing order), or
// nothing when two entries assign opposite values to one atomic fact.
inline std::optional<Structure> satisfy(const TypeLayout& L, const SyntacticDiagram& s) {
  auto V = support_of(s);
  std::map<int, int> pos;
  for (size_t i = 0; i < V.size(); ++i) pos[V[i]] = static_cast<int>(i);
  FactMerger mg(L, static_cast<int>(V.size()));
  std::vector<int> a0(L.r());
  for (auto& e : s) {
    for (int i = 0; i < L.r(); ++i) a0[i] = pos[e.support[i]];
    if (!mg.add(e.code, a0.data())) return std::nullopt;
  }
  return mg.to_structure();
}

inline bool is_satisfiable(const TypeLayout& L, const SyntacticDiagram& s) {
  if (!is_type_diagram(L, s)) throw std::invalid_argument("not a syntactic type diagram");
  return satisfy(L, s).has_value();
}

// membership in Err_ell; the empty diagram is never an error
inline bool is_error(const TypeLayout& L, const SyntacticDiagram& s, int ell) {
  if (s.empty()) return false;
  if (!is_type_diagram(L, s) || static_cast<int>(support_of(s).size()) != ell)
    throw std::invalid_argument("not a syntactic diagram of the requested size");
  return !satisfy(L, s).has_value();
}

// All syntactic type diagrams contained in sigma whose support has at least
// min_support elements (defaults to r). The empty diagram is added on request.
inline std::vector<SyntacticDiagram> span(const TypeLayout& L, const std::vector<LocatedType>& sigma,
                                          int min_support = -1, bool include_empty = false) {
  int r = L.r();
  if (min_support < 0) min_support = r;
  std::map<std::vector<int>, std::vector<LocatedType>> ch;
  for (auto& e : sigma) ch[e.support].push_back(e);
  for (auto& [k, v] : ch) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  std::vector<int> U;
  {
    std::set<int> u;
    for (auto& e : sigma) u.insert(e.support.begin(), e.support.end());
    U.assign(u.begin(), u.end());
  }
  std::vector<SyntacticDiagram> out;
  if (include_empty) out.push_back({});
  int m = static_cast<int>(U.size());
  for (int size = std::max(min_support, r); size <= m; ++size) {
    for (auto& idx : subsets_colex(m, size)) {
      std::vector<int> V;
      for (int i : idx) V.push_back(U[i - 1]);
      std::vector<const std::vector<LocatedType>*> lists;
      bool complete = true;
      for (auto& ai : subsets_colex(size, r)) {
        std::vector<int> A;
        for (int i : ai) A.push_back(V[i - 1]);
        auto it = ch.find(A);
        if (it == ch.end()) {
          complete = false;
          break;
        }
        lists.push_back(&it->second);
      }
      if (!complete) continue;
      std::vector<size_t> odo(lists.size(), 0);
      while (true) {
        SyntacticDiagram d;
        for (size_t i = 0; i < lists.size(); ++i) d.push_back((*lists[i])[odo[i]]);
        out.push_back(std::move(d));
        int i = static_cast<int>(lists.size()) - 1;
        while (i >= 0 && ++odo[i] == lists[i]->size()) odo[i--] = 0;
        if (i < 0) break;
      }
    }
  }
  return out;
}

}  // namespace hlab
