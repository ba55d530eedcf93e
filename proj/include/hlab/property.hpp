#pragma once

#include <functional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "types.hpp"

namespace hlab {

struct Forbidden {
  Structure structure;
  EmbedMode mode = EmbedMode::induced;
};

// Forb(F) for a finite family F. Relations flagged in `unconstrained` are
// ignored when looking for forbidden copies. `predicate` is an optional
// independent membership test supplied by instance constructors.
struct HereditaryProperty {
  std::string name;
  SigRef sig;
  std::vector<Forbidden> forbidden;
  EmbedMode mode = EmbedMode::induced;
  uint64_t unconstrained = 0;
  std::function<bool(const Structure&)> predicate;
  std::vector<std::string> warnings;

  int r() const { return sig->r(); }

  int k() const {
    int m = 0;
    for (auto& f : forbidden) m = std::max(m, f.structure.n());
    return m;
  }

  int min_forbidden_size() const {
    int m = 1 << 30;
    for (auto& f : forbidden) m = std::min(m, f.structure.n());
    return m;
  }

  void check_sig(const Structure& M) const {
    if (!same_signature(sig, M.sig())) throw std::invalid_argument("signature mismatch");
  }

  bool contains_copy(const Forbidden& f, const Structure& M) const {
    return find_embedding(f.structure, M, f.mode, unconstrained).has_value();
  }

  // M is F-free
  bool is_member(const Structure& M) const {
    check_sig(M);
    for (auto& f : forbidden)
      if (contains_copy(f, M)) return false;
    return true;
  }

  // some forbidden structure of size |N| maps onto all of N
  bool violates_exactly(const Structure& N) const {
    for (auto& f : forbidden)
      if (f.structure.n() == N.n() && contains_copy(f, N)) return true;
    return false;
  }

  // membership through the instance predicate when one exists
  bool member_direct(const Structure& M) const { return predicate ? predicate(M) : is_member(M); }
};

inline Structure empty_structure(const SigRef& sig, int n) { return Structure(sig, n); }

// Enumerates labeled structures on {1..m}. Atomic facts are grouped by their
// exact support set; supports are filled in increasing bitmask order, so every
// subset S is complete before any superset. After S is complete, ok(M[S], S) is
// asked and a false answer prunes the branch.
class StructureGenerator {
 public:
  using OkFn = std::function<bool(const Structure&, uint32_t)>;

  StructureGenerator(SigRef sig, int m, OkFn ok, uint64_t budget = 0)
      : sig_(std::move(sig)), m_(m), ok_(std::move(ok)), budget_(budget) {
    if (m > 20) throw std::invalid_argument("domain too large for enumeration");
    groups_.assign(size_t(1) << m, {});
    for (size_t rel = 0; rel < sig_->size(); ++rel) {
      Structure probe(sig_, m);
      for_each_tuple(m, (*sig_)[rel].arity, [&](const std::vector<int>& t) {
        uint32_t mask = 0;
        for (int x : t) mask |= 1u << x;
        groups_[mask].push_back({static_cast<int>(rel), probe.index(static_cast<int>(rel), t.data())});
      });
    }
  }

  uint64_t nodes() const { return nodes_; }

  // visit(M) returns false to stop early; returns false if stopped
  bool run(const std::function<bool(const Structure&)>& visit) {
    Structure M(sig_, m_);
    nodes_ = 0;
    stopped_ = false;
    if (m_ == 0) return visit(M);
    rec_mask(M, 1, visit);
    return !stopped_;
  }

 private:
  struct Fact {
    int rel;
    size_t idx;
  };

  void rec_mask(Structure& M, uint32_t mask, const std::function<bool(const Structure&)>& visit) {
    if (stopped_) return;
    uint32_t full = (1u << m_) - 1;
    if (mask > full) {
      if (!visit(M)) stopped_ = true;
      return;
    }
    const auto& g = groups_[mask];
    uint64_t combos = uint64_t(1) << g.size();
    std::vector<int> elems;
    for (int i = 0; i < m_; ++i)
      if (mask >> i & 1) elems.push_back(i);
    for (uint64_t c = 0; c < combos && !stopped_; ++c) {
      if (budget_ && ++nodes_ > budget_) throw BudgetExhausted("enumeration budget exhausted");
      for (size_t i = 0; i < g.size(); ++i) M.table(g[i].rel)[g[i].idx] = (c >> i) & 1;
      if (ok_(induced_on(M, elems), mask)) rec_mask(M, mask + 1, visit);
    }
    for (auto& f : g) M.table(f.rel)[f.idx] = 0;
  }

  SigRef sig_;
  int m_;
  OkFn ok_;
  uint64_t budget_;
  uint64_t nodes_ = 0;
  bool stopped_ = false;
  std::vector<std::vector<Fact>> groups_;
};

inline std::string structure_key(const Structure& M) {
  std::string key(1, static_cast<char>(M.n()));
  for (size_t rel = 0; rel < M.signature().size(); ++rel) {
    const auto& t = M.table(static_cast<int>(rel));
    key.append(t.begin(), t.end());
  }
  return key;
}

// memoized "no forbidden structure spans exactly this set"
class ExactCheck {
 public:
  explicit ExactCheck(const HereditaryProperty& H) : H_(H) {}
  bool operator()(const Structure& sub) {
    auto key = structure_key(sub);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool ok = !H_.violates_exactly(sub);
    memo_.emplace(std::move(key), ok);
    return ok;
  }

 private:
  const HereditaryProperty& H_;
  std::unordered_map<std::string, bool> memo_;
};

// labeled members of H on {1..n}, in generator order
inline void enumerate_members(const HereditaryProperty& H, int n, const std::function<bool(const Structure&)>& visit,
                              uint64_t budget = 0) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  ExactCheck check(H);
  StructureGenerator gen(
      H.sig, n, [&](const Structure& sub, uint32_t) { return check(sub); }, budget);
  gen.run(visit);
}

inline BigInt count_members(const HereditaryProperty& H, int n, uint64_t budget = 0) {
  BigInt c = 0;
  enumerate_members(
      H, n,
      [&](const Structure&) {
        ++c;
        return true;
      },
      budget);
  return c;
}

// S_r(H), as codes in increasing order, via the r-point realizing structures
inline std::vector<TypeCode> realized_type_space(const HereditaryProperty& H, const TypeLayout& L,
                                                 uint64_t budget = 50'000'000) {
  std::vector<TypeCode> out;
  std::vector<int> id(L.r());
  std::iota(id.begin(), id.end(), 0);
  enumerate_members(
      H, L.r(),
      [&](const Structure& M) {
        out.push_back(qftp0(L, M, id.data()));
        return true;
      },
      budget);
  std::sort(out.begin(), out.end());
  return out;
}

struct CanonicalSet {
  std::set<std::pair<int, std::vector<uint8_t>>> seen;
  std::vector<Structure> items;
  bool insert(const Structure& M) {
    if (!seen.insert({M.n(), canonical_code(M)}).second) return false;
    items.push_back(M);
    return true;
  }
};

// Minimal structures (up to isomorphism) of size <= max_size failing `pred`,
// all of whose proper substructures satisfy it. For a hereditary `pred`, the
// resulting family F has Forb(F) agreeing with pred on structures whose
// violations are witnessed by at most max_size points.
inline std::vector<Structure> minimal_forbidden(const SigRef& sig, const std::function<bool(const Structure&)>& pred,
                                                int max_size) {
  CanonicalSet found;
  for (int s = 1; s <= max_size; ++s) {
    uint32_t full = (1u << s) - 1;
    StructureGenerator gen(sig, s, [&](const Structure& sub, uint32_t mask) { return mask == full || pred(sub); });
    gen.run([&](const Structure& M) {
      if (!pred(M)) found.insert(M);
      return true;
    });
  }
  return found.items;
}

// cl_K(F): size-K structures (one per isomorphism class) containing a forbidden
// copy. With `realized_only`, structures are restricted to those whose r-point
// substructures all lie in H.
inline std::vector<Structure> closure(const HereditaryProperty& H, int K, bool realized_only = false,
                                      uint64_t budget = 50'000'000) {
  if (H.forbidden.empty()) throw std::invalid_argument("forbidden family is empty");
  if (K < H.k()) throw std::invalid_argument("K is smaller than the largest forbidden structure");
  int r = H.r();
  uint32_t full = (1u << K) - 1;
  CanonicalSet found;
  StructureGenerator gen(
      H.sig, K,
      [&](const Structure& sub, uint32_t mask) {
        if (!realized_only || mask == full || sub.n() > r) return true;
        return H.is_member(sub);
      },
      budget);
  gen.run([&](const Structure& M) {
    if (!H.is_member(M)) found.insert(M);
    return true;
  });
  return found.items;
}

}  // namespace hlab
