#pragma once

#include <vector>

#include "template.hpp"

namespace hlab {

inline void check_same_domain(const Structure& M, const Structure& N) {
  if (!same_signature(M.sig(), N.sig())) throw std::invalid_argument("signature mismatch");
  if (M.n() != N.n()) throw std::invalid_argument("domain mismatch");
}

// r-subsets on which the two structures have different diagrams
inline std::vector<std::vector<int>> diff(const TypeLayout& L, const Structure& M, const Structure& N) {
  check_same_domain(M, N);
  if (M.n() < L.r()) throw std::invalid_argument("domain smaller than r");
  std::vector<std::vector<int>> out;
  for (auto& A : subsets_colex(M.n(), L.r())) {
    std::vector<int> a0(A);
    for (int& x : a0) --x;
    if (qftp0(L, M, a0.data()) != qftp0(L, N, a0.data())) out.push_back(A);
  }
  return out;
}

inline Rational dist(const TypeLayout& L, const Structure& M, const Structure& N) {
  return Rational(diff(L, M, N).size(), binom(M.n(), L.r()));
}

struct IndexEntry {
  int rel;
  std::vector<int> rgs;  // part label of each argument position, first occurrence order
  int parts;
};

// relations in signature order, partitions in restricted-growth-string order
inline std::vector<IndexEntry> index_entries(const Signature& sig) {
  std::vector<IndexEntry> out;
  for (size_t rel = 0; rel < sig.size(); ++rel)
    for (auto& p : set_partitions(sig[rel].arity))
      out.push_back({static_cast<int>(rel), p, *std::max_element(p.begin(), p.end()) + 1});
  return out;
}

// |DH_p^R(M) symmetric-difference DH_p^R(N)| for one index entry
inline uint64_t dh_difference(const IndexEntry& e, const Structure& M, const Structure& N) {
  int n = M.n();
  uint64_t count = 0;
  std::vector<int> full(e.rgs.size());
  for_each_tuple(n, e.parts, [&](const std::vector<int>& a) {
    for (int i = 0; i < e.parts; ++i)
      for (int j = i + 1; j < e.parts; ++j)
        if (a[i] == a[j]) return;
    for (size_t i = 0; i < e.rgs.size(); ++i) full[i] = a[e.rgs[i]];
    if (M.holds(e.rel, full.data()) != N.holds(e.rel, full.data())) ++count;
  });
  return count;
}

// sum over Index of |DH(M) xor DH(N)| / n^{||p||}
inline Rational ac_distance(const Structure& M, const Structure& N) {
  check_same_domain(M, N);
  Rational d = 0;
  for (auto& e : index_entries(M.signature())) {
    uint64_t c = dh_difference(e, M, N);
    if (c) d += Rational(c, ipow(M.n(), e.parts));
  }
  return d;
}

inline Rational distlem_factor(int r) {
  BigInt f = factorial(r);
  return Rational(f * f * (BigInt(1) << r));
}

struct BoundCheck {
  Rational dist, d, lhs, rhs;
  bool holds = false;
};

// dist(M,N) <= (r!)^2 2^r d(M,N)
inline BoundCheck check_distance_bound(const TypeLayout& L, const Structure& M, const Structure& N) {
  BoundCheck b;
  b.dist = dist(L, M, N);
  b.d = ac_distance(M, N);
  b.lhs = b.dist;
  b.rhs = distlem_factor(L.r()) * b.d;
  b.holds = b.lhs <= b.rhs;
  return b;
}

inline void check_same_template_space(const Template& A, const Template& B) {
  if (A.ctx() != B.ctx() && A.ctx()->H->name != B.ctx()->H->name)
    throw std::invalid_argument("templates belong to different properties");
  if (!same_signature(A.ctx()->H->sig, B.ctx()->H->sig)) throw std::invalid_argument("signature mismatch");
  if (A.n() != B.n()) throw std::invalid_argument("templates have different n");
}

inline std::vector<std::vector<int>> template_diff(const Template& A, const Template& B) {
  check_same_template_space(A, B);
  std::vector<std::vector<int>> out;
  auto subs = subsets_colex(A.n(), A.r());
  for (size_t i = 0; i < subs.size(); ++i)
    if (A.choices(i) != B.choices(i)) out.push_back(subs[i]);
  return out;
}

inline Rational template_dist(const Template& A, const Template& B) {
  return Rational(template_diff(A, B).size(), binom(A.n(), A.r()));
}

// G is a full subpattern of T
inline bool is_subpattern(const Template& T, const Structure& G) {
  if (G.n() != T.n()) return false;
  Geometry Gm(T.layout(), T.n());
  for (size_t i = 0; i < Gm.subsets.size(); ++i) {
    TypeCode p = qftp0(T.layout(), G, Gm.subsets[i].data());
    if (!std::binary_search(T.choices(i).begin(), T.choices(i).end(), p)) return false;
  }
  return true;
}

// Given G a full subpattern of C and an H-random D, keep G's diagram where the
// choice sets agree and take the least type of D elsewhere.
inline Structure transfer_subpattern(const Template& C, const Structure& G, const Template& D) {
  check_same_template_space(C, D);
  if (!is_subpattern(C, G)) throw std::invalid_argument("G is not a full subpattern of C");
  if (!is_h_random(D)) throw std::invalid_argument("D is not H-random");
  Geometry Gm(C.layout(), C.n());
  std::vector<TypeCode> chi(Gm.subsets.size());
  for (size_t i = 0; i < chi.size(); ++i) {
    if (C.choices(i) == D.choices(i))
      chi[i] = qftp0(C.layout(), G, Gm.subsets[i].data());
    else
      chi[i] = D.choices(i).front();
  }
  auto out = merge_choice(C.layout(), Gm, chi);
  if (!out) throw std::logic_error("merge failed on an H-random template");
  if (!C.ctx()->H->member_direct(*out)) throw std::logic_error("transferred structure is not in H");
  if (dist(C.layout(), G, *out) > template_dist(C, D)) throw std::logic_error("transfer moved too far");
  return *out;
}

struct ClosenessReport {
  BigInt lhs, rhs;
  size_t diff_size = 0;
  bool holds = false;
};

// sub(C) <= sub(C') |S_r(H)|^{|diff(C,C')|}
inline ClosenessReport closeness_inequality_check(const Template& C, const Template& Cp) {
  check_same_template_space(C, Cp);
  if (!is_error_free(Cp)) throw std::invalid_argument("C' is not error-free");
  if (!C.ctx()->enumerable) throw std::invalid_argument("S_r(H) is too large to count");
  ClosenessReport rep;
  rep.diff_size = template_diff(C, Cp).size();
  rep.lhs = sub_count(C).count;
  rep.rhs = sub_count(Cp).count * big_pow(C.ctx()->S.size(), rep.diff_size);
  rep.holds = rep.lhs <= rep.rhs;
  return rep;
}

// smallest number of r-subsets on which G must change to become a full
// subpattern of T (exact for H-random T, where any choice merges into H)
inline size_t distance_to_subpatterns(const Template& T, const Structure& G) {
  Geometry Gm(T.layout(), T.n());
  size_t c = 0;
  for (size_t i = 0; i < Gm.subsets.size(); ++i) {
    TypeCode p = qftp0(T.layout(), G, Gm.subsets[i].data());
    if (!std::binary_search(T.choices(i).begin(), T.choices(i).end(), p)) ++c;
  }
  return c;
}

}  // namespace hlab
