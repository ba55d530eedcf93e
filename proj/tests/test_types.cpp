#include <gtest/gtest.h>

#include <random>

#include "hlab/instances.hpp"

using namespace hlab;

namespace {

LocatedType at(TypeCode p, std::vector<int> A) { return {p, std::move(A)}; }

// all 2^facts structures on m points
template <class F>
void all_structures(const SigRef& sig, int m, F&& f) {
  size_t facts = 0;
  for (auto& rel : sig->relations()) facts += ipow(m, rel.arity);
  for (uint64_t code = 0; code < (uint64_t(1) << facts); ++code) {
    Structure M(sig, m);
    size_t b = 0;
    for (size_t rel = 0; rel < sig->size(); ++rel)
      for (auto& v : M.table(static_cast<int>(rel))) v = code >> b++ & 1;
    f(M);
  }
}

}  // namespace

TEST(Qftp, EmptyGraphGivesZeroType) {
  auto sig = make_signature({{"E", 2}});
  auto L = make_layout(sig);
  Structure M(sig, 4);
  EXPECT_EQ(qftp(*L, M, {3, 1}), 0u);
  EXPECT_THROW(qftp(*L, M, {2, 2}), std::invalid_argument);
  EXPECT_THROW(qftp(*L, M, {1, 2, 3}), std::invalid_argument);
}

TEST(Qftp, MetricDistanceOne) {
  auto mi = metric_instance(3);
  auto M = metric_structure(mi.H->sig, 3, {1, 2, 3});
  EXPECT_EQ(qftp(*mi.ctx->L, M, {1, 2}), mi.p[0]);
  EXPECT_EQ(qftp(*mi.ctx->L, M, {2, 1}), mi.p[0]);
}

TEST(Qftp, ErrorexRealizesQ1) {
  auto ei = errorex_instance();
  Structure G(ei.H->sig, 3);
  for_each_tuple(3, 3, [&](const std::vector<int>& t) { G.set(0, t, true); });
  for (auto& pr : subsets_colex(3, 2)) {
    G.add_tuple(1, pr);
    G.add_tuple(1, {pr[1], pr[0]});
  }
  EXPECT_EQ(qftp(*ei.ctx->L, G, {1, 2, 3}), ei.q1);
}

TEST(TypeSpace, Sizes) {
  auto g = make_layout(make_signature({{"E", 2}}));
  EXPECT_EQ(type_space(*g).size(), 16u);
  auto m = make_layout(metric_signature(3));
  EXPECT_EQ(type_space(*m).size(), 4096u);
  EXPECT_EQ(type_space_size(*m), 4096);
  auto ts = type_space(*g);
  EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end()));
  EXPECT_EQ(type_id(ts[5]), "t5");
  EXPECT_EQ(parse_type_id("t5"), 5u);
  EXPECT_THROW(parse_type_id("x5"), std::invalid_argument);
  EXPECT_THROW(parse_type_id("t5a"), std::invalid_argument);
  EXPECT_EQ(g->fact_name(0), "E(1,1)");
  EXPECT_EQ(g->fact_name(1), "E(1,2)");
}

TEST(RealizedTypeSpace, Instances) {
  auto mi = metric_instance(3);
  std::vector<TypeCode> want(mi.p);
  std::sort(want.begin(), want.end());
  EXPECT_EQ(mi.ctx->S, want);

  auto di = digraph_instance(2);
  want = {di.p1, di.p2, di.p3, di.p4};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(di.ctx->S, want);

  auto ti = triples_instance();
  want = {ti.p1, ti.p2};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(ti.ctx->S, want);
}

TEST(RealizedTypeSpace, RealizedIffRealizingStructureIsMember) {
  for (auto H : {metric_property(3), digraph_property(2)}) {
    auto ctx = make_context(H);
    const auto& L = *ctx->L;
    all_structures(H.sig, L.r(), [&](const Structure& M) {
      TypeCode p = type_of(L, M);
      EXPECT_EQ(ctx->realized(p), H.member_direct(M));
      EXPECT_EQ(realize(L, p), M);
    });
  }
  // 54 facts: sample instead
  auto ei = errorex_instance();
  std::mt19937 rng(1);
  int members = 0;
  for (int it = 0; it < 3000; ++it) {
    auto M = it % 2 ? random_structure(ei.H->sig, 3, rng) : random_errorex_member(ei, 3, rng);
    TypeCode p = type_of(*ei.ctx->L, M);
    bool in = ei.H->member_direct(M);
    members += in;
    EXPECT_EQ(ei.ctx->realized(p), in);
  }
  EXPECT_GT(members, 1000);
}

TEST(Diagram, MetricExample) {
  auto mi = metric_instance(3);
  const auto& L = *mi.ctx->L;
  auto M = metric_structure(mi.H->sig, 3, {1, 2, 3});  // colex pairs 12, 13, 23
  auto D = type_diagram(L, M);
  SyntacticDiagram want{at(mi.p[0], {1, 2}), at(mi.p[1], {1, 3}), at(mi.p[2], {2, 3})};
  EXPECT_EQ(D, want);
  EXPECT_EQ(diagram(L, M, {3, 1}), at(mi.p[1], {1, 3}));
  EXPECT_THROW(diagram(L, M, {1}), std::invalid_argument);
}

TEST(Diagram, RoundTripThroughSatisfy) {
  std::mt19937 rng(17);
  auto sig = make_signature({{"E", 3}, {"R", 2}, {"U", 1}});
  auto L = make_layout(sig);
  for (int n = 3; n <= 5; ++n)
    for (int it = 0; it < 20; ++it) {
      auto M = random_structure(sig, n, rng);
      auto D = type_diagram(*L, M);
      EXPECT_EQ(D.size(), binom(n, 3));
      EXPECT_TRUE(is_type_diagram(*L, D));
      EXPECT_TRUE(is_satisfiable(*L, D));
      auto W = satisfy(*L, D);
      ASSERT_TRUE(W);
      EXPECT_EQ(*W, M);
      for (auto& A : subsets_colex(n, 3)) EXPECT_EQ(diagram(*L, M, A).code, qftp(*L, M, A));
    }
}

TEST(Satisfiable, ErrorexSizeFourError) {
  auto ei = errorex_instance();
  const auto& L = *ei.ctx->L;
  SyntacticDiagram s{at(ei.q1, {2, 3, 4}), at(ei.q2, {1, 2, 3}), at(ei.q1, {1, 3, 4}), at(ei.q1, {1, 2, 4})};
  EXPECT_FALSE(is_satisfiable(L, s));
  EXPECT_TRUE(is_error(L, s, 4));
  s[1] = at(ei.q1, {1, 2, 3});
  EXPECT_TRUE(is_satisfiable(L, s));
  EXPECT_THROW(is_error(L, s, 5), std::invalid_argument);
  EXPECT_FALSE(is_error(L, {}, 0));
  EXPECT_THROW(is_satisfiable(L, {at(ei.q1, {1, 2, 3}), at(ei.q1, {1, 2, 4})}), std::invalid_argument);
}

TEST(Satisfiable, SingleArityDiagramsNeverClash) {
  auto ti = triples_instance();
  const auto& L = *ti.ctx->L;
  TypeCode t[2] = {ti.p1, ti.p2};
  for (int ell = 3; ell <= 4; ++ell) {
    auto subs = subsets_colex(ell, 3);
    for (uint32_t m = 0; m < (1u << subs.size()); ++m) {
      SyntacticDiagram s;
      for (size_t i = 0; i < subs.size(); ++i) s.push_back(at(t[m >> i & 1], subs[i]));
      EXPECT_TRUE(is_satisfiable(L, s));
    }
  }
}

TEST(Span, MetricExample) {
  auto mi = metric_instance(3);
  const auto& L = *mi.ctx->L;
  auto p = mi.p;
  std::vector<LocatedType> sigma{at(p[0], {1, 2}), at(p[1], {1, 2}), at(p[2], {1, 2}), at(p[0], {2, 3}),
                                 at(p[0], {1, 3})};
  auto sp = span(L, sigma, 3);
  ASSERT_EQ(sp.size(), 3u);
  std::set<TypeCode> on12;
  for (auto& d : sp) {
    EXPECT_EQ(support_of(d), (std::vector<int>{1, 2, 3}));
    for (auto& e : d)
      if (e.support == std::vector<int>{1, 2}) on12.insert(e.code);
  }
  EXPECT_EQ(on12.size(), 3u);
  // all three are consistent; only two also satisfy the triangle inequality
  int sat = 0;
  for (auto& d : sp) {
    auto W = satisfy(L, d);
    ASSERT_TRUE(W);
    sat += mi.H->member_direct(*W);
  }
  EXPECT_EQ(sat, 2);
}

TEST(Span, OfTypeDiagramIsOnePerSubset) {
  auto sig = make_signature({{"E", 2}});
  auto L = make_layout(sig);
  std::mt19937 rng(2);
  for (int n = 2; n <= 4; ++n) {
    auto M = random_structure(sig, n, rng);
    auto D = type_diagram(*L, M);
    auto sp = span(*L, D, -1, true);
    size_t want = 1;
    for (int s = 2; s <= n; ++s) want += binom(n, s);
    EXPECT_EQ(sp.size(), want);
    EXPECT_TRUE(sp.front().empty());
  }
}

TEST(Span, MissingChoiceBlocksFullSupport) {
  auto mi = metric_instance(3);
  std::vector<LocatedType> sigma{at(mi.p[0], {1, 2}), at(mi.p[0], {2, 3})};
  for (auto& d : span(*mi.ctx->L, sigma)) EXPECT_LT(support_of(d).size(), 3u);
}

TEST(Canonical, PermutedEnumerationNormalizes) {
  auto di = digraph_instance(2);
  const auto& L = *di.ctx->L;
  auto c = canonical_located(L, di.p1, {5, 2});  // arc 5 -> 2
  EXPECT_EQ(c.support, (std::vector<int>{2, 5}));
  EXPECT_EQ(c.code, di.p2);
  EXPECT_THROW(canonical_located(L, di.p1, {2, 2}), std::invalid_argument);
}
