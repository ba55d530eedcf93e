#include <gtest/gtest.h>

#include <random>

#include "hlab/instances.hpp"

using namespace hlab;

namespace {

// r-subsets whose induced substructures differ, without going through types
size_t diff_brute(const Structure& M, const Structure& N, int r) {
  size_t c = 0;
  for (auto& A : subsets_colex(M.n(), r)) c += !(induced_substructure(M, A) == induced_substructure(N, A));
  return c;
}

// every differing tuple t contributes n^{-(number of distinct entries of t)}
Rational ac_brute(const Structure& M, const Structure& N) {
  Rational d = 0;
  for (size_t rel = 0; rel < M.signature().size(); ++rel)
    for_each_tuple(M.n(), M.signature()[rel].arity, [&](const std::vector<int>& t) {
      if (M.holds(static_cast<int>(rel), t) == N.holds(static_cast<int>(rel), t)) return;
      std::set<int> distinct(t.begin(), t.end());
      d += Rational(1, ipow(M.n(), static_cast<int>(distinct.size())));
    });
  return d;
}

Structure perturb(Structure M, std::mt19937& rng, int flips) {
  for (int f = 0; f < flips; ++f) {
    int rel = static_cast<int>(rng() % M.signature().size());
    auto& tab = M.table(rel);
    tab[rng() % tab.size()] ^= 1;
  }
  return M;
}

}  // namespace

TEST(Dist, SelfIsZeroAndSymmetric) {
  std::mt19937 rng(21);
  auto sig = make_signature({{"E", 2}, {"U", 1}});
  auto L = make_layout(sig);
  for (int it = 0; it < 30; ++it) {
    auto M = random_structure(sig, 5, rng);
    auto N = perturb(M, rng, 3);
    EXPECT_EQ(dist(*L, M, M), 0);
    EXPECT_EQ(ac_distance(M, M), 0);
    EXPECT_EQ(dist(*L, M, N), dist(*L, N, M));
    EXPECT_EQ(ac_distance(M, N), ac_distance(N, M));
  }
}

TEST(Dist, SingleArcExample) {
  auto sig = make_signature({{"E", 2}});
  auto L = make_layout(sig);
  Structure M(sig, 4), N(sig, 4);
  N.add_tuple(0, {1, 2});
  EXPECT_EQ(diff(*L, M, N), (std::vector<std::vector<int>>{{1, 2}}));
  EXPECT_EQ(dist(*L, M, N), Rational(1, 6));
  EXPECT_EQ(ac_distance(M, N), Rational(1, 16));
  N.add_tuple(0, {3, 3});
  EXPECT_EQ(ac_distance(M, N), Rational(1, 16) + Rational(1, 4));
  auto b = check_distance_bound(*L, M, N);
  EXPECT_TRUE(b.holds);
  EXPECT_EQ(b.rhs, 16 * b.d);
}

TEST(Dist, Errors) {
  auto sig = make_signature({{"E", 2}});
  auto L = make_layout(sig);
  EXPECT_THROW(dist(*L, Structure(sig, 3), Structure(sig, 4)), std::invalid_argument);
  EXPECT_THROW(ac_distance(Structure(sig, 3), Structure(make_signature({{"F", 2}}), 3)), std::invalid_argument);
  EXPECT_THROW(dist(*L, Structure(sig, 1), Structure(sig, 1)), std::invalid_argument);
}

TEST(Dist, AgreesWithBruteForceAndBoundHolds) {
  std::mt19937 rng(33);
  std::vector<SigRef> sigs{make_signature({{"E", 2}}), metric_signature(3), make_signature({{"E", 3}}),
                           errorex_property().sig, make_signature({{"E", 3}, {"R", 2}, {"U", 1}})};
  for (auto& sig : sigs) {
    auto L = make_layout(sig);
    int r = L->r();
    for (int it = 0; it < 60; ++it) {
      int n = 2 * r + it % 2;
      auto M = random_structure(sig, n, rng, 0.4);
      auto N = it % 3 ? perturb(M, rng, 1 + it % 5) : random_structure(sig, n, rng, 0.4);
      EXPECT_EQ(dist(*L, M, N), Rational(diff_brute(M, N, r), binom(n, r)));
      EXPECT_EQ(ac_distance(M, N), ac_brute(M, N));
      EXPECT_TRUE(check_distance_bound(*L, M, N).holds);
    }
  }
  EXPECT_EQ(distlem_factor(3), Rational(36 * 8));
}

TEST(TemplateDist, OddMetricExtremalsDifferOnMatchings) {
  auto mi = metric_instance(3);
  auto ext = search_extremal(mi.ctx, 4);
  ASSERT_EQ(ext.templates.size(), 3u);
  for (auto& A : ext.templates)
    for (auto& B : ext.templates) {
      EXPECT_EQ(template_dist(A, B), template_dist(B, A));
      // two perfect matchings of K4 share no edge
      EXPECT_EQ(template_dist(A, B), &A == &B ? Rational(0) : Rational(4, 6));
    }
  Template other(metric_instance(4).ctx, 4);
  EXPECT_THROW(template_dist(ext.templates[0], other), std::invalid_argument);
}

TEST(Transfer, StaysInHAndWithinTemplateDistance) {
  auto mi = metric_instance(3);
  auto ext = search_extremal(mi.ctx, 4);
  std::mt19937 rng(8);
  for (auto& C : ext.templates)
    for (auto& D : ext.templates)
      for (int it = 0; it < 10; ++it) {
        std::vector<TypeCode> chi;
        for (size_t i = 0; i < C.subset_count(); ++i) chi.push_back(C.choices(i)[rng() % C.choices(i).size()]);
        auto G = subpattern_of_choice(C, chi);
        ASSERT_TRUE(G);
        auto out = transfer_subpattern(C, *G, D);
        EXPECT_TRUE(mi.H->is_member(out));
        EXPECT_TRUE(is_subpattern(D, out));
        EXPECT_LE(dist(*mi.ctx->L, *G, out), template_dist(C, D));
      }
  auto bad = metric_structure(mi.H->sig, 4, std::vector<int>(6, 1));
  EXPECT_THROW(transfer_subpattern(ext.templates[0], bad, ext.templates[1]), std::invalid_argument);
}

TEST(Closeness, InequalityOnRandomTemplates) {
  auto mi = metric_instance(3);
  std::mt19937 rng(12);
  auto S = mi.ctx->S;
  auto random_template = [&]() {
    Template T(mi.ctx, 4);
    for (size_t i = 0; i < T.subset_count(); ++i) {
      std::vector<TypeCode> ch;
      for (auto p : S)
        if (rng() % 2) ch.push_back(p);
      if (ch.empty()) ch.push_back(S[rng() % S.size()]);
      T.set_choices(i, ch);
    }
    return T;
  };
  for (int it = 0; it < 100; ++it) {
    auto C = random_template();
    auto Cp = random_template();
    auto rep = closeness_inequality_check(C, Cp);
    EXPECT_TRUE(rep.holds);
    EXPECT_EQ(rep.diff_size, template_diff(C, Cp).size());
    EXPECT_EQ(rep.lhs, sub_count_by_merging(C));
  }
}
