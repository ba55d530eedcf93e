// Acceptance run: one PASS/FAIL line per criterion.
// Exit status is 0 when every FAIL is a known deviation whose corrected value
// the search reproduces (see README, "Known deviations").
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "hlab/containers.hpp"
#include "hlab/distance.hpp"
#include "hlab/instances.hpp"
#include "hlab/search.hpp"

using namespace hlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool known_deviation = false;  // FAIL against the target value, corrected value confirmed
};

std::string str(const BigInt& x) { return x.str(); }
std::string str(const Rational& x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

template <class F>
std::vector<std::invoke_result_t<F, const Template&>> images(const ExtremalReport& rep, F psi) {
  std::vector<std::invoke_result_t<F, const Template&>> out;
  for (auto& T : rep.templates) out.push_back(psi(T));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------- criteria

Outcome check_metric_even() {
  auto mi = metric_instance(4);
  auto t0 = std::chrono::steady_clock::now();
  auto r3 = search_extremal(mi.ctx, 3);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  uint64_t want = interval_mask(2, 4);
  bool img = r3.templates.size() == 1;
  if (img)
    for (auto c : metric_psi(mi, r3.templates[0]).c) img = img && c == want;
  auto r4 = search_extremal(mi.ctx, 4);
  bool img4 = images(r4, [&](const Template& T) { return metric_psi(mi, T); }) == metric_tilde_C(4, 4);
  Outcome o;
  o.pass = r3.exact && r3.ex == 27 && img && secs < 60 && r4.exact && r4.ex == 729 && r4.ex == metric_oracle(4, 4) && img4;
  o.detail = "metric r=4: ex(3)=" + str(r3.ex) + " maximizers=" + std::to_string(r3.templates.size()) +
             " image {2,3,4}=" + (img ? "yes" : "no") + ", ex(4)=" + str(r4.ex) + " by full search";
  return o;
}

Outcome check_metric_odd() {
  auto mi = metric_instance(3);
  Outcome o;
  o.pass = true;
  for (int n = 3; n <= 4; ++n) {
    auto rep = search_extremal(mi.ctx, n);
    auto imgs = images(rep, [&](const Template& T) { return metric_psi(mi, T); });
    BigInt want = n == 3 ? 12 : 144;
    bool ok = rep.exact && rep.ex == want && rep.templates.size() == 3 && imgs == metric_tilde_E(3, n);
    o.pass = o.pass && ok;
    o.detail += (n == 3 ? "" : ", ") + std::string("ex(") + std::to_string(n) + ")=" + str(rep.ex) + " with " +
                std::to_string(rep.templates.size()) + " maximizers" + (ok ? "" : " (mismatch)");
  }
  o.detail = "metric r=3: " + o.detail + ", images = tilde-E";
  return o;
}

Outcome check_digraph_k2() {
  auto di = digraph_instance(2);
  auto e3 = search_extremal(di.ctx, 3);
  SearchOptions red;
  red.candidate_filter = digraph_downward_filter(di);
  auto d4 = search_extremal(di.ctx, 4, red);
  auto u4 = search_extremal(di.ctx, 4);
  bool img3 = images(e3, [&](const Template& T) { return digraph_psi(di, T); }) == digraph_DT(2, 3);
  bool img4 = images(u4, [&](const Template& T) { return digraph_psi(di, T); }) == digraph_DT(2, 4);
  Outcome o;
  o.pass = e3.ex == 9 && d4.ex == 81 && img3 && img4;
  bool corrected = e3.exact && d4.exact && u4.exact && e3.ex == digraph_oracle(2, 3) && d4.ex == digraph_oracle(2, 4) &&
                   u4.ex == d4.ex && img3 && img4;
  o.known_deviation = !o.pass && corrected;
  o.detail = "digraph k=2: ex(3)=" + str(e3.ex) + " (target 9), ex(4)=" + str(d4.ex) +
             " via downward reduction (target 81), unreduced " + str(u4.ex) + ", images = DT_2: " +
             (img3 && img4 ? "yes" : "no") + "; closed form 4^{t_2(n)} = " + str(digraph_oracle(2, 3)) + ", " +
             str(digraph_oracle(2, 4));
  return o;
}

Outcome check_triples() {
  auto ti = triples_instance();
  auto t0 = std::chrono::steady_clock::now();
  auto e4 = search_extremal(ti.ctx, 4);
  auto e5 = search_extremal(ti.ctx, 5);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto all_tripartite = [&](const ExtremalReport& rep) {
    return std::all_of(rep.templates.begin(), rep.templates.end(),
                       [&](const Template& T) { return is_balanced_tripartite(triples_psi(ti, T)); });
  };
  bool tri4 = all_tripartite(e4), tri5 = all_tripartite(e5);
  Outcome o;
  o.pass = e4.ex == 4 && e5.ex == 16 && tri4 && tri5 && secs < 600;
  bool corrected = e4.exact && e5.exact && e4.ex == triples_oracle(4) && e5.ex == triples_oracle(5);
  o.known_deviation = !o.pass && corrected;
  o.detail = "triples: ex(4)=" + str(e4.ex) + " (target 4), ex(5)=" + str(e5.ex) +
             " (target 16), maximizers balanced tripartite: " + (tri4 && tri5 ? "yes" : "no") +
             "; tripartite weight 2^{e(n)} = " + str(triples_tripartite_weight(4)) + ", " +
             str(triples_tripartite_weight(5)) + "; 2^{max edges} = " + str(triples_oracle(4)) + ", " +
             str(triples_oracle(5));
  return o;
}

Outcome check_stability() {
  auto even = metric_instance(4);
  IndexedSpace se(even.ctx, 4);
  auto pe = stability_probe(se, search_extremal(se), Rational(5, 100));
  auto odd = metric_instance(3);
  IndexedSpace so(odd.ctx, 4);
  auto po = stability_probe(so, search_extremal(so), Rational(17, 100));
  uint64_t one_two = interval_mask(1, 2);
  bool witness = false;
  for (auto& e : po.near) {
    auto g = metric_psi(odd, e.T);
    bool all12 = std::all_of(g.c.begin(), g.c.end(), [&](uint64_t c) { return c == one_two; });
    if (all12 && e.gap == 1) witness = true;
  }
  Outcome o;
  o.pass = pe.exact && po.exact && pe.worst_gap == 0 && po.worst_gap == 1 && witness;
  o.detail = "worst_gap r=4 eps=0.05: " + str(pe.worst_gap) + ", r=3 eps=0.17: " + str(po.worst_gap) +
             ", all-{1,2} witness: " + (witness ? "yes" : "no");
  return o;
}

Outcome check_sub_count_equivalence() {
  auto ei = errorex_instance();
  std::mt19937 rng(2024);
  const auto& L = *ei.ctx->L;
  size_t checked = 0, mismatches = 0, with_errors = 0;
  auto check = [&](const Template& T) {
    BigInt merged = sub_count_by_merging(T);
    bool ef = is_error_free(T);
    ++checked;
    with_errors += !ef;
    if ((merged == T.choice_count()) != ef) ++mismatches;
  };
  // n = 3: one subset holding the types of 1 to 4 random members
  for (int it = 0; it < 10000; ++it) {
    Template T(ei.ctx, 3);
    std::vector<TypeCode> ch;
    int k = 1 + it % 4;
    for (int j = 0; j < k; ++j) ch.push_back(type_of(L, random_errorex_member(ei, 3, rng)));
    T.set_choices(0, ch);
    check(T);
  }
  // n = 4, 5: near-member templates, where errors appear
  for (int n = 4; n <= 5; ++n)
    for (int it = 0; it < (n == 4 ? 5000 : 1000); ++it) {
      auto A = random_errorex_member(ei, n, rng);
      auto B = random_errorex_member(ei, n, rng);
      Template T(ei.ctx, n);
      Geometry G(L, n);
      for (size_t i = 0; i < T.subset_count(); ++i) {
        std::vector<TypeCode> ch{qftp0(L, A, G.subsets[i].data())};
        if (rng() % 2) ch.push_back(qftp0(L, B, G.subsets[i].data()));
        T.set_choices(i, ch);
      }
      check(T);
    }
  check(errorex_template(ei));
  Outcome o;
  o.pass = mismatches == 0 && checked >= 10000 && with_errors > 0;
  o.detail = std::to_string(checked) + " errorex templates (10000 at n=3), " + std::to_string(with_errors) +
             " with errors, " + std::to_string(mismatches) + " mismatches";
  return o;
}

Outcome check_h_random_equivalence() {
  auto m3 = metric_instance(3);
  auto m4 = metric_instance(4);
  auto di = digraph_instance(2);
  auto ti = triples_instance();
  auto ci = colored_instance(triangle_free_graph_spec());
  std::vector<std::pair<std::string, ContextRef>> inst{
      {"metric3", m3.ctx}, {"metric4", m4.ctx}, {"digraph", di.ctx}, {"triples", ti.ctx}, {"colored", ci.ctx}};
  const uint64_t kExhaustive = 200000, kSample = 200000;
  std::mt19937_64 rng(7);
  size_t checked = 0, mismatches = 0, positives = 0;
  std::vector<std::string> sampled;
  for (auto& [name, ctx] : inst)
    for (int n = ctx->r(); n <= 4; ++n) {
      IndexedSpace sp(ctx, n);
      DirectTable tab(ctx, n);
      auto test = [&](const std::vector<uint64_t>& ch) {
        auto T = sp.to_template(ch);
        if (T.choice_count() > 100000) return true;
        bool a = is_h_random(T);
        ++checked;
        positives += a;
        if (a != tab.h_random(ch)) ++mismatches;
        return true;
      };
      BigInt total = big_pow((BigInt(1) << sp.m()) - 1, sp.subsets());
      if (total <= kExhaustive) {
        for_each_template_masks(sp.m(), sp.subsets(), test);
        continue;
      }
      sampled.push_back(name + " n=" + std::to_string(n));
      uint64_t top = (uint64_t(1) << sp.m()) - 1;
      for (uint64_t it = 0; it < kSample; ++it) {
        // alternate uniform masks with sparse ones so H-random templates show up
        std::vector<uint64_t> ch(sp.subsets());
        for (auto& c : ch) {
          do {
            c = it % 2 ? rng() & top : rng() & rng() & top;
          } while (!c);
        }
        test(ch);
      }
    }
  Outcome o;
  o.pass = mismatches == 0 && positives > 0;
  o.detail = std::to_string(checked) + " templates, " + std::to_string(positives) + " H-random, " +
             std::to_string(mismatches) + " mismatches; sampled 200000 each for";
  for (auto& s : sampled) o.detail += " " + s;
  return o;
}

Outcome check_distance_bound() {
  std::vector<std::pair<std::string, SigRef>> sigs{{"metric3", metric_signature(3)},
                                                   {"metric4", metric_signature(4)},
                                                   {"digraph", digraph_property(2).sig},
                                                   {"triples", triples_property().sig},
                                                   {"colored", colored_signature(triangle_free_graph_spec())},
                                                   {"errorex", errorex_property().sig}};
  std::mt19937 rng(500);
  size_t checked = 0, violations = 0;
  for (auto& [name, sig] : sigs) {
    auto L = make_layout(sig);
    int r = L->r();
    for (int it = 0; it < 500; ++it) {
      int n = 2 * r + it % 2;
      auto M = random_structure(sig, n, rng, 0.3 + 0.1 * (it % 5));
      Structure N = M;
      if (it % 2) {
        N = random_structure(sig, n, rng, 0.5);
      } else {
        for (int f = 0; f <= it % 7; ++f) {
          auto& tab = N.table(static_cast<int>(rng() % sig->size()));
          tab[rng() % tab.size()] ^= 1;
        }
      }
      ++checked;
      if (!check_distance_bound(*L, M, N).holds) ++violations;
    }
  }
  Outcome o;
  o.pass = violations == 0 && checked == 500 * sigs.size();
  o.detail = std::to_string(checked) + " pairs over " + std::to_string(sigs.size()) + " signatures, " +
             std::to_string(violations) + " violations";
  return o;
}

Outcome check_density() {
  auto m3 = metric_instance(3);
  auto m4 = metric_instance(4);
  auto di = digraph_instance(2);
  auto ti = triples_instance();
  auto ci = colored_instance(triangle_free_graph_spec());
  struct Run {
    std::string name;
    ContextRef ctx;
    int nmax;
  };
  std::vector<Run> runs{{"metric3", m3.ctx, 6}, {"metric4", m4.ctx, 5}, {"digraph", di.ctx, 5},
                        {"triples", ti.ctx, 6}, {"colored", ci.ctx, 5}};
  Outcome o;
  o.pass = true;
  for (auto& run : runs) {
    auto ds = density_sequence(run.ctx, run.nmax);
    bool exact = std::all_of(ds.entries.begin(), ds.entries.end(), [](auto& e) { return e.exact; });
    bool ok = ds.non_increasing && ds.at_least_one && exact && ds.entries.back().n == run.nmax;
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : ", ") + run.name + " n<=" + std::to_string(run.nmax) + (ok ? " ok" : " BAD");
  }
  return o;
}

Outcome check_containers() {
  auto di = digraph_instance(2);
  Outcome o;
  o.pass = true;
  for (int n = 4; n <= 5; ++n) {
    auto Hg = build_hypergraph(di.ctx, 3, n);
    bool ok = Hg.vertex_count() == 4 * binom(n, 2) && Hg.alpha_constant && Hg.edge_count() == Hg.alpha * binom(n, 3);
    o.pass = o.pass && ok;
    o.detail += "n=" + std::to_string(n) + ": |V|=" + std::to_string(Hg.vertex_count()) +
                " |E|=" + std::to_string(Hg.edge_count()) + " alpha=" + std::to_string(Hg.alpha) + "; ";
  }
  auto Hg4 = build_hypergraph(di.ctx, 3, 4);
  size_t members = 0, dependent = 0;
  enumerate_members(*di.H, 4, [&](const Structure& M) {
    ++members;
    dependent += !independence_check(Hg4, M).independent;
    return true;
  });
  auto ci = colored_instance(ColoredSpec{2, {"0", "1"}, {}});
  auto empty = build_hypergraph(ci.ctx, 3, 4);
  bool delta0 = empty.edge_count() == 0 && codegree_function(empty, Rational(1, 2), Rational(1, 10)).delta == 0;
  bool m_ok = true;
  for (int r = 2; r <= 8; ++r)
    for (int k = r + 1; k <= 8; ++k) m_ok = m_ok && exponent_m(k, r) > 1;
  o.pass = o.pass && dependent == 0 && members > 0 && delta0 && m_ok;
  o.detail += std::to_string(members) + " members at n=4, " + std::to_string(dependent) +
              " dependent; edgeless delta=0: " + (delta0 ? "yes" : "no") + "; m(k,r)>1: " + (m_ok ? "yes" : "no");
  return o;
}

Outcome check_colored() {
  auto spec = triangle_free_graph_spec();
  auto ci = colored_instance(spec);
  Outcome o;
  o.pass = true;
  for (int n = 3; n <= 4; ++n) {
    auto brute = colored_max_density(spec, n).product;
    auto rep = search_extremal(ci.ctx, n);
    bool ok = rep.exact && brute == rep.ex;
    o.pass = o.pass && ok;
    o.detail += (n == 3 ? "" : ", ") + std::string("n=") + std::to_string(n) + ": brute " + str(brute) + " search " +
                str(rep.ex);
  }
  return o;
}

Outcome check_enumeration_bound() {
  auto m3 = metric_instance(3);
  auto m4 = metric_instance(4);
  auto di = digraph_instance(2);
  auto ti = triples_instance();
  auto ci = colored_instance(triangle_free_graph_spec());
  struct Pair {
    std::string name;
    const Instance* inst;
    int nmax;
  };
  std::vector<Pair> pairs{{"metric3", &m3, 5}, {"metric4", &m4, 4}, {"digraph", &di, 4}, {"triples", &ti, 5},
                          {"colored", &ci, 5}};
  Outcome o;
  o.pass = true;
  size_t count = 0;
  for (auto& p : pairs)
    for (int n = p.inst->ctx->r(); n <= p.nmax; ++n) {
      BigInt h = count_members(*p.inst->H, n);
      BigInt ex = search_extremal(p.inst->ctx, n).ex;
      ++count;
      if (h < ex) {
        o.pass = false;
        o.detail += p.name + " n=" + std::to_string(n) + " |H|=" + str(h) + " < ex=" + str(ex) + "; ";
      }
    }
  BigInt h4 = count_members(*ti.H, 4);
  o.pass = o.pass && h4 == 16;
  o.detail += std::to_string(count) + " (instance, n) pairs, triples |H_4|=" + str(h4);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    Outcome (*run)();
  };
  std::vector<Criterion> criteria{
      {"C1", check_metric_even},         {"C2", check_metric_odd},           {"C3", check_digraph_k2},
      {"C4", check_triples},             {"C5", check_stability},            {"C6", check_sub_count_equivalence},
      {"C7", check_h_random_equivalence}, {"C8", check_distance_bound},       {"C9", check_density},
      {"C10", check_containers},         {"C11", check_colored},             {"C12", check_enumeration_bound}};
  int pass = 0, unexplained = 0;
  for (auto& [id, run] : criteria) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), false};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    pass += o.pass;
    if (!o.pass && !o.known_deviation) ++unexplained;
    char t[32];
    std::snprintf(t, sizeof t, "%.2fs", secs);
    std::cout << id << " " << (o.pass ? "PASS" : "FAIL") << " " << o.detail
              << (o.known_deviation ? " [known deviation: corrected value confirmed]" : "") << " (" << t << ")"
              << std::endl;
  }
  std::cout << pass << "/" << criteria.size() << " PASS, " << unexplained << " unexplained FAIL" << std::endl;
  return unexplained == 0 ? 0 : 1;
}
