#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "distance.hpp"

namespace hlab {

inline long double log2_big(const BigInt& x) {
  if (x <= 0) return -INFINITY;
  unsigned msb = boost::multiprecision::msb(x);
  if (msb < 60) return std::log2(static_cast<long double>(static_cast<uint64_t>(x)));
  BigInt top = x >> (msb - 59);
  return std::log2(static_cast<long double>(static_cast<uint64_t>(top))) + (msb - 59);
}

// sub >= ex^{1-eps} for rational eps in [0,1], by cross-multiplied powers
inline bool near_extremal(const BigInt& sub, const BigInt& ex, const Rational& eps) {
  if (eps < 0) throw std::invalid_argument("epsilon must be nonnegative");
  if (eps >= 1) return sub >= 1;
  BigInt a = numerator(eps), b = denominator(eps);
  long double la = log2_big(sub) * static_cast<long double>(b), lb = log2_big(ex) * static_cast<long double>(b - a);
  if (la > lb + 1e-6L * (1 + std::fabs(lb))) return true;
  if (la < lb - 1e-6L * (1 + std::fabs(lb))) return false;
  return big_pow(sub, static_cast<uint64_t>(b)) >= big_pow(ex, static_cast<uint64_t>(b - a));
}

// Templates as one bitmask over S_r(H) per r-subset. Holds the clash tables
// between overlapping subsets and the forbidden-pattern match masks, both
// indexed by the colex position at which they become decidable.
class IndexedSpace {
 public:
  using Masks = std::vector<uint64_t>;

  IndexedSpace(ContextRef ctx, int n) : ctx_(std::move(ctx)), n_(n), geo_(*ctx_->L, n) {
    if (!ctx_->enumerable) throw std::invalid_argument("S_r(H) is too large to index");
    if (n < ctx_->r()) throw std::invalid_argument("n must be at least r");
    m_ = static_cast<int>(ctx_->S.size());
    if (m_ > 63) throw std::invalid_argument("S_r(H) has more than 63 types");
    N_ = geo_.subsets.size();
    const auto& S = ctx_->S;
    clashes_.assign(N_, {});
    for (auto& o : geo_.overlaps) {
      Clash c{o.i, std::vector<uint64_t>(m_, 0)};
      bool any = false;
      for (int s = 0; s < m_; ++s)
        for (int t = 0; t < m_; ++t)
          if (clash(o, S[t], S[s])) {
            c.mask[s] |= uint64_t(1) << t;
            any = true;
          }
      if (any) clashes_[o.j].push_back(std::move(c));
    }
    int r = ctx_->r();
    groups_.assign(N_, {});
    for (auto& P : forbidden_patterns(*ctx_->H, *ctx_->L, n)) {
      std::vector<uint64_t> match(P.req.size(), 0);
      bool possible = true;
      for (size_t t = 0; t < P.req.size(); ++t) {
        for (int s = 0; s < m_; ++s)
          if ((S[s] & P.req[t].first) == P.req[t].second) match[t] |= uint64_t(1) << s;
        if (!match[t]) possible = false;
      }
      if (possible) matches_[P.size].push_back(std::move(match));
    }
    for (auto& [size, list] : matches_) {
      auto locals = subsets_colex(size, r);
      for (auto& B : subsets_colex(n, size)) {
        Group g{size, {}};
        for (auto& loc : locals) {
          std::vector<int> A;
          for (int x : loc) A.push_back(B[x - 1]);
          g.glob.push_back(static_cast<int>(colex_rank(A)));
        }
        int last = *std::max_element(g.glob.begin(), g.glob.end());
        groups_[last].push_back(std::move(g));
      }
    }
  }

  const ContextRef& ctx() const { return ctx_; }
  const Geometry& geometry() const { return geo_; }
  int n() const { return n_; }
  int m() const { return m_; }
  size_t subsets() const { return N_; }

  // some earlier overlapping subset clashes with subset i
  bool error_at(size_t i, const Masks& ch) const {
    for (auto& c : clashes_[i]) {
      uint64_t other = ch[c.j];
      for (uint64_t a = ch[i]; a; a &= a - 1)
        if (c.mask[std::countr_zero(a)] & other) return true;
    }
    return false;
  }

  // a forbidden pattern is completed on some set whose last subset is i
  bool hit_at(size_t i, const Masks& ch) const {
    for (auto& g : groups_[i])
      if (group_hit(g, ch)) return true;
    return false;
  }

  bool error_free(const Masks& ch) const {
    for (size_t i = 0; i < N_; ++i)
      if (error_at(i, ch)) return false;
    return true;
  }

  bool h_random(const Masks& ch) const {
    for (size_t i = 0; i < N_; ++i)
      if (error_at(i, ch) || hit_at(i, ch)) return false;
    return true;
  }

  Template to_template(const Masks& ch) const {
    Template T(ctx_, n_);
    for (size_t i = 0; i < N_; ++i) {
      std::vector<TypeCode> v;
      for (uint64_t a = ch[i]; a; a &= a - 1) v.push_back(ctx_->S[std::countr_zero(a)]);
      T.set_choices(i, v);
    }
    return T;
  }

  Masks to_masks(const Template& T) const {
    if (T.n() != n_) throw std::invalid_argument("template size mismatch");
    Masks ch(N_, 0);
    for (size_t i = 0; i < N_; ++i)
      for (TypeCode p : T.choices(i)) {
        int k = ctx_->idx(p);
        if (k < 0) throw std::invalid_argument("type outside S_r(H)");
        ch[i] |= uint64_t(1) << k;
      }
    return ch;
  }

  static BigInt product(const Masks& ch) {
    BigInt c = 1;
    for (auto x : ch) c *= std::popcount(x);
    return c;
  }

 private:
  struct Clash {
    int j;
    std::vector<uint64_t> mask;  // type s here clashes with these types on j
  };
  struct Group {
    int size;
    std::vector<int> glob;
  };

  bool group_hit(const Group& g, const Masks& ch) const {
    for (auto& match : matches_.at(g.size)) {
      bool hit = true;
      for (size_t t = 0; t < g.glob.size() && hit; ++t) hit = (ch[g.glob[t]] & match[t]) != 0;
      if (hit) return true;
    }
    return false;
  }

  ContextRef ctx_;
  int n_, m_;
  Geometry geo_;
  size_t N_;
  std::vector<std::vector<Clash>> clashes_;
  std::map<int, std::vector<std::vector<uint64_t>>> matches_;
  std::vector<std::vector<Group>> groups_;
};

struct SearchOptions {
  uint64_t budget = 100'000'000;
  double time_limit = 600;  // seconds of wall clock, <= 0 for none
  size_t cap = 10'000;
  int workers = 1;
  std::function<bool(uint64_t)> candidate_filter;  // restricts the allowed choice-set masks
};

struct SearchStats {
  uint64_t nodes = 0, pruned = 0;
};

struct ExtremalReport {
  int n = 0;
  int r = 0;
  BigInt ex = 0;
  std::vector<Template> templates;
  bool exact = true;
  bool truncated = false;
  SearchStats stats;

  uint64_t subsets() const { return binom(n, r); }
  long double log2_ex() const { return log2_big(ex); }
  double b_n() const { return static_cast<double>(std::exp2(log2_ex() / subsets())); }
};

namespace detail {

inline void atomic_max(std::atomic<double>& a, double v) {
  double cur = a.load();
  while (v > cur && !a.compare_exchange_weak(cur, v)) {
  }
}

// Depth-first assignment of choice sets over r-subsets in colex order.
// Max mode keeps every maximizer; threshold mode keeps everything whose
// product passes `accept`.
class Search {
 public:
  using Masks = IndexedSpace::Masks;

  Search(const IndexedSpace& sp, const SearchOptions& opt)
      : sp_(sp), opt_(opt), start_(std::chrono::steady_clock::now()) {
    int m = sp.m();
    if (m > 20) throw std::invalid_argument("too many types for choice-set search");
    for (uint64_t c = 1; c < (uint64_t(1) << m); ++c)
      if (!opt.candidate_filter || opt.candidate_filter(c)) cands_.push_back(c);
    if (cands_.empty()) throw std::invalid_argument("no candidate choice sets");
    std::stable_sort(cands_.begin(), cands_.end(), [](uint64_t a, uint64_t b) {
      int pa = std::popcount(a), pb = std::popcount(b);
      return pa != pb ? pa > pb : a < b;
    });
    maxlog_ = std::log2(static_cast<long double>(std::popcount(cands_.front())));
  }

  // threshold: log2 value below which branches are cut; accept: exact leaf test
  void run_max(ExtremalReport& rep) {
    max_mode_ = true;
    incumbent_.store(-1.0);
    run(rep);
  }

  void run_threshold(long double log_threshold, std::function<bool(const BigInt&)> accept, ExtremalReport& rep) {
    max_mode_ = false;
    incumbent_.store(static_cast<double>(log_threshold));
    accept_ = std::move(accept);
    run(rep);
  }

  std::vector<std::pair<BigInt, Masks>> found;

 private:
  struct Worker {
    Masks ch;
    BigInt best = -1;
    std::vector<std::pair<BigInt, Masks>> list;
    bool truncated = false;
    uint64_t pruned = 0;
  };

  void run(ExtremalReport& rep) {
    size_t N = sp_.subsets();
    int W = std::max(1, opt_.workers);
    std::vector<Worker> ws(W);
    auto body = [&](int w) {
      ws[w].ch.assign(N, 0);
      try {
        for (size_t c = w; c < cands_.size(); c += W) root(ws[w], c);
      } catch (const BudgetExhausted&) {
        stop_ = true;
      }
    };
    if (W == 1) {
      body(0);
    } else {
      std::vector<std::thread> th;
      for (int w = 0; w < W; ++w) th.emplace_back(body, w);
      for (auto& t : th) t.join();
    }
    rep.stats.nodes = nodes_.load();
    rep.exact = !stop_;
    BigInt best = -1;
    for (auto& w : ws) {
      rep.stats.pruned += w.pruned;
      if (max_mode_) best = std::max(best, w.best);
    }
    for (auto& w : ws) {
      if (max_mode_ && w.best != best) continue;
      if (w.truncated) rep.truncated = true;
      for (auto& e : w.list) found.push_back(std::move(e));
    }
    std::sort(found.begin(), found.end(), [](auto& a, auto& b) { return a.second < b.second; });
    if (found.size() > opt_.cap) {
      found.resize(opt_.cap);
      rep.truncated = true;
    }
    if (max_mode_) rep.ex = std::max(best, BigInt(0));
  }

  void root(Worker& w, size_t c) {
    if (stop_) return;
    long double lg = std::log2(static_cast<long double>(std::popcount(cands_[c])));
    if (!bound_ok(lg, 1)) return;
    w.ch[0] = cands_[c];
    tick();
    if (!sp_.error_at(0, w.ch) && !sp_.hit_at(0, w.ch)) rec(w, 1, lg);
    w.ch[0] = 0;
  }

  bool bound_ok(long double lg, size_t assigned) const {
    long double bound = lg + (sp_.subsets() - assigned) * maxlog_;
    return bound >= static_cast<long double>(incumbent_.load()) - 1e-9L;
  }

  void tick() {
    uint64_t k = ++nodes_;
    if (k > opt_.budget) {
      stop_ = true;
      throw BudgetExhausted("search budget exhausted");
    }
    if (opt_.time_limit > 0 && (k & 4095) == 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() > opt_.time_limit) {
      stop_ = true;
      throw BudgetExhausted("search time limit exceeded");
    }
  }

  void rec(Worker& w, size_t i, long double lg) {
    if (stop_) return;
    if (i == sp_.subsets()) {
      leaf(w);
      return;
    }
    for (uint64_t c : cands_) {
      long double l2 = lg + std::log2(static_cast<long double>(std::popcount(c)));
      if (!bound_ok(l2, i + 1)) {
        ++w.pruned;
        break;
      }
      w.ch[i] = c;
      tick();
      if (!sp_.error_at(i, w.ch) && !sp_.hit_at(i, w.ch)) rec(w, i + 1, l2);
    }
    w.ch[i] = 0;
  }

  void leaf(Worker& w) {
    BigInt v = IndexedSpace::product(w.ch);
    if (max_mode_) {
      if (v > w.best) {
        w.best = v;
        w.list.clear();
        w.truncated = false;
        atomic_max(incumbent_, static_cast<double>(log2_big(v)));
      }
      if (v == w.best) push(w, v);
    } else if (accept_(v)) {
      push(w, v);
    }
  }

  void push(Worker& w, const BigInt& v) {
    if (w.list.size() >= opt_.cap) {
      w.truncated = true;
      return;
    }
    w.list.push_back({v, w.ch});
  }

  const IndexedSpace& sp_;
  const SearchOptions& opt_;
  std::chrono::steady_clock::time_point start_;
  std::vector<uint64_t> cands_;
  long double maxlog_ = 0;
  bool max_mode_ = true;
  std::function<bool(const BigInt&)> accept_;
  std::atomic<double> incumbent_{-1.0};
  std::atomic<uint64_t> nodes_{0};
  std::atomic<bool> stop_{false};
};

}  // namespace detail

inline ExtremalReport search_extremal(const IndexedSpace& sp, const SearchOptions& opt = {}) {
  ExtremalReport rep;
  rep.n = sp.n();
  rep.r = sp.ctx()->r();
  detail::Search s(sp, opt);
  s.run_max(rep);
  for (auto& [v, ch] : s.found) rep.templates.push_back(sp.to_template(ch));
  std::sort(rep.templates.begin(), rep.templates.end());
  return rep;
}

inline ExtremalReport search_extremal(const ContextRef& ctx, int n, const SearchOptions& opt = {}) {
  IndexedSpace sp(ctx, n);
  return search_extremal(sp, opt);
}

struct NearEntry {
  Template T;
  BigInt sub;
  Rational gap;  // min template distance to the extremal set
};

// H-random templates with sub >= ex^{1-eps}
inline std::vector<NearEntry> near_extremal_set(const IndexedSpace& sp, const ExtremalReport& ext, const Rational& eps,
                                                const SearchOptions& opt = {}, bool* exact = nullptr) {
  if (eps < 0) throw std::invalid_argument("epsilon must be nonnegative");
  std::vector<NearEntry> out;
  if (eps == 0) {
    for (auto& T : ext.templates) out.push_back({T, ext.ex, 0});
    if (exact) *exact = ext.exact && !ext.truncated;
    return out;
  }
  ExtremalReport rep;
  detail::Search s(sp, opt);
  long double thr = (1 - static_cast<long double>(to_double(eps))) * ext.log2_ex();
  BigInt ex = ext.ex;
  s.run_threshold(thr - 1e-6L, [&](const BigInt& v) { return near_extremal(v, ex, eps); }, rep);
  if (exact) *exact = rep.exact && !rep.truncated;
  for (auto& [v, ch] : s.found) out.push_back({sp.to_template(ch), v, 0});
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.T < b.T; });
  return out;
}

struct StabilityProbe {
  int n = 0;
  Rational epsilon;
  std::vector<NearEntry> near;
  Rational worst_gap = 0;
  bool exact = true;
};

inline StabilityProbe stability_probe(const IndexedSpace& sp, const ExtremalReport& ext, const Rational& eps,
                                      const SearchOptions& opt = {}) {
  StabilityProbe p;
  p.n = sp.n();
  p.epsilon = eps;
  p.near = near_extremal_set(sp, ext, eps, opt, &p.exact);
  p.exact = p.exact && ext.exact && !ext.truncated;
  for (auto& e : p.near) {
    Rational best = 1;
    for (auto& X : ext.templates) best = std::min(best, template_dist(e.T, X));
    e.gap = best;
    p.worst_gap = std::max(p.worst_gap, best);
  }
  return p;
}

struct DensityEntry {
  int n;
  BigInt ex;
  double b_n;
  bool exact;
};

struct DensitySequence {
  std::vector<DensityEntry> entries;
  bool non_increasing = true;
  bool at_least_one = true;
  double pi_upper = 0;
};

// b_{n+1} <= b_n  <=>  ex_{n+1}^{C(n,r)} <= ex_n^{C(n+1,r)}
inline bool density_step_ok(const BigInt& ex_n, uint64_t cn, const BigInt& ex_n1, uint64_t cn1) {
  if (ex_n == 0) return ex_n1 == 0;
  return big_pow(ex_n1, cn) <= big_pow(ex_n, cn1);
}

inline DensitySequence density_sequence(const ContextRef& ctx, int n_max, const SearchOptions& opt = {}) {
  int r = ctx->r();
  if (n_max < r) throw std::invalid_argument("n_max must be at least r");
  DensitySequence ds;
  for (int n = r; n <= n_max; ++n) {
    auto rep = search_extremal(ctx, n, opt);
    ds.entries.push_back({n, rep.ex, rep.b_n(), rep.exact});
    if (rep.ex < 1) ds.at_least_one = false;
    if (ds.entries.size() > 1) {
      auto& a = ds.entries[ds.entries.size() - 2];
      if (!density_step_ok(a.ex, binom(a.n, r), rep.ex, binom(n, r))) ds.non_increasing = false;
    }
    if (!rep.exact) break;
  }
  ds.pi_upper = ds.entries.back().b_n;
  return ds;
}

// Nearest full subpattern of an H-random template: keep G's diagram where it
// is allowed and take the least choice elsewhere.
inline Structure nearest_subpattern(const Template& T, const Structure& G) {
  Geometry Gm(T.layout(), T.n());
  std::vector<TypeCode> chi(Gm.subsets.size());
  for (size_t i = 0; i < chi.size(); ++i) {
    TypeCode p = qftp0(T.layout(), G, Gm.subsets[i].data());
    chi[i] = std::binary_search(T.choices(i).begin(), T.choices(i).end(), p) ? p : T.choices(i).front();
  }
  auto M = merge_choice(T.layout(), Gm, chi);
  if (!M) throw std::logic_error("template is not error-free");
  return *M;
}

struct Membership {
  bool member = false;
  Rational distance = 1;
  std::optional<Structure> witness;
  int template_index = -1;
};

// G in E^delta for the given list of H-random templates: some full subpattern
// of some listed template is within dist delta of G (delta = 0 gives E itself)
inline Membership e_delta_membership(const std::vector<Template>& list, const Structure& G, const Rational& delta) {
  Membership m;
  for (size_t k = 0; k < list.size(); ++k) {
    const auto& T = list[k];
    if (G.n() != T.n()) throw std::invalid_argument("structure and template sizes differ");
    Rational d(distance_to_subpatterns(T, G), binom(T.n(), T.r()));
    if (!m.witness || d < m.distance) {
      m.distance = d;
      m.witness = nearest_subpattern(T, G);
      m.template_index = static_cast<int>(k);
    }
  }
  m.member = m.witness && m.distance <= delta;
  return m;
}

// Membership of every choice function's merge, indexed by the base-m digits
// of chi (first subset least significant); used as an independent oracle.
class DirectTable {
 public:
  DirectTable(ContextRef ctx, int n, uint64_t limit = uint64_t(1) << 24)
      : ctx_(std::move(ctx)), geo_(*ctx_->L, n) {
    if (!ctx_->enumerable) throw std::invalid_argument("S_r(H) is too large to index");
    m_ = ctx_->S.size();
    N_ = geo_.subsets.size();
    uint64_t total = 1;
    for (size_t i = 0; i < N_; ++i) {
      if (total > limit / m_) throw BudgetExhausted("choice-function table too large");
      total *= m_;
    }
    ok_.assign(total, 0);
    std::vector<TypeCode> chi(N_);
    for (uint64_t code = 0; code < total; ++code) {
      uint64_t c = code;
      for (size_t i = 0; i < N_; ++i) {
        chi[i] = ctx_->S[c % m_];
        c /= m_;
      }
      auto M = merge_choice(*ctx_->L, geo_, chi);
      ok_[code] = M && ctx_->H->member_direct(*M);
    }
    pow_.assign(N_, 1);
    for (size_t i = 1; i < N_; ++i) pow_[i] = pow_[i - 1] * m_;
  }

  // every choice function of the template merges into H
  bool h_random(const std::vector<uint64_t>& ch) const {
    std::vector<std::vector<int>> digits(N_);
    for (size_t i = 0; i < N_; ++i) {
      for (uint64_t a = ch[i]; a; a &= a - 1) digits[i].push_back(std::countr_zero(a));
      if (digits[i].empty()) throw std::invalid_argument("template is not complete");
    }
    std::vector<size_t> odo(N_, 0);
    uint64_t code = 0;
    for (size_t i = 0; i < N_; ++i) code += digits[i][0] * pow_[i];
    while (true) {
      if (!ok_[code]) return false;
      size_t i = 0;
      for (; i < N_; ++i) {
        code -= digits[i][odo[i]] * pow_[i];
        if (++odo[i] < digits[i].size()) {
          code += digits[i][odo[i]] * pow_[i];
          break;
        }
        odo[i] = 0;
        code += digits[i][0] * pow_[i];
      }
      if (i == N_) return true;
    }
  }

 private:
  ContextRef ctx_;
  Geometry geo_;
  uint64_t m_;
  size_t N_;
  std::vector<uint8_t> ok_;
  std::vector<uint64_t> pow_;
};

// Every complete template on n points as masks, first subset varying fastest.
inline void for_each_template_masks(int m, size_t N, const std::function<bool(const std::vector<uint64_t>&)>& visit) {
  uint64_t top = (uint64_t(1) << m) - 1;
  std::vector<uint64_t> ch(N, 1);
  while (true) {
    if (!visit(ch)) return;
    size_t i = 0;
    for (; i < N; ++i) {
      if (ch[i] < top) {
        ++ch[i];
        break;
      }
      ch[i] = 1;
    }
    if (i == N) return;
  }
}

// Prune-free reference: every complete template, H-randomness and sub from the
// generic template code. Only for tiny spaces.
inline std::pair<BigInt, std::vector<Template>> exhaustive_extremal(const ContextRef& ctx, int n) {
  IndexedSpace sp(ctx, n);
  BigInt best = -1;
  std::vector<Template> all;
  for_each_template_masks(sp.m(), sp.subsets(), [&](const std::vector<uint64_t>& ch) {
    Template T = sp.to_template(ch);
    if (!is_h_random(T)) return true;
    BigInt v = sub_count(T).count;
    if (v > best) {
      best = v;
      all.clear();
    }
    if (v == best) all.push_back(T);
    return true;
  });
  std::sort(all.begin(), all.end());
  return {best, all};
}

}  // namespace hlab
