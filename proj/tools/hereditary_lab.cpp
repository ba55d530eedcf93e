#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "hlab/containers.hpp"
#include "hlab/instances.hpp"
#include "hlab/io.hpp"

using namespace hlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;
constexpr int kExitVerify = 4;

struct Options {
  std::string property, instance, spec;
  std::vector<std::string> forbid;
  std::string mode = "induced";
  int r = 3, k = 2;
  int n = 0, nmax = 0;
  uint64_t budget = 100'000'000;
  double time_limit = 600;
  int workers = 1;
  uint64_t seed = 1;
  int max_type_bits = 28;
  std::string output, csv;
  bool all_maximizers = false;
  bool all_types = false;
  bool list = false;
  size_t limit = 100;
  bool ac = false, check_bound = false;
  std::string epsilon = "0.1", gamma = "0.05", tau = "auto";
  int hk = 3;
  std::vector<std::string> files;
};

json common_config(const Options& o) {
  json c;
  if (!o.property.empty()) c["property"] = o.property;
  if (!o.forbid.empty()) {
    c["forbid"] = o.forbid;
    c["mode"] = o.mode;
  }
  if (!o.instance.empty()) {
    c["instance"] = o.instance;
    if (o.instance == "metric") c["r"] = o.r;
    if (o.instance == "digraph") c["k"] = o.k;
    if (o.instance == "colored") c["spec"] = o.spec;
  }
  c["budget"] = o.budget;
  c["time_limit"] = o.time_limit;
  c["workers"] = o.workers;
  c["seed"] = o.seed;
  return c;
}

SearchOptions search_options(const Options& o) {
  SearchOptions s;
  s.budget = o.budget;
  s.time_limit = o.time_limit;
  s.workers = o.workers;
  return s;
}

Rational rational_arg(const std::string& s, const std::string& flag) {
  try {
    return parse_rational(s);
  } catch (const std::exception&) {
    throw InputError(flag, "expected a number, got " + s);
  }
}

// ---------------------------------------------------------------- property selection

struct Selected {
  ContextRef ctx;
  std::string label;
  std::function<json(const Template&)> image;  // instance view of a template, optional
};

ColoredSpec colored_spec_from_json(const json& j) {
  ColoredSpec s;
  if (!j.is_object()) throw InputError("/", "expected a colored spec object");
  if (j.contains("k")) {
    if (!j["k"].is_number_integer()) throw InputError("/k", "expected an integer");
    s.k = j["k"].get<int>();
  }
  if (s.k < 2) throw InputError("/k", "k must be at least 2");
  if (!j.contains("colors") || !j["colors"].is_array() || j["colors"].empty())
    throw InputError("/colors", "expected a nonempty array of color names");
  for (size_t i = 0; i < j["colors"].size(); ++i) {
    const json& c = j["colors"][i];
    if (c.is_string())
      s.colors.push_back(c.get<std::string>());
    else if (c.is_number_integer())
      s.colors.push_back(std::to_string(c.get<int>()));
    else
      throw InputError("/colors/" + std::to_string(i), "expected a string");
  }
  auto color_index = [&](const json& c, const std::string& path) {
    if (c.is_number_integer()) {
      int v = c.get<int>();
      if (v < 0 || v >= static_cast<int>(s.colors.size())) throw InputError(path, "color index out of range");
      return v;
    }
    if (c.is_string()) {
      auto it = std::find(s.colors.begin(), s.colors.end(), c.get<std::string>());
      if (it == s.colors.end()) throw InputError(path, "unknown color " + c.get<std::string>());
      return static_cast<int>(it - s.colors.begin());
    }
    throw InputError(path, "expected a color name or index");
  };
  if (j.contains("forbidden")) {
    const json& f = j["forbidden"];
    if (!f.is_array()) throw InputError("/forbidden", "expected an array");
    for (size_t i = 0; i < f.size(); ++i) {
      std::string p = "/forbidden/" + std::to_string(i);
      if (!f[i].is_object() || !f[i].contains("n") || !f[i]["n"].is_number_integer())
        throw InputError(p + "/n", "expected an integer");
      ColorGraph g{f[i]["n"].get<int>(), s.k, {}};
      if (g.n < s.k || g.n > 8) throw InputError(p + "/n", "n must lie in [k, 8]");
      if (!f[i].contains("colors") || !f[i]["colors"].is_array())
        throw InputError(p + "/colors", "expected one color per k-subset, colex order");
      const json& cs = f[i]["colors"];
      if (cs.size() != binom(g.n, s.k)) throw InputError(p + "/colors", "need C(n,k) entries");
      for (size_t t = 0; t < cs.size(); ++t) g.color.push_back(color_index(cs[t], p + "/colors/" + std::to_string(t)));
      s.forbidden.push_back(g);
    }
  }
  return s;
}

json keyed_by_subset(int n, int r, const std::function<json(size_t)>& value) {
  json out = json::object();
  auto subs = subsets_colex(n, r);
  for (size_t i = 0; i < subs.size(); ++i) out[subset_key(subs[i])] = value(i);
  return out;
}

json mask_values(uint64_t m, int lo = 0) {
  json a = json::array();
  for (int b = lo; b < 64; ++b)
    if (m >> b & 1) a.push_back(b);
  return a;
}

Selected select_instance(const Options& o) {
  Selected s;
  s.label = o.instance;
  if (o.instance == "metric") {
    if (o.r < 2 || o.r > 12) throw InputError("--r", "r must lie in [2, 12]");
    auto mi = std::make_shared<MetricInstance>(metric_instance(o.r));
    s.ctx = mi->ctx;
    s.image = [mi](const Template& T) {
      auto g = metric_psi(*mi, T);
      return keyed_by_subset(g.n, 2, [&](size_t i) { return mask_values(g.c[i]); });
    };
  } else if (o.instance == "digraph") {
    if (o.k < 2 || o.k > 6) throw InputError("--k", "k must lie in [2, 6]");
    auto di = std::make_shared<DigraphInstance>(digraph_instance(o.k));
    s.ctx = di->ctx;
    s.image = [di](const Template& T) {
      auto D = digraph_psi(*di, T);
      json arcs = json::array();
      for (int u = 0; u < D.n; ++u)
        for (int v = 0; v < D.n; ++v)
          if (D.has(u, v)) arcs.push_back({u + 1, v + 1});
      return json{{"arcs", arcs}};
    };
  } else if (o.instance == "triples") {
    auto ti = std::make_shared<TriplesInstance>(triples_instance());
    s.ctx = ti->ctx;
    s.image = [ti](const Template& T) {
      auto h = triples_psi(*ti, T);
      json e = json::array();
      auto subs = subsets_colex(h.n, 3);
      for (size_t i = 0; i < subs.size(); ++i)
        if (h.edge[i]) e.push_back(subs[i]);
      return json{{"edges", e}};
    };
  } else if (o.instance == "colored") {
    if (o.spec.empty()) throw InputError("--spec", "colored instance needs --spec file.json");
    auto ci = std::make_shared<ColoredInstance>(colored_instance(colored_spec_from_json(load_json_file(o.spec))));
    s.ctx = ci->ctx;
    s.image = [ci](const Template& T) {
      auto g = colored_psi(*ci, T);
      return keyed_by_subset(g.n, g.k, [&](size_t i) {
        json a = json::array();
        for (size_t c = 0; c < ci->spec.colors.size(); ++c)
          if (g.c[i] >> c & 1) a.push_back(ci->spec.colors[c]);
        return a;
      });
    };
  } else if (o.instance == "errorex") {
    s.ctx = errorex_instance().ctx;
  } else {
    throw InputError("--instance", "unknown instance " + o.instance);
  }
  return s;
}

HereditaryProperty property_of(const Options& o) {
  if (!o.property.empty()) return property_from_json(load_json_file(o.property));
  if (o.forbid.empty()) throw InputError("--property", "give --property, --forbid or --instance");
  HereditaryProperty H;
  H.mode = parse_mode(json(o.mode), "--mode");
  for (auto& f : o.forbid) {
    json j = load_json_file(f);
    Structure M = structure_from_json(j, H.sig, f);
    if (!H.sig) H.sig = M.sig();
    H.forbidden.push_back({M, H.mode});
  }
  return H;
}

Selected select(const Options& o) {
  int given = !o.instance.empty() + !o.property.empty() + !o.forbid.empty();
  if (given > 1) throw InputError("--instance", "choose one of --instance, --property, --forbid");
  if (!o.instance.empty()) return select_instance(o);
  Selected s;
  auto H = property_of(o);
  s.label = H.name.empty() ? "property" : H.name;
  try {
    s.ctx = make_context(H, o.max_type_bits);
  } catch (const BudgetExhausted&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError("--property", e.what());
  }
  return s;
}

void require_enumerable(const Selected& s) {
  if (!s.ctx->enumerable) throw InputError("--property", "S_r(H) is too large to list for this command");
}

json template_entry(const Selected& s, const Template& T) {
  json j = template_to_json(T, s.label);
  j.erase("property");
  if (s.image) j["image"] = s.image(T);
  return j;
}

// ---------------------------------------------------------------- commands

struct Outcome {
  json result;
  int code = kExitOk;
  std::vector<std::vector<std::string>> csv;  // rows after the header n,ex,b_n
};

std::string fixed(double x) {
  std::ostringstream ss;
  ss.precision(12);
  ss << x;
  return ss.str();
}

Outcome cmd_types(const Options& o, json& cfg) {
  cfg["all"] = o.all_types;
  auto s = select(o);
  const auto& L = *s.ctx->L;
  Outcome out;
  std::vector<TypeCode> codes;
  if (o.all_types) {
    if (L.fact_count() > 16) throw InputError("--all", "full type space exceeds 2^16 entries");
    codes = type_space(L, 16);
  } else {
    require_enumerable(s);
    codes = s.ctx->S;
  }
  out.result["r"] = L.r();
  out.result["facts"] = L.fact_count();
  out.result["type_space_size"] = big_str(type_space_size(L));
  out.result["count"] = codes.size();
  out.result["types"] = type_listing(L, codes);
  return out;
}

Outcome cmd_enumerate(const Options& o, json& cfg) {
  cfg["n"] = o.n;
  cfg["list"] = o.list;
  if (o.n < 1 || o.n > 12) throw InputError("--n", "n must lie in [1, 12]");
  auto s = select(o);
  Outcome out;
  BigInt count = 0;
  json listed = json::array();
  bool partial = false;
  try {
    enumerate_members(
        *s.ctx->H, o.n,
        [&](const Structure& M) {
          ++count;
          if (o.list && listed.size() < o.limit) listed.push_back(structure_to_json(M)["relations"]);
          return true;
        },
        o.budget);
  } catch (const BudgetExhausted&) {
    partial = true;
    out.code = kExitBudget;
  }
  out.result["n"] = o.n;
  out.result["count"] = big_str(count);
  out.result["exact"] = !partial;
  if (o.list) out.result["members"] = listed;
  return out;
}

Outcome cmd_extremal(const Options& o, json& cfg) {
  cfg["n"] = o.n;
  cfg["all_maximizers"] = o.all_maximizers;
  auto s = select(o);
  require_enumerable(s);
  if (o.n < s.ctx->r() || o.n > 12) throw InputError("--n", "n must lie in [r, 12]");
  auto rep = search_extremal(s.ctx, o.n, search_options(o));
  Outcome out;
  out.result["n"] = rep.n;
  out.result["r"] = rep.r;
  out.result["ex"] = big_str(rep.ex);
  out.result["log2_ex"] = fixed(static_cast<double>(rep.log2_ex()));
  out.result["b_n"] = fixed(rep.b_n());
  out.result["maximizers"] = rep.templates.size();
  out.result["exact"] = rep.exact;
  out.result["truncated"] = rep.truncated;
  out.result["nodes"] = rep.stats.nodes;
  out.result["pruned"] = rep.stats.pruned;
  json ts = json::array();
  for (size_t i = 0; i < rep.templates.size() && (o.all_maximizers || i < 1); ++i)
    ts.push_back(template_entry(s, rep.templates[i]));
  out.result["templates"] = ts;
  out.csv.push_back({std::to_string(rep.n), big_str(rep.ex), fixed(rep.b_n())});
  if (!rep.exact) out.code = kExitBudget;
  return out;
}

Outcome cmd_density(const Options& o, json& cfg) {
  cfg["nmax"] = o.nmax;
  auto s = select(o);
  require_enumerable(s);
  if (o.nmax < s.ctx->r() || o.nmax > 12) throw InputError("--nmax", "nmax must lie in [r, 12]");
  auto ds = density_sequence(s.ctx, o.nmax, search_options(o));
  Outcome out;
  json e = json::array();
  bool exact = true;
  for (auto& x : ds.entries) {
    e.push_back({{"n", x.n}, {"ex", big_str(x.ex)}, {"b_n", fixed(x.b_n)}, {"exact", x.exact}});
    out.csv.push_back({std::to_string(x.n), big_str(x.ex), fixed(x.b_n)});
    exact = exact && x.exact;
  }
  out.result["entries"] = e;
  out.result["non_increasing"] = ds.non_increasing;
  out.result["at_least_one"] = ds.at_least_one;
  out.result["pi_upper"] = fixed(ds.pi_upper);
  out.result["exact"] = exact;
  if (!exact) out.code = kExitBudget;
  return out;
}

LoadedTemplate load_template(const Options& o, const std::string& path) {
  auto j = load_json_file(path);
  auto base = std::filesystem::path(path).parent_path().string();
  auto lt = template_from_json(j, base.empty() ? "." : base, nullptr, o.max_type_bits);
  if (!lt.validation.complete)
    throw InputError(path + ":/choices/" + subset_key(lt.validation.subset), "template is not complete");
  return lt;
}

Outcome cmd_subcount(const Options& o, json& cfg) {
  if (o.files.size() != 1) throw InputError("template", "expected one template file");
  cfg["template"] = o.files[0];
  auto lt = load_template(o, o.files[0]);
  auto er = detect_errors(lt.T);
  auto sc = sub_count(lt.T);
  Outcome out;
  out.result["n"] = lt.T.n();
  out.result["choice_count"] = big_str(lt.T.choice_count());
  out.result["sub"] = big_str(sc.count);
  out.result["error_free"] = er.error_free();
  out.result["sub_equals_product"] = sc.count == lt.T.choice_count();
  out.result["errors"] = er.errors;
  return out;
}

Outcome cmd_hrandom(const Options& o, json& cfg) {
  if (o.files.size() != 1) throw InputError("template", "expected one template file");
  cfg["template"] = o.files[0];
  auto lt = load_template(o, o.files[0]);
  const auto& T = lt.T;
  auto er = detect_errors(T);
  Outcome out;
  out.result["n"] = T.n();
  out.result["error_free"] = er.error_free();
  if (er.error_free()) {
    auto hit = find_tilde_f(T, forbidden_patterns(*T.ctx()->H, T.layout(), T.n()));
    out.result["tilde_f_free"] = !hit.has_value();
    if (hit) out.result["forbidden_copy_on"] = *hit;
  } else {
    out.result["errors"] = er.errors;
  }
  bool hr = is_h_random(T);
  out.result["h_random"] = hr;
  if (T.choice_count() <= 100'000) out.result["h_random_direct"] = is_h_random_direct(T);
  if (hr) out.result["sub"] = big_str(sub_count(T).count);
  return out;
}

Outcome cmd_distance(const Options& o, json& cfg) {
  if (o.files.size() != 2) throw InputError("structures", "expected two structure files");
  cfg["a"] = o.files[0];
  cfg["b"] = o.files[1];
  cfg["ac"] = o.ac;
  cfg["check_bound"] = o.check_bound;
  auto M = structure_from_json(load_json_file(o.files[0]), nullptr, o.files[0]);
  auto N = structure_from_json(load_json_file(o.files[1]), nullptr, o.files[1]);
  if (!same_signature(M.sig(), N.sig())) throw InputError(o.files[1] + ":/signature", "signatures differ");
  if (M.n() != N.n()) throw InputError(o.files[1] + ":/n", "domain sizes differ");
  auto L = make_layout(M.sig());
  if (M.n() < L->r()) throw InputError(o.files[0] + ":/n", "domain smaller than the largest arity");
  Outcome out;
  out.result["n"] = M.n();
  out.result["r"] = L->r();
  out.result["dist"] = rational_str(dist(*L, M, N));
  if (o.ac || o.check_bound) out.result["d"] = rational_str(ac_distance(M, N));
  if (o.check_bound) {
    auto b = check_distance_bound(*L, M, N);
    out.result["bound_lhs"] = rational_str(b.lhs);
    out.result["bound_rhs"] = rational_str(b.rhs);
    out.result["bound_holds"] = b.holds;
    if (!b.holds) out.code = kExitVerify;
  }
  out.result["diff"] = diff(*L, M, N);
  return out;
}

Outcome cmd_containers(const Options& o, json& cfg) {
  cfg["n"] = o.n;
  cfg["k"] = o.hk;
  cfg["tau"] = o.tau;
  cfg["gamma"] = o.gamma;
  cfg["epsilon"] = o.epsilon;
  Rational eps = rational_arg(o.epsilon, "--epsilon");
  Rational gamma = rational_arg(o.gamma, "--gamma");
  if (eps <= 0 || eps >= 1) throw InputError("--epsilon", "epsilon must lie in (0, 1)");
  if (gamma <= 0) throw InputError("--gamma", "gamma must be positive");
  auto s = select(o);
  require_enumerable(s);
  int r = s.ctx->r();
  if (o.hk <= r) throw InputError("--k", "k must exceed r");
  if (o.n < o.hk) throw InputError("--n", "n must be at least k");
  Rational m = exponent_m(o.hk, r);
  Rational tau = o.tau == "auto" ? auto_tau(o.n, m, gamma) : rational_arg(o.tau, "--tau");
  if (tau <= 0) throw InputError("--tau", "tau must be positive");
  ContainerHypergraph Hg;
  try {
    Hg = build_hypergraph(s.ctx, o.hk, o.n, o.budget);
  } catch (const std::invalid_argument& e) {
    throw InputError("--k", e.what());
  }
  auto cd = codegree_function(Hg, tau, eps);
  auto gc = gamma_inequality(*s.ctx->L, o.hk, eps, gamma);
  Outcome out;
  auto& R = out.result;
  R["v"] = Hg.vertex_count();
  R["e"] = Hg.edge_count();
  R["alpha"] = Hg.alpha;
  R["alpha_constant"] = Hg.alpha_constant;
  R["unsatisfiable_edges"] = Hg.errors;
  R["s"] = Hg.s;
  R["m"] = rational_json(m);
  R["tau"] = rational_json(tau);
  R["d"] = rational_json(cd.d);
  json dj = json::array();
  for (size_t j = 2; j < cd.delta_j.size(); ++j) dj.push_back(rational_json(cd.delta_j[j]));
  R["delta_j"] = dj;
  R["delta"] = rational_json(cd.delta);
  R["threshold"] = rational_json(cd.threshold);
  R["threshold_met"] = cd.threshold_met;
  R["eps_prime"] = rational_json(eps_prime(*s.ctx->L, o.hk, eps));
  R["gamma_check"] = {{"lhs", rational_json(gc.lhs)}, {"rhs", rational_json(gc.rhs)}, {"holds", gc.holds}};
  return out;
}

Outcome cmd_probe(const Options& o, json& cfg) {
  cfg["n"] = o.n;
  cfg["epsilon"] = o.epsilon;
  Rational eps = rational_arg(o.epsilon, "--epsilon");
  if (eps < 0 || eps >= 1) throw InputError("--epsilon", "epsilon must lie in [0, 1)");
  auto s = select(o);
  require_enumerable(s);
  if (o.n < s.ctx->r() || o.n > 10) throw InputError("--n", "n must lie in [r, 10]");
  IndexedSpace sp(s.ctx, o.n);
  auto opt = search_options(o);
  auto ext = search_extremal(sp, opt);
  Outcome out;
  if (!ext.exact) {
    out.result["ex"] = big_str(ext.ex);
    out.result["exact"] = false;
    out.code = kExitBudget;
    return out;
  }
  auto p = stability_probe(sp, ext, eps, opt);
  out.result["n"] = p.n;
  out.result["epsilon"] = rational_json(p.epsilon);
  out.result["ex"] = big_str(ext.ex);
  out.result["extremal_templates"] = ext.templates.size();
  out.result["near_templates"] = p.near.size();
  out.result["worst_gap"] = rational_json(p.worst_gap);
  out.result["exact"] = p.exact;
  json worst = json::array();
  for (auto& e : p.near)
    if (e.gap == p.worst_gap && worst.size() < o.limit) {
      json w = template_entry(s, e.T);
      w["sub"] = big_str(e.sub);
      worst.push_back(w);
    }
  out.result["worst"] = worst;
  if (!p.exact) out.code = kExitBudget;
  return out;
}

// oracle versus generic search for one instance
Outcome cmd_verify(const Options& o, json& cfg) {
  cfg["nmax"] = o.nmax;
  if (o.instance.empty()) throw InputError("--instance", "verify needs --instance");
  if (o.instance == "errorex") throw InputError("--instance", "no oracle for errorex");
  if (o.nmax < 3 || o.nmax > 8) throw InputError("--nmax", "nmax must lie in [3, 8]");
  if (o.instance == "metric" && (o.r < 2 || o.r > 12)) throw InputError("--r", "r must lie in [2, 12]");
  if (o.instance == "digraph" && (o.k < 2 || o.k > 6)) throw InputError("--k", "k must lie in [2, 6]");
  if (o.instance == "colored" && o.spec.empty()) throw InputError("--spec", "colored instance needs --spec file.json");
  auto opt = search_options(o);
  Outcome out;
  json rows = json::array();
  bool all_ok = true, exact = true;
  std::optional<MetricInstance> mi;
  std::optional<DigraphInstance> di;
  std::optional<TriplesInstance> ti;
  std::optional<ColoredInstance> ci;
  if (o.instance == "metric") mi = metric_instance(o.r);
  if (o.instance == "digraph") di = digraph_instance(o.k);
  if (o.instance == "triples") ti = triples_instance();
  if (o.instance == "colored") ci = colored_instance(colored_spec_from_json(load_json_file(o.spec)));
  ContextRef ctx = mi ? mi->ctx : di ? di->ctx : ti ? ti->ctx : ci->ctx;
  for (int n = 3; n <= o.nmax; ++n) {
    json row;
    row["n"] = n;
    auto rep = search_extremal(ctx, n, opt);
    exact = exact && rep.exact;
    BigInt oracle;
    std::optional<bool> images_ok;
    if (mi) {
      oracle = metric_oracle(o.r, n);
      std::vector<SetGraph> imgs;
      for (auto& T : rep.templates) imgs.push_back(metric_psi(*mi, T));
      std::sort(imgs.begin(), imgs.end());
      images_ok = imgs == metric_extremal_family(o.r, n);
    } else if (di) {
      oracle = digraph_oracle(o.k, n);
      std::vector<Digraph> imgs;
      for (auto& T : rep.templates) imgs.push_back(digraph_psi(*di, T));
      std::sort(imgs.begin(), imgs.end());
      imgs.erase(std::unique(imgs.begin(), imgs.end()), imgs.end());
      images_ok = imgs == digraph_DT(o.k, n);
      SearchOptions red = opt;
      red.candidate_filter = digraph_downward_filter(*di);
      auto rr = search_extremal(ctx, n, red);
      row["ex_downward"] = big_str(rr.ex);
      if (rr.ex != rep.ex) all_ok = false;
    } else if (ti) {
      oracle = triples_oracle(n);
      row["tripartite_weight"] = big_str(triples_tripartite_weight(n));
    } else {
      oracle = colored_max_density(ci->spec, n).product;
    }
    bool ok = rep.exact && rep.ex == oracle && images_ok.value_or(true);
    all_ok = all_ok && ok;
    row["oracle"] = big_str(oracle);
    row["ex"] = big_str(rep.ex);
    row["maximizers"] = rep.templates.size();
    if (images_ok) row["images_match"] = *images_ok;
    row["exact"] = rep.exact;
    row["match"] = ok;
    rows.push_back(row);
    out.csv.push_back({std::to_string(n), big_str(rep.ex), fixed(rep.b_n())});
  }
  out.result["instance"] = o.instance;
  out.result["table"] = rows;
  out.result["all_match"] = all_ok;
  if (!exact)
    out.code = kExitBudget;
  else if (!all_ok)
    out.code = kExitVerify;
  return out;
}

json cmd_instance(const Options& o) {
  if (o.instance == "metric") return property_to_json(*metric_instance(o.r).H);
  if (o.instance == "digraph") return property_to_json(digraph_property(o.k));
  if (o.instance == "triples") return property_to_json(triples_property());
  if (o.instance == "errorex") return property_to_json(errorex_property());
  if (o.instance == "colored") {
    if (o.spec.empty()) throw InputError("--spec", "colored instance needs --spec file.json");
    return property_to_json(*colored_instance(colored_spec_from_json(load_json_file(o.spec))).H);
  }
  throw InputError("instance", "unknown instance " + o.instance);
}

void emit(const Options& o, const json& j) {
  std::string text = j.dump(2) + "\n";
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.output);
  if (!f) throw InputError("--output", "cannot write " + o.output);
  f << text;
}

void emit_csv(const Options& o, const Outcome& out) {
  if (o.csv.empty()) return;
  std::ofstream f(o.csv);
  if (!f) throw InputError("--csv", "cannot write " + o.csv);
  f << "n,ex,b_n\n";
  for (auto& row : out.csv) f << row[0] << "," << row[1] << "," << row[2] << "\n";
}

void add_selection(CLI::App* c, Options& o, const char* k_flag = "--k") {
  c->add_option("--property", o.property, "property JSON file");
  c->add_option("--forbid", o.forbid, "structure JSON file to forbid (repeatable)");
  c->add_option("--mode", o.mode, "embedding mode for --forbid")->check(CLI::IsMember({"induced", "non-induced"}));
  c->add_option("--instance", o.instance, "built-in instance")
      ->check(CLI::IsMember({"metric", "digraph", "triples", "colored", "errorex"}));
  c->add_option("--r", o.r, "metric instance: largest distance");
  c->add_option(k_flag, o.k, "digraph instance: forbidden tournament is T_{k+1}");
  c->add_option("--spec", o.spec, "colored instance spec JSON");
  c->add_option("--max-type-bits", o.max_type_bits, "list S_r(H) only up to this many atomic facts");
}

void add_run(CLI::App* c, Options& o) {
  c->add_option("--budget", o.budget, "search node budget");
  c->add_option("--time-limit", o.time_limit, "wall-clock seconds per search, 0 for none");
  c->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 256));
  c->add_option("--seed", o.seed, "seed for sampled checks");
  c->add_option("--output", o.output, "write the JSON report here instead of stdout");
  c->add_option("--csv", o.csv, "also write a table n,ex,b_n");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* w = std::getenv("HEREDITARY_LAB_WORKERS")) {
    try {
      o.workers = std::max(1, std::stoi(w));
    } catch (const std::exception&) {
      std::cerr << "error: HEREDITARY_LAB_WORKERS must be an integer\n";
      return kExitInput;
    }
  }

  CLI::App app{"Templates, extremal numbers and containers for hereditary properties of finite structures"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* types = app.add_subcommand("types", "list the realized r-types S_r(H)");
  add_selection(types, o);
  add_run(types, o);
  types->add_flag("--all", o.all_types, "list the whole type space instead");

  auto* en = app.add_subcommand("enumerate", "count labeled members of H on n points");
  add_selection(en, o);
  add_run(en, o);
  en->add_option("--n", o.n, "domain size")->required();
  en->add_flag("--list", o.list, "include members in the report");
  en->add_option("--limit", o.limit, "members to list");

  auto* ex = app.add_subcommand("extremal", "ex(n,H) and its maximizing templates");
  add_selection(ex, o);
  add_run(ex, o);
  ex->add_option("--n", o.n, "domain size")->required();
  ex->add_flag("--all-maximizers", o.all_maximizers, "report every maximizer");

  auto* de = app.add_subcommand("density", "ex(n,H) and b_n for n = r..nmax");
  add_selection(de, o);
  add_run(de, o);
  de->add_option("--nmax", o.nmax, "largest n")->required();

  auto* sc = app.add_subcommand("subcount", "sub(T), choice count and errors of a template");
  sc->add_option("template", o.files, "template JSON")->required();
  add_run(sc, o);
  sc->add_option("--max-type-bits", o.max_type_bits, "list S_r(H) only up to this many atomic facts");

  auto* hr = app.add_subcommand("hrandom", "decide whether a template is H-random");
  hr->add_option("template", o.files, "template JSON")->required();
  add_run(hr, o);
  hr->add_option("--max-type-bits", o.max_type_bits, "list S_r(H) only up to this many atomic facts");

  auto* di = app.add_subcommand("distance", "dist and d between two structures");
  di->add_option("structures", o.files, "two structure JSON files")->required()->expected(2);
  di->add_flag("--ac", o.ac, "also report the tuple distance d");
  di->add_flag("--check-bound", o.check_bound, "check dist <= (r!)^2 2^r d");
  add_run(di, o);

  auto* co = app.add_subcommand("containers", "containers hypergraph and co-degree function");
  add_selection(co, o, "--digraph-k");
  add_run(co, o);
  co->add_option("--n", o.n, "ground set size")->required();
  co->add_option("--k", o.hk, "edge support size");
  co->add_option("--tau", o.tau, "tau, or auto for n^{-1/m}/gamma");
  co->add_option("--gamma", o.gamma, "gamma");
  co->add_option("--epsilon", o.epsilon, "epsilon");

  auto* ps = app.add_subcommand("probe-stability", "worst distance of near-extremal templates to the extremal set");
  add_selection(ps, o);
  add_run(ps, o);
  ps->add_option("--n", o.n, "domain size")->required();
  ps->add_option("--epsilon", o.epsilon, "near-extremal slack");
  ps->add_option("--limit", o.limit, "worst templates to list");

  auto* ve = app.add_subcommand("verify", "compare an instance oracle with the generic search");
  add_selection(ve, o);
  add_run(ve, o);
  ve->add_option("--nmax", o.nmax, "largest n")->required();

  auto* in = app.add_subcommand("instance", "print the property JSON of a built-in instance");
  in->add_option("name", o.instance, "metric | digraph | triples | colored | errorex")
      ->required()
      ->check(CLI::IsMember({"metric", "digraph", "triples", "colored", "errorex"}));
  in->add_option("--r", o.r, "metric: largest distance");
  in->add_option("--k", o.k, "digraph: forbidden tournament is T_{k+1}");
  in->add_option("--spec", o.spec, "colored spec JSON");
  in->add_option("--output", o.output, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  auto* cmd = app.get_subcommands().front();
  try {
    if (cmd == in) {
      emit(o, cmd_instance(o));
      return kExitOk;
    }
    json cfg = common_config(o);
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    if (cmd == types) out = cmd_types(o, cfg);
    if (cmd == en) out = cmd_enumerate(o, cfg);
    if (cmd == ex) out = cmd_extremal(o, cfg);
    if (cmd == de) out = cmd_density(o, cfg);
    if (cmd == sc) out = cmd_subcount(o, cfg);
    if (cmd == hr) out = cmd_hrandom(o, cfg);
    if (cmd == di) out = cmd_distance(o, cfg);
    if (cmd == co) out = cmd_containers(o, cfg);
    if (cmd == ps) out = cmd_probe(o, cfg);
    if (cmd == ve) out = cmd_verify(o, cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json report;
    report["tool"] = "hereditary_lab";
    report["version"] = kVersion;
    report["command"] = cmd->get_name();
    report["config"] = cfg;
    report["result"] = out.result;
    if (out.code == kExitBudget) report["partial"] = true;
    report["timing"] = {{"seconds", secs}};
    emit(o, report);
    emit_csv(o, out);
    return out.code;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const BudgetExhausted& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
