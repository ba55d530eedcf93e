#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "template.hpp"

namespace hlab {

using json = nlohmann::ordered_json;

// Malformed input; `where` is a JSON pointer-ish field path or "line:col".
struct InputError : std::invalid_argument {
  std::string where;
  InputError(std::string w, const std::string& msg) : std::invalid_argument(w + ": " + msg), where(std::move(w)) {}
};

inline json parse_json_text(const std::string& text, const std::string& source = "<input>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

inline std::string big_str(const BigInt& x) { return x.str(); }

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw InputError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(path + "/" + key, "missing field");
  return *it;
}

inline int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError(path, "expected an integer");
  return j.get<int>();
}

inline std::vector<int> as_int_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(path, "expected an array of integers");
  std::vector<int> v;
  for (size_t i = 0; i < j.size(); ++i) v.push_back(as_int(j[i], path + "/" + std::to_string(i)));
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------- signatures

inline json signature_to_json(const Signature& sig) {
  json a = json::array();
  for (auto& r : sig.relations()) a.push_back({{"name", r.name}, {"arity", r.arity}});
  return a;
}

inline SigRef signature_from_json(const json& j, const std::string& path = "/signature") {
  if (!j.is_array() || j.empty()) throw InputError(path, "expected a nonempty array of relations");
  std::vector<Relation> rels;
  for (size_t i = 0; i < j.size(); ++i) {
    std::string p = path + "/" + std::to_string(i);
    const json& name = detail::field(j[i], "name", p);
    if (!name.is_string() || name.get<std::string>().empty()) throw InputError(p + "/name", "expected a nonempty string");
    int arity = detail::as_int(detail::field(j[i], "arity", p), p + "/arity");
    if (arity < 1) throw InputError(p + "/arity", "arity must be at least 1");
    rels.push_back({name.get<std::string>(), arity});
  }
  try {
    return make_signature(std::move(rels));
  } catch (const std::invalid_argument& e) {
    throw InputError(path, e.what());
  }
}

// ---------------------------------------------------------------- structures

inline json structure_to_json(const Structure& M) {
  json rel = json::object();
  for (size_t i = 0; i < M.signature().size(); ++i) {
    json tl = json::array();
    for (auto& t : M.tuples(static_cast<int>(i))) tl.push_back(t);
    rel[M.signature()[i].name] = tl;
  }
  return {{"signature", signature_to_json(M.signature())}, {"n", M.n()}, {"relations", rel}};
}

// `sig` fixes the signature when the caller already knows it; the object's own
// "signature" field, if present, must then agree.
inline Structure structure_from_json(const json& j, SigRef sig = nullptr, const std::string& path = "") {
  if (!j.is_object()) throw InputError(path.empty() ? "/" : path, "expected a structure object");
  if (j.contains("signature")) {
    auto own = signature_from_json(j["signature"], path + "/signature");
    if (sig && !same_signature(sig, own)) throw InputError(path + "/signature", "signature differs from the property's");
    if (!sig) sig = own;
  }
  if (!sig) throw InputError(path + "/signature", "missing field");
  int n = detail::as_int(detail::field(j, "n", path), path + "/n");
  if (n < 0 || n > 64) throw InputError(path + "/n", "n out of range");
  Structure M(sig, n);
  if (!j.contains("relations")) return M;
  const json& rel = j["relations"];
  if (!rel.is_object()) throw InputError(path + "/relations", "expected an object keyed by relation name");
  for (auto it = rel.begin(); it != rel.end(); ++it) {
    std::string p = path + "/relations/" + it.key();
    int idx = sig->index_of(it.key());
    if (idx < 0) throw InputError(p, "relation not in signature");
    if (!it.value().is_array()) throw InputError(p, "expected an array of tuples");
    for (size_t t = 0; t < it.value().size(); ++t) {
      std::string pt = p + "/" + std::to_string(t);
      auto tup = detail::as_int_list(it.value()[t], pt);
      try {
        M.add_tuple(idx, tup);
      } catch (const std::invalid_argument& e) {
        throw InputError(pt, e.what());
      }
    }
  }
  return M;
}

// ---------------------------------------------------------------- properties

inline const char* mode_name(EmbedMode m) { return m == EmbedMode::induced ? "induced" : "non-induced"; }

inline EmbedMode parse_mode(const json& j, const std::string& path) {
  if (!j.is_string()) throw InputError(path, "expected \"induced\" or \"non-induced\"");
  auto s = j.get<std::string>();
  if (s == "induced") return EmbedMode::induced;
  if (s == "non-induced" || s == "non_induced") return EmbedMode::non_induced;
  throw InputError(path, "unknown mode " + s);
}

inline json property_to_json(const HereditaryProperty& H) {
  json j;
  if (!H.name.empty()) j["name"] = H.name;
  j["signature"] = signature_to_json(*H.sig);
  j["mode"] = mode_name(H.mode);
  if (H.unconstrained) {
    json u = json::array();
    for (size_t i = 0; i < H.sig->size(); ++i)
      if (H.unconstrained >> i & 1) u.push_back((*H.sig)[i].name);
    j["unconstrained"] = u;
  }
  json f = json::array();
  for (auto& x : H.forbidden) {
    json s = structure_to_json(x.structure);
    s.erase("signature");
    if (x.mode != H.mode) s["mode"] = mode_name(x.mode);
    f.push_back(s);
  }
  j["forbidden"] = f;
  if (!H.warnings.empty()) j["warnings"] = H.warnings;
  return j;
}

inline HereditaryProperty property_from_json(const json& j, const std::string& path = "") {
  if (!j.is_object()) throw InputError(path.empty() ? "/" : path, "expected a property object");
  HereditaryProperty H;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw InputError(path + "/name", "expected a string");
    H.name = j["name"].get<std::string>();
  }
  H.sig = signature_from_json(detail::field(j, "signature", path), path + "/signature");
  if (j.contains("mode")) H.mode = parse_mode(j["mode"], path + "/mode");
  if (j.contains("unconstrained")) {
    const json& u = j["unconstrained"];
    if (!u.is_array()) throw InputError(path + "/unconstrained", "expected an array of relation names");
    for (size_t i = 0; i < u.size(); ++i) {
      int idx = u[i].is_string() ? H.sig->index_of(u[i].get<std::string>()) : -1;
      if (idx < 0) throw InputError(path + "/unconstrained/" + std::to_string(i), "not a relation of the signature");
      H.unconstrained |= uint64_t(1) << idx;
    }
  }
  const json& f = detail::field(j, "forbidden", path);
  if (!f.is_array()) throw InputError(path + "/forbidden", "expected an array of structures");
  for (size_t i = 0; i < f.size(); ++i) {
    std::string p = path + "/forbidden/" + std::to_string(i);
    Forbidden fb{structure_from_json(f[i], H.sig, p), H.mode};
    if (fb.structure.n() < 1) throw InputError(p + "/n", "forbidden structures need n >= 1");
    if (f[i].contains("mode")) fb.mode = parse_mode(f[i]["mode"], p + "/mode");
    H.forbidden.push_back(std::move(fb));
  }
  return H;
}

// ---------------------------------------------------------------- types

inline json type_to_json(const TypeLayout& L, TypeCode p) {
  json facts = json::object();
  for (int s = 0; s < L.fact_count(); ++s) facts[L.fact_name(s)] = static_cast<bool>(p >> s & 1);
  return {{"id", type_id(p)}, {"facts", facts}};
}

inline json type_listing(const TypeLayout& L, const std::vector<TypeCode>& codes) {
  json a = json::array();
  for (TypeCode p : codes) a.push_back(type_to_json(L, p));
  return a;
}

// ---------------------------------------------------------------- templates

inline std::string subset_key(const std::vector<int>& A) {
  std::string s = "[";
  for (size_t i = 0; i < A.size(); ++i) s += (i ? "," : "") + std::to_string(A[i]);
  return s + "]";
}

inline std::vector<int> parse_subset_key(const std::string& key, const std::string& path) {
  json j;
  try {
    j = json::parse(key);
  } catch (const json::parse_error&) {
    throw InputError(path, "subset key must look like [1,2]");
  }
  return detail::as_int_list(j, path);
}

// `property` is embedded verbatim: a path string or an inline property object
inline json template_to_json(const Template& T, const json& property) {
  json ch = json::object();
  auto subs = subsets_colex(T.n(), T.r());
  for (size_t i = 0; i < subs.size(); ++i) {
    json ids = json::array();
    for (TypeCode p : T.choices(i)) ids.push_back(type_id(p));
    ch[subset_key(subs[i])] = ids;
  }
  return {{"property", property}, {"n", T.n()}, {"choices", ch}};
}

inline json template_to_json(const Template& T) { return template_to_json(T, property_to_json(*T.ctx()->H)); }

struct LoadedTemplate {
  ContextRef ctx;
  Template T;
  Validation validation;
};

// Resolves "property" (inline, or a path relative to base_dir), then reads
// either "choices" (canonical) or "atoms" (raw, validated by normalize_raw).
// `ctx` can be supplied to share one context between several templates.
inline LoadedTemplate template_from_json(const json& j, const std::string& base_dir = ".", ContextRef ctx = nullptr,
                                         int max_list_bits = 28) {
  if (!j.is_object()) throw InputError("/", "expected a template object");
  if (!ctx) {
    const json& pj = detail::field(j, "property", "");
    HereditaryProperty H;
    if (pj.is_string()) {
      std::filesystem::path p(pj.get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      H = property_from_json(load_json_file(p.string()));
    } else {
      H = property_from_json(pj, "/property");
    }
    try {
      ctx = make_context(H, max_list_bits);
    } catch (const BudgetExhausted&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw InputError("/property", e.what());
    }
  }
  int n = detail::as_int(detail::field(j, "n", ""), "/n");
  if (n < ctx->r() || n > 64) throw InputError("/n", "n must lie in [r, 64]");
  const auto& L = *ctx->L;
  if (j.contains("atoms")) {
    RawTemplate raw;
    raw.n = n;
    const json& at = j["atoms"];
    if (!at.is_array()) throw InputError("/atoms", "expected an array of {type, tuple}");
    for (size_t i = 0; i < at.size(); ++i) {
      std::string p = "/atoms/" + std::to_string(i);
      const json& id = detail::field(at[i], "type", p);
      if (!id.is_string()) throw InputError(p + "/type", "expected a type id");
      TypeCode c;
      try {
        c = parse_type_id(id.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw InputError(p + "/type", e.what());
      }
      raw.atoms.push_back({c, detail::as_int_list(detail::field(at[i], "tuple", p), p + "/tuple")});
    }
    auto [T, v] = normalize_raw(ctx, raw);
    if (!v.ok) throw InputError("/atoms", v.axiom + " axiom fails on " + subset_key(v.subset) + ": " + v.message);
    return {ctx, *T, v};
  }
  Template T(ctx, n);
  const json& ch = detail::field(j, "choices", "");
  if (!ch.is_object()) throw InputError("/choices", "expected an object keyed by subsets");
  for (auto it = ch.begin(); it != ch.end(); ++it) {
    std::string p = "/choices/" + it.key();
    auto A = parse_subset_key(it.key(), p);
    if (static_cast<int>(A.size()) != ctx->r()) throw InputError(p, "subset size differs from r");
    std::sort(A.begin(), A.end());
    if (std::adjacent_find(A.begin(), A.end()) != A.end()) throw InputError(p, "repeated element");
    if (A.front() < 1 || A.back() > n) throw InputError(p, "element out of range");
    if (!it.value().is_array()) throw InputError(p, "expected an array of type ids");
    std::vector<TypeCode> codes;
    for (size_t i = 0; i < it.value().size(); ++i) {
      std::string pi = p + "/" + std::to_string(i);
      if (!it.value()[i].is_string()) throw InputError(pi, "expected a type id");
      TypeCode c;
      try {
        c = parse_type_id(it.value()[i].get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw InputError(pi, e.what());
      }
      if ((c & ~L.full_mask()) != 0) throw InputError(pi, "type id outside the layout");
      if (!ctx->realized(c)) throw InputError(pi, type_id(c) + " is not realized in the property");
      codes.push_back(c);
    }
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    T.set_choices(A, codes);
  }
  Validation v;
  for (size_t i = 0; i < T.subset_count(); ++i)
    if (T.choices(i).empty()) {
      v.complete = false;
      v.axiom = "complete";
      v.subset = subsets_colex(n, ctx->r())[i];
      v.message = "no choice on this subset";
      break;
    }
  return {ctx, T, v};
}

inline json rational_json(const Rational& q) { return {{"exact", rational_str(q)}, {"approx", to_double(q)}}; }

}  // namespace hlab
