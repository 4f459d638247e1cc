#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hyperflow/attack/channel.hpp"
#include "hyperflow/lang/printer.hpp"
#include "hyperflow/lang/validate.hpp"
#include "hyperflow/measures/measures.hpp"

namespace hyperflow::attack {

using semantics::HyperDist;
using semantics::Layout;
using semantics::SplitState;

/// Outputs of S and I from one initial state together with the first
/// visible value at which the refinement fails.
struct AttackInstance {
  semantics::CompiledProgram s, i;
  HyperDist out_s, out_i;
  VKey trigger;
  Partition source, target;
  std::vector<Rational> certificate;
};

inline AttackInstance prepare_attack(const lang::Program& s, const lang::Program& i, const SplitState& init) {
  AttackInstance a{semantics::compile(s), semantics::compile(i), {}, {}, {}, {}, {}, {}};
  semantics::require_same_layout(*a.s.layout, *a.i.layout);
  a.out_s = semantics::eval(a.s, init);
  a.out_i = semantics::eval(a.i, init);
  const auto res = refine::check_refinement(a.out_s, a.out_i);
  if (res.functional_mismatch)
    throw Error(Errc::PreconditionViolated, "the programs differ functionally; no context is needed");
  if (res.refined) throw Error(Errc::PreconditionViolated, "the first program refines to the second");
  a.trigger = *res.failing_v;
  a.source = res.failing_source;
  a.target = res.failing_target;
  a.certificate = res.certificate;
  return a;
}

/// Values written by the context for each channel column, and the constant
/// written away from the trigger.
struct ColumnValues {
  std::string var;
  bool fresh = false;
  std::vector<Value> extras;  // split parts of the zero column
  std::vector<Value> labels;  // one per target fraction
  Value else_value;
};

/// A single numeric hidden variable is overwritten directly; otherwise a
/// fresh hidden variable receives the channel output.
inline ColumnValues column_values(const lang::Program& p, const Layout& l, const AttackChannel& ch) {
  ColumnValues out;
  const auto& hid = l.hidden();
  const bool direct = hid.size() == 1 && std::all_of(hid[0].domain.begin(), hid[0].domain.end(),
                                                      [](const Value& v) { return v.is_number(); });
  auto used = [&](const Value& v) {
    return std::find(out.labels.begin(), out.labels.end(), v) != out.labels.end() ||
           (direct && std::find(hid[0].domain.begin(), hid[0].domain.end(), v) != hid[0].domain.end());
  };
  auto negatives = [&](std::size_t n) {
    std::vector<Value> vs;
    for (std::int64_t k = -1; vs.size() < n; --k)
      if (!used(Value::integer(k))) vs.push_back(Value::integer(k));
    std::reverse(vs.begin(), vs.end());
    return vs;
  };
  if (direct) {
    out.var = hid[0].name;
    const auto& dom = hid[0].domain;
    for (std::size_t j = 0; j < ch.targets && j < dom.size(); ++j) out.labels.push_back(dom[j]);
    Rational top = dom.back().as_number();
    while (out.labels.size() < ch.targets) out.labels.push_back(Value::number(top += 1));
    const Value zero = Value::integer(0);
    if (ch.extra_columns() == 1 && std::find(out.labels.begin(), out.labels.end(), zero) == out.labels.end())
      out.extras.push_back(zero);
    else
      out.extras = negatives(ch.extra_columns());
    const bool has_zero = std::find(dom.begin(), dom.end(), zero) != dom.end();
    out.else_value = has_zero ? zero : dom.front();
    return out;
  }
  out.fresh = true;
  out.var = "atk";
  auto taken = [&](const std::string& n) {
    return std::any_of(p.globals.begin(), p.globals.end(), [&](const lang::VarDecl& d) { return d.name == n; });
  };
  for (int k = 1; taken(out.var); ++k) out.var = "atk" + std::to_string(k);
  for (std::size_t j = 0; j < ch.targets; ++j) out.labels.push_back(Value::integer(static_cast<std::int64_t>(j + 1)));
  if (ch.extra_columns() == 1) out.extras.push_back(Value::integer(0));
  else out.extras = negatives(ch.extra_columns());
  out.else_value = Value::integer(0);
  return out;
}

namespace detail {

inline lang::ExprPtr equals_all(const std::vector<semantics::VarInfo>& vars, const std::vector<Value>& vals) {
  lang::ExprPtr out;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    auto eq = lang::binary(lang::BinOp::Eq, lang::var(vars[k].name), lang::lit(vals[k]));
    out = out ? lang::binary(lang::BinOp::And, out, eq) : eq;
  }
  return out;
}

}  // namespace detail

/// Context program: the declarations of S (hidden domain extended, or a
/// fresh hidden variable added) and the body
/// `if v = v' then h <- row_D(h) else h := c fi`.
inline lang::Program emit_context(const lang::Program& s, const Layout& l, const AttackChannel& ch) {
  const ColumnValues cv = column_values(s, l, ch);
  const RatMatrix d = ch.expanded();
  std::vector<Value> columns = cv.extras;
  columns.insert(columns.end(), cv.labels.begin(), cv.labels.end());

  lang::Program ctx;
  ctx.agents = s.agents;
  ctx.globals = s.globals;
  std::vector<Value> dom = columns;
  dom.push_back(cv.else_value);
  auto merged = [&dom](const std::vector<Value>& base) {
    std::vector<Value> out = base;
    for (const auto& v : dom)
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return semantics::canonical_domain(std::move(out));
  };
  if (cv.fresh) {
    ctx.globals.push_back(lang::VarDecl{cv.var, merged({}), lang::Visibility::hidden()});
  } else {
    for (auto& g : ctx.globals)
      if (g.name == cv.var) g.domain = merged(g.domain);
  }

  lang::DistPtr chain;
  for (std::size_t i = ch.rows.size(); i-- > 0;) {
    if (!ch.relevant[i]) continue;
    std::vector<std::pair<Value, Rational>> entries;
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (d(i, j) != 0) entries.emplace_back(columns[j], d(i, j));
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<lang::ExprPtr, lang::ExprPtr>> items;
    for (const auto& [v, p] : entries) items.emplace_back(lang::lit(v), lang::lit_num(p));
    auto row = lang::explicit_dist(std::move(items));
    chain = chain ? lang::cond_dist(row, detail::equals_all(l.hidden(), l.values(false, ch.rows[i].code)), chain) : row;
  }
  if (!chain) throw Error(Errc::Internal, "channel has no relevant rows");

  std::vector<lang::StmtPtr> resets;
  if (cv.fresh)
    for (const auto& h : l.hidden()) resets.push_back(lang::assign(h.name, lang::lit(h.domain.front())));
  auto with_resets = [&](lang::StmtPtr first) {
    std::vector<lang::StmtPtr> parts{std::move(first)};
    parts.insert(parts.end(), resets.begin(), resets.end());
    return lang::seq_all(parts);
  };
  lang::StmtPtr then_s = with_resets(lang::choose(cv.var, chain));
  if (l.visible().empty()) {
    ctx.body = then_s;
  } else {
    lang::StmtPtr else_s = with_resets(lang::assign(cv.var, lang::lit(cv.else_value)));
    ctx.body = lang::if_stmt(detail::equals_all(l.visible(), l.values(true, ch.trigger.code)), then_s, else_s);
  }
  return ctx;
}

/// `p; ctx` over the context's declarations.
inline lang::Program compose(const lang::Program& p, const lang::Program& ctx) {
  return lang::Program{ctx.agents, ctx.globals, lang::seq(p.body, ctx.body)};
}

/// Re-encodes a split-state by variable name; hidden variables missing from
/// `from` take the first value of their domain.
inline SplitState remap_state(const Layout& from, const Layout& to, const SplitState& st) {
  auto lookup = [](const Layout& l, bool visible, std::uint64_t code) {
    std::map<std::string, Value> out;
    const auto vals = l.values(visible, code);
    for (std::size_t k = 0; k < vals.size(); ++k) out.emplace(l.part(visible)[k].name, vals[k]);
    return out;
  };
  auto encode = [&](bool visible, const std::map<std::string, Value>& named) {
    std::vector<Value> vals;
    for (const auto& v : to.part(visible)) {
      auto it = named.find(v.name);
      vals.push_back(it != named.end() ? it->second : v.domain.front());
    }
    return vals;
  };
  const VKey v = semantics::visible_key(to, encode(true, lookup(from, true, st.v.code)));
  DistBuilder<HKey> b;
  for (const auto& [h, p] : st.delta) b.add(semantics::hidden_key(to, encode(false, lookup(from, false, h.code))), p);
  return SplitState{v, b.build()};
}

struct AttackReport {
  lang::Program context;
  std::string context_source;
  Rational bv_s, bv_i;
  bool verdict = false;
  std::string method;
  VKey trigger;
  SeparatingDirection direction;
  AttackChannel channel;
  HyperDist out_s, out_i;  // of S;C and I;C
};

/// Runs S;C and I;C from the initial state, with C re-parsed from its
/// printed source.
inline AttackReport verify_channel(const lang::Program& s, const lang::Program& i, const SplitState& init,
                                   const AttackInstance& inst, const AttackChannel& ch) {
  AttackReport r;
  r.trigger = ch.trigger;
  r.channel = ch;
  r.context_source = lang::pretty_print(emit_context(s, *inst.s.layout, ch));
  r.context = lang::parse(r.context_source);
  const auto sc = semantics::compile(compose(s, r.context));
  const auto ic = semantics::compile(compose(i, r.context));
  const SplitState start = remap_state(*inst.s.layout, *sc.layout, init);
  r.out_s = semantics::eval(sc, start);
  r.out_i = semantics::eval(ic, start);
  r.bv_s = measures::bayes_vuln(r.out_s);
  r.bv_i = measures::bayes_vuln(r.out_i);
  r.verdict = r.bv_i > r.bv_s;
  return r;
}

inline AttackReport attack_with_direction(const lang::Program& s, const lang::Program& i, const SplitState& init,
                                          const AttackInstance& inst, const SeparatingDirection& dir) {
  const auto ch = build_attack_channel(dir, inst.source, inst.target, inst.s.layout->h_size(), inst.trigger);
  AttackReport r = verify_channel(s, i, init, inst, ch);
  r.direction = dir;
  return r;
}

struct AttackOptions {
  std::uint64_t vertex_cap = kDefaultVertexCap;
  bool use_certificate = false;  // skip vertex enumeration
};

/// Context C with bv(I;C) > bv(S;C), given that S does not refine to I from
/// `init`. Enumeration above the vertex cap falls back to the certificate.
inline AttackReport synthesize_and_verify(const lang::Program& s, const lang::Program& i, const SplitState& init,
                                          const AttackOptions& opts = {}) {
  const AttackInstance inst = prepare_attack(s, i, init);
  const bool enumerate = !opts.use_certificate && vertex_count(inst.source, inst.target) <= opts.vertex_cap;
  const SeparatingDirection dir = enumerate ? separating_direction(inst.source, inst.target, opts.vertex_cap)
                                            : farkas_direction(inst.source, inst.target, inst.certificate);
  AttackReport r = attack_with_direction(s, i, init, inst, dir);
  r.method = enumerate ? "vertex" : "certificate";
  return r;
}

inline nlohmann::ordered_json report_json(const AttackReport& r, const Layout& l) {
  auto matrix = [](const RatMatrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < m.rows(); ++a) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::size_t b = 0; b < m.cols(); ++b) row.push_back(to_string(m(a, b)));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::ordered_json j;
  j["trigger"] = refine::v_label(l, r.trigger);
  j["method"] = r.method;
  j["margin"] = to_string(r.direction.margin);
  j["direction"] = matrix(r.direction.x);
  j["channel"] = matrix(r.channel.expanded());
  j["split"] = r.channel.extra_columns();
  j["bv_S_then_C"] = to_string(r.bv_s);
  j["bv_I_then_C"] = to_string(r.bv_i);
  j["verdict"] = r.verdict;
  j["context"] = r.context_source;
  return j;
}

}  // namespace hyperflow::attack
