#include "hyperflow/cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hyperflow/attack/synthesize.hpp"
#include "hyperflow/cli/golden.hpp"
#include "hyperflow/cli/init_spec.hpp"
#include "hyperflow/lang/ast_json.hpp"
#include "hyperflow/lang/transform.hpp"
#include "hyperflow/semantics/normal_form.hpp"
#include "hyperflow/semantics/serialize.hpp"

#ifndef HYPERFLOW_CORPUS_DIR
#define HYPERFLOW_CORPUS_DIR "corpus"
#endif

namespace hyperflow::cli {
namespace {

using Json = nlohmann::ordered_json;
using semantics::CompiledProgram;
using semantics::HyperDist;

struct Options {
  std::string file, other, init, measure = "bayes", order = "refine", agent, output;
  std::string corpus = HYPERFLOW_CORPUS_DIR;
  std::uint64_t seed = 1;
  std::uint64_t vertex_cap = attack::kDefaultVertexCap;
  bool json = false, certificate = false;
};

lang::Program load(const std::string& path, std::ostream& err) {
  const std::string src = read_file(path);
  const lang::Program p = lang::resolve_atoms(lang::parse_syntax(src));
  const auto diags = lang::validate(p);
  for (const auto& d : diags) err << path << ": " << lang::to_string(d) << "\n";
  if (lang::has_errors(diags)) throw Error(Errc::InvalidArgument, "'" + path + "' does not validate");
  return p;
}

/// The program, projected onto `--agent` when one is given.
lang::Program load_view(const Options& o, const std::string& path, std::ostream& err) {
  const lang::Program p = load(path, err);
  return o.agent.empty() ? p : lang::project_view(p, o.agent);
}

std::vector<InitPoint> initial_states(const Options& o, const semantics::Layout& l) {
  return expand(parse_init_spec(o.init, o.seed), l);
}

std::string scope_text(std::size_t n, std::uint64_t seed) {
  return "pointwise over " + std::to_string(n) + " initial state(s) (seed " + std::to_string(seed) + ")";
}

std::string value_text(const HyperDist& d, const measures::Measure& m) {
  switch (m.kind) {
    case measures::Measure::Kind::BayesVuln: return to_short_string(measures::bayes_vuln(d));
    case measures::Measure::Kind::GuessingEntropy: return to_short_string(measures::guessing_entropy(d));
    default: return measures::measure_value(d, m);
  }
}

int cmd_parse(const Options& o, std::ostream& out, std::ostream& err) {
  const lang::Program p = load(o.file, err);
  if (o.json)
    out << lang::program_json(p).dump(2) << "\n";
  else
    out << lang::pretty_print(p);
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const CompiledProgram c = semantics::compile(load_view(o, o.file, err));
  const auto points = initial_states(o, *c.layout);
  Json arr = Json::array();
  for (const auto& pt : points) {
    const HyperDist d = semantics::eval(c, pt.state);
    if (o.json) {
      Json j = semantics::to_json(d);
      arr.push_back({{"init", pt.label}, {"hyper", j["hyper"]}});
    } else {
      out << "# " << pt.label << "\n" << semantics::to_text(d);
    }
  }
  if (o.json) out << Json{{"seed", o.seed}, {"results", arr}}.dump(2) << "\n";
  return kOk;
}

int cmd_measure(const Options& o, std::ostream& out, std::ostream& err) {
  const CompiledProgram c = semantics::compile(load_view(o, o.file, err));
  const measures::Measure m = measures::parse_measure(o.measure);
  const auto points = initial_states(o, *c.layout);
  for (const auto& pt : points) {
    Json j;
    if (points.size() > 1) j["init"] = pt.label;
    j["measure"] = measures::measure_name(m);
    j["value"] = value_text(semantics::eval(c, pt.state), m);
    if (m.kind == measures::Measure::Kind::Shannon) j["precision_bits"] = measures::precision_from_env();
    out << j.dump() << "\n";
  }
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  const CompiledProgram s = semantics::compile(load_view(o, o.file, err));
  const CompiledProgram i = semantics::compile(load_view(o, o.other, err));
  semantics::require_same_layout(*s.layout, *i.layout);
  const auto points = initial_states(o, *s.layout);
  const bool refine_order = o.order == "refine";
  std::optional<measures::Measure> m;
  if (!refine_order) {
    if (o.order.rfind("elementary:", 0) != 0)
      throw Error(Errc::InvalidArgument, "order must be 'refine' or 'elementary:MEASURE'");
    m = measures::parse_measure(std::string_view(o.order).substr(11));
  }

  bool all = true;
  Json arr = Json::array();
  for (const auto& pt : points) {
    const HyperDist ds = semantics::eval(s, pt.state), di = semantics::eval(i, pt.state);
    Json j{{"init", pt.label}};
    if (refine_order) {
      const auto r = refine::check_refinement(ds, di);
      j["verdict"] = r.refined ? "Holds" : (r.functional_mismatch ? "FailsFunctional" : "NotRefined");
      if (r.refined) {
        j["witness"] = refine::witness_json(r, *s.layout);
      } else if (r.failing_v) {
        j["failing_v"] = refine::v_label(*s.layout, *r.failing_v);
      }
      all = all && r.refined;
    } else {
      const auto v = measures::elementary_compare(ds, di, *m);
      j["verdict"] = measures::verdict_name(v.kind);
      j["S"] = v.value_s;
      j["I"] = v.value_i;
      all = all && v.holds();
    }
    arr.push_back(std::move(j));
  }
  Json doc{{"order", refine_order ? std::string("refine") : "elementary:" + measures::measure_name(*m)},
           {"scope", scope_text(points.size(), o.seed)},
           {"seed", o.seed},
           {"verdict", all ? "Holds" : "Fails"},
           {"points", arr}};
  out << doc.dump(2) << "\n";
  return all ? kOk : kFails;
}

int cmd_attack(const Options& o, std::ostream& out, std::ostream& err) {
  const lang::Program s = load_view(o, o.file, err);
  const lang::Program i = load_view(o, o.other, err);
  const CompiledProgram sc = semantics::compile(s), ic = semantics::compile(i);
  semantics::require_same_layout(*sc.layout, *ic.layout);
  const auto points = initial_states(o, *sc.layout);
  for (const auto& pt : points) {
    if (refine::check_refinement(semantics::eval(sc, pt.state), semantics::eval(ic, pt.state)).refined) continue;
    const auto r = attack::synthesize_and_verify(s, i, pt.state, {o.vertex_cap, o.certificate});
    if (!r.verdict) throw Error(Errc::Internal, "synthesized context does not distinguish the programs");
    if (!o.output.empty()) {
      std::ofstream f(o.output, std::ios::binary);
      if (!f || !(f << r.context_source)) throw Error(Errc::InvalidArgument, "cannot write '" + o.output + "'");
    }
    Json j{{"init", pt.label}, {"scope", scope_text(points.size(), o.seed)}};
    j.update(attack::report_json(r, *sc.layout));
    out << j.dump(2) << "\n";
    return kOk;
  }
  err << "S refines I at every initial state; no distinguishing context exists\n";
  return kFails;
}

int cmd_view(const Options& o, std::ostream& out, std::ostream& err) {
  out << lang::pretty_print(lang::project_view(load(o.file, err), o.agent));
  return kOk;
}

int cmd_normalform(const Options& o, std::ostream& out, std::ostream& err) {
  const CompiledProgram c = semantics::compile(load_view(o, o.file, err));
  const semantics::NormalForm nf = semantics::normal_form(c);
  const auto points = initial_states(o, *c.layout);
  bool agree = true;
  Json arr = Json::array();
  for (const auto& pt : points) {
    const bool same = semantics::eval(c, pt.state) == semantics::eval_via_normal_form(nf, pt.state);
    agree = agree && same;
    arr.push_back({{"init", pt.label}, {"agree", same}});
  }
  out << Json{{"seed", o.seed}, {"agree", agree}, {"points", arr}}.dump(2) << "\n";
  if (!agree) err << "direct and normal-form evaluation disagree\n";
  return agree ? kOk : kInternal;
}

int cmd_selftest(const Options& o, std::ostream& out) {
  bool ok = true;
  for (const auto& c : golden_checks(o.corpus)) {
    out << (c.pass ? "PASS" : "FAIL") << " [" << c.criterion << "] " << c.name;
    if (!c.pass && !c.detail.empty()) out << ": " << c.detail;
    out << "\n";
    ok = ok && c.pass;
  }
  return ok ? kOk : kFails;
}

int exit_code(Errc c) { return c == Errc::Internal || c == Errc::NotSeparable ? kInternal : kUsage; }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Secure refinement and leakage analysis of probabilistic programs", "hyperflow"};
  app.require_subcommand(1);

  auto init_opt = [&](CLI::App* sub) {
    sub->add_option("--init", o.init, "initial states, e.g. \"v=bot; h~uniform\"")->required();
    sub->add_option("--seed", o.seed, "seed for sample:N priors");
    sub->add_option("--agent", o.agent, "evaluate this agent's view");
  };

  auto* parse = app.add_subcommand("parse", "check a program and print it in canonical form");
  parse->add_option("file", o.file)->required();
  parse->add_flag("--json", o.json, "print the syntax tree as JSON");

  auto* eval = app.add_subcommand("eval", "print the output hyper-distribution");
  eval->add_option("file", o.file)->required();
  init_opt(eval);
  eval->add_flag("--json", o.json);

  auto* measure = app.add_subcommand("measure", "evaluate a leakage measure on the output");
  measure->add_option("file", o.file)->required();
  init_opt(measure);
  measure->add_option("--measure", o.measure, "bayes | shannon | gentropy | guesswork:A");

  auto* compare = app.add_subcommand("compare", "compare two programs pointwise");
  compare->add_option("S", o.file)->required();
  compare->add_option("I", o.other)->required();
  init_opt(compare);
  compare->add_option("--order", o.order, "refine | elementary:MEASURE");

  auto* attack = app.add_subcommand("attack", "synthesize a context distinguishing S from I");
  attack->add_option("S", o.file)->required();
  attack->add_option("I", o.other)->required();
  init_opt(attack);
  attack->add_option("-o,--output", o.output, "where to write the context program");
  attack->add_flag("--certificate", o.certificate, "derive the direction from the Farkas certificate");
  attack->add_option("--vertex-cap", o.vertex_cap, "largest vertex enumeration before the certificate is used");

  auto* view = app.add_subcommand("view", "project a program onto one agent's view");
  view->add_option("file", o.file)->required();
  view->add_option("--agent", o.agent)->required();

  auto* nf = app.add_subcommand("normalform", "cross-check direct and normal-form evaluation");
  nf->add_option("file", o.file)->required();
  init_opt(nf);

  auto* selftest = app.add_subcommand("selftest", "reproduce the golden worked examples");
  selftest->add_option("--corpus", o.corpus, "directory holding the corpus programs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*parse) return cmd_parse(o, out, err);
    if (*eval) return cmd_eval(o, out, err);
    if (*measure) return cmd_measure(o, out, err);
    if (*compare) return cmd_compare(o, out, err);
    if (*attack) return cmd_attack(o, out, err);
    if (*view) return cmd_view(o, out, err);
    if (*nf) return cmd_normalform(o, out, err);
    if (*selftest) return cmd_selftest(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace hyperflow::cli
