// Command line driver: check, run, and fmt subcommands over .tores files.
// Diagnostics print in a human format or as JSON lines; evaluation can emit a
// rule trace and force observations of corecursive results.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tores/elaborate.hpp"
#include "tores/machine.hpp"
#include "tores/parser.hpp"
#include "tores/printer.hpp"

namespace tores::cli {

// Exit codes: 0 success, 1 diagnostics, 2 usage problems (bad flags, missing
// files or definitions), 3 evaluation failures (fuel, invariant violations).
inline constexpr int kOk = 0;
inline constexpr int kDiagnostics = 1;
inline constexpr int kUsage = 2;
inline constexpr int kEvaluation = 3;

struct Options {
  bool json = false;
  bool dump_ast = false;
  bool trace = false;
};

inline nlohmann::json diag_json(const Diagnostic& d) {
  nlohmann::json j{{"file", d.file},
                   {"span",
                    {{"begin", d.span.begin},
                     {"end", d.span.end},
                     {"line", d.span.line},
                     {"col", d.span.col}}},
                   {"code", d.code},
                   {"message", d.message}};
  if (!d.expected.empty()) j["expected"] = d.expected;
  if (!d.found.empty()) j["found"] = d.found;
  return j;
}

inline void report(const std::vector<Diagnostic>& diags, const Options& opt) {
  for (const Diagnostic& d : diags) {
    if (opt.json) {
      std::cerr << diag_json(d).dump() << "\n";
      continue;
    }
    std::cerr << d.file << ":";
    if (d.span.known()) std::cerr << d.span.line << ":" << d.span.col << ":";
    std::cerr << " " << d.code << ": " << d.message << "\n";
    if (!d.expected.empty()) std::cerr << "  expected: " << d.expected << "\n";
    if (!d.found.empty()) std::cerr << "  found: " << d.found << "\n";
  }
}

inline std::optional<std::string> slurp(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Closures announce themselves; data values read back as plain terms.
inline std::string print_value(const ValuePtr& v) {
  std::string body = show_value(v);
  if (std::get_if<VClosure>(&v->node)) return "<closure> " + body;
  return body;
}

inline void dump_elab(const Elab& e, const Options& opt) {
  for (const ElabType& t : e.types) {
    if (opt.json)
      std::cout << nlohmann::json{{"type", t.name},
                                  {"kind", show_kind(t.kind)},
                                  {"body", show_type(t.body)}}
                       .dump()
                << "\n";
    else
      std::cout << "type " << t.name << " : " << show_kind(t.kind) << " = " << show_type(t.body)
                << "\n";
  }
  for (const ElabDef& d : e.defs) {
    if (opt.json)
      std::cout << nlohmann::json{{"def", d.name},
                                  {"type", show_type(d.type)},
                                  {"term", show_term(d.term)}}
                       .dump()
                << "\n";
    else
      std::cout << "def " << d.name << " : " << show_type(d.type) << " = " << show_term(d.term)
                << "\n";
  }
}

// Loads, parses, and elaborates one file; on failure reports and returns the
// exit code, on success stores the result.
inline int load_file(const std::string& path, const Options& opt, Elab& out) {
  std::optional<std::string> src = slurp(path);
  if (!src) {
    std::cerr << "cannot open " << path << "\n";
    return kUsage;
  }
  ParseResult pr = parse_program(path, *src);
  if (const Diagnostic* d = std::get_if<Diagnostic>(&pr)) {
    report({*d}, opt);
    return kDiagnostics;
  }
  ElabResult er = elaborate(std::get<Program>(pr));
  if (elab_failed(er)) {
    report(std::get<std::vector<Diagnostic>>(er), opt);
    return kDiagnostics;
  }
  out = std::get<Elab>(std::move(er));
  return kOk;
}

inline int check_cmd(const std::vector<std::string>& files, const Options& opt) {
  int worst = kOk;
  for (const std::string& path : files) {
    Elab e;
    int rc = load_file(path, opt, e);
    if (rc == kOk && opt.dump_ast) dump_elab(e, opt);
    worst = std::max(worst, rc);
  }
  return worst;
}

inline int run_cmd(const std::string& path, const std::string& main_name, long fuel, long take,
                   const Options& opt) {
  Elab e;
  if (int rc = load_file(path, opt, e)) return rc;
  if (opt.dump_ast) dump_elab(e, opt);
  const ElabDef* def = nullptr;
  for (const ElabDef& d : e.defs)
    if (d.name == main_name) def = &d;
  if (!def) {
    std::cerr << "no definition named " << main_name << " in " << path << "\n";
    return kUsage;
  }
  EvalSink sink;
  if (opt.trace) sink = [](const EvalStep& s) { std::cerr << s.rule << "\n"; };
  Evaluator ev(fuel, std::move(sink));
  EvalOutcome o = ev.eval(def->term, IndexEnv{}, ValueEnv{});
  auto fail = [&](const EvalOutcome& bad) {
    if (bad.out_of_fuel)
      std::cerr << "fuel exhausted after " << fuel << " steps; raise --fuel or TORES_FUEL\n";
    else
      std::cerr << "evaluation error: " << bad.error << "\n";
    return kEvaluation;
  };
  if (!o.ok()) return fail(o);
  if (take == 0) {
    if (opt.json)
      std::cout << nlohmann::json{{"def", main_name}, {"value", print_value(o.value)}}.dump()
                << "\n";
    else
      std::cout << print_value(o.value) << "\n";
    return kOk;
  }
  ValuePtr stream = o.value;
  for (long i = 0; i < take; ++i) {
    EvalOutcome layer = ev.force(stream);
    if (!layer.ok()) return fail(layer);
    const VPair* p = std::get_if<VPair>(&layer.value->node);
    if (!p) {
      std::cerr << "evaluation error: observation " << i << " is not a pair\n";
      return kEvaluation;
    }
    if (opt.json)
      std::cout << nlohmann::json{{"observation", i}, {"value", print_value(p->left)}}.dump()
                << "\n";
    else
      std::cout << print_value(p->left) << "\n";
    stream = p->right;
  }
  return kOk;
}

inline int fmt_cmd(const std::string& path, const Options& opt) {
  std::optional<std::string> src = slurp(path);
  if (!src) {
    std::cerr << "cannot open " << path << "\n";
    return kUsage;
  }
  ParseResult pr = parse_program(path, *src);
  if (const Diagnostic* d = std::get_if<Diagnostic>(&pr)) {
    report({*d}, opt);
    return kDiagnostics;
  }
  std::cout << show_program(std::get<Program>(pr));
  return kOk;
}

inline int cli_main(int argc, char** argv) {
  CLI::App app{"type checker and interpreter for indexed recursive programs"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_flag("--json", opt.json, "machine readable diagnostics and output");
  app.add_flag("--dump-ast", opt.dump_ast, "print elaborated declarations");
  app.add_flag("--trace", opt.trace, "print evaluation rules as they fire");

  std::vector<std::string> check_files;
  CLI::App* check = app.add_subcommand("check", "parse, kind check, and type check files");
  check->add_option("files", check_files, "input files")->required();

  std::string run_file, main_name;
  long fuel = kDefaultFuel;
  long take = 0;
  CLI::App* run = app.add_subcommand("run", "evaluate a zero-argument definition");
  run->add_option("file", run_file, "input file")->required();
  run->add_option("--main", main_name, "definition to evaluate")->required();
  run->add_option("--fuel", fuel, "step budget")
      ->envname("TORES_FUEL")
      ->check(CLI::PositiveNumber);
  run->add_option("--take", take, "force this many observations of a corecursive result")
      ->check(CLI::NonNegativeNumber);

  std::string fmt_file;
  CLI::App* fmt = app.add_subcommand("fmt", "parse and pretty print a file");
  fmt->add_option("file", fmt_file, "input file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (check->parsed()) return check_cmd(check_files, opt);
  if (run->parsed()) return run_cmd(run_file, main_name, fuel, take, opt);
  return fmt_cmd(fmt_file, opt);
}

}  // namespace tores::cli
