// End-to-end acceptance checks. Each test covers one release criterion and
// prints a single verdict line so the suite doubles as a sign-off report.

#include "corpus_util.hpp"
#include "test_rng.hpp"
#include "generators.hpp"
#include "naive_eval.hpp"

#include "tores/kinding.hpp"
#include "tores/machine.hpp"
#include "tores/printer.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace tores;
using tores::testing::Rng;

namespace {

// Prints the verdict when the test body finishes, including early ASSERT exits.
struct Verdict {
  int number;
  const char* label;
  ~Verdict() {
    std::printf("criterion %d (%s): %s\n", number, label,
                ::testing::Test::HasFailure() ? "FAIL" : "PASS");
    std::fflush(stdout);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct CliResult {
  int exit_code = -1;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  std::string err_path = ::testing::TempDir() + "acceptance_cli_err.txt";
  std::string cmd = std::string(TORES_CLI_BIN) + " " + args + " > /dev/null 2> " + err_path;
  int raw = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(err_path);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string corpus(const std::string& name) {
  return std::string(TORES_CORPUS_DIR) + "/" + name;
}

// Machine run of a closed term under the given index environment.
EvalOutcome machine(const TermPtr& t, const IndexEnv& ie = {}, long fuel = kDefaultFuel) {
  Evaluator ev(fuel);
  return ev.eval(t, ie, ValueEnv{});
}

long nat_of(const IdxPtr& m) {
  long n = 0;
  IdxPtr cur = m;
  while (const IdxSuc* s = std::get_if<IdxSuc>(&cur->node)) {
    ++n;
    cur = s->body;
  }
  EXPECT_TRUE(std::holds_alternative<IdxZero>(cur->node)) << show_idx(m);
  return n;
}

// Head of a stream observation: pack [k] <> carrying the numeral k.
long packed_nat(const ValuePtr& v) {
  const VPack* p = std::get_if<VPack>(&v->node);
  if (!p) {
    ADD_FAILURE() << "expected a packed numeral, got " << show_value(v);
    return -1;
  }
  return nat_of(p->witness);
}

// Every term variable mentioned anywhere in t, binders ignored. Used to show
// a name is never even referenced, which subsumes "never applied".
void mentioned_vars(const TermPtr& t, std::vector<std::string>& out) {
  if (const TmVar* n = std::get_if<TmVar>(&t->node)) {
    out.push_back(n->name);
  } else if (const TmLam* n = std::get_if<TmLam>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
    mentioned_vars(n->fn, out);
    mentioned_vars(n->arg, out);
  } else if (const TmPair* n = std::get_if<TmPair>(&t->node)) {
    mentioned_vars(n->left, out);
    mentioned_vars(n->right, out);
  } else if (const TmSplit* n = std::get_if<TmSplit>(&t->node)) {
    mentioned_vars(n->scrut, out);
    mentioned_vars(n->body, out);
  } else if (const TmInj* n = std::get_if<TmInj>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmCase* n = std::get_if<TmCase>(&t->node)) {
    mentioned_vars(n->scrut, out);
    mentioned_vars(n->left, out);
    mentioned_vars(n->right, out);
  } else if (const TmPack* n = std::get_if<TmPack>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
    mentioned_vars(n->scrut, out);
    mentioned_vars(n->body, out);
  } else if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
    mentioned_vars(n->scrut, out);
    mentioned_vars(n->body, out);
  } else if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node)) {
    mentioned_vars(n->scrut, out);
  } else if (const TmFold* n = std::get_if<TmFold>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmRec* n = std::get_if<TmRec>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmCorec* n = std::get_if<TmCorec>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node)) {
    mentioned_vars(n->body, out);
  } else if (const TmInd* n = std::get_if<TmInd>(&t->node)) {
    mentioned_vars(n->zero, out);
    mentioned_vars(n->suc_branch, out);
  } else if (const TmAnnot* n = std::get_if<TmAnnot>(&t->node)) {
    mentioned_vars(n->body, out);
  }
}

// inj0 <> wrapped in k layers of injs <<>, _>.
std::string strat_vec_src(int k) {
  std::string s = "inj0 <>";
  for (int i = 0; i < k; ++i) s = "injs <<>, " + s + ">";
  return s;
}

// nilMu wrapped in k layers of consMu, outermost index k-1.
std::string mu_vec_src(int k) {
  std::string s = "nilMu";
  for (int i = 0; i < k; ++i) s = "consMu [" + std::to_string(i) + "] <<>, " + s + ">";
  return s;
}

}  // namespace

TEST(Acceptance, CorpusAcceptedMutantsRejected) {
  Verdict verdict{1, "corpus accepted, mutants rejected with stable codes"};
  auto start = std::chrono::steady_clock::now();

  for (const char* name : testing::kCorpusFiles) {
    CliResult r = run_cli("check " + corpus(name));
    EXPECT_EQ(r.exit_code, 0) << name << "\n" << r.err;
  }

  struct Mutant {
    const char* file;
    const char* code;
  };
  const Mutant mutants[] = {
      {"bad/copy_weak.tores", "T001"},
      {"bad/refl_bad.tores", "T001"},
      {"bad/eqabort_bad.tores", "T012"},
  };
  for (const Mutant& m : mutants) {
    CliResult r = run_cli("check " + corpus(m.file));
    EXPECT_EQ(r.exit_code, 1) << m.file;
    EXPECT_NE(r.err.find(m.code), std::string::npos) << m.file << "\n" << r.err;
  }

  EXPECT_LT(seconds_since(start), 5.0);
}

TEST(Acceptance, CopyFunctionsAreIdentities) {
  Verdict verdict{2, "both copy functions return their input, machine and oracle agree"};

  std::string src = testing::read_file(corpus("vectors.tores"));
  for (int k = 0; k <= 5; ++k) {
    std::string ks = std::to_string(k);
    src += "\ndef in" + ks + "Mu : VecMu " + ks + " = " + mu_vec_src(k);
    src += "\ndef out" + ks + "Mu : VecMu " + ks + " = copyMu [" + ks + "] in" + ks + "Mu";
    src += "\ndef in" + ks + "S : VecS " + ks + " = " + strat_vec_src(k);
    src += "\ndef out" + ks + "S : VecS " + ks + " = (copyS [" + ks + "] <>) in" + ks + "S";
  }
  Elab e = testing::elab_src("copy_identity.tores", src);
  ASSERT_FALSE(e.defs.empty());

  for (int k = 0; k <= 5; ++k) {
    for (const char* flavor : {"Mu", "S"}) {
      std::string ks = std::to_string(k);
      const ElabDef* in = testing::find_def(e, "in" + ks + flavor);
      const ElabDef* out = testing::find_def(e, "out" + ks + flavor);
      ASSERT_TRUE(in && out);

      EvalOutcome vin = machine(in->term);
      EvalOutcome vout = machine(out->term);
      ASSERT_TRUE(vin.ok() && vout.ok()) << "length " << k << flavor;
      EXPECT_TRUE(term_alpha_eq(value_to_term(vout.value), value_to_term(vin.value)))
          << "copy changed a length-" << k << " vector (" << flavor << "):\n  in  "
          << show_value(vin.value) << "\n  out " << show_value(vout.value);

      ASSERT_TRUE(testing::naive_supports(out->term));
      testing::NaiveResult ref = testing::naive_run(out->term);
      ASSERT_TRUE(ref.ok()) << ref.error;
      EXPECT_TRUE(term_alpha_eq(value_to_term(vout.value), ref.value))
          << "machine and oracle disagree at length " << k << flavor;
    }
  }
}

TEST(Acceptance, StreamPrefixesMatchDirectComputation) {
  Verdict verdict{3, "first six stream observations match closed-form values"};

  Elab e = testing::elab_file("streams.tores");
  ASSERT_FALSE(e.defs.empty());

  struct Expected {
    const char* def;
    long heads[6];
  };
  long fib[6];
  fib[0] = 0;
  fib[1] = 1;
  for (int i = 2; i < 6; ++i) fib[i] = fib[i - 1] + fib[i - 2];
  const Expected cases[] = {
      {"nats", {0, 1, 2, 3, 4, 5}},
      {"fibs", {fib[0], fib[1], fib[2], fib[3], fib[4], fib[5]}},
  };

  for (const Expected& c : cases) {
    const ElabDef* def = testing::find_def(e, c.def);
    ASSERT_TRUE(def);
    Evaluator ev;
    EvalOutcome s = ev.eval(def->term, {}, {});
    ASSERT_TRUE(s.ok()) << c.def;
    ValuePtr cur = s.value;
    for (int i = 0; i < 6; ++i) {
      EvalOutcome layer = ev.force(cur);
      ASSERT_TRUE(layer.ok()) << c.def << " layer " << i;
      const VPair* p = std::get_if<VPair>(&layer.value->node);
      ASSERT_TRUE(p) << show_value(layer.value);
      EXPECT_EQ(packed_nat(p->left), c.heads[i]) << c.def << " observation " << i;
      cur = p->right;
    }
  }
}

TEST(Acceptance, RandomWellTypedProgramsEvaluateToAuditedValues) {
  Verdict verdict{4, "10000 generated programs check, run, and pass the value audit"};

  Rng rng(0xACCE5504);
  const int kRuns = 10000;
  int failures = 0;
  for (int i = 0; i < kRuns; ++i) {
    testing::Generated g = testing::random_program(rng);

    Trace tr;
    CheckResult cr = check(g.d, TVarCtx{}, TypingCtx{}, g.term, g.type, &tr);
    if (cr) {
      if (++failures <= 3)
        ADD_FAILURE() << "generated term failed to check (" << type_error_code(cr->reason)
                      << " " << cr->detail << "):\n  " << show_term(g.term) << "\n  : "
                      << show_type(g.type);
      continue;
    }

    EvalOutcome out = machine(g.term, g.theta);
    if (!out.ok()) {
      if (++failures <= 3)
        ADD_FAILURE() << "generated term did not finish: " << out.error << "\n  "
                      << show_term(g.term);
      continue;
    }

    TypePtr closed = type_apply_isubst(g.type, g.theta);
    if (auto why = value_check(tr, out.value, closed)) {
      if (++failures <= 3)
        ADD_FAILURE() << "value audit rejected a result: " << *why << "\n  value "
                      << show_value(out.value) << "\n  type  " << show_type(closed);
      continue;
    }
  }
  EXPECT_EQ(failures, 0) << failures << " of " << kRuns << " programs misbehaved";
}

TEST(Acceptance, UnificationAndSubstitutionProperties) {
  Verdict verdict{5, "unifier, matcher, and substitution laws hold on 10000 random instances"};
  auto start = std::chrono::steady_clock::now();

  Rng rng(0xACCE5505);
  const int kRuns = 10000;
  for (int i = 0; i < kRuns; ++i) {
    IndexCtx d = testing::random_ictx(rng, 4);
    IdxPtr m = testing::random_idx(rng, d, 3);
    IdxPtr n = testing::random_idx(rng, d, 3);

    // A most general unifier really unifies.
    UnifyResult ur = unify(d, m, n);
    if (const Mgu* mgu = std::get_if<Mgu>(&ur)) {
      ASSERT_TRUE(idx_eq(subst_apply(m, mgu->subst), subst_apply(n, mgu->subst)))
          << show_idx(m) << " =? " << show_idx(n);
    }

    // Identical sides always unify.
    ASSERT_FALSE(unify_clashed(unify(d, m, m))) << show_idx(m);

    // Any ground equalizer means a clash is wrong, and factors through the mgu.
    IndexSubst ground = testing::random_grounding(rng, d, 3);
    if (idx_eq(subst_apply(m, ground), subst_apply(n, ground))) {
      ASSERT_FALSE(unify_clashed(ur))
          << show_idx(m) << " and " << show_idx(n) << " agree under a grounding";
      const Mgu& mgu = std::get<Mgu>(ur);
      for (const IdxBinding& b : d.items) {
        IdxPtr var = idx_var(b.name);
        ASSERT_TRUE(idx_eq(subst_apply(subst_apply(var, mgu.subst), ground),
                           subst_apply(var, ground)))
            << b.name << " not preserved through the mgu";
      }
    }

    // Matching recovers the instantiation used to build the instance.
    IndexCtx holes = testing::random_ictx(rng, 3, "w");
    IndexCtx labels = testing::random_ictx(rng, 3, "l");
    IndexSubst pattern = testing::random_subst(rng, labels, holes, 2);
    IndexSubst fill = testing::random_subst(rng, holes, d, 2);
    IndexSubst instance;
    for (const SubstEntry& en : pattern.entries)
      instance.entries.push_back({subst_apply(en.term, fill), en.var});
    MatchResult mr = match_subst(holes, pattern, instance);
    ASSERT_FALSE(match_failed(mr)) << "pattern should match its own instance";
    const Matched& got = std::get<Matched>(mr);
    for (size_t j = 0; j < pattern.entries.size(); ++j)
      ASSERT_TRUE(idx_eq(subst_apply(pattern.entries[j].term, got.subst),
                         instance.entries[j].term))
          << "matcher returned a non-solution at entry " << j;
    if (!pattern.entries.empty()) {
      IndexSubst relabeled = instance;
      relabeled.entries.front().var += "'";
      EXPECT_TRUE(match_failed(match_subst(holes, pattern, relabeled)))
          << "matcher ignored a label mismatch";
    }

    // Applying two substitutions in sequence equals applying their composite.
    IndexCtx mid = testing::random_ictx(rng, 3, testing::pick_bool(rng) ? "a" : "u");
    IndexSubst th1 = testing::random_subst(rng, d, mid, 2);
    IndexSubst th2 = testing::random_subst(rng, mid, holes, 2);
    IdxPtr subject = testing::random_idx(rng, d, 3);
    ASSERT_TRUE(idx_eq(subst_apply(subst_apply(subject, th1), th2),
                       subst_apply(subject, subst_compose(th1, th2))))
        << show_idx(subject);
  }

  EXPECT_LT(seconds_since(start), 30.0);
}

TEST(Acceptance, CheckerAndKinderTotalOnFuzzedInput) {
  Verdict verdict{6, "10000 fuzzed syntax trees never hang or crash the judgments"};

  Rng rng(0xACCE5506);
  const int kRuns = 10000;
  int completed = 0;
  for (int i = 0; i < kRuns; ++i) {
    IndexCtx d = testing::random_ictx(rng, 3);
    TypePtr ty = testing::fuzz_type(rng, 4);
    KindPtr k = testing::fuzz_kind(rng, 2);
    TermPtr t = testing::fuzz_term(rng, 5);

    (void)kind_check(d, TVarCtx{}, ty, k);
    (void)check(d, TVarCtx{}, TypingCtx{}, t, ty);
    ++completed;
  }
  EXPECT_EQ(completed, kRuns);
}

TEST(Acceptance, CorpusTerminatesAndFalsehoodStaysUnused) {
  Verdict verdict{7, "corpus halts in the fuel budget; the empty type checks but is never called"};

  for (const char* name : testing::kCorpusFiles) {
    Elab e = testing::elab_file(name);
    ASSERT_FALSE(e.defs.empty()) << name;
    for (const ElabDef& def : e.defs) {
      EvalOutcome out = machine(def.term, {}, 1000000);
      EXPECT_TRUE(out.ok()) << name << "/" << def.name
                            << (out.out_of_fuel ? " ran out of fuel" : " " + out.error);
    }
  }

  // The inhabitant of the empty type is accepted by the checker...
  Elab falsehood = testing::elab_file("falsehood.tores");
  EXPECT_TRUE(testing::find_def(falsehood, "abort"));

  // ...but no definition anywhere in the corpus ever mentions it.
  for (const char* name : testing::kCorpusFiles) {
    std::string path = corpus(name);
    ParseResult pr = parse_program(name, testing::read_file(path));
    ASSERT_TRUE(std::holds_alternative<Program>(pr)) << name;
    for (const Decl& decl : std::get<Program>(pr).decls) {
      if (decl.which != Decl::Which::Def || decl.name == "abort") continue;
      std::vector<std::string> used;
      mentioned_vars(decl.term_body, used);
      for (const std::string& v : used)
        EXPECT_NE(v, "abort") << name << "/" << decl.name << " references the empty type's inhabitant";
    }
  }
}

TEST(Acceptance, EvaluationDeterministicAndFuelMonotone) {
  Verdict verdict{8, "re-running never changes results; extra fuel never changes values"};

  // Terms paired with the index environment they run under.
  std::vector<std::pair<TermPtr, IndexEnv>> subjects;
  for (const char* name : testing::kCorpusFiles) {
    Elab e = testing::elab_file(name);
    ASSERT_FALSE(e.defs.empty()) << name;
    for (const ElabDef& def : e.defs) subjects.push_back({def.term, IndexEnv{}});
  }
  Rng rng(0xACCE5508);
  for (int i = 0; i < 1000; ++i) {
    testing::Generated g = testing::random_program(rng);
    subjects.push_back({g.term, g.theta});
  }

  for (const auto& [term, ienv] : subjects) {
    Evaluator first(kDefaultFuel);
    EvalOutcome a = first.eval(term, ienv, {});
    Evaluator second(kDefaultFuel);
    EvalOutcome b = second.eval(term, ienv, {});
    ASSERT_TRUE(a.ok() && b.ok()) << show_term(term);
    EXPECT_EQ(first.fuel_left(), second.fuel_left()) << show_term(term);
    EXPECT_TRUE(term_alpha_eq(value_to_term(a.value), value_to_term(b.value)));

    long used = kDefaultFuel - first.fuel_left();
    EvalOutcome exact = machine(term, ienv, used);
    ASSERT_TRUE(exact.ok()) << "exact fuel failed: " << show_term(term);
    EXPECT_TRUE(term_alpha_eq(value_to_term(exact.value), value_to_term(a.value)));

    if (used > 0) {
      EvalOutcome starved = machine(term, ienv, used - 1);
      EXPECT_TRUE(starved.out_of_fuel) << show_term(term);
    }

    EvalOutcome plenty = machine(term, ienv, used * 2 + 7);
    ASSERT_TRUE(plenty.ok());
    EXPECT_TRUE(term_alpha_eq(value_to_term(plenty.value), value_to_term(a.value)));
  }
}
