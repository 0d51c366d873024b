#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "softk/softk.hpp"

using namespace softk;
using testutil::corpus_registry;
using testutil::registry_from;
using testutil::run_events;

TEST_CASE("restriction of an instantiation") {
  Instantiation sigma{{"?f", "code-char"}, {"?p", "octetp"}};
  CHECK(restrict_to(sigma, {"?p"}) == Instantiation{{"?p", "octetp"}});
  CHECK(restrict_to(sigma, {"?f", "?p"}) == sigma);
  CHECK(restrict_to(sigma, {}) == Instantiation{});
  CHECK(restrict_to(sigma, {"?g"}) == Instantiation{});
}

TEST_CASE("applying an instantiation rewrites explicit and implicit occurrences") {
  Registry reg = registry_from(
      "(defunvar ?f (*) => *)"
      "(defun2 quad[?f] (?f) (x) (?f (?f (?f (?f x)))))"
      "(defun wrap (x) (list x))"
      "(defun-inst quad[wrap] (quad[?f] (?f . wrap)))");

  Instantiation sigma{{"?f", "wrap"}};
  TermPtr term = parse_term("(cons (?f x) (quad[?f] y))", reg);
  CHECK(print_term(apply_instantiation(term, sigma, reg)) == "(cons (wrap x) (quad[wrap] y))");

  SECTION("empty instantiation is the identity") {
    TermPtr same = apply_instantiation(term, {}, reg);
    CHECK(term_equal(same, term));
  }

  SECTION("second-order functions without a key among their parameters are untouched") {
    run_events(reg, "(defunvar ?p (*) => *)");
    TermPtr t2 = parse_term("(quad[?f] x)", reg);
    CHECK(print_term(apply_instantiation(t2, {{"?p", "wrap"}}, reg)) == "(quad[?f] x)");
  }

  SECTION("a missing instance names the exact table row to introduce") {
    try {
      apply_instantiation(parse_term("(quad[?f] x)", reg), {{"?f", "fix"}}, reg);
      FAIL("expected MissingInstance");
    } catch (const Error& e) {
      CHECK(e.code == ErrorCode::MissingInstance);
      std::string msg = e.what();
      CHECK(msg.find("quad[?f]") != std::string::npos);
      CHECK(msg.find("(?f . fix)") != std::string::npos);
      CHECK(msg.find("defun-inst") != std::string::npos);
    }
  }
}

TEST_CASE("the pair closure for fold-io") {
  Registry reg = corpus_registry();
  const TheoremRec& thm = reg.theorem("fold-io[?f_?g_?io]");
  PairClosure pairs = compute_more_pairs(thm, {{"?io", "io"}}, reg);

  REQUIRE(pairs.size() == 5);
  CHECK(pairs[0].replaced == "?io");
  CHECK(pairs[0].replacement == "io");
  CHECK(pairs[0].role == PairRole::FunVar);
  CHECK(pairs[1].replaced == "atom-io[?f_?io]");
  CHECK(pairs[1].replacement == "atom-io[?f]");
  CHECK(pairs[2].replaced == "consp-io[?g_?io]");
  CHECK(pairs[2].replacement == "consp-io[?g]");
  CHECK(pairs[3].replaced == "atom-io[?f_?io]-witness");
  CHECK(pairs[3].replacement == "atom-io[?f]-witness");
  CHECK(pairs[3].role == PairRole::Witness);
  CHECK(pairs[4].replaced == "consp-io[?g_?io]-witness");
  CHECK(pairs[4].replacement == "consp-io[?g]-witness");

  // fold[?f_?g] is reachable but has no ?io parameter, so it is not replaced
  for (const auto& p : pairs) CHECK(p.replaced != "fold[?f_?g]");
}

TEST_CASE("the pair closure for len-of-map") {
  Registry reg = corpus_registry();
  const TheoremRec& thm = reg.theorem("len-of-map[?f_?p]");
  PairClosure pairs =
      compute_more_pairs(thm, {{"?f", "code-char"}, {"?p", "octetp"}}, reg);

  REQUIRE(pairs.size() == 3);  // two funvar pairs, one function pair, no witnesses
  CHECK(pairs[0].replaced == "?f");
  CHECK(pairs[1].replaced == "?p");
  CHECK(pairs[2].replaced == "map[?f_?p]");
  CHECK(pairs[2].replacement == "map[code-char]");
  CHECK(pairs[2].role == PairRole::SoFun);
}

TEST_CASE("the closure follows definition bodies transitively") {
  Registry reg = corpus_registry();
  const TheoremRec& thm = reg.theorem("injective[quad[?f]]-when-injective[?f]");
  PairClosure pairs = compute_more_pairs(thm, {{"?f", "wrap"}}, reg);

  std::vector<std::pair<std::string, std::string>> sofun_pairs;
  for (const auto& p : pairs)
    if (p.role == PairRole::SoFun) sofun_pairs.emplace_back(p.replaced, p.replacement);
  // quad[?f] enters through the body of injective[quad[?f]]
  REQUIRE(sofun_pairs.size() == 3);
  CHECK(sofun_pairs[0] == std::pair<std::string, std::string>{"injective[?f]", "injective[wrap]"});
  CHECK(sofun_pairs[1] ==
        std::pair<std::string, std::string>{"injective[quad[?f]]", "injective[quad[wrap]]"});
  CHECK(sofun_pairs[2] == std::pair<std::string, std::string>{"quad[?f]", "quad[wrap]"});
}

TEST_CASE("a first-order theorem with an empty instantiation closes to nothing") {
  Registry reg = corpus_registry();
  const TheoremRec& thm = reg.theorem("member-of-append");
  CHECK(compute_more_pairs(thm, {}, reg).empty());
}

TEST_CASE("name replacement through the closure equals instantiation") {
  // the closure is built so that replacing names pairwise in the formula
  // coincides with applying the instantiation through the instance table
  Registry reg = corpus_registry();
  struct Case {
    const char* theorem;
    Instantiation sigma;
  };
  std::vector<Case> cases = {
      {"fold-io[?f_?g_?io]", {{"?io", "io"}}},
      {"len-of-map[?f_?p]", {{"?f", "code-char"}, {"?p", "octetp"}}},
      {"injective[quad[?f]]-when-injective[?f]", {{"?f", "wrap"}}},
      {"chain[?h_?f_?g]", {{"?h", "h"}, {"?f", "f"}, {"?g", "g"}}},
  };
  for (const auto& c : cases) {
    const TheoremRec& thm = reg.theorem(c.theorem);
    PairClosure pairs = compute_more_pairs(thm, c.sigma, reg);
    std::map<std::string, std::string> names;
    for (const auto& p : pairs) names.emplace(p.replaced, p.replacement);
    INFO(c.theorem);
    CHECK(term_equal(apply_instantiation(thm.formula, c.sigma, reg),
                     apply_pairs(thm.formula, names)));
  }
}

TEST_CASE("closure soundness over the corpus theorems") {
  Registry reg = corpus_registry();
  struct Case {
    const char* theorem;
    Instantiation sigma;
  };
  std::vector<Case> cases = {
      {"fold-io[?f_?g_?io]", {{"?io", "io"}}},
      {"len-of-map[?f_?p]", {{"?f", "code-char"}, {"?p", "octetp"}}},
      {"injective[quad[?f]]-when-injective[?f]", {{"?f", "wrap"}}},
      {"chain[?h_?f_?g]", {{"?h", "h"}, {"?f", "f"}, {"?g", "g"}}},
  };
  for (const auto& c : cases) {
    PairClosure pairs = compute_more_pairs(reg.theorem(c.theorem), c.sigma, reg);
    std::set<std::string> seen;
    for (const auto& p : pairs) {
      INFO(c.theorem << ": " << p.replaced);
      CHECK(seen.insert(p.replaced).second);  // each name replaced once
      if (p.role == PairRole::SoFun)
        CHECK(intersects(reg.function(p.replaced).fparams, c.sigma));
    }
  }
}

TEST_CASE("constraints of the three function kinds") {
  Registry reg = corpus_registry();

  auto quad = constraints_of("quad[?f]", reg);
  REQUIRE(quad.size() == 1);
  CHECK(quad[0].kind == ObligationKind::Definition);
  CHECK(print_term(quad[0].term) == "(equal (quad[?f] x) (?f (?f (?f (?f x)))))");

  auto fixpoint = constraints_of("fixpoint[?f]", reg);
  REQUIRE(fixpoint.size() == 1);
  CHECK(fixpoint[0].kind == ObligationKind::ChoiceAxiom);
  CHECK(print_term(fixpoint[0].term) ==
        "(implies (equal (?f x) x) (equal (?f (fixpoint[?f])) (fixpoint[?f])))");

  auto inj = constraints_of("injective[?f]", reg);
  REQUIRE(inj.size() == 2);
  CHECK(inj[0].kind == ObligationKind::Definition);
  CHECK(print_term(inj[0].term) ==
        "(equal (injective[?f]) "
        "(implies (equal (?f (mv-nth 0 (injective[?f]-witness))) "
        "(?f (mv-nth 1 (injective[?f]-witness)))) "
        "(equal (mv-nth 0 (injective[?f]-witness)) (mv-nth 1 (injective[?f]-witness)))))");
  CHECK(inj[1].kind == ObligationKind::RewriteRule);
  CHECK(print_term(inj[1].term) ==
        "(implies (injective[?f]) (implies (equal (?f x) (?f y)) (equal x y)))");

  SECTION("a single bound variable uses the witness application directly") {
    auto spec = constraints_of("spec[?h]", reg);
    REQUIRE(spec.size() == 2);
    CHECK(print_term(spec[0].term) == "(equal (spec[?h]) (io (spec[?h]-witness) (?h (spec[?h]-witness))))");
  }

  SECTION("an existential rule points the other way") {
    Registry r2 = registry_from(
        "(defunvar ?p (*) => *)"
        "(defun-sk2 some[?p] (?p) (l) (exists e (and (member e l) (?p e))))");
    auto some = constraints_of("some[?p]", r2);
    REQUIRE(some.size() == 2);
    CHECK(r2.function("some[?p]").rule_name == "some[?p]-suff");
    CHECK(print_term(some[1].term) ==
          "(implies (and (member e l) (?p e)) (some[?p] l))");
  }
}

TEST_CASE("table-built instances discharge all their obligations") {
  Registry reg = corpus_registry();
  const TheoremRec& thm = reg.theorem("chain[?h_?f_?g]");
  Instantiation sigma{{"?h", "h"}, {"?f", "f"}, {"?g", "g"}};
  PairClosure pairs = compute_more_pairs(thm, sigma, reg);
  auto obligations = discharge_obligations(pairs, sigma, reg);

  CHECK(obligations.size() == 9);  // one per plain pair, two per quantifier pair
  for (const auto& ob : obligations) {
    INFO(ob.replaced << " / " << obligation_kind_name(ob.kind));
    CHECK(ob.discharged);
  }

  SECTION("function-variable pairs yield no obligations") {
    PairClosure only_funvars;
    for (const auto& p : pairs)
      if (p.role == PairRole::FunVar) only_funvars.push_back(p);
    CHECK(discharge_obligations(only_funvars, sigma, reg).empty());
  }
}

TEST_CASE("a tampered instance body fails to discharge") {
  Registry reg = registry_from(
      "(defunvar ?f (*) => *)"
      "(defun2 quad[?f] (?f) (x) (?f (?f (?f (?f x)))))"
      "(defun wrap (x) (list x))"
      "(defthm quad-self (equal (quad[?f] x) (quad[?f] x)))");

  // hand-register an instance whose body is not sigma applied to the target's
  FunctionRec bogus;
  bogus.name = "quad[wrap]";
  bogus.kind = FunKind::Plain;
  bogus.arity = 1;
  bogus.params = {"x"};
  bogus.body = parse_term("(wrap (wrap (wrap x)))", reg);  // one application short
  bogus.guard = t_const(v_t());
  reg.register_function(bogus);
  reg.register_instance("quad[?f]", {{"?f", "wrap"}}, "quad[wrap]");

  Instantiation sigma{{"?f", "wrap"}};
  PairClosure pairs = compute_more_pairs(reg.theorem("quad-self"), sigma, reg);
  auto obligations = discharge_obligations(pairs, sigma, reg);
  REQUIRE(obligations.size() == 1);
  CHECK_FALSE(obligations[0].discharged);
  CHECK(print_term(obligations[0].expected) ==
        "(equal (quad[wrap] x) (wrap (wrap (wrap (wrap x)))))");
  CHECK(print_term(obligations[0].actual) ==
        "(equal (quad[wrap] x) (wrap (wrap (wrap x))))");
}

TEST_CASE("instantiation validation") {
  Registry reg = corpus_registry();
  CHECK_NOTHROW(validate_instantiation({{"?f", "wrap"}}, reg));
  CHECK_NOTHROW(validate_instantiation({{"?f", "?p"}}, reg));  // funvar values are fine

  try {
    validate_instantiation({{"?f", "g"}}, reg);  // g is binary, ?f unary
    FAIL("expected ArityError");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::Arity);
  }
  try {
    validate_instantiation({{"wrap", "wrap"}}, reg);
    FAIL("expected InvariantViolation");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::Invariant);
  }
}
