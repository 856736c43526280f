#include <catch2/catch_amalgamated.hpp>

#include "copyless/copyless.hpp"
#include "support/gen.hpp"

using namespace copyless;

TEST_CASE("well-formedness judgment") {
  CHECK(check_wf({}, {}, t_end()));
  // continuation occurrences of a prefix binder are rejected
  CHECK_FALSE(check_wf({}, {}, parse_etype("!m<a>(lin end).a")));
  CHECK_FALSE(check_wf({}, {}, parse_etype("?m<a>(lin end).a")));
  // the mapper type is well formed with its two parameters free
  CHECK(check_wf({tv("a"), tv("b")}, parse_etype("rec g. ?Arg(lin a). !Res(lin b). g")));
  // inner variables may only appear inside prefixes
  TypeVarSet inner{tv("a")};
  CHECK(check_wf({}, inner, parse_etype("!m(lin a).end")));
  CHECK_FALSE(check_wf({}, inner, parse_etype("!m(lin end).a")));
  CHECK_THROWS_AS(check_wf({tv("a")}, inner, t_end()), TypeSyntaxError);
  // free variables must be declared
  CHECK_FALSE(check_wf({}, parse_etype("a")));
  CHECK(check_wf({tv("a")}, parse_etype("a")));
}

TEST_CASE("qualified types") {
  CHECK(check_qualified({}, parse_type("lin end")));
  CHECK(check_qualified({}, parse_type("un rec g. !Invoke<b>(lin ?m(lin b).end). g")));
  CHECK_FALSE(check_qualified({}, parse_type("un end")));
  CHECK_FALSE(check_qualified({}, parse_type("un rec g. ?m(lin end). g")));
  CHECK_FALSE(check_qualified({}, parse_type("un rec g. !{m(lin end). g, k(). end}")));
}

TEST_CASE("dual") {
  SECTION("end") { CHECK(alpha_equal(dual(t_end()), t_end())); }
  SECTION("recursion variable inside a prefix forces the inner substitution") {
    ET t = parse_etype("rec a. !m<b>(lin a). end");
    ET expect = parse_etype("rec a. ?m<b>(lin rec a2. !m<b2>(lin a2). end). end");
    CHECK(alpha_equal(dual(t), expect));
  }
  SECTION("mapper") {
    ET t = parse_etype("rec g. ?Arg(lin a). !Res(lin b). g");
    CHECK(alpha_equal(dual(t), parse_etype("rec g. !Arg(lin a). ?Res(lin b). g")));
  }
  SECTION("undefined on top-level free variables") {
    CHECK_THROWS_AS(dual(parse_etype("a")), TypeSyntaxError);
    CHECK_THROWS_AS(dual(parse_etype("!m(lin end).a")), TypeSyntaxError);
    CHECK_NOTHROW(dual(parse_etype("!m(lin a).end")));
  }
}

TEST_CASE("duality relation") {
  CHECK(is_dual_pair(t_end(), t_end()));
  SECTION("the leaky pair is nonetheless dual") {
    ET t1 = parse_etype("!m(lin rec a. ?m(lin a). end). end");
    ET t2 = parse_etype("rec a. ?m(lin a). end");
    CHECK(is_dual_pair(t1, t2));
  }
  SECTION("every well-formed closed type is dual to its dual") {
    ET mapper = parse_etype("rec g. ?Arg(lin a). !Res(lin b). g");
    CHECK(is_dual_pair(mapper, dual(mapper)));
  }
  SECTION("argument types must match exactly") {
    ET a = parse_etype("!m(lin end). end");
    ET b = parse_etype("?m(lin ?k().end). end");
    CHECK_FALSE(is_dual_pair(a, b));
    CHECK_FALSE(is_dual_pair(a, parse_etype("?m2(lin end). end")));
    CHECK(is_dual_pair(a, parse_etype("?m(lin end). end")));
  }
}

TEST_CASE("independence") {
  ET t = parse_etype("rec a. !m(lin end). a");
  auto [t1, t2] = make_independent(t, t);
  CHECK(are_independent(t1, t2));
  CHECK(alpha_equal(t1, t));
  CHECK(alpha_equal(t2, t));
  auto bt1 = btv(t1), bt2 = btv(t2);
  for (const auto& v : bt1) CHECK_FALSE(bt2.count(v));
}

TEST_CASE("subtyping algorithm") {
  CHECK(subtype(t_end(), t_end()));
  CHECK_FALSE(subtype(t_end(), parse_etype("!m().end")));

  SECTION("worked recursive example") {
    ET t = parse_etype("rec a. !TA<a1>(lin !TB<a2>(lin a2). a1). a");
    ET s = parse_etype("rec b. !TA<b1>(lin !{TB<b2>(lin b2). b1, TC<b3>(lin b3). end}). b");
    CHECK(subtype(t, s));
    CHECK_FALSE(subtype(s, t));
  }
  SECTION("object-type law: more methods is a subtype") {
    ET more = parse_etype("rec a. !{m1(lin end).a, m2(lin end).a, m3(lin end).a}");
    ET fewer = parse_etype("rec a. !{m1(lin end).a, m3(lin end).a}");
    CHECK(subtype(more, fewer));
    CHECK_FALSE(subtype(fewer, more));
  }
  SECTION("external choice: fewer branches is a subtype") {
    ET fewer = parse_etype("?{m1(lin end).end}");
    ET more = parse_etype("?{m1(lin end).end, m2(lin end).end}");
    CHECK(subtype(fewer, more));
    CHECK_FALSE(subtype(more, fewer));
  }
  SECTION("argument variance") {
    ET narrow = parse_etype("!m(lin ?{m1().end}).end");
    ET wide = parse_etype("!m(lin ?{m1().end, m2().end}).end");
    // internal choice: contravariant arguments
    CHECK(subtype(wide, narrow));
    CHECK_FALSE(subtype(narrow, wide));
    // external choice: covariant arguments
    ET rnarrow = parse_etype("?m(lin ?{m1().end}).end");
    ET rwide = parse_etype("?m(lin ?{m1().end, m2().end}).end");
    CHECK(subtype(rnarrow, rwide));
    CHECK_FALSE(subtype(rwide, rnarrow));
  }
  SECTION("qualifier order: un below lin") {
    Type u = parse_type("un rec g. !Invoke(lin end). g");
    Type l{Qual::Lin, u.body};
    CHECK(subtype_qualified(u, l));
    CHECK_FALSE(subtype_qualified(l, u));
    CHECK(subtype_qualified(l, l));
  }
  SECTION("prefix binders unify positionally") {
    ET a = parse_etype("!m<x>(lin x).end");
    ET b = parse_etype("!m<y>(lin y).end");
    CHECK(subtype(a, b));
  }
}

TEST_CASE("subtype trace stays within the instances universe") {
  ET t0 = parse_etype("rec a. !TA<a1>(lin !TB<a2>(lin a2). a1). a");
  ET s0 = parse_etype("rec b. !TA<b1>(lin !{TB<b2>(lin b2). b1, TC<b3>(lin b3). end}). b");
  auto [t, s] = make_independent(t0, s0);
  FreshVarMap fv;
  SubtypeTrace trace;
  REQUIRE(subtype_independent(t, s, fv, &trace));
  REQUIRE_FALSE(trace.visited.empty());
  auto inst = instances(fv, t, s);
  std::set<std::string> keys;
  for (const auto& e : inst) keys.insert(canon_key(e));
  for (const auto& [lhs, rhs] : trace.visited) {
    CHECK(keys.count(canon_key(lhs)));
    CHECK(keys.count(canon_key(rhs)));
  }
  // the memoization context is bounded by the instances set
  CHECK(trace.visited.size() <= inst.size() * inst.size());
}

TEST_CASE("subtyping oracle agrees on the worked examples") {
  ET t = parse_etype("rec a. !TA<a1>(lin !TB<a2>(lin a2). a1). a");
  ET s = parse_etype("rec b. !TA<b1>(lin !{TB<b2>(lin b2). b1, TC<b3>(lin b3). end}). b");
  CHECK(subtype_oracle(t, t, 8));
  CHECK(subtype_oracle(t, s, 24));
  CHECK_FALSE(subtype_oracle(s, t, 24));
}

TEST_CASE("weights") {
  CHECK(weight(t_end()) == Weight::of(0));
  CHECK(weight(parse_etype("!m(lin end).end")) == Weight::of(0));
  CHECK(weight(parse_etype("?m<a>(lin end).end")) == Weight::of(1));
  CHECK(weight(parse_etype("?m<a>(lin a).end")) == Weight::infinite());
  CHECK(weight(parse_etype("rec a. ?m(lin a). end")) == Weight::infinite());
  CHECK(weight(parse_etype("rec a. ?m(lin end). a")) == Weight::of(1));
  CHECK(weight(parse_etype("?m(lin ?m(lin end).end).end")) == Weight::of(2));
  CHECK(weight(TypeVarSet{tv("a")}, parse_etype("a")) == Weight::of(0));
  CHECK(weight(parse_etype("a")) == Weight::infinite());

  SECTION("the prompt trick nullifies a list's weight") {
    ET list = parse_etype("rec b. !Prompt(). ?{Nil(). end, Cons(lin a, lin b). end}");
    CHECK(weight(TypeVarSet{tv("a")}, list) == Weight::of(0));
    ET bare = parse_etype("rec b. ?{Nil(). end, Cons(lin a, lin b). end}");
    CHECK(weight(TypeVarSet{tv("a")}, bare) == Weight::infinite());
  }
  SECTION("qualified weight is the body's weight") {
    CHECK(weight(TypeVarSet{}, parse_type("lin ?m(lin end).end")) == Weight::of(1));
  }
  SECTION("ordering") {
    CHECK(Weight::of(3) < Weight::infinite());
    CHECK(Weight::infinite() <= Weight::infinite());
    CHECK_FALSE(Weight::infinite() <= Weight::of(100));
    CHECK(max(Weight::of(2), Weight::infinite()) == Weight::infinite());
    CHECK((1 + Weight::infinite()) == Weight::infinite());
  }
}

TEST_CASE("weight oracle") {
  CHECK(weight_oracle({}, t_end(), 4) == Weight::of(0));
  CHECK(weight_oracle({}, parse_etype("?m(lin ?m(lin end).end).end"), 4) == Weight::of(2));
  CHECK(weight_oracle({tv("a")}, parse_etype("a"), 4) == Weight::of(0));
  CHECK(weight_oracle({}, parse_etype("a"), 4) == Weight::infinite());
  CHECK(weight_oracle({}, parse_etype("rec a. ?m(lin a). end"), 6) == Weight::infinite());
  CHECK(weight_oracle({}, parse_etype("rec a. ?m(lin end). a"), 6) == Weight::of(1));
}

TEST_CASE("encoded function types are contravariant/covariant", "[functions]") {
  auto enc = [](const Type& s, const Type& t) {
    // un rec a.!Invoke(lin ?Arg(s).!Res(t).end).a
    ET inner = t_external({TBranch{
        tag("Arg"), {}, {s}, t_internal({TBranch{tag("Res"), {}, {t}, t_end()}})}});
    return Type{Qual::Un,
                t_rec(tv("a"), t_internal({TBranch{
                                   tag("Invoke"), {}, {Type{Qual::Lin, inner}}, t_var(tv("a"))}}))};
  };
  std::vector<Type> grid;
  gen::Rng rng(5);
  grid.push_back(parse_type("lin end"));
  grid.push_back(parse_type("lin !m1(lin end).end"));
  grid.push_back(parse_type("lin !{m1(lin end).end, m2(lin end).end}"));
  grid.push_back(parse_type("lin ?{m1().end}"));
  grid.push_back(parse_type("lin ?{m1().end, m2().end}"));
  for (int i = 0; i < 4; ++i) grid.push_back(Type{Qual::Lin, gen::closed_etype(rng, 6)});
  size_t combos = 0;
  for (const auto& s1 : grid)
    for (const auto& t1 : grid)
      for (const auto& s2 : grid)
        for (const auto& t2 : grid) {
          if (++combos > 3000) return;
          bool lhs = subtype_qualified(enc(s1, t1), enc(s2, t2));
          bool rhs = subtype_qualified(s2, s1) && subtype_qualified(t1, t2);
          REQUIRE(lhs == rhs);
        }
}
