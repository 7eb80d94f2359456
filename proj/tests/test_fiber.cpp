#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rexp/fiber.hpp"

using namespace rexp;

namespace {

FiberSystem random_shift_23(EnvPtr& env_out) {
    env_out = BaseEnvironment::bernoulli({0.5, 0.5});
    return FiberSystem::shift(RandomScalar::symbol_table({Rational(2), Rational(3)}));
}

}  // namespace

TEST_CASE("cocycle at n = 0 is the identity") {
    EnvPtr env;
    FiberSystem sys = random_shift_23(env);
    BasePoint w(env, 9);
    FiberPoint x = FiberPoint::symbolic({2, 1, 2});
    CHECK(cocycle_apply(sys, w, x, 0).same_point(x));
}

TEST_CASE("shift drops the leading symbol") {
    EnvPtr env;
    FiberSystem sys = random_shift_23(env);
    BasePoint w(env, 5);
    FiberPoint x = FiberPoint::symbolic({3, 1, 2});
    FiberPoint y = cocycle_apply(sys, w, x, 1);
    CHECK(y.sym(0) == 1);
    CHECK(y.sym(1) == 2);
    CHECK(y.sym(2) == 1);  // tail of constant 1s
}

TEST_CASE("expanding circle: doubling 0.3 three times gives 0.4") {
    FiberSystem sys = FiberSystem::expanding_circle(RandomScalar::constant(Rational(2)));
    auto env = BaseEnvironment::singleton();
    BasePoint w(env, 0);
    FiberPoint x = FiberPoint::circle(0.3);
    FiberPoint y = cocycle_apply(sys, w, x, 3);
    CHECK(y.coord() == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("negative powers require invertibility") {
    FiberSystem doubling = FiberSystem::expanding_circle(RandomScalar::constant(Rational(2)));
    auto env = BaseEnvironment::singleton();
    BasePoint w(env, 0);
    CHECK_THROWS_AS(cocycle_apply(doubling, w, FiberPoint::circle(0.25), -1), std::invalid_argument);

    FiberSystem rot = FiberSystem::rotation_circle(RandomScalar::constant(Rational(1, 3)));
    FiberPoint x = FiberPoint::circle(0.25);
    FiberPoint back = cocycle_apply(rot, w, cocycle_apply(rot, w.advanced(-1), x, 1), -1);
    (void)back;
    FiberPoint roundtrip = cocycle_apply(rot, w, cocycle_apply(rot, w, x, 5), -5);
    CHECK(roundtrip.coord() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("cocycle law f_w^{n+m} = f_{theta^n w}^m o f_w^n") {
    EnvPtr env;
    FiberSystem shift = random_shift_23(env);
    FiberSystem circle = FiberSystem::mixed(
        FiberSpace::circle(), {{0, MapSpec::rotation(0.37)}, {1, MapSpec::expanding(2)}});
    auto bases = sample_base(env, 20, 314);
    int checked = 0;
    for (const BasePoint& w : bases) {
        FiberPoint xs = FiberPoint::symbolic({1, 2, 1, 2, 2, 1, 1, 2, 1, 1}, {2, 1});
        FiberPoint xc = FiberPoint::circle(0.123 + 0.01 * (checked % 7));
        for (int n = 0; n <= 10; ++n) {
            for (int m = 0; m <= 10 - n; ++m) {
                FiberPoint lhs = cocycle_apply(shift, w, xs, n + m);
                FiberPoint rhs = cocycle_apply(shift, w.advanced(n), cocycle_apply(shift, w, xs, n), m);
                CHECK(lhs.same_point(rhs));
                double lc = cocycle_apply(circle, w, xc, n + m).coord();
                double rc =
                    cocycle_apply(circle, w.advanced(n), cocycle_apply(circle, w, xc, n), m).coord();
                CHECK(circle_distance(lc, rc) < 1e-10);
            }
        }
        if (++checked == 10) break;
    }
}

TEST_CASE("rotations are isometries of the fiber metric") {
    auto env = BaseEnvironment::bernoulli({0.5, 0.5});
    FiberSystem rot = FiberSystem::rotation_circle(
        RandomScalar::symbol_table({parse_fraction("0.61803398874989485"), Rational(1, 7)}));
    FiberSpace space = FiberSpace::circle();
    for (const BasePoint& w : sample_base(env, 10, 2718)) {
        FiberPoint x = FiberPoint::circle(0.15);
        FiberPoint y = FiberPoint::circle(0.97);
        double before = fiber_distance(space, x, y).lower;
        for (int n = 1; n <= 12; ++n) {
            double after = fiber_distance(space, cocycle_apply(rot, w, x, n),
                                          cocycle_apply(rot, w, y, n))
                               .lower;
            CHECK(after == doctest::Approx(before).epsilon(1e-12));
        }
    }
}

TEST_CASE("fiber distance: identical points") {
    FiberSpace space = FiberSpace::symbolic(RandomScalar::constant(Rational(2)));
    FiberPoint x = FiberPoint::symbolic({1, 2, 1});
    DistanceBracket b = fiber_distance(space, x, x, 20);
    CHECK(b.lower == 0.0);
    CHECK(b.upper <= std::ldexp(1.0, -19));
}

TEST_CASE("fiber distance: single differing coordinate gives 1/2") {
    FiberSpace space = FiberSpace::symbolic(RandomScalar::constant(Rational(2)));
    FiberPoint x = FiberPoint::symbolic({1}, {1});
    FiberPoint y = FiberPoint::symbolic({2}, {1});
    DistanceBracket b = fiber_distance(space, x, y, 30);
    CHECK(b.lower <= 0.5);
    CHECK(b.upper >= 0.5);
    CHECK(symbolic_distance_exact(x, y) == Rational(1, 2));
}

TEST_CASE("circle distance wraps around") {
    FiberSpace space = FiberSpace::circle();
    DistanceBracket b = fiber_distance(space, FiberPoint::circle(0.1), FiberPoint::circle(0.9));
    CHECK(b.lower == doctest::Approx(0.2));
    CHECK(b.lower == b.upper);
}

TEST_CASE("symbolic distance bracket width obeys the tail bound") {
    FiberSpace space = FiberSpace::symbolic(RandomScalar::constant(Rational(3)));
    FiberPoint x = FiberPoint::symbolic({1, 2, 3, 1}, {1, 3});
    FiberPoint y = FiberPoint::symbolic({1, 2, 3}, {2});
    for (int depth : {5, 10, 20, 40}) {
        DistanceBracket b = fiber_distance(space, x, y, depth);
        CHECK(b.upper - b.lower <= std::ldexp(1.0, -(depth - 1)) + 1e-15);
        Rational exact = symbolic_distance_exact(x, y);
        CHECK(to_double(exact) >= b.lower - 1e-15);
        CHECK(to_double(exact) <= b.upper + 1e-15);
    }
}

TEST_CASE("agreement on a prefix forces a small distance") {
    FiberSpace space = FiberSpace::symbolic(RandomScalar::constant(Rational(2)));
    // agree on coordinates 0..n-1, differ afterwards
    for (int n : {3, 6, 9}) {
        std::vector<int> wx(n, 1), wy(n, 1);
        FiberPoint x = FiberPoint::symbolic(wx, {1});
        FiberPoint y = FiberPoint::symbolic(wy, {2});
        Rational d = symbolic_distance_exact(x, y);
        CHECK(d <= pow2(-(n - 1)));
    }
    // differ at coordinate 0: at least the minimal reciprocal gap
    FiberPoint a = FiberPoint::symbolic({2}, {1});
    FiberPoint b = FiberPoint::symbolic({3}, {1});
    CHECK(symbolic_distance_exact(a, b) >= Rational(1, 6));
}

TEST_CASE("piecewise-linear homeomorphism round-trips exactly on dyadics") {
    MapSpec pl = MapSpec::piecewise_linear({{0, 0}, {0.25, 0.5}, {0.5, 0.75}, {1, 1}});
    for (double x : {0.0, 0.125, 0.25, 0.3125, 0.5, 0.75, 1.0}) {
        CHECK(map_inverse(pl, map_forward(pl, x)) == x);
    }
    CHECK(pl.max_slope() == doctest::Approx(2.0));
    CHECK(pl.min_slope() == doctest::Approx(0.5));
}

TEST_CASE("symbolic points respect the alphabet bound") {
    EnvPtr env;
    FiberSystem sys = random_shift_23(env);
    BasePoint w(env, 4);
    // symbol 3 is allowed exactly where the bound is 3
    std::vector<int> word;
    for (int i = 0; i < 6; ++i) word.push_back(static_cast<int>(sys.alphabet_at(w.advanced(i))));
    CHECK(respects_alphabet(sys, w, FiberPoint::symbolic(word, {1}), 6));
    word[2] += 1;
    CHECK(!respects_alphabet(sys, w, FiberPoint::symbolic(word, {1}), 6));
}

TEST_CASE("shift image lands in the next fiber") {
    EnvPtr env;
    FiberSystem sys = random_shift_23(env);
    for (const BasePoint& w : sample_base(env, 30, 5)) {
        std::vector<int> word;
        for (int i = 0; i < 8; ++i) word.push_back(static_cast<int>(sys.alphabet_at(w.advanced(i))));
        FiberPoint x = FiberPoint::symbolic(word, {1});
        REQUIRE(respects_alphabet(sys, w, x, 8));
        CHECK(respects_alphabet(sys, w.advanced(1), cocycle_apply(sys, w, x, 1), 7));
    }
}
