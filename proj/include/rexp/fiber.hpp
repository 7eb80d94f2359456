#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rexp/base.hpp"
#include "rexp/rational.hpp"

namespace rexp {

// Fiber spaces E_w, the one-step generators f_w : E_w -> E_{theta(w)} and
// cocycle evaluation for the skew product F(w,x) = (theta(w), f_w(x)).

enum class SpaceKind { Symbolic, Circle, Interval };

struct FiberSpace {
    SpaceKind kind = SpaceKind::Circle;
    // Symbolic only: integer-valued alphabet bound k(w) >= 2. Points of the
    // fiber over w satisfy x_i <= k(theta^i(w)).
    RandomScalar alphabet_bound = RandomScalar::constant(Rational(2));

    static FiberSpace symbolic(RandomScalar bound) { return {SpaceKind::Symbolic, std::move(bound)}; }
    static FiberSpace circle() { return {SpaceKind::Circle, RandomScalar::constant(Rational(2))}; }
    static FiberSpace interval() { return {SpaceKind::Interval, RandomScalar::constant(Rational(2))}; }

    // Upper bound on the fiber diameter in the space metric.
    double diameter_bound() const {
        switch (kind) {
            case SpaceKind::Symbolic: return 2.0;  // sum 2^{-i} |1/a - 1/b| < 2
            case SpaceKind::Circle: return 0.5;
            case SpaceKind::Interval: return 1.0;
        }
        return 1.0;
    }
};

// A fiber point: a real coordinate in [0,1) for circle/interval fibers, or a
// one-sided symbol sequence stored as finite word + repeating tail pattern so
// shifts and distances stay exact. Symbols are 1-based.
class FiberPoint {
public:
    FiberPoint() = default;

    static FiberPoint symbolic(std::vector<int> word, std::vector<int> tail = {1}, int tail_phase = 0);
    static FiberPoint circle(double coord);
    static FiberPoint interval(double coord);
    static FiberPoint real(SpaceKind kind, double coord);

    SpaceKind kind() const { return kind_; }
    double coord() const { return coord_; }
    int sym(int64_t i) const;
    const std::vector<int>& word() const { return word_; }
    const std::vector<int>& tail() const { return tail_; }

    FiberPoint shifted_left() const;          // drop coordinate 0
    FiberPoint with_prepended(int sym) const; // shift preimage choice

    std::string describe() const;

    // Exact equality of the encoded point (symbolic compares sequences).
    bool same_point(const FiberPoint& other) const;

private:
    SpaceKind kind_ = SpaceKind::Circle;
    double coord_ = 0.0;
    std::vector<int> word_;
    std::vector<int> tail_ = {1};
    int tail_phase_ = 0;
};

// One-step map on circle/interval coordinates, resolved at a base point.
struct MapSpec {
    enum class Kind { Rotation, Expanding, PiecewiseLinear };
    Kind kind = Kind::Rotation;
    double angle = 0.0;      // Rotation: x -> x + angle mod 1
    long long degree = 2;    // Expanding: x -> degree*x mod 1
    // PiecewiseLinear: increasing homeomorphism of [0,1] given by vertices
    // (x_i, y_i) with x_0 = y_0 = 0 and x_last = y_last = 1.
    std::vector<std::pair<double, double>> vertices;

    static MapSpec rotation(double angle) { return {Kind::Rotation, angle, 2, {}}; }
    static MapSpec expanding(long long degree);
    static MapSpec piecewise_linear(std::vector<std::pair<double, double>> vertices);

    bool invertible() const { return kind != Kind::Expanding; }
    double max_slope() const;
    double min_slope() const;
};

double map_forward(const MapSpec& m, double x);
double map_inverse(const MapSpec& m, double y);  // invertible kinds only

enum class GeneratorKind { Shift, ExpandingCircle, Rotation, Mixed };

struct FiberSystem {
    FiberSpace space;
    GeneratorKind kind = GeneratorKind::Rotation;
    RandomScalar degree = RandomScalar::constant(Rational(2));  // ExpandingCircle
    RandomScalar angle = RandomScalar::constant(Rational(1, 4));  // Rotation
    std::map<int, MapSpec> table;  // Mixed: one map per base symbol
    bool invertible = false;

    static FiberSystem shift(RandomScalar alphabet_bound);
    static FiberSystem expanding_circle(RandomScalar degree);
    static FiberSystem rotation_circle(RandomScalar angle);
    static FiberSystem mixed(FiberSpace space, std::map<int, MapSpec> table);

    // One-step coordinate map for the fiber over w (circle/interval only).
    MapSpec map_at(const BasePoint& w) const;
    long long alphabet_at(const BasePoint& w) const { return space.alphabet_bound.eval_int(w); }
    bool is_isometry_system() const;
};

// f_w^n; n < 0 requires an invertible system.
FiberPoint cocycle_apply(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x, int64_t n);

// Certified distance bracket; exact (lower == upper) for circle/interval,
// truncated-series bracket of width <= 2^{-(tail_depth-1)} for symbolic.
struct DistanceBracket {
    double lower = 0.0;
    double upper = 0.0;
};

DistanceBracket fiber_distance(const FiberSpace& space, const FiberPoint& x, const FiberPoint& y,
                               int tail_depth = 40);

// Exact series value for symbolic points (both tails eventually periodic).
Rational symbolic_distance_exact(const FiberPoint& x, const FiberPoint& y);

double circle_distance(double a, double b);

// Checks x_i <= k(theta^i(w)) on the first `depth` coordinates.
bool respects_alphabet(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x, int depth);

}  // namespace rexp
