#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rexp/base.hpp"
#include "rexp/fiber.hpp"
#include "rexp/rational.hpp"
#include "rexp/regions.hpp"

namespace rexp {

// Per-fiber measures mu_w and rule-based disintegrations
// d mu(w,x) = d mu_w(x) d P(w).

struct CylinderSet {
    BasePoint base;
    std::vector<int> word;  // 1-based symbols
    int depth() const { return static_cast<int>(word.size()); }
};

enum class CylinderRule { Uniform, SkewFirst, SkewIID };

// Product measure over one-sided symbol sequences: coordinate i carries a
// probability vector over the alphabet {1..k(theta^i(w))}. Exact rationals
// throughout; pushforward under the shift is an index shift.
class CylinderProduct {
public:
    CylinderProduct(BasePoint base, RandomScalar alphabet_bound, CylinderRule rule,
                    std::map<int, std::vector<Rational>> skew_overrides = {});

    const BasePoint& base() const { return base_; }
    CylinderRule rule() const { return rule_; }
    int64_t steps() const { return steps_; }

    long long alphabet_at(int64_t index) const;
    std::vector<Rational> vector_at(int64_t index) const;
    Rational word_mass(const std::vector<int>& word) const;  // 0 if bound violated

    CylinderProduct pushforward_shift() const;

    // Skew vector used for alphabet size k: ((k+1)/(2k), 1/(2k), ..., 1/(2k))
    // unless overridden.
    std::vector<Rational> skew_vector(long long k) const;
    const std::map<int, std::vector<Rational>>& skew_overrides() const { return skew_overrides_; }

private:
    BasePoint base_;
    RandomScalar alphabet_bound_;
    CylinderRule rule_ = CylinderRule::Uniform;
    int64_t steps_ = 0;
    std::map<int, std::vector<Rational>> skew_overrides_;
};

// Piecewise-constant density on [0,1] with exact rational cuts and masses.
struct PiecewiseDensity {
    SpaceKind kind = SpaceKind::Circle;
    std::vector<Rational> cuts;    // 0 = cuts[0] < ... < cuts[m] = 1
    std::vector<Rational> masses;  // per cell, summing to 1

    static PiecewiseDensity uniform(SpaceKind kind);
    static PiecewiseDensity from_cell_masses(SpaceKind kind, std::vector<Rational> masses);

    void validate() const;
    bool is_uniform() const;
    size_t cells() const { return masses.size(); }
    Rational interval_mass(const Rational& a, const Rational& b) const;  // a <= b within [0,1]
    double segment_mass(double a, double b) const;
};

struct AtomicMeasure {
    std::vector<std::pair<FiberPoint, double>> atoms;  // weights sum to 1 within 1e-12
};

class FiberMeasure;
using MeasurePtr = std::shared_ptr<const FiberMeasure>;

struct MixtureParts {
    std::vector<std::pair<Rational, MeasurePtr>> parts;  // weights sum to 1 exactly
};

class FiberMeasure {
public:
    enum class Kind { Cylinder, Density, Atomic, Mixture };

    FiberMeasure(CylinderProduct m) : value_(std::move(m)) {}
    FiberMeasure(PiecewiseDensity m) : value_(std::move(m)) {}
    FiberMeasure(AtomicMeasure m) : value_(std::move(m)) {}
    FiberMeasure(MixtureParts m) : value_(std::move(m)) {}

    Kind kind() const { return static_cast<Kind>(value_.index()); }
    const CylinderProduct& cylinder() const { return std::get<CylinderProduct>(value_); }
    const PiecewiseDensity& density() const { return std::get<PiecewiseDensity>(value_); }
    const AtomicMeasure& atomic() const { return std::get<AtomicMeasure>(value_); }
    const MixtureParts& mixture() const { return std::get<MixtureParts>(value_); }

    bool cylinder_compatible() const;
    bool region_compatible() const;

    static FiberMeasure mix(std::vector<std::pair<Rational, FiberMeasure>> parts);
    // Same, merging parts that denote identical measures (see canonical_key).
    static FiberMeasure mix_merged(std::vector<std::pair<Rational, FiberMeasure>> parts);

private:
    std::variant<CylinderProduct, PiecewiseDensity, AtomicMeasure, MixtureParts> value_;
};

struct MassBracket {
    double lower = 0.0;
    double upper = 0.0;
    std::optional<Rational> lower_exact;
    std::optional<Rational> upper_exact;
};

// --- masses ---------------------------------------------------------------

Rational cylinder_mass(const FiberMeasure& mu, const CylinderSet& c);
// Same, without the carrying base point (cylinder measures know their fiber).
Rational word_mass(const FiberMeasure& mu, const std::vector<int>& word);

// Stable identity string for measures whose equality is decidable from the
// representation; distinct keys may still denote equal measures, equal keys
// never denote different ones.
std::optional<std::string> canonical_key(const FiberMeasure& mu);
// Mass of all depth-`depth` cylinders in mixed-radix order (coordinate 0 is
// the most significant digit).
std::vector<Rational> depth_masses(const FiberMeasure& mu, int depth);
std::vector<long long> depth_alphabets(const FiberMeasure& mu, int depth);
Rational total_mass_exact(const FiberMeasure& mu);

MassBracket region_mass(const FiberMeasure& mu, const RegionSet& region);

// --- dynamics -------------------------------------------------------------

// f_{w_source} applied to a measure on E_{w_source}; result lives on the next
// fiber. Exact for every representation used here.
FiberMeasure pushforward_measure(const FiberSystem& sys, const BasePoint& w_source,
                                 const FiberMeasure& mu);

// Spec orientation: measure on E_{theta^{-1}(w)} pushed onto E_w.
inline FiberMeasure pullback_measure(const FiberSystem& sys, const BasePoint& w,
                                     const FiberMeasure& mu_prev) {
    return pushforward_measure(sys, w.advanced(-1), mu_prev);
}

// --- distances ------------------------------------------------------------

enum class DistanceMode { TvCylinder, Wasserstein1D, TvGrid };

double measure_distance(const FiberMeasure& a, const FiberMeasure& b, DistanceMode mode,
                        int cylinder_depth = 8);
Rational tv_cylinder_exact(const FiberMeasure& a, const FiberMeasure& b, int depth);

// --- sampling -------------------------------------------------------------

std::vector<FiberPoint> sample_fiber(const FiberMeasure& mu, int count, uint64_t seed,
                                     int sym_depth = 32);

// --- disintegrations -------------------------------------------------------

struct DisintegratedMeasure {
    std::string name;
    std::function<FiberMeasure(const BasePoint&)> rule;

    FiberMeasure at(const BasePoint& w) const { return rule(w); }
};

DisintegratedMeasure pullback_disintegration(const FiberSystem& sys, const DisintegratedMeasure& dis,
                                             int order = 1);

DisintegratedMeasure uniform_cylinder_disintegration(const FiberSpace& space);
DisintegratedMeasure skew_cylinder_disintegration(const FiberSpace& space, CylinderRule rule,
                                                  std::map<int, std::vector<Rational>> overrides = {});
DisintegratedMeasure lebesgue_disintegration(SpaceKind kind);
DisintegratedMeasure density_disintegration(SpaceKind kind, std::vector<Rational> cell_masses);
DisintegratedMeasure atomic_disintegration(AtomicMeasure atoms);

}  // namespace rexp
