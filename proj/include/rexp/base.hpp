#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rexp/rational.hpp"

namespace rexp {

// The driving system (Omega, P, theta): an invertible measure-preserving map
// represented through seeded two-sided symbol sequences. A point of Omega is
// (seed, offset); theta is offset arithmetic, hence exactly invertible.

enum class BaseKind { Singleton, FiniteRotation, Bernoulli, Markov };

class BaseEnvironment;
using EnvPtr = std::shared_ptr<const BaseEnvironment>;

class BaseEnvironment {
public:
    static EnvPtr singleton(std::string description = "singleton");
    static EnvPtr finite_rotation(int period, std::string description = "finite-rotation");
    static EnvPtr bernoulli(std::vector<double> weights, std::string description = "bernoulli");
    static EnvPtr markov(std::vector<std::vector<double>> transition, std::vector<double> stationary,
                         std::string description = "markov");

    BaseKind kind() const { return kind_; }
    const std::string& description() const { return description_; }
    int alphabet_size() const;
    int rotation_period() const { return rotation_period_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& transition() const { return transition_; }

    // Law of a single coordinate (stationary by construction for every kind).
    std::vector<double> symbol_law() const;

    // Symbol of the two-sided sequence at absolute index; pure in (seed, index).
    int symbol_at(uint64_t seed, int64_t index) const;

private:
    BaseEnvironment() = default;
    void validate() const;

    BaseKind kind_ = BaseKind::Singleton;
    std::string description_;
    int rotation_period_ = 1;
    std::vector<double> weights_;
    std::vector<std::vector<double>> transition_;
    std::vector<double> stationary_;
    std::vector<std::vector<double>> reverse_;  // time-reversed markov rows
};

class BasePoint {
public:
    BasePoint(EnvPtr env, uint64_t seed, int64_t offset = 0);

    // Symbol of theta^k(w) at its own index 0, i.e. raw index offset+k.
    int symbol(int64_t k) const;
    BasePoint advanced(int64_t k) const;

    const BaseEnvironment& env() const { return *env_; }
    const EnvPtr& env_ptr() const { return env_; }
    uint64_t seed() const { return seed_; }
    int64_t offset() const { return offset_; }
    std::string id() const;

    bool same_orbit(const BasePoint& other) const {
        return env_ == other.env_ && seed_ == other.seed_;
    }
    bool operator==(const BasePoint& other) const {
        return same_orbit(other) && offset_ == other.offset_;
    }

private:
    struct OrbitCache {
        std::mutex mu;
        std::unordered_map<int64_t, int> symbols;
    };

    EnvPtr env_;
    uint64_t seed_ = 0;
    int64_t offset_ = 0;
    std::shared_ptr<OrbitCache> cache_;
};

inline BasePoint advance(const BasePoint& w, int64_t k) { return w.advanced(k); }

// Random variable over the base, strictly positive whenever required.
class RandomScalar {
public:
    enum class Form { Constant, SymbolTable, WindowFunction };

    RandomScalar() = default;  // constant 1
    static RandomScalar constant(double value);
    static RandomScalar constant(Rational value);
    // One entry per base symbol.
    static RandomScalar symbol_table(std::vector<Rational> table);
    // Keyed by the symbol window (w_{-r}, ..., w_r).
    static RandomScalar window_function(int radius, std::map<std::vector<int>, Rational> table);

    double eval(const BasePoint& w) const;
    Rational eval_exact(const BasePoint& w) const;
    long long eval_int(const BasePoint& w) const;

    RandomScalar scaled(const Rational& factor) const;
    RandomScalar halved() const { return scaled(Rational(1, 2)); }

    // Infimum of the value over all base points.
    Rational min_value() const;

    Form form() const { return form_; }
    bool is_constant() const { return form_ == Form::Constant; }
    const Rational& constant_value() const { return constant_; }
    const std::vector<Rational>& table() const { return table_; }
    int radius() const { return radius_; }
    const std::map<std::vector<int>, Rational>& window_table() const { return window_table_; }
    const Rational& scale() const { return scale_; }

private:
    Form form_ = Form::Constant;
    Rational constant_ = 1;
    std::vector<Rational> table_;
    int radius_ = 0;
    std::map<std::vector<int>, Rational> window_table_;
    Rational scale_ = 1;
};

inline double eval_scalar(const RandomScalar& s, const BasePoint& w) { return s.eval(w); }

std::vector<BasePoint> sample_base(EnvPtr env, int count, uint64_t master_seed);

// Integral over P of a function of the symbol at index 0.
double integrate_symbol_function(const BaseEnvironment& env, const std::function<double(int)>& g);

// Integral over P of g(scalar value); constant and symbol-table forms only.
std::optional<double> integrate_scalar(const BaseEnvironment& env, const RandomScalar& s,
                                       const std::function<double(double)>& g);

}  // namespace rexp
