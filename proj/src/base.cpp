#include "rexp/base.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rexp/rng.hpp"

namespace rexp {

namespace {

void check_probability_vector(const std::vector<double>& w, const char* what) {
    if (w.empty()) throw std::invalid_argument(std::string(what) + ": empty weight vector");
    double sum = 0.0;
    for (double x : w) {
        if (!(x > 0.0)) throw std::invalid_argument(std::string(what) + ": weights must be > 0");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(what) + ": weights must sum to 1 within 1e-12");
}

}  // namespace

EnvPtr BaseEnvironment::singleton(std::string description) {
    auto env = std::shared_ptr<BaseEnvironment>(new BaseEnvironment());
    env->kind_ = BaseKind::Singleton;
    env->description_ = std::move(description);
    return env;
}

EnvPtr BaseEnvironment::finite_rotation(int period, std::string description) {
    if (period < 1) throw std::invalid_argument("finite_rotation: period must be >= 1");
    auto env = std::shared_ptr<BaseEnvironment>(new BaseEnvironment());
    env->kind_ = BaseKind::FiniteRotation;
    env->rotation_period_ = period;
    env->description_ = std::move(description);
    return env;
}

EnvPtr BaseEnvironment::bernoulli(std::vector<double> weights, std::string description) {
    check_probability_vector(weights, "bernoulli");
    auto env = std::shared_ptr<BaseEnvironment>(new BaseEnvironment());
    env->kind_ = BaseKind::Bernoulli;
    env->weights_ = std::move(weights);
    env->description_ = std::move(description);
    return env;
}

EnvPtr BaseEnvironment::markov(std::vector<std::vector<double>> transition, std::vector<double> stationary,
                               std::string description) {
    size_t n = transition.size();
    if (n == 0) throw std::invalid_argument("markov: empty transition matrix");
    for (const auto& row : transition) {
        if (row.size() != n) throw std::invalid_argument("markov: transition matrix must be square");
        double sum = 0.0;
        for (double x : row) {
            if (x < 0.0) throw std::invalid_argument("markov: negative transition probability");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("markov: rows must sum to 1 within 1e-12");
    }
    check_probability_vector(stationary, "markov stationary");
    if (stationary.size() != n)
        throw std::invalid_argument("markov: stationary vector size mismatch");
    for (size_t j = 0; j < n; ++j) {
        double pj = 0.0;
        for (size_t i = 0; i < n; ++i) pj += stationary[i] * transition[i][j];
        if (std::abs(pj - stationary[j]) > 1e-9)
            throw std::invalid_argument("markov: vector is not stationary within 1e-9");
    }
    auto env = std::shared_ptr<BaseEnvironment>(new BaseEnvironment());
    env->kind_ = BaseKind::Markov;
    env->transition_ = std::move(transition);
    env->stationary_ = std::move(stationary);
    env->description_ = std::move(description);
    // Time-reversed chain, used to extend sequences to negative indices.
    env->reverse_.assign(n, std::vector<double>(n, 0.0));
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < n; ++i)
            env->reverse_[j][i] = env->stationary_[i] * env->transition_[i][j] / env->stationary_[j];
    return env;
}

int BaseEnvironment::alphabet_size() const {
    switch (kind_) {
        case BaseKind::Singleton: return 1;
        case BaseKind::FiniteRotation: return rotation_period_;
        case BaseKind::Bernoulli: return static_cast<int>(weights_.size());
        case BaseKind::Markov: return static_cast<int>(transition_.size());
    }
    return 1;
}

std::vector<double> BaseEnvironment::symbol_law() const {
    switch (kind_) {
        case BaseKind::Singleton: return {1.0};
        case BaseKind::FiniteRotation:
            return std::vector<double>(rotation_period_, 1.0 / rotation_period_);
        case BaseKind::Bernoulli: return weights_;
        case BaseKind::Markov: return stationary_;
    }
    return {1.0};
}

int BaseEnvironment::symbol_at(uint64_t seed, int64_t index) const {
    switch (kind_) {
        case BaseKind::Singleton:
            return 0;
        case BaseKind::FiniteRotation: {
            int64_t m = rotation_period_;
            int64_t v = (static_cast<int64_t>(seed % static_cast<uint64_t>(m)) + index) % m;
            if (v < 0) v += m;
            return static_cast<int>(v);
        }
        case BaseKind::Bernoulli:
            return pick_categorical(weights_, uniform01(hash_u64(seed, static_cast<uint64_t>(index))));
        case BaseKind::Markov: {
            // Walk outward from index 0: stationary start, forward transitions
            // for positive indices, reversed-chain transitions for negative.
            int sym = pick_categorical(stationary_, uniform01(hash_u64(seed, 0)));
            if (index > 0) {
                for (int64_t k = 1; k <= index; ++k)
                    sym = pick_categorical(transition_[sym], uniform01(hash_u64(seed, static_cast<uint64_t>(k))));
            } else if (index < 0) {
                for (int64_t k = -1; k >= index; --k)
                    sym = pick_categorical(reverse_[sym], uniform01(hash_u64(seed, static_cast<uint64_t>(k))));
            }
            return sym;
        }
    }
    return 0;
}

void BaseEnvironment::validate() const {}

BasePoint::BasePoint(EnvPtr env, uint64_t seed, int64_t offset)
    : env_(std::move(env)), seed_(seed), offset_(offset), cache_(std::make_shared<OrbitCache>()) {
    if (!env_) throw std::invalid_argument("BasePoint: null environment");
}

int BasePoint::symbol(int64_t k) const {
    int64_t index = offset_ + k;
    if (env_->kind() == BaseKind::Markov) {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto it = cache_->symbols.find(index);
        if (it != cache_->symbols.end()) return it->second;
        int sym = env_->symbol_at(seed_, index);
        cache_->symbols.emplace(index, sym);
        return sym;
    }
    return env_->symbol_at(seed_, index);
}

BasePoint BasePoint::advanced(int64_t k) const {
    BasePoint p = *this;
    p.offset_ += k;
    return p;
}

std::string BasePoint::id() const {
    std::ostringstream out;
    out << "w" << std::hex << (seed_ & 0xffffffULL) << std::dec;
    if (offset_ >= 0)
        out << "+" << offset_;
    else
        out << offset_;
    return out.str();
}

RandomScalar RandomScalar::constant(double value) { return constant(rational_from_double(value)); }

RandomScalar RandomScalar::constant(Rational value) {
    if (value <= 0) throw std::invalid_argument("RandomScalar: constant must be > 0");
    RandomScalar s;
    s.form_ = Form::Constant;
    s.constant_ = std::move(value);
    return s;
}

RandomScalar RandomScalar::symbol_table(std::vector<Rational> table) {
    if (table.empty()) throw std::invalid_argument("RandomScalar: empty symbol table");
    for (const auto& v : table)
        if (v <= 0) throw std::invalid_argument("RandomScalar: table entries must be > 0");
    RandomScalar s;
    s.form_ = Form::SymbolTable;
    s.table_ = std::move(table);
    return s;
}

RandomScalar RandomScalar::window_function(int radius, std::map<std::vector<int>, Rational> table) {
    if (radius < 0) throw std::invalid_argument("RandomScalar: negative window radius");
    if (table.empty()) throw std::invalid_argument("RandomScalar: empty window table");
    size_t len = static_cast<size_t>(2 * radius + 1);
    for (const auto& [key, v] : table) {
        if (key.size() != len) throw std::invalid_argument("RandomScalar: window key length mismatch");
        if (v <= 0) throw std::invalid_argument("RandomScalar: table entries must be > 0");
    }
    RandomScalar s;
    s.form_ = Form::WindowFunction;
    s.radius_ = radius;
    s.window_table_ = std::move(table);
    return s;
}

double RandomScalar::eval(const BasePoint& w) const { return to_double(eval_exact(w)); }

Rational RandomScalar::eval_exact(const BasePoint& w) const {
    switch (form_) {
        case Form::Constant:
            return constant_ * scale_;
        case Form::SymbolTable: {
            int sym = w.symbol(0);
            if (sym < 0 || static_cast<size_t>(sym) >= table_.size())
                throw std::out_of_range("RandomScalar: symbol " + std::to_string(sym) + " outside table");
            return table_[sym] * scale_;
        }
        case Form::WindowFunction: {
            std::vector<int> key;
            key.reserve(2 * radius_ + 1);
            for (int k = -radius_; k <= radius_; ++k) key.push_back(w.symbol(k));
            auto it = window_table_.find(key);
            if (it == window_table_.end()) {
                std::ostringstream msg;
                msg << "RandomScalar: window (";
                for (size_t i = 0; i < key.size(); ++i) msg << (i ? "," : "") << key[i];
                msg << ") missing from table";
                throw std::out_of_range(msg.str());
            }
            return it->second * scale_;
        }
    }
    return constant_;
}

long long RandomScalar::eval_int(const BasePoint& w) const {
    Rational v = eval_exact(w);
    if (denominator(v) != 1)
        throw std::invalid_argument("RandomScalar: value " + fraction_string(v) + " is not an integer");
    return numerator(v).convert_to<long long>();
}

Rational RandomScalar::min_value() const {
    switch (form_) {
        case Form::Constant:
            return constant_ * scale_;
        case Form::SymbolTable: {
            Rational m = table_.front();
            for (const auto& v : table_) m = std::min(m, v);
            return m * scale_;
        }
        case Form::WindowFunction: {
            Rational m = window_table_.begin()->second;
            for (const auto& [key, v] : window_table_) m = std::min(m, v);
            return m * scale_;
        }
    }
    return constant_;
}

RandomScalar RandomScalar::scaled(const Rational& factor) const {
    if (factor <= 0) throw std::invalid_argument("RandomScalar: scale factor must be > 0");
    RandomScalar s = *this;
    s.scale_ *= factor;
    return s;
}

std::vector<BasePoint> sample_base(EnvPtr env, int count, uint64_t master_seed) {
    if (count < 1) throw std::invalid_argument("sample_base: count must be >= 1");
    std::vector<BasePoint> points;
    points.reserve(count);
    for (int i = 0; i < count; ++i)
        points.emplace_back(env, hash_u64(master_seed, static_cast<uint64_t>(i)), 0);
    return points;
}

double integrate_symbol_function(const BaseEnvironment& env, const std::function<double(int)>& g) {
    std::vector<double> law = env.symbol_law();
    double acc = 0.0;
    for (size_t s = 0; s < law.size(); ++s) acc += law[s] * g(static_cast<int>(s));
    return acc;
}

std::optional<double> integrate_scalar(const BaseEnvironment& env, const RandomScalar& s,
                                       const std::function<double(double)>& g) {
    switch (s.form()) {
        case RandomScalar::Form::Constant:
            return g(to_double(s.constant_value() * s.scale()));
        case RandomScalar::Form::SymbolTable: {
            const auto& table = s.table();
            if (table.size() < static_cast<size_t>(env.alphabet_size())) return std::nullopt;
            return integrate_symbol_function(
                env, [&](int sym) { return g(to_double(table[sym] * s.scale())); });
        }
        case RandomScalar::Form::WindowFunction:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace rexp
