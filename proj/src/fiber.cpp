#include "rexp/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rexp {

namespace {

double mod1(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0;
    if (r < 0.0) r += 1.0;
    return r;
}

}  // namespace

FiberPoint FiberPoint::symbolic(std::vector<int> word, std::vector<int> tail, int tail_phase) {
    if (tail.empty()) throw std::invalid_argument("FiberPoint: tail pattern must be nonempty");
    for (int s : word)
        if (s < 1) throw std::invalid_argument("FiberPoint: symbols are 1-based");
    for (int s : tail)
        if (s < 1) throw std::invalid_argument("FiberPoint: symbols are 1-based");
    FiberPoint p;
    p.kind_ = SpaceKind::Symbolic;
    p.word_ = std::move(word);
    p.tail_ = std::move(tail);
    p.tail_phase_ = tail_phase % static_cast<int>(p.tail_.size());
    return p;
}

FiberPoint FiberPoint::circle(double coord) { return real(SpaceKind::Circle, coord); }
FiberPoint FiberPoint::interval(double coord) { return real(SpaceKind::Interval, coord); }

FiberPoint FiberPoint::real(SpaceKind kind, double coord) {
    if (kind == SpaceKind::Symbolic) throw std::invalid_argument("FiberPoint::real: symbolic kind");
    FiberPoint p;
    p.kind_ = kind;
    p.coord_ = kind == SpaceKind::Circle ? mod1(coord) : coord;
    if (kind == SpaceKind::Interval && (coord < 0.0 || coord > 1.0))
        throw std::invalid_argument("FiberPoint: interval coordinate outside [0,1]");
    return p;
}

int FiberPoint::sym(int64_t i) const {
    if (kind_ != SpaceKind::Symbolic) throw std::logic_error("FiberPoint::sym on real point");
    if (i < 0) throw std::out_of_range("FiberPoint::sym: negative index");
    if (i < static_cast<int64_t>(word_.size())) return word_[static_cast<size_t>(i)];
    int64_t j = (i - static_cast<int64_t>(word_.size()) + tail_phase_) % static_cast<int64_t>(tail_.size());
    return tail_[static_cast<size_t>(j)];
}

FiberPoint FiberPoint::shifted_left() const {
    if (kind_ != SpaceKind::Symbolic) throw std::logic_error("FiberPoint::shifted_left on real point");
    FiberPoint p = *this;
    if (!p.word_.empty()) {
        p.word_.erase(p.word_.begin());
    } else {
        p.tail_phase_ = (p.tail_phase_ + 1) % static_cast<int>(p.tail_.size());
    }
    return p;
}

FiberPoint FiberPoint::with_prepended(int sym) const {
    if (kind_ != SpaceKind::Symbolic) throw std::logic_error("FiberPoint::with_prepended on real point");
    FiberPoint p = *this;
    p.word_.insert(p.word_.begin(), sym);
    return p;
}

std::string FiberPoint::describe() const {
    std::ostringstream out;
    if (kind_ == SpaceKind::Symbolic) {
        out << "(";
        for (size_t i = 0; i < word_.size(); ++i) out << (i ? "," : "") << word_[i];
        out << "|";
        for (size_t i = 0; i < tail_.size(); ++i) out << (i ? "," : "") << tail_[i];
        if (tail_phase_) out << "@" << tail_phase_;
        out << ")";
    } else {
        out << coord_;
    }
    return out.str();
}

bool FiberPoint::same_point(const FiberPoint& other) const {
    if (kind_ != other.kind_) return false;
    if (kind_ != SpaceKind::Symbolic) return coord_ == other.coord_;
    size_t horizon = std::max(word_.size(), other.word_.size()) +
                     std::lcm(tail_.size(), other.tail_.size());
    for (size_t i = 0; i < horizon; ++i)
        if (sym(static_cast<int64_t>(i)) != other.sym(static_cast<int64_t>(i))) return false;
    return true;
}

MapSpec MapSpec::expanding(long long degree) {
    if (degree < 2) throw std::invalid_argument("MapSpec::expanding: degree must be >= 2");
    MapSpec m;
    m.kind = Kind::Expanding;
    m.degree = degree;
    return m;
}

MapSpec MapSpec::piecewise_linear(std::vector<std::pair<double, double>> vertices) {
    if (vertices.size() < 2) throw std::invalid_argument("MapSpec: need at least two vertices");
    if (vertices.front() != std::make_pair(0.0, 0.0) || vertices.back() != std::make_pair(1.0, 1.0))
        throw std::invalid_argument("MapSpec: piecewise-linear map must fix 0 and 1");
    for (size_t i = 1; i < vertices.size(); ++i)
        if (!(vertices[i].first > vertices[i - 1].first && vertices[i].second > vertices[i - 1].second))
            throw std::invalid_argument("MapSpec: vertices must be strictly increasing");
    MapSpec m;
    m.kind = Kind::PiecewiseLinear;
    m.vertices = std::move(vertices);
    return m;
}

double MapSpec::max_slope() const {
    switch (kind) {
        case Kind::Rotation: return 1.0;
        case Kind::Expanding: return static_cast<double>(degree);
        case Kind::PiecewiseLinear: {
            double s = 0.0;
            for (size_t i = 1; i < vertices.size(); ++i)
                s = std::max(s, (vertices[i].second - vertices[i - 1].second) /
                                    (vertices[i].first - vertices[i - 1].first));
            return s;
        }
    }
    return 1.0;
}

double MapSpec::min_slope() const {
    switch (kind) {
        case Kind::Rotation: return 1.0;
        case Kind::Expanding: return static_cast<double>(degree);
        case Kind::PiecewiseLinear: {
            double s = std::numeric_limits<double>::infinity();
            for (size_t i = 1; i < vertices.size(); ++i)
                s = std::min(s, (vertices[i].second - vertices[i - 1].second) /
                                    (vertices[i].first - vertices[i - 1].first));
            return s;
        }
    }
    return 1.0;
}

double map_forward(const MapSpec& m, double x) {
    switch (m.kind) {
        case MapSpec::Kind::Rotation: return mod1(x + m.angle);
        case MapSpec::Kind::Expanding: return mod1(static_cast<double>(m.degree) * x);
        case MapSpec::Kind::PiecewiseLinear: {
            for (size_t i = 1; i < m.vertices.size(); ++i) {
                if (x <= m.vertices[i].first) {
                    auto [x0, y0] = m.vertices[i - 1];
                    auto [x1, y1] = m.vertices[i];
                    return y0 + (x - x0) * (y1 - y0) / (x1 - x0);
                }
            }
            return 1.0;
        }
    }
    return x;
}

double map_inverse(const MapSpec& m, double y) {
    switch (m.kind) {
        case MapSpec::Kind::Rotation: return mod1(y - m.angle);
        case MapSpec::Kind::Expanding:
            throw std::logic_error("map_inverse: expanding map is not invertible");
        case MapSpec::Kind::PiecewiseLinear: {
            for (size_t i = 1; i < m.vertices.size(); ++i) {
                if (y <= m.vertices[i].second) {
                    auto [x0, y0] = m.vertices[i - 1];
                    auto [x1, y1] = m.vertices[i];
                    return x0 + (y - y0) * (x1 - x0) / (y1 - y0);
                }
            }
            return 1.0;
        }
    }
    return y;
}

FiberSystem FiberSystem::shift(RandomScalar alphabet_bound) {
    FiberSystem sys;
    sys.space = FiberSpace::symbolic(std::move(alphabet_bound));
    sys.kind = GeneratorKind::Shift;
    sys.invertible = false;
    return sys;
}

FiberSystem FiberSystem::expanding_circle(RandomScalar degree) {
    FiberSystem sys;
    sys.space = FiberSpace::circle();
    sys.kind = GeneratorKind::ExpandingCircle;
    sys.degree = std::move(degree);
    sys.invertible = false;
    return sys;
}

FiberSystem FiberSystem::rotation_circle(RandomScalar angle) {
    FiberSystem sys;
    sys.space = FiberSpace::circle();
    sys.kind = GeneratorKind::Rotation;
    sys.angle = std::move(angle);
    sys.invertible = true;
    return sys;
}

FiberSystem FiberSystem::mixed(FiberSpace space, std::map<int, MapSpec> table) {
    if (space.kind == SpaceKind::Symbolic)
        throw std::invalid_argument("FiberSystem::mixed: needs a circle or interval space");
    if (table.empty()) throw std::invalid_argument("FiberSystem::mixed: empty map table");
    FiberSystem sys;
    sys.space = space;
    sys.kind = GeneratorKind::Mixed;
    sys.invertible = true;
    for (const auto& [sym, m] : table) {
        if (!m.invertible()) sys.invertible = false;
        if (space.kind == SpaceKind::Interval && m.kind != MapSpec::Kind::PiecewiseLinear)
            throw std::invalid_argument("FiberSystem::mixed: interval fibers take piecewise-linear maps");
    }
    sys.table = std::move(table);
    return sys;
}

MapSpec FiberSystem::map_at(const BasePoint& w) const {
    switch (kind) {
        case GeneratorKind::Shift:
            throw std::logic_error("FiberSystem::map_at: shift has no coordinate map");
        case GeneratorKind::ExpandingCircle:
            return MapSpec::expanding(degree.eval_int(w));
        case GeneratorKind::Rotation:
            return MapSpec::rotation(angle.eval(w));
        case GeneratorKind::Mixed: {
            int sym = w.symbol(0);
            auto it = table.find(sym);
            if (it == table.end())
                throw std::out_of_range("FiberSystem: no map for base symbol " + std::to_string(sym));
            return it->second;
        }
    }
    throw std::logic_error("FiberSystem::map_at: unreachable");
}

bool FiberSystem::is_isometry_system() const {
    if (kind == GeneratorKind::Rotation) return true;
    if (kind == GeneratorKind::Mixed) {
        for (const auto& [sym, m] : table)
            if (m.kind != MapSpec::Kind::Rotation) return false;
        return true;
    }
    return false;
}

FiberPoint cocycle_apply(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x, int64_t n) {
    if (n == 0) return x;
    if (n < 0 && !sys.invertible)
        throw std::invalid_argument("cocycle_apply: negative power of a non-invertible system");
    FiberPoint cur = x;
    if (sys.kind == GeneratorKind::Shift) {
        for (int64_t k = 0; k < n; ++k) cur = cur.shifted_left();
        return cur;
    }
    if (n > 0) {
        for (int64_t k = 0; k < n; ++k)
            cur = FiberPoint::real(sys.space.kind, map_forward(sys.map_at(w.advanced(k)), cur.coord()));
    } else {
        for (int64_t k = -1; k >= n; --k)
            cur = FiberPoint::real(sys.space.kind, map_inverse(sys.map_at(w.advanced(k)), cur.coord()));
    }
    return cur;
}

double circle_distance(double a, double b) {
    double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
}

Rational symbolic_distance_exact(const FiberPoint& x, const FiberPoint& y) {
    if (x.kind() != SpaceKind::Symbolic || y.kind() != SpaceKind::Symbolic)
        throw std::invalid_argument("symbolic_distance_exact: needs symbolic points");
    auto term = [&](int64_t i) -> Rational {
        int a = x.sym(i), b = y.sym(i);
        if (a == b) return 0;
        Rational t = Rational(1, a) - Rational(1, b);
        return t < 0 ? Rational(-t) : t;
    };
    int64_t start = static_cast<int64_t>(std::max(x.word().size(), y.word().size()));
    Rational prefix = 0;
    for (int64_t i = 0; i < start; ++i) prefix += pow2(-i) * term(i);
    // Beyond `start` both sequences are jointly periodic.
    int64_t period = std::lcm(static_cast<int64_t>(x.tail().size()), static_cast<int64_t>(y.tail().size()));
    Rational block = 0;
    for (int64_t j = 0; j < period; ++j) block += pow2(-j) * term(start + j);
    Rational tail = pow2(-start) * block / (Rational(1) - pow2(-period));
    return prefix + tail;
}

DistanceBracket fiber_distance(const FiberSpace& space, const FiberPoint& x, const FiberPoint& y,
                               int tail_depth) {
    if (x.kind() != y.kind()) throw std::invalid_argument("fiber_distance: mixed point kinds");
    switch (space.kind) {
        case SpaceKind::Circle: {
            double d = circle_distance(x.coord(), y.coord());
            return {d, d};
        }
        case SpaceKind::Interval: {
            double d = std::abs(x.coord() - y.coord());
            return {d, d};
        }
        case SpaceKind::Symbolic: {
            if (tail_depth < 1) throw std::invalid_argument("fiber_distance: tail_depth must be >= 1");
            Rational partial = 0;
            for (int64_t i = 0; i < tail_depth; ++i) {
                int a = x.sym(i), b = y.sym(i);
                if (a == b) continue;
                Rational t = Rational(1, a) - Rational(1, b);
                partial += pow2(-i) * (t < 0 ? Rational(-t) : t);
            }
            // |1/a - 1/b| <= 1, so the dropped tail is at most 2^{-(T-1)}.
            Rational slack = pow2(-(tail_depth - 1));
            return {to_double(partial), to_double(partial + slack)};
        }
    }
    return {0.0, 0.0};
}

bool respects_alphabet(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x, int depth) {
    if (sys.space.kind != SpaceKind::Symbolic) return true;
    for (int i = 0; i < depth; ++i)
        if (x.sym(i) > sys.alphabet_at(w.advanced(i))) return false;
    return true;
}

}  // namespace rexp
