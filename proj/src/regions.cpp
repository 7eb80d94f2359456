#include "rexp/regions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rexp {

namespace {

constexpr double kOpEps = 1e-14;

double mod1(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0;
    if (r < 0.0) r += 1.0;
    return r;
}

// Splits a possibly-wrapping circle arc [lo, lo+len] into linear segments.
void push_arc(std::vector<Segment>& out, double lo, double len) {
    if (len <= 0.0) return;
    if (len >= 1.0) {
        out.push_back({0.0, 1.0});
        return;
    }
    lo = mod1(lo);
    double hi = lo + len;
    if (hi <= 1.0) {
        out.push_back({lo, hi});
    } else {
        out.push_back({lo, 1.0});
        out.push_back({0.0, hi - 1.0});
    }
}

}  // namespace

RegionSet::RegionSet(SpaceKind kind, std::vector<Segment> segments, double slop)
    : kind_(kind), segments_(std::move(segments)), slop_(slop) {
    if (kind == SpaceKind::Symbolic) throw std::invalid_argument("RegionSet: symbolic kind");
    normalize();
}

RegionSet RegionSet::whole(SpaceKind kind) { return RegionSet(kind, {{0.0, 1.0}}, 0.0); }

RegionSet RegionSet::empty(SpaceKind kind) { return RegionSet(kind, {}, 0.0); }

RegionSet RegionSet::ball(SpaceKind kind, double center, double radius) {
    if (radius < 0.0) throw std::invalid_argument("RegionSet::ball: negative radius");
    std::vector<Segment> segs;
    if (kind == SpaceKind::Circle) {
        if (radius >= 0.5) return whole(kind);
        push_arc(segs, center - radius, 2.0 * radius);
    } else {
        segs.push_back({std::max(0.0, center - radius), std::min(1.0, center + radius)});
    }
    return RegionSet(kind, std::move(segs), 0.0);
}

void RegionSet::normalize() {
    std::vector<Segment> kept;
    for (const Segment& s : segments_) {
        double lo = std::max(0.0, s.lo);
        double hi = std::min(1.0, s.hi);
        if (hi > lo) kept.push_back({lo, hi});
    }
    std::sort(kept.begin(), kept.end(), [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
    std::vector<Segment> merged;
    for (const Segment& s : kept) {
        if (!merged.empty() && s.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, s.hi);
        } else {
            merged.push_back(s);
        }
    }
    segments_ = std::move(merged);
}

bool RegionSet::is_whole() const {
    return segments_.size() == 1 && segments_[0].lo <= 0.0 && segments_[0].hi >= 1.0;
}

double RegionSet::total_length() const {
    double acc = 0.0;
    for (const Segment& s : segments_) acc += s.length();
    return acc;
}

std::vector<Segment> RegionSet::outer_segments() const {
    std::vector<Segment> out;
    for (const Segment& s : segments_)
        out.push_back({std::max(0.0, s.lo - slop_), std::min(1.0, s.hi + slop_)});
    return out;
}

std::vector<Segment> RegionSet::inner_segments() const {
    std::vector<Segment> out;
    for (const Segment& s : segments_) {
        double lo = s.lo + slop_;
        double hi = s.hi - slop_;
        // Segments touching the fiber boundary only shrink inward.
        if (s.lo <= 0.0) lo = 0.0;
        if (s.hi >= 1.0) hi = 1.0;
        if (hi > lo) out.push_back({lo, hi});
    }
    return out;
}

bool RegionSet::contains(double point) const {
    for (const Segment& s : outer_segments())
        if (point >= s.lo && point <= s.hi) return true;
    return false;
}

RegionSet RegionSet::intersected(const RegionSet& other) const {
    if (kind_ != other.kind_) throw std::invalid_argument("RegionSet: kind mismatch");
    std::vector<Segment> out;
    for (const Segment& a : segments_) {
        for (const Segment& b : other.segments_) {
            double lo = std::max(a.lo, b.lo);
            double hi = std::min(a.hi, b.hi);
            if (hi > lo) out.push_back({lo, hi});
        }
    }
    return RegionSet(kind_, std::move(out), std::max(slop_, other.slop_));
}

RegionSet RegionSet::preimage(const MapSpec& map) const {
    std::vector<Segment> out;
    double new_slop = slop_ + kOpEps;
    switch (map.kind) {
        case MapSpec::Kind::Rotation: {
            if (kind_ != SpaceKind::Circle)
                throw std::invalid_argument("RegionSet::preimage: rotation on non-circle");
            for (const Segment& s : segments_) push_arc(out, s.lo - map.angle, s.length());
            break;
        }
        case MapSpec::Kind::Expanding: {
            if (kind_ != SpaceKind::Circle)
                throw std::invalid_argument("RegionSet::preimage: expanding map on non-circle");
            double d = static_cast<double>(map.degree);
            for (const Segment& s : segments_)
                for (long long m = 0; m < map.degree; ++m)
                    out.push_back({(s.lo + m) / d, (s.hi + m) / d});
            new_slop = slop_ / d + kOpEps;
            break;
        }
        case MapSpec::Kind::PiecewiseLinear: {
            for (const Segment& s : segments_)
                out.push_back({map_inverse(map, s.lo), map_inverse(map, s.hi)});
            new_slop = slop_ / map.min_slope() + kOpEps;
            break;
        }
    }
    return RegionSet(kind_, std::move(out), new_slop);
}

RegionSet RegionSet::image(const MapSpec& map) const {
    std::vector<Segment> out;
    double new_slop = slop_ * map.max_slope() + kOpEps;
    switch (map.kind) {
        case MapSpec::Kind::Rotation: {
            for (const Segment& s : segments_) push_arc(out, s.lo + map.angle, s.length());
            break;
        }
        case MapSpec::Kind::Expanding: {
            double d = static_cast<double>(map.degree);
            for (const Segment& s : segments_) push_arc(out, mod1(d * s.lo), std::min(1.0, d * s.length()));
            break;
        }
        case MapSpec::Kind::PiecewiseLinear: {
            for (const Segment& s : segments_)
                out.push_back({map_forward(map, s.lo), map_forward(map, s.hi)});
            break;
        }
    }
    return RegionSet(kind_, std::move(out), new_slop);
}

}  // namespace rexp
