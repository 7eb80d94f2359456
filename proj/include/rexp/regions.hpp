#pragma once

#include <vector>

#include "rexp/fiber.hpp"

namespace rexp {

// Finite unions of closed sub-segments of the circle or the unit interval,
// with an endpoint uncertainty `slop` carried through every operation so set
// masses can be reported as certified brackets. Circle arcs that wrap are
// stored split at 0; all segments live in [0,1].

struct Segment {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

class RegionSet {
public:
    RegionSet() = default;
    RegionSet(SpaceKind kind, std::vector<Segment> segments, double slop);

    static RegionSet whole(SpaceKind kind);
    static RegionSet empty(SpaceKind kind);
    // Closed metric ball; on the circle a radius >= 1/2 covers everything.
    static RegionSet ball(SpaceKind kind, double center, double radius);

    SpaceKind kind() const { return kind_; }
    const std::vector<Segment>& segments() const { return segments_; }
    double slop() const { return slop_; }
    bool is_whole() const;
    bool is_empty() const { return segments_.empty(); }
    size_t count() const { return segments_.size(); }

    double total_length() const;
    // Outer/inner approximations: segments grown/shrunk by slop.
    std::vector<Segment> outer_segments() const;
    std::vector<Segment> inner_segments() const;
    bool contains(double point) const;  // within the outer approximation

    RegionSet intersected(const RegionSet& other) const;
    RegionSet preimage(const MapSpec& map) const;
    RegionSet image(const MapSpec& map) const;

private:
    void normalize();

    SpaceKind kind_ = SpaceKind::Circle;
    std::vector<Segment> segments_;
    double slop_ = 0.0;
};

}  // namespace rexp
