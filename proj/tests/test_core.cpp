#include "doctest.h"

#include "mumt/core.hpp"
#include "mumt/rng.hpp"

using namespace mumt;

TEST_CASE("distance basics") {
    CHECK(distance({0, 0, 0}, {0, 0, 0}) == 0.0);
    CHECK(distance({0, 0, 0}, {3, 4, 0}) == 5.0);
}

TEST_CASE("distance matches componentwise oracle and is a metric") {
    RngStream rng(11, "test.distance");
    auto pt = [&] { return Vec3{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)}; };
    for (int i = 0; i < 5000; ++i) {
        const Vec3 a = pt(), b = pt(), c = pt();
        const double dx = a.north - b.north, dy = a.east - b.east, dz = a.down - b.down;
        const double oracle = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double d = distance(a, b);
        CHECK(std::abs(d - oracle) <= 1e-12 * std::max(1.0, oracle));
        CHECK(d >= 0.0);
        CHECK(d == distance(b, a));
        CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
    }
}

TEST_CASE("separation boundary and symmetry") {
    SeparationConstraint c;
    auto v = check_separation({0, 0, 0}, {0, 0, 0}, c);
    CHECK_FALSE(v.safe);
    CHECK(v.distance == 0.0);
    CHECK(check_separation({0, 0, 0}, {10 * c.d_min, 0, 0}, c).safe);
    // exactly d_min along an axis is representable exactly
    const Vec3 w{0, c.d_min, 0};
    CHECK(distance({0, 0, 0}, w) == c.d_min);
    CHECK(check_separation({0, 0, 0}, w, c).safe);

    RngStream rng(3, "test.sep");
    for (int i = 0; i < 2000; ++i) {
        const Vec3 a{rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(-300, 300)};
        const Vec3 b{rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(-300, 300)};
        CHECK(check_separation(a, b, c).safe == check_separation(b, a, c).safe);
    }
}

namespace {

// Brute force: inside iff on the inner side of every directed edge of a CCW
// copy, computed without the library's winding logic.
bool oracle_inside(const std::vector<Vertex2>& poly_ccw, double floor, double ceil, const Vec3& p) {
    for (std::size_t i = 0; i < poly_ccw.size(); ++i) {
        const auto& a = poly_ccw[i];
        const auto& b = poly_ccw[(i + 1) % poly_ccw.size()];
        // left-of test in (north, east) axes for CCW order
        const double lhs = (b.north - a.north) * (p.east - a.east);
        const double rhs = (b.east - a.east) * (p.north - a.north);
        if (lhs - rhs < 0.0) return false;
    }
    const double alt = -p.down;
    return alt >= floor && alt <= ceil;
}

}  // namespace

TEST_CASE("geofence examples") {
    const auto g = rectangular_fence(-1000, 1000, -1000, 1000, 1000, 5000);
    g.validate();
    CHECK(check_geofence({0, 0, -3000}, g).inside);
    const auto v = check_geofence({1001, 0, -3000}, g);
    CHECK_FALSE(v.inside);
    CHECK(v.face == GeofenceVerdict::Face::polygon_edge);
    CHECK(v.edge_index == 1);  // edge from (1000,-1000) to (1000,1000): the north face
    CHECK(check_geofence({1000, 0, -3000}, g).inside);  // boundary is safe
    CHECK(check_geofence({0, 0, -900}, g).face == GeofenceVerdict::Face::floor);
    CHECK(check_geofence({0, 0, -5001}, g).face == GeofenceVerdict::Face::ceiling);
}

TEST_CASE("geofence agrees with brute-force half-plane oracle") {
    // A hexagon given clockwise in (north, east); oracle uses the reversed (CCW) copy.
    std::vector<Vertex2> hex;
    for (int i = 0; i < 6; ++i) {
        const double a = -i * kPi / 3.0 + 0.2;
        hex.push_back({3000.0 * std::cos(a), 2000.0 * std::sin(a)});
    }
    GeofenceConstraint g{hex, 1000, 6000};
    g.validate();
    // Determine orientation independently via the signed area.
    double area = 0.0;
    for (std::size_t i = 0; i < hex.size(); ++i) {
        const auto& a = hex[i];
        const auto& b = hex[(i + 1) % hex.size()];
        area += a.north * b.east - b.north * a.east;
    }
    auto ccw = hex;
    if (area < 0.0) std::reverse(ccw.begin(), ccw.end());

    RngStream rng(5, "test.fence");
    int inside = 0;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 p{rng.uniform(-3500, 3500), rng.uniform(-2500, 2500), -rng.uniform(500, 6500)};
        const bool got = check_geofence(p, g).inside;
        CHECK(got == oracle_inside(ccw, 1000, 6000, p));
        inside += got;
    }
    CHECK(inside > 1000);
}

TEST_CASE("geofence monotone under shrinking") {
    const auto g = rectangular_fence(-2000, 4000, -1000, 3000, 0, 9000);
    RngStream rng(9, "test.shrink");
    for (int k = 0; k < 20; ++k) {
        const double f = rng.uniform(0.05, 0.999);
        const auto s = g.scaled(f);
        for (int i = 0; i < 500; ++i) {
            const Vec3 p{rng.uniform(-2500, 4500), rng.uniform(-1500, 3500), -rng.uniform(0, 9000)};
            if (check_geofence(p, s).inside) CHECK(check_geofence(p, g).inside);
        }
    }
}

TEST_CASE("geofence validation rejects bad polygons") {
    CHECK_THROWS_AS((GeofenceConstraint{{{0, 0}, {1, 0}}, 0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((GeofenceConstraint{{{0, 0}, {1, 0}, {2, 0}, {1, 1}}, 0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((GeofenceConstraint{{{0, 0}, {2, 0}, {1, 0.5}, {2, 2}, {0, 2}}, 0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS(rectangular_fence(0, 1, 0, 1, 5, 5).validate(), ConfigError);
}

TEST_CASE("command envelope saturation") {
    CommandEnvelope e;
    auto c = e.saturate({5.0, -100.0, std::nan(""), {}});
    CHECK(c.turn_rate == e.max_turn_rate);
    CHECK(c.climb_rate == -e.max_climb_rate);
    CHECK(c.longitudinal_accel == 0.0);
    CHECK(e.contains(c));
}

TEST_CASE("wrap_angle range") {
    RngStream rng(1, "test.wrap");
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-50, 50);
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(std::abs(std::remainder(a - w, 2 * kPi)) < 1e-9);
    }
}

TEST_CASE("rng substreams are independent of creation order") {
    RngStream a(42, "alpha");
    const auto first = a.next_u64();
    RngStream b(42, "beta");
    RngStream a2(42, "alpha");
    CHECK(a2.next_u64() == first);
    CHECK(b.next_u64() != first);
}
