#include <doctest.h>

#include <cmath>
#include <numbers>

#include "riskplan/rng.hpp"
#include "riskplan/world.hpp"

using namespace riskplan;

namespace {

WorldConfig base_config() {
    WorldConfig cfg;
    cfg.bounds = Rect{{0.0, 0.0}, {20.0, 20.0}};
    cfg.sensor_noise_variance = 0.5;
    return cfg;
}

/// Exact segment-circle intersection (interior).
bool segment_hits_circle(Vec2 a, Vec2 b, const Circle& c) {
    const Vec2 d = b - a;
    const Vec2 f = a - c.center;
    const double len2 = d.squared_norm();
    double t = len2 > 0.0 ? -dot(f, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(lerp(a, b, t), c.center) < c.radius;
}

/// Exact segment-rectangle intersection via slab clipping.
bool segment_hits_rect(Vec2 a, Vec2 b, const Rect& r) {
    double t0 = 0.0;
    double t1 = 1.0;
    const double d[2] = {b.x - a.x, b.y - a.y};
    const double lo[2] = {r.min.x, r.min.y};
    const double hi[2] = {r.max.x, r.max.y};
    const double p[2] = {a.x, a.y};
    for (int k = 0; k < 2; ++k) {
        if (d[k] == 0.0) {
            if (p[k] <= lo[k] || p[k] >= hi[k]) {
                return false;
            }
            continue;
        }
        double ta = (lo[k] - p[k]) / d[k];
        double tb = (hi[k] - p[k]) / d[k];
        if (ta > tb) {
            std::swap(ta, tb);
        }
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1) {
            return false;
        }
    }
    return true;
}

bool segment_in_free_space_exact(Vec2 a, Vec2 b, const World& world) {
    if (!world.in_bounds(a) || !world.in_bounds(b)) {
        return false;
    }
    for (const Obstacle& o : world.obstacles()) {
        const bool hit = std::holds_alternative<Rect>(o)
                             ? segment_hits_rect(a, b, std::get<Rect>(o))
                             : segment_hits_circle(a, b, std::get<Circle>(o));
        if (hit) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("hazard peaks at the shifted center with value k") {
    WorldConfig cfg = base_config();
    cfg.sources = {HazardSource{{10.0, 10.0}, 100.0, 0.25, {1.1, 0.9}}};
    const World world(cfg);
    const Vec2 peak = cfg.sources[0].peak();
    CHECK(peak.x == doctest::Approx(11.5));
    CHECK(peak.y == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(world.hazard(peak) == doctest::Approx(100.0));
}

TEST_CASE("hazard decays to nothing at ten decay lengths") {
    WorldConfig cfg = base_config();
    cfg.sources = {HazardSource{{4.0, 10.0}, 100.0, 0.0, {1.1, 0.9}}};
    const World world(cfg);
    const Vec2 peak = cfg.sources[0].peak();
    const Vec2 far{peak.x + 10.0 * 1.1, peak.y};
    CHECK(world.hazard(far) < 1e-10 * 100.0);
}

TEST_CASE("tau reflects the peak offset across the center") {
    HazardSource s0{{10.0, 10.0}, 100.0, 0.0, {1.1, 0.9}};
    HazardSource s5{{10.0, 10.0}, 100.0, 0.5, {1.1, 0.9}};
    // tau=0: offset (0, +1.5); tau=0.5: offset (0, -1.5)
    CHECK(s0.peak().y == doctest::Approx(11.5));
    CHECK(s5.peak().y == doctest::Approx(8.5));
    CHECK(s0.peak().x == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(s5.peak().x == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("multiple sources superpose additively") {
    WorldConfig cfg = base_config();
    cfg.sources = {HazardSource{{6.0, 6.0}, 100.0, 0.0, {1.1, 0.9}},
                   HazardSource{{14.0, 14.0}, 50.0, 0.0, {1.1, 0.9}}};
    const World world(cfg);
    WorldConfig single1 = base_config();
    single1.sources = {cfg.sources[0]};
    WorldConfig single2 = base_config();
    single2.sources = {cfg.sources[1]};
    const World w1(single1);
    const World w2(single2);
    const Vec2 x{9.0, 9.5};
    CHECK(world.hazard(x) == doctest::Approx(w1.hazard(x) + w2.hazard(x)));
}

TEST_CASE("hazard is nonnegative and bounded by the total gain") {
    WorldConfig cfg = base_config();
    cfg.sources = {HazardSource{{6.0, 6.0}, 100.0, 0.3, {1.1, 0.9}},
                   HazardSource{{13.0, 12.0}, 100.0, 0.8, {1.1, 0.9}}};
    const World world(cfg);
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        const Vec2 x{rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)};
        const double g = world.hazard(x);
        CHECK(g >= 0.0);
        CHECK(g <= 200.0 + 1e-12);
    }
}

TEST_CASE("literal exponents reproduce the unsquared source model") {
    WorldConfig cfg = base_config();
    cfg.sources = {HazardSource{{10.0, 10.0}, 100.0, 0.0, {1.1, 0.9}}};
    cfg.literal_exponents = true;
    const World world(cfg);
    const Vec2 peak = cfg.sources[0].peak();
    const Vec2 x{peak.x - 2.0, peak.y};  // negative exponent argument grows
    CHECK(world.hazard(x) == doctest::Approx(100.0 * std::exp(2.0 / 1.1)));
}

TEST_CASE("observe is exact with zero noise and unbiased with noise") {
    WorldConfig cfg = base_config();
    cfg.sources = {HazardSource{{10.0, 10.0}, 100.0, 0.0, {1.1, 0.9}}};

    WorldConfig noiseless = cfg;
    noiseless.sensor_noise_variance = 0.0;
    const World w0(noiseless);
    Rng rng(1);
    const Vec2 x{10.5, 10.5};
    CHECK(w0.observe(x, rng) == w0.hazard(x));

    const World wn(cfg);
    Rng rng2(2);
    const int n = 100'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += wn.observe(x, rng2);
    }
    const double mean = sum / n;
    const double clt_bound = 3.0 * std::sqrt(0.5 / n);
    CHECK(std::abs(mean - wn.hazard(x)) < clt_bound);
}

TEST_CASE("fixed seed reproduces the observation sequence") {
    const World world(base_config());
    Rng a(123);
    Rng b(123);
    for (int i = 0; i < 50; ++i) {
        const Vec2 x{1.0 + i * 0.1, 2.0};
        CHECK(world.observe(x, a) == world.observe(x, b));
    }
}

TEST_CASE("signed distance in an empty world is the distance to the bounds") {
    const World world(base_config());
    CHECK(world.signed_distance({10.0, 10.0}) == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(world.signed_distance({1.0, 10.0}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(world.signed_distance({19.5, 18.0}) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("signed distance at the center of a square obstacle") {
    WorldConfig cfg = base_config();
    const double s = 1.5;  // half side
    cfg.obstacles = {Rect{{10.0 - s, 10.0 - s}, {10.0 + s, 10.0 + s}}};
    const World world(cfg);
    CHECK(world.signed_distance({10.0, 10.0}) ==
          doctest::Approx(-s).epsilon(cfg.sdf_resolution));
}

TEST_CASE("signed distance matches a boundary-sample oracle") {
    WorldConfig cfg = base_config();
    cfg.obstacles = {Rect{{4.0, 4.0}, {7.0, 9.0}}, Circle{{14.0, 12.0}, 2.5}};
    const World world(cfg);

    // brute force over densely sampled obstacle boundaries and the bounds
    std::vector<Vec2> boundary;
    const double ds = 0.01;
    const Rect& r = std::get<Rect>(cfg.obstacles[0]);
    for (double x = r.min.x; x <= r.max.x; x += ds) {
        boundary.push_back({x, r.min.y});
        boundary.push_back({x, r.max.y});
    }
    for (double y = r.min.y; y <= r.max.y; y += ds) {
        boundary.push_back({r.min.x, y});
        boundary.push_back({r.max.x, y});
    }
    const Circle& c = std::get<Circle>(cfg.obstacles[1]);
    for (double a = 0.0; a < 2.0 * std::numbers::pi; a += ds / c.radius) {
        boundary.push_back({c.center.x + c.radius * std::cos(a),
                            c.center.y + c.radius * std::sin(a)});
    }
    for (double x = 0.0; x <= 20.0; x += ds) {
        boundary.push_back({x, 0.0});
        boundary.push_back({x, 20.0});
        boundary.push_back({0.0, x});
        boundary.push_back({20.0, x});
    }

    Rng rng(31);
    for (int i = 0; i < 60; ++i) {
        const Vec2 p{rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)};
        double best = std::numeric_limits<double>::infinity();
        for (const Vec2& b : boundary) {
            best = std::min(best, distance(p, b));
        }
        const bool inside = !world.in_free_space(p) && world.in_bounds(p);
        const double oracle = inside ? -best : best;
        CHECK(std::abs(world.signed_distance(p) - oracle) < 2.0 * cfg.sdf_resolution);
    }
}

TEST_CASE("SDF sign agrees with obstacle membership at grid nodes") {
    WorldConfig cfg = base_config();
    cfg.obstacles = {Rect{{5.0, 5.0}, {8.0, 8.0}}, Circle{{15.0, 15.0}, 1.5}};
    const World world(cfg);
    const SignedDistanceGrid& sdf = world.sdf();
    int checked = 0;
    for (int iy = 0; iy < sdf.rows(); iy += 7) {
        for (int ix = 0; ix < sdf.cols(); ix += 7) {
            const Vec2 p{sdf.origin().x + ix * sdf.cell_x(),
                         sdf.origin().y + iy * sdf.cell_y()};
            bool inside = false;
            for (const Obstacle& o : cfg.obstacles) {
                inside = inside || obstacle_contains(o, p);
            }
            if (std::abs(sdf.at(ix, iy)) > 1e-9) {
                CHECK((sdf.at(ix, iy) < 0.0) == inside);
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("collision checks: trivial, blocked, and degenerate segments") {
    WorldConfig cfg = base_config();
    cfg.obstacles = {Rect{{9.0, 9.0}, {11.0, 11.0}}};
    const World world(cfg);
    CHECK(world.collision_free({2.0, 2.0}, {2.0, 2.0}));
    CHECK_FALSE(world.collision_free({5.0, 10.0}, {15.0, 10.0}));  // through the center
    CHECK(world.collision_free({5.0, 5.0}, {15.0, 5.0}));
    CHECK_FALSE(world.collision_free({10.0, 10.0}, {10.0, 10.0}));  // inside obstacle
}

TEST_CASE("sampled collision test agrees with exact geometry on grazing segments") {
    WorldConfig cfg = base_config();
    cfg.obstacles = {Rect{{8.0, 8.0}, {12.0, 12.0}}, Circle{{5.0, 15.0}, 1.8}};
    const World world(cfg);

    Rng rng(77);
    int disagreements = 0;
    const int cases = 1000;
    for (int i = 0; i < cases; ++i) {
        // segments biased to pass near the obstacles
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec2 near{rng.uniform(6.0, 14.0), rng.uniform(6.0, 14.0)};
        const double len = rng.uniform(1.0, 8.0);
        const Vec2 a{near.x - 0.5 * len * std::cos(angle),
                     near.y - 0.5 * len * std::sin(angle)};
        const Vec2 b{near.x + 0.5 * len * std::cos(angle),
                     near.y + 0.5 * len * std::sin(angle)};
        if (!world.in_bounds(a) || !world.in_bounds(b)) {
            continue;
        }
        const bool sampled = world.collision_free(a, b);
        const bool exact = segment_in_free_space_exact(a, b, world);
        if (sampled != exact) {
            ++disagreements;
        }
    }
    CHECK(disagreements <= cases / 100);
}

TEST_CASE("world configuration is validated") {
    WorldConfig bad = base_config();
    bad.sensor_noise_variance = -0.5;
    CHECK_THROWS_AS(World{bad}, std::invalid_argument);

    WorldConfig bad_decay = base_config();
    bad_decay.sources = {HazardSource{{5.0, 5.0}, 100.0, 0.0, {0.0, 1.0}}};
    CHECK_THROWS_AS(World{bad_decay}, std::invalid_argument);

    WorldConfig bad_res = base_config();
    bad_res.sdf_resolution = 0.0;
    CHECK_THROWS_AS(World{bad_res}, std::invalid_argument);
}
