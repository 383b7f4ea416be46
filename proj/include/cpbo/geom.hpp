#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace cpbo {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

/// Axis-aligned box. Overlap tests are strict: boxes that merely touch
/// (shared face, zero-volume intersection) do not count as colliding.
struct Aabb {
    Vec3 lo, hi;

    static Aabb from_center(const Vec3& c, const Vec3& half) {
        return {c - half, c + half};
    }

    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 half() const { return (hi - lo) * 0.5; }

    bool overlaps(const Aabb& o) const {
        return lo.x < o.hi.x && hi.x > o.lo.x &&
               lo.y < o.hi.y && hi.y > o.lo.y &&
               lo.z < o.hi.z && hi.z > o.lo.z;
    }

    bool contains(const Aabb& o) const {
        return o.lo.x >= lo.x && o.hi.x <= hi.x &&
               o.lo.y >= lo.y && o.hi.y <= hi.y &&
               o.lo.z >= lo.z && o.hi.z <= hi.z;
    }

    Aabb expanded(const Vec3& pad) const {
        return {lo - pad, hi + pad};
    }

    /// Smallest box covering both.
    Aabb merged(const Aabb& o) const {
        return {{std::min(lo.x, o.lo.x), std::min(lo.y, o.lo.y), std::min(lo.z, o.lo.z)},
                {std::max(hi.x, o.hi.x), std::max(hi.y, o.hi.y), std::max(hi.z, o.hi.z)}};
    }
};

/// Does a box of half-extents `half`, whose center moves linearly from `p0`
/// to `p1`, hit the static box `obstacle` at any point of the segment?
/// Minkowski form: the segment is tested against the obstacle grown by `half`
/// (slab clipping, exact, t clamped to [0,1]).
inline bool swept_box_hits(const Vec3& p0, const Vec3& p1, const Vec3& half,
                           const Aabb& obstacle) {
    const Aabb grown = obstacle.expanded(half);
    const std::array<double, 3> o{p0.x, p0.y, p0.z};
    const std::array<double, 3> d{p1.x - p0.x, p1.y - p0.y, p1.z - p0.z};
    const std::array<double, 3> lo{grown.lo.x, grown.lo.y, grown.lo.z};
    const std::array<double, 3> hi{grown.hi.x, grown.hi.y, grown.hi.z};

    double t_enter = 0.0, t_exit = 1.0;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-15) {
            if (o[i] <= lo[i] || o[i] >= hi[i]) return false;  // parallel, outside slab
            continue;
        }
        double t0 = (lo[i] - o[i]) / d[i];
        double t1 = (hi[i] - o[i]) / d[i];
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter >= t_exit) return false;
    }
    return true;
}

/// Oriented rectangle in the XY plane (used for yawed footprints).
struct OrientedRect {
    double cx = 0.0, cy = 0.0;   // center
    double hx = 0.0, hy = 0.0;   // half extents in local frame
    double angle = 0.0;          // radians

    std::array<std::array<double, 2>, 4> corners() const {
        const double c = std::cos(angle), s = std::sin(angle);
        std::array<std::array<double, 2>, 4> out{};
        const double sx[4] = {+1, +1, -1, -1};
        const double sy[4] = {+1, -1, -1, +1};
        for (int i = 0; i < 4; ++i) {
            const double lx = sx[i] * hx, ly = sy[i] * hy;
            out[i] = {cx + c * lx - s * ly, cy + s * lx + c * ly};
        }
        return out;
    }

    /// Axis-aligned cover of the rotated rectangle.
    std::array<double, 4> aabb2d() const {  // {lo_x, lo_y, hi_x, hi_y}
        const double c = std::abs(std::cos(angle)), s = std::abs(std::sin(angle));
        const double ex = c * hx + s * hy;
        const double ey = s * hx + c * hy;
        return {cx - ex, cy - ey, cx + ex, cy + ey};
    }
};

namespace detail {
// Projects both rectangles onto `axis`; true when the projections are
// separated (or merely touching, to keep the strict-overlap convention).
inline bool separated_on_axis(const OrientedRect& a, const OrientedRect& b,
                              double ax, double ay) {
    auto project = [&](const OrientedRect& r, double& mn, double& mx) {
        mn = 1e300;
        mx = -1e300;
        for (const auto& c : r.corners()) {
            const double p = c[0] * ax + c[1] * ay;
            mn = std::min(mn, p);
            mx = std::max(mx, p);
        }
    };
    double amn, amx, bmn, bmx;
    project(a, amn, amx);
    project(b, bmn, bmx);
    return amx <= bmn || bmx <= amn;
}
}  // namespace detail

/// Strict overlap of two oriented rectangles (SAT over 4 edge normals).
inline bool rects_overlap(const OrientedRect& a, const OrientedRect& b) {
    const double axes[4][2] = {
        {std::cos(a.angle), std::sin(a.angle)},
        {-std::sin(a.angle), std::cos(a.angle)},
        {std::cos(b.angle), std::sin(b.angle)},
        {-std::sin(b.angle), std::cos(b.angle)},
    };
    for (const auto& ax : axes)
        if (detail::separated_on_axis(a, b, ax[0], ax[1])) return false;
    return true;
}

/// All four corners of `r` inside the closed axis-aligned rectangle.
inline bool rect_inside_aligned(const OrientedRect& r, double lo_x, double lo_y,
                                double hi_x, double hi_y) {
    for (const auto& c : r.corners())
        if (c[0] < lo_x || c[0] > hi_x || c[1] < lo_y || c[1] > hi_y) return false;
    return true;
}

}  // namespace cpbo
