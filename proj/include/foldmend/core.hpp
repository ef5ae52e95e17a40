// Basic 3D math, tolerances and the thread helper shared by all modules.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace foldmend {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend Vec3 operator*(const Vec3& v, double s) { return s * v; }
    friend Vec3 operator/(const Vec3& v, double s) { return {v.x / s, v.y / s, v.z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    friend bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
    friend bool operator!=(const Vec3& a, const Vec3& b) { return !(a == b); }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

// Scalar triple product det[a b c] with a, b, c as columns.
inline double det3(const Vec3& a, const Vec3& b, const Vec3& c) { return dot(a, cross(b, c)); }

struct Box3 {
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::lowest()};

    void expand(const Vec3& p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    void inflate(double e) {
        lo -= Vec3{e, e, e};
        hi += Vec3{e, e, e};
    }
    bool valid() const { return lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z; }
    Vec3 extent() const { return hi - lo; }
    double diagonal() const { return valid() ? norm(extent()) : 0.0; }
};

// Interval overlap on all three axes: six comparisons, five logical ands.
inline bool aabb_overlap(const Box3& a, const Box3& b) {
    return a.lo.x <= b.hi.x && b.lo.x <= a.hi.x &&
           a.lo.y <= b.hi.y && b.lo.y <= a.hi.y &&
           a.lo.z <= b.hi.z && b.lo.z <= a.hi.z;
}

// Scale-relative tolerances derived from the model bounding-box diagonal.
struct Tolerances {
    double diagonal = 0.0;
    double eps_box = 0.0;          // AABB inflation
    double eps_point = 0.0;        // point coincidence / on-plane distance
    double eps_bary = 1e-9;        // barycentric slack
    double eps_det = 1e-12;        // singular-system rejection, relative
    double eps_ray = 0.0;          // minimum ray parameter for parity hits
    double degenerate_area = 0.0;  // faces below this are dropped at ingest

    static Tolerances from_diagonal(double d) {
        Tolerances t;
        t.diagonal = d;
        t.eps_box = 1e-9 * d;
        t.eps_point = 1e-9 * d;
        t.eps_ray = 1e-6 * d;
        t.degenerate_area = 1e-12 * d * d;
        return t;
    }
};

struct geometry_error : std::runtime_error {
    explicit geometry_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when folded-component removal leaves nothing to repair.
struct no_unfolded_error : std::runtime_error {
    explicit no_unfolded_error(const std::string& what) : std::runtime_error(what) {}
};

// FOLDMEND_THREADS caps worker threads; 0 or unset means auto.
inline unsigned max_threads() {
    if (const char* env = std::getenv("FOLDMEND_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

// Chunked parallel loop: fn(begin, end) over disjoint ranges. Callers get
// determinism by writing to preallocated per-index slots.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = max_threads();
    if (n == 0) return;
    if (workers <= 1 || n < 256) {
        fn(std::size_t{0}, n);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t b = w * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace foldmend
