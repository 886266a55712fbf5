#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "epsflow/errors.hpp"

namespace epsflow {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// State space: flat R^n, the circle, or the flat 2-torus.
class Space {
  public:
    enum class Kind { Euclidean, Circle, Torus2 };

    static Space euclidean(std::size_t n) {
        if (n < 1) throw ConfigError("Space::euclidean: dimension must be >= 1");
        return Space(Kind::Euclidean, n);
    }
    static Space circle() { return Space(Kind::Circle, 1); }
    static Space torus2() { return Space(Kind::Torus2, 2); }

    Kind kind() const { return kind_; }
    std::size_t dimension() const { return dim_; }
    bool angular() const { return kind_ != Kind::Euclidean; }

    bool operator==(const Space& o) const { return kind_ == o.kind_ && dim_ == o.dim_; }
    bool operator!=(const Space& o) const { return !(*this == o); }

    std::string name() const {
        switch (kind_) {
            case Kind::Euclidean: return "euclidean(" + std::to_string(dim_) + ")";
            case Kind::Circle: return "circle";
            default: return "torus2";
        }
    }

  private:
    Space(Kind k, std::size_t n) : kind_(k), dim_(n) {}
    Kind kind_;
    std::size_t dim_;
};

/// Project an angle to the fundamental domain (-pi, pi].
inline double wrap(double angle) {
    if (!std::isfinite(angle)) throw ConfigError("wrap: angle must be finite");
    double a = std::remainder(angle, two_pi); // lands in [-pi, pi]
    if (a <= -pi) a = pi;                     // boundary convention: wrap(-pi) = pi
    return a;
}

/// Point on a Space. Angle coordinates are stored wrapped into (-pi, pi];
/// euclidean coordinates are unconstrained.
class Point {
  public:
    Point() : space_(Space::euclidean(1)), coords_(1, 0.0) {}

    static Point euclidean(std::vector<double> coords) {
        if (coords.empty()) throw ConfigError("Point::euclidean: empty coordinates");
        const Space s = Space::euclidean(coords.size());
        return Point(s, std::move(coords));
    }
    static Point circle(double alpha) { return Point(Space::circle(), {wrap(alpha)}); }
    static Point torus(double alpha, double beta) {
        return Point(Space::torus2(), {wrap(alpha), wrap(beta)});
    }
    /// Coordinates interpreted per the space's convention (angles get wrapped).
    static Point on(const Space& s, std::vector<double> coords) {
        if (coords.size() != s.dimension())
            throw ConfigError("Point::on: coordinate count does not match space dimension");
        if (s.angular())
            for (auto& c : coords) c = wrap(c);
        return Point(s, std::move(coords));
    }

    const Space& space() const { return space_; }
    const std::vector<double>& coords() const { return coords_; }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::size_t dimension() const { return coords_.size(); }

    /// Circle angle / first torus angle.
    double angle() const {
        if (!space_.angular()) throw ConfigError("Point::angle: euclidean point");
        return coords_[0];
    }

  private:
    Point(Space s, std::vector<double> c) : space_(std::move(s)), coords_(std::move(c)) {}
    Space space_;
    std::vector<double> coords_;
};

/// Tangent vector at a base point, components in angle/ambient coordinates.
struct Tangent {
    Point base;
    std::vector<double> components;

    Tangent(Point b, std::vector<double> c) : base(std::move(b)), components(std::move(c)) {
        if (components.size() != base.dimension())
            throw ConfigError("Tangent: component count does not match space dimension");
    }

    double norm() const {
        double s = 0.0;
        for (double v : components) s += v * v;
        return std::sqrt(s);
    }
};

/// Arc distance on the circle factor.
inline double circle_distance(double a, double b) {
    const double d = std::abs(std::remainder(a - b, two_pi));
    return d;
}

/// Riemannian distance: straight-line on R^n, arc on S^1, product metric on T^2.
inline double distance(const Space& s, const Point& p, const Point& q) {
    if (p.space() != s || q.space() != s)
        throw ConfigError("distance: points do not belong to the given space");
    switch (s.kind()) {
        case Space::Kind::Euclidean: {
            double acc = 0.0;
            for (std::size_t i = 0; i < s.dimension(); ++i) {
                const double d = p[i] - q[i];
                acc += d * d;
            }
            return std::sqrt(acc);
        }
        case Space::Kind::Circle:
            return circle_distance(p[0], q[0]);
        default: {
            const double d1 = circle_distance(p[0], q[0]);
            const double d2 = circle_distance(p[1], q[1]);
            return std::sqrt(d1 * d1 + d2 * d2);
        }
    }
}

inline double distance(const Point& p, const Point& q) { return distance(p.space(), p, q); }

/// Continuous unwinding of a sampled angle path. lift[0] = wrap(input[0]) and
/// wrap(lift[k]) = wrap(input[k]); successive lifted steps are the wrapped
/// increments, which must stay below pi for the unwinding to be well defined.
inline std::vector<double> lift(const std::vector<double>& path) {
    if (path.empty()) return {};
    std::vector<double> out(path.size());
    out[0] = wrap(path[0]);
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double delta = std::remainder(path[k] - path[k - 1], two_pi);
        if (!(std::abs(delta) < pi))
            throw SamplingError("lift: successive samples differ by >= pi at index " +
                                std::to_string(k) + "; refine the t-grid");
        out[k] = out[k - 1] + delta;
    }
    return out;
}

} // namespace epsflow
