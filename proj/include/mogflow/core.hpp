#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mogflow {

// Ambient vector in R^{n+1}; the z component stays 0 for the circle case.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
    double n = norm(a);
    return {a.x / n, a.y / n, a.z / n};
}

// Compensated (Kahan) accumulator; reductions must be deterministic and
// insensitive to magnitude spread.
class KahanSum {
  public:
    void add(double v) {
        double y = v - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define MOGFLOW_DEFINE_ERROR(NAME)                                    \
    class NAME : public Error {                                       \
      public:                                                         \
        explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
    }

MOGFLOW_DEFINE_ERROR(UnsupportedDimension);
MOGFLOW_DEFINE_ERROR(ResolutionTooSmall);
MOGFLOW_DEFINE_ERROR(ResolutionNotEven);
MOGFLOW_DEFINE_ERROR(GridMismatch);
MOGFLOW_DEFINE_ERROR(NotUnitVector);
MOGFLOW_DEFINE_ERROR(NonpositiveExponent);
MOGFLOW_DEFINE_ERROR(ClassViolation);
MOGFLOW_DEFINE_ERROR(EpsilonOutOfRange);
MOGFLOW_DEFINE_ERROR(DeltaSearchFailed);
MOGFLOW_DEFINE_ERROR(OutOfRange);
MOGFLOW_DEFINE_ERROR(NotMonotone);
MOGFLOW_DEFINE_ERROR(NotPositive);
MOGFLOW_DEFINE_ERROR(NotConvex);
MOGFLOW_DEFINE_ERROR(DegenerateDenominator);
MOGFLOW_DEFINE_ERROR(NotInteriorBody);
MOGFLOW_DEFINE_ERROR(ZeroPsi);
MOGFLOW_DEFINE_ERROR(InversionOutOfRange);
MOGFLOW_DEFINE_ERROR(ConfigError);

#undef MOGFLOW_DEFINE_ERROR

}  // namespace mogflow
