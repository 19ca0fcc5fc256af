#pragma once

// Forward-mode dual numbers  v + d·ε  with ε² = 0.
//
// Used to push a single spatial direction through the closed-form geometry
// kernels (ambient log and its differentials), which yields exact directional
// derivatives of the implicit-differentiation systems.  Nesting
// Dual<Dual<double>> gives second derivatives for analytic test maps.

#include <Eigen/Core>

#include <cmath>
#include <ostream>
#include <type_traits>

namespace gfe {

template <typename T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value), d(0) {}  // NOLINT: implicit lift of constants
  template <typename U = T, typename = std::enable_if_t<!std::is_same_v<U, double>>>
  constexpr Dual(const T& value) : v(value), d(0) {}  // NOLINT
  constexpr Dual(const T& value, const T& derivative) : v(value), d(derivative) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

template <typename T>
struct is_dual : std::false_type {};
template <typename T>
struct is_dual<Dual<T>> : std::true_type {};

template <typename T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <typename T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <typename T>
Dual<T> operator+(const Dual<T>& a) { return a; }

template <typename T>
Dual<T> operator+(Dual<T> a, double b) { a.v += b; return a; }
template <typename T>
Dual<T> operator+(double b, Dual<T> a) { a.v += b; return a; }
template <typename T>
Dual<T> operator-(Dual<T> a, double b) { a.v -= b; return a; }
template <typename T>
Dual<T> operator-(double b, const Dual<T>& a) { return {b - a.v, -a.d}; }
template <typename T>
Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <typename T>
Dual<T> operator*(double b, const Dual<T>& a) { return {a.v * b, a.d * b}; }
template <typename T>
Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <typename T>
Dual<T> operator/(double b, const Dual<T>& a) { return Dual<T>(b) / a; }

template <typename T>
bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.v < b.v; }
template <typename T>
bool operator>(const Dual<T>& a, const Dual<T>& b) { return a.v > b.v; }
template <typename T>
bool operator<=(const Dual<T>& a, const Dual<T>& b) { return a.v <= b.v; }
template <typename T>
bool operator>=(const Dual<T>& a, const Dual<T>& b) { return a.v >= b.v; }
template <typename T>
bool operator==(const Dual<T>& a, const Dual<T>& b) { return a.v == b.v && a.d == b.d; }
template <typename T>
bool operator!=(const Dual<T>& a, const Dual<T>& b) { return !(a == b); }

template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <typename T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), a.d * cos(a.v)};
}
template <typename T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -(a.d * sin(a.v))};
}
template <typename T>
Dual<T> sinh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return {sinh(a.v), a.d * cosh(a.v)};
}
template <typename T>
Dual<T> cosh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return {cosh(a.v), a.d * sinh(a.v)};
}
template <typename T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return {e, a.d * e};
}
template <typename T>
Dual<T> abs(const Dual<T>& a) {
  return a.v < T(0) ? -a : a;
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const Dual<T>& a) {
  return os << a.v << "+" << a.d << "e";
}

/// Plain value of a possibly nested dual.
inline double value_of(double x) { return x; }
template <typename T>
double value_of(const Dual<T>& x) { return value_of(x.v); }

}  // namespace gfe

namespace Eigen {

template <typename T>
struct NumTraits<gfe::Dual<T>> : GenericNumTraits<gfe::Dual<T>> {
  using Real = gfe::Dual<T>;
  using NonInteger = gfe::Dual<T>;
  using Nested = gfe::Dual<T>;
  using Literal = gfe::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 4
  };
  static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(NumTraits<double>::dummy_precision()); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<gfe::Dual<T>, double, BinaryOp> {
  using ReturnType = gfe::Dual<T>;
};
template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<double, gfe::Dual<T>, BinaryOp> {
  using ReturnType = gfe::Dual<T>;
};

}  // namespace Eigen
