#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<...>> gives exact mixed
// partial derivatives of any order along independent directions.

#include <cmath>
#include <type_traits>

namespace flagcurv {

template <class T>
struct Dual {
  using value_type = T;
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(const T& value) : v(value), d(0.0) {}
  constexpr Dual(const T& value, const T& deriv) : v(value), d(deriv) {}
  template <class U>
    requires(std::is_arithmetic_v<U> && !std::is_same_v<T, U>)
  constexpr Dual(U value) : v(T(value)), d(T(0.0)) {}
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.v * b.d + a.d * b.v};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = T(1.0) / b.v;
  T q = a.v * inv;
  return {q, (a.d - q * b.d) * inv};
}

// Mixed operations with plain doubles (any nesting depth).
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) {
  return {a.v + b, a.d};
}
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) {
  return {a + b.v, b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) {
  return {a.v - b, a.d};
}
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) {
  return {a - b.v, -b.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) {
  return {a.v * b, a.d * b};
}
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) {
  return {a * b.v, a * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) {
  return {a.v / b, a.d / b};
}
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) {
  return Dual<T>(T(a)) / b;
}

template <class T, class U>
Dual<T>& operator+=(Dual<T>& a, const U& b) {
  return a = a + b;
}
template <class T, class U>
Dual<T>& operator-=(Dual<T>& a, const U& b) {
  return a = a - b;
}
template <class T, class U>
Dual<T>& operator*=(Dual<T>& a, const U& b) {
  return a = a * b;
}
template <class T, class U>
Dual<T>& operator/=(Dual<T>& a, const U& b) {
  return a = a / b;
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}

// Embeds a scalar of type S into a (possibly deeper) nested dual type T.
template <class T, class S>
T embed(const S& s) {
  if constexpr (std::is_same_v<T, S>) {
    return s;
  } else {
    return T(embed<typename T::value_type>(s));
  }
}

// Lift a value of type T into Dual<T> with a seeded derivative.
template <class T>
Dual<T> seed(const T& value, const T& direction) {
  return {value, direction};
}

}  // namespace flagcurv
