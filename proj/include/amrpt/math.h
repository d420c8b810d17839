// ======================================================================== //
// Copyright 2026 The amrpt Authors                                         //
//                                                                          //
// Licensed under the Apache License, Version 2.0 (the "License");          //
// you may not use this file except in compliance with the License.         //
// You may obtain a copy of the License at                                  //
//                                                                          //
//     http://www.apache.org/licenses/LICENSE-2.0                           //
//                                                                          //
// Unless required by applicable law or agreed to in writing, software      //
// distributed under the License is distributed on an "AS IS" BASIS,        //
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. //
// See the License for the specific language governing permissions and      //
// limitations under the License.                                           //
// ======================================================================== //

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

namespace amrpt {

  template <typename T>
  struct vec3T {
    T x{}, y{}, z{};

    constexpr vec3T() = default;
    constexpr vec3T(T x, T y, T z) : x(x), y(y), z(z) {}
    constexpr explicit vec3T(T v) : x(v), y(v), z(v) {}
    template <typename U>
    constexpr explicit vec3T(const vec3T<U> &o) : x(T(o.x)), y(T(o.y)), z(T(o.z)) {}

    constexpr T &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr const T &operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr bool operator==(const vec3T &a, const vec3T &b) = default;
  };

  using vec3d = vec3T<double>;
  using vec3f = vec3T<float>;
  using vec3i = vec3T<int>;

#define AMRPT_VEC_BINOP(op)                                                  \
  template <typename T>                                                      \
  constexpr vec3T<T> operator op(const vec3T<T> &a, const vec3T<T> &b)       \
  {                                                                          \
    return {a.x op b.x, a.y op b.y, a.z op b.z};                             \
  }                                                                          \
  template <typename T>                                                      \
  constexpr vec3T<T> operator op(const vec3T<T> &a, T b)                     \
  {                                                                          \
    return {a.x op b, a.y op b, a.z op b};                                   \
  }                                                                          \
  template <typename T>                                                      \
  constexpr vec3T<T> operator op(T a, const vec3T<T> &b)                     \
  {                                                                          \
    return {a op b.x, a op b.y, a op b.z};                                   \
  }
  AMRPT_VEC_BINOP(+)
  AMRPT_VEC_BINOP(-)
  AMRPT_VEC_BINOP(*)
  AMRPT_VEC_BINOP(/)
#undef AMRPT_VEC_BINOP

  template <typename T>
  constexpr vec3T<T> operator-(const vec3T<T> &a) { return {-a.x, -a.y, -a.z}; }

  template <typename T>
  constexpr vec3T<T> &operator+=(vec3T<T> &a, const vec3T<T> &b) { return a = a + b; }
  template <typename T>
  constexpr vec3T<T> &operator*=(vec3T<T> &a, const vec3T<T> &b) { return a = a * b; }
  template <typename T>
  constexpr vec3T<T> &operator*=(vec3T<T> &a, T b) { return a = a * b; }

  template <typename T>
  constexpr T dot(const vec3T<T> &a, const vec3T<T> &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

  template <typename T>
  constexpr vec3T<T> cross(const vec3T<T> &a, const vec3T<T> &b)
  {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
  }

  template <typename T>
  inline T length(const vec3T<T> &a) { return std::sqrt(dot(a, a)); }

  template <typename T>
  inline vec3T<T> normalize(const vec3T<T> &a) { return a / length(a); }

  template <typename T>
  constexpr vec3T<T> min(const vec3T<T> &a, const vec3T<T> &b)
  {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
  }

  template <typename T>
  constexpr vec3T<T> max(const vec3T<T> &a, const vec3T<T> &b)
  {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
  }

  template <typename T>
  constexpr T reduceMax(const vec3T<T> &a) { return std::max(a.x, std::max(a.y, a.z)); }

  template <typename T>
  constexpr T reduceMin(const vec3T<T> &a) { return std::min(a.x, std::min(a.y, a.z)); }

  template <typename T>
  std::ostream &operator<<(std::ostream &o, const vec3T<T> &v)
  {
    return o << "(" << v.x << "," << v.y << "," << v.z << ")";
  }

  /*! axis-aligned box; closed on both ends unless stated otherwise */
  template <typename T>
  struct box3T {
    vec3T<T> lower{std::numeric_limits<T>::max()};
    vec3T<T> upper{std::numeric_limits<T>::lowest()};

    constexpr box3T() = default;
    constexpr box3T(const vec3T<T> &lo, const vec3T<T> &hi) : lower(lo), upper(hi) {}

    constexpr bool empty() const
    {
      return lower.x > upper.x || lower.y > upper.y || lower.z > upper.z;
    }
    constexpr vec3T<T> size() const { return upper - lower; }
    constexpr vec3T<T> center() const { return (lower + upper) / T(2); }
    constexpr T volume() const
    {
      if (empty()) return T(0);
      const auto s = size();
      return s.x * s.y * s.z;
    }
    constexpr box3T &extend(const vec3T<T> &p)
    {
      lower = min(lower, p);
      upper = max(upper, p);
      return *this;
    }
    constexpr box3T &extend(const box3T &b)
    {
      if (b.empty()) return *this;
      lower = min(lower, b.lower);
      upper = max(upper, b.upper);
      return *this;
    }
    constexpr bool contains(const vec3T<T> &p) const
    {
      return p.x >= lower.x && p.x <= upper.x && p.y >= lower.y && p.y <= upper.y
          && p.z >= lower.z && p.z <= upper.z;
    }
    /*! half-open containment, [lower,upper) per axis */
    constexpr bool containsHalfOpen(const vec3T<T> &p) const
    {
      return p.x >= lower.x && p.x < upper.x && p.y >= lower.y && p.y < upper.y
          && p.z >= lower.z && p.z < upper.z;
    }
    /*! open containment, (lower,upper) per axis */
    constexpr bool containsOpen(const vec3T<T> &p) const
    {
      return p.x > lower.x && p.x < upper.x && p.y > lower.y && p.y < upper.y
          && p.z > lower.z && p.z < upper.z;
    }
    /*! closed overlap; touching faces count */
    constexpr bool touches(const box3T &b) const
    {
      return lower.x <= b.upper.x && b.lower.x <= upper.x && lower.y <= b.upper.y
          && b.lower.y <= upper.y && lower.z <= b.upper.z && b.lower.z <= upper.z;
    }
    /*! overlap with positive volume */
    constexpr bool overlaps(const box3T &b) const
    {
      return lower.x < b.upper.x && b.lower.x < upper.x && lower.y < b.upper.y
          && b.lower.y < upper.y && lower.z < b.upper.z && b.lower.z < upper.z;
    }
    constexpr box3T intersection(const box3T &b) const
    {
      return {max(lower, b.lower), min(upper, b.upper)};
    }
    constexpr box3T grownBy(T d) const { return {lower - vec3T<T>(d), upper + vec3T<T>(d)}; }

    friend constexpr bool operator==(const box3T &a, const box3T &b) = default;
  };

  using box3d = box3T<double>;
  using box3i = box3T<int>;

  inline box3d toBox3d(const box3i &b)
  {
    return {vec3d(b.lower), vec3d(b.upper)};
  }

  template <typename T>
  std::ostream &operator<<(std::ostream &o, const box3T<T> &b)
  {
    return o << "[" << b.lower << ":" << b.upper << "]";
  }

  inline double surfaceArea(const box3d &b)
  {
    if (b.empty()) return 0.0;
    const vec3d s = b.size();
    return 2.0 * (s.x * s.y + s.y * s.z + s.z * s.x);
  }

  struct Ray {
    vec3d origin;
    vec3d direction;
    double tmin = 0.0;
    double tmax = std::numeric_limits<double>::infinity();

    vec3d at(double t) const { return origin + direction * t; }
  };

  /*! slab test clipped to [tmin,tmax]; true only for a segment of positive
      length. A zero direction component never crosses that axis' slabs. */
  inline bool clipToBox(const vec3d &origin, const vec3d &direction, const box3d &box,
                        double &t0, double &t1)
  {
    for (int a = 0; a < 3; ++a) {
      const double o = origin[a];
      const double d = direction[a];
      if (d == 0.0) {
        if (o < box.lower[a] || o > box.upper[a]) return false;
        continue;
      }
      double tl = (box.lower[a] - o) / d;
      double th = (box.upper[a] - o) / d;
      if (tl > th) std::swap(tl, th);
      t0 = std::max(t0, tl);
      t1 = std::min(t1, th);
    }
    return t0 < t1;
  }

  inline bool intersect(const Ray &ray, const box3d &box, double &t0, double &t1)
  {
    t0 = ray.tmin;
    t1 = ray.tmax;
    return clipToBox(ray.origin, ray.direction, box, t0, t1);
  }

  inline constexpr double kPi = 3.14159265358979323846;

} // ::amrpt
