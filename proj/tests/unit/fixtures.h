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

// Fixtures and brute-force oracles shared by the unit and acceptance tests.
// The oracles deliberately avoid the library's fast paths: they loop over
// every cell, every box or every macrocell.

#pragma once

#include "amrpt/bench.h"
#include "amrpt/ingest.h"
#include "amrpt/scene.h"
#include "amrpt/transport.h"

#include <cmath>
#include <random>
#include <vector>

namespace amrpt::testing {

  inline CellSet makeCells(std::vector<Cell> cells) { return CellSet::fromCells(std::move(cells)); }

  /*! n x m x k block of level-`level` cells with values from f(ix,iy,iz) */
  template <typename F>
  std::vector<Cell> block(vec3i origin, vec3i n, int level, F &&f)
  {
    std::vector<Cell> cells;
    const int w = 1 << level;
    for (int z = 0; z < n.z; ++z)
      for (int y = 0; y < n.y; ++y)
        for (int x = 0; x < n.x; ++x)
          cells.push_back(Cell{origin + vec3i(x * w, y * w, z * w), level, float(f(x, y, z))});
    return cells;
  }

  // ------------------------------------------------------------------
  // reconstruction oracle
  // ------------------------------------------------------------------

  inline double oracleTent(const Cell &cell, const vec3d &x)
  {
    const double h = double(1 << cell.level);
    double w = 1.0;
    for (int a = 0; a < 3; ++a) {
      const double center = double(cell.lower[a]) + 0.5 * h;
      const double d = std::abs(x[a] - center);
      if (d >= h) return 0.0;
      w *= (h - d) / h;
    }
    return w;
  }

  struct OracleValue {
    double weightSum = 0.0;
    double value = 0.0;
    double lo = INFINITY, hi = -INFINITY;
  };

  /*! normalized tent reconstruction by enumerating every cell */
  inline OracleValue oracleReconstruct(const CellSet &cells, const vec3d &x)
  {
    OracleValue r;
    double wv = 0.0;
    for (const Cell &c : cells.cells) {
      const double w = oracleTent(c, x);
      if (w <= 0.0) continue;
      r.weightSum += w;
      wv += w * c.scalar;
      r.lo = std::min(r.lo, double(c.scalar));
      r.hi = std::max(r.hi, double(c.scalar));
    }
    if (r.weightSum > 0.0) r.value = wv / r.weightSum;
    return r;
  }

  // ------------------------------------------------------------------
  // geometry oracles
  // ------------------------------------------------------------------

  /*! [t0,t1] of ray against box, closed slabs; false unless t0 < t1 */
  inline bool oracleClip(const Ray &ray, const box3d &b, double &t0, double &t1)
  {
    t0 = ray.tmin;
    t1 = ray.tmax;
    for (int a = 0; a < 3; ++a) {
      const double o = ray.origin[a], d = ray.direction[a];
      if (d == 0.0) {
        if (o < b.lower[a] || o > b.upper[a]) return false;
        continue;
      }
      double n = (b.lower[a] - o) / d, f = (b.upper[a] - o) / d;
      if (n > f) std::swap(n, f);
      t0 = std::max(t0, n);
      t1 = std::min(t1, f);
    }
    return t0 < t1;
  }

  struct Interval {
    uint32_t id;
    double t0, t1;
    friend bool operator==(const Interval &, const Interval &) = default;
  };

  /*! every box the ray crosses with positive length, sorted by (t0, id) */
  inline std::vector<Interval> oracleCrossings(const std::vector<box3d> &boxes, const Ray &ray)
  {
    std::vector<Interval> out;
    for (uint32_t i = 0; i < boxes.size(); ++i) {
      double t0, t1;
      if (oracleClip(ray, boxes[i], t0, t1)) out.push_back({i, t0, t1});
    }
    std::sort(out.begin(), out.end(), [](const Interval &a, const Interval &b) {
      return a.t0 < b.t0 || (a.t0 == b.t0 && a.id < b.id);
    });
    return out;
  }

  // ------------------------------------------------------------------
  // random helpers
  // ------------------------------------------------------------------

  struct Random {
    std::mt19937_64 gen;
    explicit Random(uint64_t seed) : gen(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
    vec3d point(const box3d &b)
    {
      return {uniform(b.lower.x, b.upper.x), uniform(b.lower.y, b.upper.y), uniform(b.lower.z, b.upper.z)};
    }
    vec3d direction()
    {
      std::normal_distribution<double> n;
      vec3d d;
      do d = {n(gen), n(gen), n(gen)};
      while (length(d) < 1e-6);
      return normalize(d);
    }
    /*! ray from a point inside `around` (grown) in a random direction */
    Ray ray(const box3d &around, double grow = 0.0)
    {
      const box3d b = around.grownBy(grow);
      return Ray{point(b), direction(), 0.0, std::numeric_limits<double>::infinity()};
    }
    /*! random TF with `entries` entries over `domain` */
    TransferFunction tf(ValueRange domain, int entries, float unitExtinction)
    {
      TransferFunction t;
      t.domain = domain;
      t.unitExtinction = unitExtinction;
      for (int i = 0; i < entries; ++i) {
        const float a = uniform() < 0.25 ? 0.f : float(uniform());
        t.rgba.push_back({float(uniform()), float(uniform()), float(uniform()), a});
      }
      return t;
    }
  };

  // ------------------------------------------------------------------
  // media with closed-form optical depth
  // ------------------------------------------------------------------

  /*! linear alpha ramp from 0 at domain.lo to 1 at domain.hi, white albedo */
  inline TransferFunction rampTF(ValueRange domain, float unitExtinction)
  {
    TransferFunction tf;
    tf.domain = domain;
    tf.unitExtinction = unitExtinction;
    tf.rgba = {{1.f, 1.f, 1.f, 0.f}, {1.f, 1.f, 1.f, 1.f}};
    return tf;
  }

  /*! two level-0 cells, value 1 on [0,1] and 3 on [1,2] (world 2x1x1).
      With rampTF({0,3}, 6) the world-unit extinction equals the field, and
      the tent blend between the two centers is linear, so the optical depth
      along y = z = 0.5 from x = 0 to x = 2 is 0.5 + 2 + 1.5 = 4. */
  inline CellSet twoSlabCells()
  {
    return makeCells({Cell{{0, 0, 0}, 0, 1.f}, Cell{{1, 0, 0}, 0, 3.f}});
  }
  inline TransferFunction twoSlabTF() { return rampTF({0.f, 3.f}, 6.f); }
  inline Ray twoSlabRay() { return Ray{{0.0, 0.5, 0.5}, {1.0, 0.0, 0.0}, 0.0, 2.0}; }

  /*! row of n value-1 cells along x; with the returned TF the extinction is
      exactly 1 per world unit everywhere and every majorant equals it */
  inline CellSet homogeneousCells(int n)
  {
    return makeCells(block({0, 0, 0}, {n, 1, 1}, 0, [](int, int, int) { return 1.0; }));
  }
  inline TransferFunction homogeneousTF(int n)
  {
    return constantTransferFunction({1.f, 1.f, 1.f, 1.f}, float(n));
  }

  /*! sphere-shells dataset with its refinement and a TF over [-1,1] */
  inline SyntheticSpec shellsSpec()
  {
    SyntheticSpec s;
    s.kind = SyntheticKind::SPHERE_SHELLS;
    s.refineLevels = 2;
    s.rootCells = 8;
    s.gradientThreshold = 0.6;
    s.seed = 7;
    return s;
  }

  inline SyntheticSpec teapotSpec()
  {
    SyntheticSpec s;
    s.kind = SyntheticKind::TEAPOT_IN_STADIUM;
    s.refineLevels = 4;
    s.rootCells = 4;
    s.gradientThreshold = 0.1;
    s.seed = 3;
    return s;
  }

  inline std::vector<TraversalMethod> allMethods()
  {
    return {std::begin(kAllTraversalMethods), std::end(kAllTraversalMethods)};
  }

  /*! every (method, sampler) pair tracking accepts */
  inline std::vector<std::pair<TraversalMethod, SamplerKind>> validCombinations()
  {
    std::vector<std::pair<TraversalMethod, SamplerKind>> out;
    for (TraversalMethod m : kAllTraversalMethods)
      for (SamplerKind s : kAllSamplerKinds)
        if (s != SamplerKind::ABR_DIRECT || m == TraversalMethod::ABR_BVH) out.push_back({m, s});
    return out;
  }

} // namespace amrpt::testing
