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

#include "amrpt/bvh.h"
#include "amrpt/kdtree.h"
#include "amrpt/partitions.h"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace amrpt {

  /*! one ray segment through a spatial partition */
  struct PartitionHit {
    uint32_t partID = 0;
    double t0 = 0.0, t1 = 0.0;
    float majorant = 0.f;
  };

  enum class TraversalMethod { ABR_BVH, BRICK_KD, BRICK_BVH, GRID_DDA, GRID_BVH };

  inline constexpr TraversalMethod kAllTraversalMethods[] = {
      TraversalMethod::ABR_BVH, TraversalMethod::BRICK_KD, TraversalMethod::BRICK_BVH,
      TraversalMethod::GRID_DDA, TraversalMethod::GRID_BVH};

  /*! CLI spelling: abr, brick-kd, brick-bvh, grid-dda, grid-bvh */
  std::string_view toString(TraversalMethod m);
  std::optional<TraversalMethod> parseTraversalMethod(std::string_view s);

  /*! raised when a traversal or sampler is asked for a structure that was
      not built, or for an invalid combination */
  class ConfigurationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  struct TraversalOptions {
    /*! single-sweep best-first BVH instead of closest-hit restarts */
    bool orderedBvh = false;
    /*! restart offset in t; 0 restarts exactly at the previous exit */
    double restartEps = 0.0;
  };

  /*! 3D DDA over the macrocell grid. Every macrocell whose box meets the
      clipped segment in a positive-length interval is visited exactly once,
      in increasing t, with t0/t1 equal to the slab intersection against
      MajorantGrid::cellBounds(). Empty macrocells are visited too. */
  template <typename V>
  void ddaTraverse(const MajorantGrid &grid, const Ray &ray, V &&visit)
  {
    double t0 = ray.tmin, t1 = ray.tmax;
    if (!clipToBox(ray.origin, ray.direction, grid.worldBounds, t0, t1)) return;

    vec3i cell, step;
    vec3d tNext;
    const double inf = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      const int n = grid.dims[a];
      const double o = ray.origin[a], d = ray.direction[a];
      const double lo = grid.worldBounds.lower[a], size = grid.worldBounds.size()[a];
      auto tb = [&](int i) { return (grid.planeCoord(a, i) - o) / d; };
      if (d == 0.0) {
        int i = std::clamp(int(std::floor((o - lo) / size * n)), 0, n - 1);
        while (i > 0 && o < grid.planeCoord(a, i)) --i;
        while (i < n - 1 && o >= grid.planeCoord(a, i + 1)) ++i;
        cell[a] = i;
        step[a] = 0;
        tNext[a] = inf;
        continue;
      }
      const vec3d p = ray.at(t0);
      int i = std::clamp(int(std::floor((p[a] - lo) / size * n)), 0, n - 1);
      if (d > 0.0) {
        // cell i spans t in [tb(i), tb(i+1)]
        while (i > 0 && t0 < tb(i)) --i;
        while (i < n - 1 && t0 >= tb(i + 1)) ++i;
        step[a] = 1;
        tNext[a] = tb(i + 1);
      } else {
        // cell i spans t in [tb(i+1), tb(i)]
        while (i < n - 1 && t0 < tb(i + 1)) ++i;
        while (i > 0 && t0 >= tb(i)) --i;
        step[a] = -1;
        tNext[a] = tb(i);
      }
      cell[a] = i;
    }

    double t = t0;
    while (t < t1) {
      const double exit = std::min(std::min(tNext.x, tNext.y), std::min(tNext.z, t1));
      if (exit > t) {
        const uint32_t id = uint32_t(grid.linearIndex(cell));
        if (visit(PartitionHit{id, t, exit, grid.majorants[id]}) == Visit::Stop) return;
      }
      if (exit >= t1) return;
      for (int a = 0; a < 3; ++a) {
        if (tNext[a] != exit) continue;
        cell[a] += step[a];
        if (cell[a] < 0 || cell[a] >= grid.dims[a]) return;
        const double d = ray.direction[a];
        tNext[a] = (grid.planeCoord(a, step[a] > 0 ? cell[a] + 1 : cell[a]) - ray.origin[a]) / d;
      }
      t = exit;
    }
  }

  /*! BVH traversal honoring the options: restarts by default, best-first
      single sweep when orderedBvh is set */
  template <typename V>
  void bvhTraverse(const BVH &bvh, std::span<const float> majorants, const Ray &ray,
                   const TraversalOptions &opt, V &&visit)
  {
    auto emit = [&](uint32_t prim, double t0, double t1) {
      return visit(PartitionHit{prim, t0, t1, majorants[prim]});
    };
    if (opt.orderedBvh)
      traverseOrdered(bvh, ray, emit);
    else
      traverseRestart(bvh, ray, emit, opt.restartEps);
  }

  template <typename V>
  void kdTraverse(const KdTree &tree, std::span<const float> majorants, const Ray &ray, V &&visit)
  {
    tree.traverse(ray, [&](uint32_t prim, double t0, double t1) {
      return visit(PartitionHit{prim, t0, t1, majorants[prim]});
    });
  }

} // ::amrpt
