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

#include "amrpt/math.h"

#include <cstdint>
#include <queue>
#include <span>
#include <vector>

namespace amrpt {

  /*! returned by traversal visitors */
  enum class Visit { Continue, Stop };

  /*! binary BVH over axis-aligned boxes, built with a 16-bin SAH */
  class BVH {
   public:
    struct Node {
      box3d bounds;
      uint32_t offset = 0;  // first child (interior) or first prim slot (leaf)
      uint32_t count = 0;   // 0 for interior nodes
    };

    static constexpr int kNumBins = 16;
    static constexpr uint32_t kMaxLeafSize = 4;

    BVH() = default;

    /*! hierarchy over all boxes */
    static BVH build(std::span<const box3d> boxes);

    /*! hierarchy over the boxes whose majorant is non-zero; zero-majorant
        primitives are unreachable. Throws if the spans differ in length. */
    static BVH build(std::span<const box3d> boxes, std::span<const float> majorants);

    bool empty() const { return nodes.empty(); }
    size_t numPrims() const { return primIDs.size(); }
    size_t numLeaves() const;
    size_t numInputPrims() const { return primBoxes.size(); }
    const std::vector<Node> &getNodes() const { return nodes; }
    const box3d &primBox(uint32_t primID) const { return primBoxes[primID]; }
    uint32_t leafPrim(uint32_t slot) const { return primIDs[slot]; }
    size_t bytes() const
    {
      return nodes.size() * sizeof(Node) + primIDs.size() * sizeof(uint32_t)
           + primBoxes.size() * sizeof(box3d);
    }

    /*! primitive with the smallest clipped entry t among those whose clipped
        interval within [tmin,tmax] has positive length. Ties go to the lower
        primitive ID. */
    bool closestHit(const vec3d &org, const vec3d &dir, double tmin, double tmax,
                    uint32_t &primID, double &t0, double &t1) const;

    /*! calls f(primID) for every primitive box containing p */
    template <typename Pred, typename F>
    void forEachContaining(const vec3d &p, Pred &&contains, F &&f) const;

    /*! calls f(primID) for every primitive box touching b (closed test) */
    template <typename F>
    void forEachTouching(const box3d &b, F &&f) const;

   private:
    void buildNode(uint32_t nodeID, uint32_t begin, uint32_t end, std::vector<box3d> &centroids,
                   int depth);
    static constexpr int kMaxSahDepth = 36;

    std::vector<Node> nodes;
    std::vector<uint32_t> primIDs;  // leaf slots -> input primitive index
    std::vector<box3d> primBoxes;   // indexed by input primitive index
  };

  /*! ordered-visit helper: the restart loop mirroring hardware traversal.
      After each visited primitive the query is re-issued with tmin at that
      primitive's exit (plus `eps` if non-zero). Only primitives with a
      non-empty clipped interval are accepted. */
  template <typename V>
  void traverseRestart(const BVH &bvh, const Ray &ray, V &&visit, double eps = 0.0)
  {
    if (bvh.empty()) return;
    double tmin = ray.tmin;
    for (size_t iter = 0; iter <= bvh.numPrims(); ++iter) {
      uint32_t prim;
      double t0, t1;
      if (!bvh.closestHit(ray.origin, ray.direction, tmin, ray.tmax, prim, t0, t1)) return;
      if (visit(prim, t0, t1) == Visit::Stop) return;
      if (t1 >= ray.tmax) return;
      double next = t1 + eps;
      if (!(next > t1)) next = std::nextafter(t1, std::numeric_limits<double>::infinity());
      tmin = eps > 0.0 ? next : t1;
    }
  }

  /*! single sweep that visits primitives in order of their clipped entry t,
      using a best-first node queue. Equivalent to front-to-back order for
      non-overlapping primitives. */
  template <typename V>
  void traverseOrdered(const BVH &bvh, const Ray &ray, V &&visit);

  // ------------------------------------------------------------------
  // inline implementations
  // ------------------------------------------------------------------

  template <typename Pred, typename F>
  void BVH::forEachContaining(const vec3d &p, Pred &&contains, F &&f) const
  {
    if (nodes.empty()) return;
    uint32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp) {
      const Node &node = nodes[stack[--sp]];
      if (!node.bounds.contains(p)) continue;
      if (node.count) {
        for (uint32_t i = 0; i < node.count; ++i) {
          const uint32_t prim = primIDs[node.offset + i];
          if (contains(primBoxes[prim], p)) f(prim);
        }
      } else {
        stack[sp++] = node.offset + 1;
        stack[sp++] = node.offset;
      }
    }
  }

  template <typename F>
  void BVH::forEachTouching(const box3d &b, F &&f) const
  {
    if (nodes.empty()) return;
    uint32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp) {
      const Node &node = nodes[stack[--sp]];
      if (!node.bounds.touches(b)) continue;
      if (node.count) {
        for (uint32_t i = 0; i < node.count; ++i) {
          const uint32_t prim = primIDs[node.offset + i];
          if (primBoxes[prim].touches(b)) f(prim);
        }
      } else {
        stack[sp++] = node.offset + 1;
        stack[sp++] = node.offset;
      }
    }
  }

  namespace detail {
    struct QueueEntry {
      double t;
      uint32_t id;       // node index, or prim ID when isPrim
      bool isPrim;
      double t1;
      // min-heap on t, prims before nodes at equal t, then by id
      bool operator<(const QueueEntry &o) const
      {
        if (t != o.t) return t > o.t;
        if (isPrim != o.isPrim) return !isPrim;
        return id > o.id;
      }
    };
  } // namespace detail

  template <typename V>
  void traverseOrdered(const BVH &bvh, const Ray &ray, V &&visit)
  {
    if (bvh.empty()) return;
    const auto &nodes = bvh.getNodes();
    std::priority_queue<detail::QueueEntry> queue;
    double t0 = ray.tmin, t1 = ray.tmax;
    // a node enclosing a positive-length primitive hit has one itself
    if (!clipToBox(ray.origin, ray.direction, nodes[0].bounds, t0, t1)) return;
    queue.push({t0, 0, false, t1});
    while (!queue.empty()) {
      const detail::QueueEntry e = queue.top();
      queue.pop();
      if (e.isPrim) {
        if (visit(e.id, e.t, e.t1) == Visit::Stop) return;
        continue;
      }
      const BVH::Node &node = nodes[e.id];
      if (node.count) {
        for (uint32_t i = 0; i < node.count; ++i) {
          const uint32_t prim = bvh.leafPrim(node.offset + i);
          double p0 = ray.tmin, p1 = ray.tmax;
          if (clipToBox(ray.origin, ray.direction, bvh.primBox(prim), p0, p1))
            queue.push({p0, prim, true, p1});
        }
      } else {
        for (uint32_t c = 0; c < 2; ++c) {
          double c0 = ray.tmin, c1 = ray.tmax;
          if (clipToBox(ray.origin, ray.direction, nodes[node.offset + c].bounds, c0, c1))
            queue.push({c0, node.offset + c, false, c1});
        }
      }
    }
  }

} // ::amrpt
