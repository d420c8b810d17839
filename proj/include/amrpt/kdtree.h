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

#include <algorithm>
#include <span>
#include <vector>

namespace amrpt {

  /*! kd-tree over (non-overlapping) boxes with planes at box faces. A box
      may straddle a plane; it is then listed in both subtrees and reported
      only from the leaf that contains its entry point. */
  class KdTree {
   public:
    static constexpr int kStackSize = 32;
    static constexpr uint32_t kLeafTarget = 2;

    struct Node {
      double plane = 0.0;
      uint32_t axis = 3;   // 0..2 interior, 3 leaf
      uint32_t offset = 0; // first child (interior) or first list slot (leaf)
      uint32_t count = 0;  // leaf list length
    };

    KdTree() = default;
    static KdTree build(std::span<const box3d> boxes);

    bool empty() const { return nodes.empty(); }
    int depth() const { return maxDepth; }
    const box3d &bounds() const { return rootBounds; }
    size_t bytes() const
    {
      return nodes.size() * sizeof(Node) + primList.size() * sizeof(uint32_t)
           + boxes.size() * sizeof(box3d);
    }

    /*! front-to-back single sweep; visit(primID, t0, t1) -> Visit */
    template <typename V>
    void traverse(const Ray &ray, V &&visit) const;

   private:
    void buildNode(uint32_t nodeID, const box3d &region, std::vector<uint32_t> &list, int depth);

    std::vector<Node> nodes;
    std::vector<uint32_t> primList;
    std::vector<box3d> boxes;
    box3d rootBounds;
    int maxDepth = 0;
  };

  template <typename V>
  void KdTree::traverse(const Ray &ray, V &&visit) const
  {
    if (nodes.empty()) return;
    double tnear = ray.tmin, tfar = ray.tmax;
    if (!clipToBox(ray.origin, ray.direction, rootBounds, tnear, tfar)) return;

    struct Entry {
      uint32_t node;
      double tnear, tfar;
    };
    Entry stack[kStackSize];
    int sp = 0;
    uint32_t nodeID = 0;

    struct Candidate {
      double t0, t1;
      uint32_t prim;
    };
    Candidate found[64];
    std::vector<Candidate> overflow;

    while (true) {
      const Node *node = &nodes[nodeID];
      while (node->axis < 3) {
        const int a = int(node->axis);
        const double o = ray.origin[a];
        const double d = ray.direction[a];
        if (d == 0.0) {
          nodeID = o <= node->plane ? node->offset : node->offset + 1;
        } else {
          const double tplane = (node->plane - o) / d;
          const uint32_t first = d > 0.0 ? node->offset : node->offset + 1;
          const uint32_t second = d > 0.0 ? node->offset + 1 : node->offset;
          if (tfar <= tplane) {
            nodeID = first;
          } else if (tnear >= tplane) {
            nodeID = second;
          } else {
            stack[sp++] = {second, tplane, tfar};
            nodeID = first;
            tfar = tplane;
          }
        }
        node = &nodes[nodeID];
      }

      // leaf: report boxes whose clipped entry lies in [tnear,tfar)
      int numFound = 0;
      overflow.clear();
      for (uint32_t i = 0; i < node->count; ++i) {
        const uint32_t prim = primList[node->offset + i];
        double p0 = ray.tmin, p1 = ray.tmax;
        if (!clipToBox(ray.origin, ray.direction, boxes[prim], p0, p1)) continue;
        if (p0 < tnear || p0 >= tfar) continue;
        if (numFound < 64)
          found[numFound++] = {p0, p1, prim};
        else
          overflow.push_back({p0, p1, prim});
      }
      auto byEntry = [](const Candidate &a, const Candidate &b) {
        return a.t0 < b.t0 || (a.t0 == b.t0 && a.prim < b.prim);
      };
      if (overflow.empty()) {
        std::sort(found, found + numFound, byEntry);
        for (int i = 0; i < numFound; ++i)
          if (visit(found[i].prim, found[i].t0, found[i].t1) == Visit::Stop) return;
      } else {
        overflow.insert(overflow.end(), found, found + numFound);
        std::sort(overflow.begin(), overflow.end(), byEntry);
        for (const auto &c : overflow)
          if (visit(c.prim, c.t0, c.t1) == Visit::Stop) return;
      }

      if (sp == 0) return;
      --sp;
      nodeID = stack[sp].node;
      tnear = stack[sp].tnear;
      tfar = stack[sp].tfar;
    }
  }

} // ::amrpt
