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

#include "amrpt/bvh.h"

#include <algorithm>
#include <stdexcept>

namespace amrpt {

  BVH BVH::build(std::span<const box3d> boxes)
  {
    std::vector<float> all(boxes.size(), 1.f);
    return build(boxes, all);
  }

  BVH BVH::build(std::span<const box3d> boxes, std::span<const float> majorants)
  {
    if (boxes.size() != majorants.size())
      throw std::invalid_argument("BVH::build: boxes and majorants differ in length");
    BVH bvh;
    bvh.primBoxes.assign(boxes.begin(), boxes.end());
    for (uint32_t i = 0; i < boxes.size(); ++i)
      if (majorants[i] > 0.f && !boxes[i].empty()) bvh.primIDs.push_back(i);
    if (bvh.primIDs.empty()) return bvh;

    std::vector<box3d> centroids(boxes.size());
    for (uint32_t i : bvh.primIDs) {
      const vec3d c = boxes[i].center();
      centroids[i] = {c, c};
    }
    bvh.nodes.reserve(2 * bvh.primIDs.size());
    bvh.nodes.emplace_back();
    bvh.buildNode(0, 0, uint32_t(bvh.primIDs.size()), centroids, 0);
    return bvh;
  }

  void BVH::buildNode(uint32_t nodeID, uint32_t begin, uint32_t end, std::vector<box3d> &centroids,
                      int depth)
  {
    box3d bounds, centroidBounds;
    for (uint32_t i = begin; i < end; ++i) {
      bounds.extend(primBoxes[primIDs[i]]);
      centroidBounds.extend(centroids[primIDs[i]]);
    }
    nodes[nodeID].bounds = bounds;
    const uint32_t count = end - begin;
    if (count <= kMaxLeafSize) {
      nodes[nodeID].offset = begin;
      nodes[nodeID].count = count;
      return;
    }

    const vec3d extent = centroidBounds.size();
    int bestAxis = -1, bestSplit = -1;
    double bestCost = std::numeric_limits<double>::infinity();
    auto binOf = [&](uint32_t prim, int axis) {
      const double c = centroids[prim].lower[axis];
      const int b = int((c - centroidBounds.lower[axis]) / extent[axis] * kNumBins);
      return std::clamp(b, 0, kNumBins - 1);
    };
    // median splits only, past kMaxSahDepth
    for (int axis = 0; axis < 3 && depth < kMaxSahDepth; ++axis) {
      if (!(extent[axis] > 0.0)) continue;
      box3d binBounds[kNumBins];
      uint32_t binCount[kNumBins] = {};
      for (uint32_t i = begin; i < end; ++i) {
        const int b = binOf(primIDs[i], axis);
        binBounds[b].extend(primBoxes[primIDs[i]]);
        ++binCount[b];
      }
      double rightArea[kNumBins];
      uint32_t rightCount[kNumBins];
      box3d acc;
      uint32_t n = 0;
      for (int b = kNumBins - 1; b > 0; --b) {
        acc.extend(binBounds[b]);
        n += binCount[b];
        rightArea[b] = surfaceArea(acc);
        rightCount[b] = n;
      }
      acc = box3d();
      n = 0;
      for (int b = 0; b < kNumBins - 1; ++b) {
        acc.extend(binBounds[b]);
        n += binCount[b];
        if (n == 0 || rightCount[b + 1] == 0) continue;
        const double cost = surfaceArea(acc) * n + rightArea[b + 1] * rightCount[b + 1];
        // ties: lowest axis, lowest bin
        if (cost < bestCost) {
          bestCost = cost;
          bestAxis = axis;
          bestSplit = b;
        }
      }
    }

    uint32_t mid;
    if (bestAxis >= 0) {
      auto it = std::stable_partition(primIDs.begin() + begin, primIDs.begin() + end,
                                      [&](uint32_t prim) { return binOf(prim, bestAxis) <= bestSplit; });
      mid = uint32_t(it - primIDs.begin());
    } else {
      int axis = 0;
      for (int a = 1; a < 3; ++a)
        if (extent[a] > extent[axis]) axis = a;
      std::stable_sort(primIDs.begin() + begin, primIDs.begin() + end, [&](uint32_t a, uint32_t b) {
        return centroids[a].lower[axis] < centroids[b].lower[axis];
      });
      mid = begin + count / 2;
    }

    const uint32_t left = uint32_t(nodes.size());
    nodes[nodeID].offset = left;
    nodes[nodeID].count = 0;
    nodes.emplace_back();
    nodes.emplace_back();
    buildNode(left, begin, mid, centroids, depth + 1);
    buildNode(left + 1, mid, end, centroids, depth + 1);
  }

  size_t BVH::numLeaves() const
  {
    size_t n = 0;
    for (const Node &node : nodes)
      if (node.count) ++n;
    return n;
  }

  bool BVH::closestHit(const vec3d &org, const vec3d &dir, double tmin, double tmax,
                       uint32_t &primID, double &t0, double &t1) const
  {
    if (nodes.empty()) return false;
    bool found = false;
    primID = ~0u;
    double bestT0 = std::numeric_limits<double>::infinity();
    struct Entry {
      uint32_t node;
      double t;
    };
    Entry stack[64];
    int sp = 0;
    {
      double n0 = tmin, n1 = tmax;
      if (!clipToBox(org, dir, nodes[0].bounds, n0, n1)) return false;
      stack[sp++] = {0, n0};
    }
    while (sp) {
      const Entry e = stack[--sp];
      if (e.t > bestT0) continue;
      const Node &node = nodes[e.node];
      if (node.count) {
        for (uint32_t i = 0; i < node.count; ++i) {
          const uint32_t prim = primIDs[node.offset + i];
          double p0 = tmin, p1 = tmax;
          if (!clipToBox(org, dir, primBoxes[prim], p0, p1)) continue;
          if (p0 < bestT0 || (p0 == bestT0 && prim < primID)) {
            bestT0 = p0;
            primID = prim;
            t0 = p0;
            t1 = p1;
            found = true;
          }
        }
        continue;
      }
      double a0 = tmin, a1 = tmax, b0 = tmin, b1 = tmax;
      const bool hitA = clipToBox(org, dir, nodes[node.offset].bounds, a0, a1);
      const bool hitB = clipToBox(org, dir, nodes[node.offset + 1].bounds, b0, b1);
      // near child on top of the stack
      if (hitA && hitB) {
        if (a0 <= b0) {
          stack[sp++] = {node.offset + 1, b0};
          stack[sp++] = {node.offset, a0};
        } else {
          stack[sp++] = {node.offset, a0};
          stack[sp++] = {node.offset + 1, b0};
        }
      } else if (hitA) {
        stack[sp++] = {node.offset, a0};
      } else if (hitB) {
        stack[sp++] = {node.offset + 1, b0};
      }
    }
    return found;
  }

} // ::amrpt
