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

#include "amrpt/kdtree.h"

#include <array>

namespace amrpt {

  KdTree KdTree::build(std::span<const box3d> boxes)
  {
    KdTree tree;
    tree.boxes.assign(boxes.begin(), boxes.end());
    std::vector<uint32_t> list;
    for (uint32_t i = 0; i < boxes.size(); ++i) {
      if (boxes[i].empty()) continue;
      list.push_back(i);
      tree.rootBounds.extend(boxes[i]);
    }
    if (list.empty()) return tree;
    tree.nodes.emplace_back();
    tree.buildNode(0, tree.rootBounds, list, 0);
    return tree;
  }

  void KdTree::buildNode(uint32_t nodeID, const box3d &region, std::vector<uint32_t> &list,
                         int depth)
  {
    maxDepth = std::max(maxDepth, depth);
    auto makeLeaf = [&]() {
      nodes[nodeID].axis = 3;
      nodes[nodeID].offset = uint32_t(primList.size());
      nodes[nodeID].count = uint32_t(list.size());
      primList.insert(primList.end(), list.begin(), list.end());
    };
    // one stack entry per interior level at most
    if (list.size() <= kLeafTarget || depth >= kStackSize - 1) {
      makeLeaf();
      return;
    }

    const vec3d extent = region.size();
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return extent[a] > extent[b]; });

    for (int axis : order) {
      std::vector<double> faces;
      for (uint32_t prim : list) {
        const box3d &b = boxes[prim];
        if (b.lower[axis] > region.lower[axis] && b.lower[axis] < region.upper[axis])
          faces.push_back(b.lower[axis]);
        if (b.upper[axis] > region.lower[axis] && b.upper[axis] < region.upper[axis])
          faces.push_back(b.upper[axis]);
      }
      if (faces.empty()) continue;
      std::sort(faces.begin(), faces.end());
      faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
      const double plane = faces[faces.size() / 2];

      std::vector<uint32_t> left, right;
      for (uint32_t prim : list) {
        if (boxes[prim].lower[axis] < plane) left.push_back(prim);
        if (boxes[prim].upper[axis] > plane) right.push_back(prim);
      }
      if (left.size() == list.size() && right.size() == list.size()) continue;

      box3d leftRegion = region, rightRegion = region;
      leftRegion.upper[axis] = plane;
      rightRegion.lower[axis] = plane;
      const uint32_t child = uint32_t(nodes.size());
      nodes[nodeID].axis = uint32_t(axis);
      nodes[nodeID].plane = plane;
      nodes[nodeID].offset = child;
      nodes.emplace_back();
      nodes.emplace_back();
      list.clear();
      list.shrink_to_fit();
      buildNode(child, leftRegion, left, depth + 1);
      buildNode(child + 1, rightRegion, right, depth + 1);
      return;
    }
    makeLeaf();
  }

} // ::amrpt
