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

#include "amrpt/sampling.h"

#include <algorithm>
#include <cassert>

namespace amrpt {

  std::string_view toString(SamplerKind k)
  {
    switch (k) {
    case SamplerKind::ABR_QUERY: return "abr";
    case SamplerKind::ABR_DIRECT: return "abr-direct";
    case SamplerKind::EXT_BRICK_QUERY: return "ext-brick";
    }
    return "?";
  }

  std::optional<SamplerKind> parseSamplerKind(std::string_view s)
  {
    for (SamplerKind k : kAllSamplerKinds)
      if (toString(k) == s) return k;
    return std::nullopt;
  }

  Sample sampleFromBasis(const BasisSample &basis, const TransferFunction &tf)
  {
    Sample s;
    if (!(basis.weightSum > 0.0)) {
      s.albedo = tf.colorAt(0.0);
      return s;
    }
    s.value = basis.value();
    s.albedo = tf.colorAt(s.value);
    s.extinction = tf.extinctionAt(s.value);
    return s;
  }

  BVH buildAbrPointBvh(const ABRSet &abrs)
  {
    std::vector<box3d> boxes(abrs.size());
    for (size_t i = 0; i < abrs.size(); ++i) boxes[i] = abrs.abrs[i].domain;
    return BVH::build(boxes);
  }

  BVH buildExtBrickBvh(std::span<const Brick> bricks)
  {
    std::vector<box3d> boxes(bricks.size());
    for (size_t i = 0; i < bricks.size(); ++i) boxes[i] = bricks[i].filterDomain().box;
    return BVH::build(boxes);
  }

  std::optional<uint32_t> abrPointQuery(const ABRSet &abrs, const BVH &abrPointBvh, const vec3d &x)
  {
    std::optional<uint32_t> result;
    abrPointBvh.forEachContaining(
        x, [](const box3d &b, const vec3d &p) { return b.containsHalfOpen(p); },
        [&](uint32_t id) {
          if (!result || id < *result) result = id;
        });
    (void)abrs;
    return result;
  }

  BasisSample reconstructInAbr(const ABRSet &abrs, std::span<const Brick> bricks, uint32_t abrID,
                               const vec3d &x)
  {
    BasisSample accum;
    for (uint32_t brickID : abrs.bricksOf(abrID)) accum = basisContribution(bricks[brickID], x, accum);
    return accum;
  }

  Sample sampleAbrDirect(const ABRSet &abrs, std::span<const Brick> bricks, uint32_t abrID,
                         const vec3d &x, const TransferFunction &tf)
  {
    assert(abrs.abrs[abrID].domain.contains(x));
    return sampleFromBasis(reconstructInAbr(abrs, bricks, abrID, x), tf);
  }

  BasisSample reconstructExtBrick(const BVH &extBvh, std::span<const Brick> bricks, const vec3d &x,
                                  int *numBricks)
  {
    uint32_t local[32];
    int count = 0;
    std::vector<uint32_t> spill;
    extBvh.forEachContaining(
        x, [](const box3d &b, const vec3d &p) { return b.containsOpen(p); },
        [&](uint32_t id) {
          if (count < 32)
            local[count++] = id;
          else
            spill.push_back(id);
        });
    BasisSample accum;
    if (spill.empty()) {
      std::sort(local, local + count);
      for (int i = 0; i < count; ++i) accum = basisContribution(bricks[local[i]], x, accum);
    } else {
      spill.insert(spill.end(), local, local + count);
      std::sort(spill.begin(), spill.end());
      for (uint32_t id : spill) accum = basisContribution(bricks[id], x, accum);
    }
    if (numBricks) *numBricks = count + int(spill.size());
    return accum;
  }

  Sample extBrickPointQuery(const BVH &extBvh, std::span<const Brick> bricks, const vec3d &x,
                            const TransferFunction &tf)
  {
    return sampleFromBasis(reconstructExtBrick(extBvh, bricks, x), tf);
  }

} // ::amrpt
