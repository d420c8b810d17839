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
#include "amrpt/partitions.h"

#include <optional>
#include <string_view>

namespace amrpt {

  struct Sample {
    double value = 0.0;
    vec3f albedo;
    float extinction = 0.f;
  };

  enum class SamplerKind { ABR_QUERY, ABR_DIRECT, EXT_BRICK_QUERY };

  inline constexpr SamplerKind kAllSamplerKinds[] = {SamplerKind::ABR_QUERY, SamplerKind::ABR_DIRECT,
                                                     SamplerKind::EXT_BRICK_QUERY};

  /*! CLI spelling: abr, abr-direct, ext-brick */
  std::string_view toString(SamplerKind k);
  std::optional<SamplerKind> parseSamplerKind(std::string_view s);

  /*! maps a reconstructed value through the TF; no contributing cell means
      vacuum, which has zero extinction whatever the TF says at 0 */
  Sample sampleFromBasis(const BasisSample &basis, const TransferFunction &tf);

  /*! BVH over ABR domains, used for point location only */
  BVH buildAbrPointBvh(const ABRSet &abrs);

  /*! BVH over extended brick domains; never culled and never traversed by rays */
  BVH buildExtBrickBvh(std::span<const Brick> bricks);

  /*! the ABR whose half-open domain contains x */
  std::optional<uint32_t> abrPointQuery(const ABRSet &abrs, const BVH &abrPointBvh, const vec3d &x);

  /*! tent reconstruction over one ABR's brick list, ascending brick IDs */
  BasisSample reconstructInAbr(const ABRSet &abrs, std::span<const Brick> bricks, uint32_t abrID,
                               const vec3d &x);

  Sample sampleAbrDirect(const ABRSet &abrs, std::span<const Brick> bricks, uint32_t abrID,
                         const vec3d &x, const TransferFunction &tf);

  /*! tent reconstruction over every brick whose open extended domain holds
      x, ascending brick IDs. Optionally reports how many bricks were used. */
  BasisSample reconstructExtBrick(const BVH &extBvh, std::span<const Brick> bricks, const vec3d &x,
                                  int *numBricks = nullptr);

  Sample extBrickPointQuery(const BVH &extBvh, std::span<const Brick> bricks, const vec3d &x,
                            const TransferFunction &tf);

} // ::amrpt
