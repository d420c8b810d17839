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

#include "amrpt/amr_model.h"

#include <cstdint>
#include <span>
#include <vector>

namespace amrpt {

  /*! closed scalar interval; empty is encoded as (+inf,-inf) */
  struct ValueRange {
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();

    bool empty() const { return lo > hi; }
    void extend(float v)
    {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    void extend(const ValueRange &r)
    {
      lo = std::min(lo, r.lo);
      hi = std::max(hi, r.hi);
    }
    friend bool operator==(const ValueRange &, const ValueRange &) = default;
  };

  struct RGBA {
    float r = 0.f, g = 0.f, b = 0.f, a = 0.f;
    friend bool operator==(const RGBA &, const RGBA &) = default;
  };

  inline constexpr float kDefaultUnitExtinction = 100.f;

  /*! RGBA lookup table, piecewise linear over `domain`; values outside the
      domain clamp to the end entries. Extinction is unitExtinction * alpha. */
  struct TransferFunction {
    ValueRange domain{0.f, 1.f};
    std::vector<RGBA> rgba;
    float unitExtinction = kDefaultUnitExtinction;

    /*! throws std::invalid_argument naming the offending field */
    void validate() const;

    double alphaAt(double value) const;
    vec3f colorAt(double value) const;
    float extinctionAt(double value) const { return extinctionFromAlpha(alphaAt(value)); }
    float extinctionFromAlpha(double alpha) const { return float(double(unitExtinction) * alpha); }

    /*! continuous table coordinate in [0, E-1]; monotone in `value` */
    double tableCoord(double value) const;

    friend bool operator==(const TransferFunction &, const TransferFunction &) = default;
  };

  /*! TF with constant RGBA; convenient for fixtures */
  TransferFunction constantTransferFunction(RGBA rgba, float unitExtinction = kDefaultUnitExtinction,
                                            ValueRange domain = {0.f, 1.f});

  /*! exact maximum of the piecewise-linear alpha curve over a value range;
      a sparse table makes each query O(1) after O(E log E) setup */
  class AlphaRangeMax {
   public:
    explicit AlphaRangeMax(const TransferFunction &tf);
    double operator()(const ValueRange &r) const;

   private:
    double entryMax(int first, int last) const;
    const TransferFunction &tf;
    std::vector<std::vector<double>> table;
  };

  double rangeMaxAlpha(const TransferFunction &tf, const ValueRange &r);

  /*! majorant extinction for a value range; 0 for empty ranges */
  float classify(const ValueRange &r, const TransferFunction &tf);

  /*! pure classification of a whole range array */
  std::vector<float> classifyRanges(std::span<const ValueRange> ranges, const TransferFunction &tf);

  // ------------------------------------------------------------------
  // the three majorant subdivisions
  // ------------------------------------------------------------------

  struct ABR {
    box3d domain;
    uint32_t brickListBegin = 0;
    uint32_t brickListSize = 0;
    ValueRange range;
    int finestLevel = 0;
  };

  struct ABRSet {
    std::vector<ABR> abrs;
    /*! concatenated, per-ABR ascending brick IDs */
    std::vector<uint32_t> brickIDs;
    std::vector<float> majorants;
    uint64_t generation = 0;

    std::span<const uint32_t> bricksOf(size_t abrID) const
    {
      const ABR &abr = abrs[abrID];
      return {brickIDs.data() + abr.brickListBegin, abr.brickListSize};
    }
    std::vector<ValueRange> ranges() const;
    size_t size() const { return abrs.size(); }
  };

  struct BrickPartition {
    std::vector<box3d> boxes;
    std::vector<ValueRange> ranges;
    std::vector<float> majorants;
    uint64_t generation = 0;

    size_t size() const { return boxes.size(); }
  };

  struct MajorantGrid {
    vec3i dims{1, 1, 1};
    box3d worldBounds;
    std::vector<ValueRange> ranges;
    std::vector<float> majorants;
    uint64_t generation = 0;

    size_t size() const { return size_t(dims.x) * dims.y * dims.z; }
    vec3d cellSize() const { return worldBounds.size() / vec3d(dims); }
    size_t linearIndex(const vec3i &c) const
    {
      return (size_t(c.z) * dims.y + c.y) * dims.x + c.x;
    }
    vec3i cellOf(size_t linear) const
    {
      return {int(linear % dims.x), int((linear / dims.x) % dims.y), int(linear / (size_t(dims.x) * dims.y))};
    }
    /*! coordinate of the plane between macrocells i-1 and i along `axis` */
    double planeCoord(int axis, int i) const
    {
      if (i >= dims[axis]) return worldBounds.upper[axis];
      return worldBounds.lower[axis] + worldBounds.size()[axis] * double(i) / double(dims[axis]);
    }
    box3d cellBounds(const vec3i &c) const
    {
      return {{planeCoord(0, c.x), planeCoord(1, c.y), planeCoord(2, c.z)},
              {planeCoord(0, c.x + 1), planeCoord(1, c.y + 1), planeCoord(2, c.z + 1)}};
    }
  };

  /*! kd-tree over the extended brick domains, split at extended-brick faces;
      each leaf becomes an ABR holding the bricks that overlap it */
  ABRSet buildABRs(std::span<const Brick> bricks);

  /*! brick boxes with ranges from every cell support overlapping each box */
  BrickPartition computeBrickRanges(std::span<const Brick> bricks, const CellSet &cells);

  /*! throws std::invalid_argument for zero dims or an empty domain */
  MajorantGrid buildMajorantGrid(const CellSet &cells, const vec3i &dims);
  MajorantGrid buildMajorantGrid(const CellSet &cells, const vec3i &dims, const box3d &worldBounds);

  /*! recompute all majorants from the stored ranges; ranges and geometry stay
      untouched, the generation counter is bumped */
  void reclassifyAll(ABRSet &abrs, const TransferFunction &tf);
  void reclassifyAll(BrickPartition &bricks, const TransferFunction &tf);
  void reclassifyAll(MajorantGrid &grid, const TransferFunction &tf);

} // ::amrpt
