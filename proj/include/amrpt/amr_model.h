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

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amrpt {

  inline constexpr int kMaxLevel = 30;

  /*! one cell-centric AMR cell. `lower` is in finest-level units and must be
      aligned to the level's lattice; the cell is 2^level units wide. */
  struct Cell {
    vec3i lower;
    int level = 0;
    float scalar = 0.f;

    int width() const { return 1 << level; }
    friend bool operator==(const Cell &, const Cell &) = default;
  };

  struct CellSet {
    std::vector<Cell> cells;
    /*! union of all cell bounds, finest-level units; empty for no cells */
    box3d worldBounds;
    int numLevels = 0;

    /*! computes bounds and level count; does not validate */
    static CellSet fromCells(std::vector<Cell> cells);
  };

  /*! thrown when a cell set violates the AMR invariants */
  class InvalidCellSet : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  /*! checks alignment, level bounds and overlap (same-level duplicates as
      well as cross-level containment). The message names the offending
      cell indices. */
  void validateCellSet(const CellSet &cellSet);

  struct FilterDomain {
    box3d box;
  };

  box3d cellBounds(const Cell &cell);

  /*! tent support: cell bounds padded by half a cell width on every side */
  FilterDomain filterSupport(const Cell &cell);

  /*! dense block of same-level cells */
  struct Brick {
    vec3i lower;  // finest-level units
    vec3i size;   // in cells of `level`
    int level = 0;
    std::vector<float> values;  // x fastest

    int cellWidth() const { return 1 << level; }
    size_t numCells() const { return size_t(size.x) * size.y * size.z; }
    size_t linearIndex(int ix, int iy, int iz) const
    {
      return (size_t(iz) * size.y + iy) * size.x + ix;
    }
    float value(int ix, int iy, int iz) const { return values[linearIndex(ix, iy, iz)]; }
    box3d bounds() const;
    /*! bounds padded by half a cell; the union of the cells' tent supports */
    FilterDomain filterDomain() const;
    /*! finest-unit anchor of cell (ix,iy,iz) */
    vec3i cellLower(int ix, int iy, int iz) const
    {
      const int w = cellWidth();
      return {lower.x + ix * w, lower.y + iy * w, lower.z + iz * w};
    }
  };

  /*! partitions every level's cells into dense bricks by recursive median
      splits along the widest lattice axis. Throws InvalidCellSet on
      duplicate same-level cells. */
  std::vector<Brick> buildBricks(const CellSet &cellSet);

  /*! running sums of the normalized tent reconstruction, plus the value
      interval of the contributing cells; value() is clamped to it. */
  struct BasisSample {
    double weightSum = 0.0;
    double weightedValueSum = 0.0;
    float minValue = std::numeric_limits<float>::infinity();
    float maxValue = -std::numeric_limits<float>::infinity();

    /*! normalized field value; 0 (vacuum) when no support contains x */
    double value() const
    {
      if (!(weightSum > 0.0)) return 0.0;
      return std::clamp(weightedValueSum / weightSum, double(minValue), double(maxValue));
    }
  };

  /*! adds the tent-weighted contributions of all cells of `brick` whose open
      support contains x; at most 8 cells contribute */
  BasisSample basisContribution(const Brick &brick, const vec3d &x, BasisSample accum);

  /*! tent weight of a cell at x; zero on and outside the support boundary */
  double tentWeight(const Cell &cell, const vec3d &x);

} // ::amrpt
