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

#include "amrpt/amr_model.h"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace amrpt {

  namespace {

    struct LatticeKey {
      int level;
      vec3i pos;  // in units of the level's cell width
      friend bool operator==(const LatticeKey &, const LatticeKey &) = default;
    };

    struct LatticeKeyHash {
      size_t operator()(const LatticeKey &k) const
      {
        uint64_t h = uint64_t(uint32_t(k.pos.x)) * 0x9E3779B97F4A7C15ull;
        h ^= uint64_t(uint32_t(k.pos.y)) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= uint64_t(uint32_t(k.pos.z)) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        h ^= uint64_t(k.level) * 0x27D4EB2F165667C5ull;
        return size_t(h);
      }
    };

    // arithmetic shift keeps negative anchors on the right lattice position
    inline vec3i latticePos(const vec3i &lower, int level)
    {
      return {lower.x >> level, lower.y >> level, lower.z >> level};
    }

  } // namespace

  CellSet CellSet::fromCells(std::vector<Cell> cells)
  {
    CellSet result;
    result.cells = std::move(cells);
    int maxLevel = -1;
    for (const auto &c : result.cells) {
      result.worldBounds.extend(cellBounds(c));
      maxLevel = std::max(maxLevel, c.level);
    }
    result.numLevels = maxLevel + 1;
    return result;
  }

  void validateCellSet(const CellSet &cellSet)
  {
    const auto &cells = cellSet.cells;
    std::unordered_map<LatticeKey, size_t, LatticeKeyHash> index;
    index.reserve(cells.size() * 2);
    int maxLevel = 0;
    for (size_t i = 0; i < cells.size(); ++i) {
      const Cell &c = cells[i];
      if (c.level < 0 || c.level > kMaxLevel) {
        std::ostringstream msg;
        msg << "cell " << i << ": level " << c.level << " outside [0," << kMaxLevel << "]";
        throw InvalidCellSet(msg.str());
      }
      const int mask = c.width() - 1;
      if ((c.lower.x & mask) || (c.lower.y & mask) || (c.lower.z & mask)) {
        std::ostringstream msg;
        msg << "cell " << i << ": lower " << c.lower << " not aligned to level " << c.level;
        throw InvalidCellSet(msg.str());
      }
      auto [it, inserted] = index.emplace(LatticeKey{c.level, latticePos(c.lower, c.level)}, i);
      if (!inserted) {
        std::ostringstream msg;
        msg << "cells " << it->second << " and " << i << " overlap (duplicate at level "
            << c.level << ", lower " << c.lower << ")";
        throw InvalidCellSet(msg.str());
      }
      maxLevel = std::max(maxLevel, c.level);
    }
    // a coarser cell must not contain a finer one
    for (size_t i = 0; i < cells.size(); ++i) {
      const Cell &c = cells[i];
      for (int l = c.level + 1; l <= maxLevel; ++l) {
        auto it = index.find(LatticeKey{l, latticePos(c.lower, l)});
        if (it != index.end()) {
          std::ostringstream msg;
          msg << "cells " << it->second << " and " << i << " overlap (level " << l
              << " cell contains level " << c.level << " cell)";
          throw InvalidCellSet(msg.str());
        }
      }
    }
  }

  box3d cellBounds(const Cell &cell)
  {
    const vec3d lo(cell.lower);
    return {lo, lo + vec3d(double(cell.width()))};
  }

  FilterDomain filterSupport(const Cell &cell)
  {
    return {cellBounds(cell).grownBy(0.5 * cell.width())};
  }

  box3d Brick::bounds() const
  {
    const vec3d lo(lower);
    return {lo, lo + vec3d(size) * double(cellWidth())};
  }

  FilterDomain Brick::filterDomain() const
  {
    return {bounds().grownBy(0.5 * cellWidth())};
  }

  namespace {

    struct BrickBuilder {
      const CellSet &cellSet;
      int level;
      std::vector<Brick> &out;

      // `ids` index into cellSet.cells; positions are lattice coordinates
      void split(std::vector<size_t> &ids)
      {
        box3i lattice;
        for (size_t id : ids) lattice.extend(latticePos(cellSet.cells[id].lower, level));
        const vec3i extent = lattice.size() + vec3i(1);
        const size_t volume = size_t(extent.x) * extent.y * extent.z;
        if (volume == ids.size()) {
          emit(ids, lattice.lower, extent);
          return;
        }
        // widest axis; ties go to the later axis
        int axis = 0;
        for (int a = 1; a < 3; ++a)
          if (extent[a] >= extent[axis]) axis = a;

        std::vector<int> coords(ids.size());
        for (size_t i = 0; i < ids.size(); ++i)
          coords[i] = latticePos(cellSet.cells[ids[i]].lower, level)[axis];
        auto mid = coords.begin() + coords.size() / 2;
        std::nth_element(coords.begin(), mid, coords.end());
        int plane = *mid;
        if (plane <= lattice.lower[axis]) plane = lattice.lower[axis] + 1;

        std::vector<size_t> left, right;
        left.reserve(ids.size());
        right.reserve(ids.size());
        for (size_t id : ids) {
          if (latticePos(cellSet.cells[id].lower, level)[axis] < plane)
            left.push_back(id);
          else
            right.push_back(id);
        }
        ids.clear();
        ids.shrink_to_fit();
        split(left);
        split(right);
      }

      void emit(const std::vector<size_t> &ids, const vec3i &latticeLower, const vec3i &extent)
      {
        Brick brick;
        brick.level = level;
        brick.lower = latticeLower * (1 << level);
        brick.size = extent;
        brick.values.assign(brick.numCells(), 0.f);
        for (size_t id : ids) {
          const Cell &c = cellSet.cells[id];
          const vec3i p = latticePos(c.lower, level) - latticeLower;
          brick.values[brick.linearIndex(p.x, p.y, p.z)] = c.scalar;
        }
        out.push_back(std::move(brick));
      }
    };

  } // namespace

  std::vector<Brick> buildBricks(const CellSet &cellSet)
  {
    std::vector<std::vector<size_t>> perLevel;
    std::unordered_map<LatticeKey, size_t, LatticeKeyHash> seen;
    seen.reserve(cellSet.cells.size() * 2);
    for (size_t i = 0; i < cellSet.cells.size(); ++i) {
      const Cell &c = cellSet.cells[i];
      if (c.level < 0 || c.level > kMaxLevel)
        throw InvalidCellSet("cell " + std::to_string(i) + ": invalid level");
      auto [it, inserted] = seen.emplace(LatticeKey{c.level, latticePos(c.lower, c.level)}, i);
      if (!inserted) {
        std::ostringstream msg;
        msg << "cells " << it->second << " and " << i << " overlap at level " << c.level;
        throw InvalidCellSet(msg.str());
      }
      if (size_t(c.level) >= perLevel.size()) perLevel.resize(c.level + 1);
      perLevel[c.level].push_back(i);
    }
    std::vector<Brick> bricks;
    for (int level = 0; level < int(perLevel.size()); ++level) {
      if (perLevel[level].empty()) continue;
      BrickBuilder builder{cellSet, level, bricks};
      builder.split(perLevel[level]);
    }
    return bricks;
  }

  BasisSample basisContribution(const Brick &brick, const vec3d &x, BasisSample accum)
  {
    const double h = brick.cellWidth();
    const double invH = 1.0 / h;
    int first[3];
    double w[3][2];
    int count[3];
    for (int a = 0; a < 3; ++a) {
      // local coordinate in cell units, relative to the first cell center
      const double u = (x[a] - brick.lower[a]) * invH - 0.5;
      const int i0 = int(std::floor(u));
      first[a] = i0;
      count[a] = 0;
      for (int k = 0; k < 2; ++k) {
        const int i = i0 + k;
        double wk = 0.0;
        if (i >= 0 && i < brick.size[a]) wk = std::max(0.0, 1.0 - std::abs(u - i));
        w[a][k] = wk;
        if (wk > 0.0) ++count[a];
      }
      if (count[a] == 0) return accum;
    }
    for (int kz = 0; kz < 2; ++kz) {
      if (w[2][kz] == 0.0) continue;
      for (int ky = 0; ky < 2; ++ky) {
        if (w[1][ky] == 0.0) continue;
        for (int kx = 0; kx < 2; ++kx) {
          if (w[0][kx] == 0.0) continue;
          const double weight = w[0][kx] * w[1][ky] * w[2][kz];
          const float v = brick.value(first[0] + kx, first[1] + ky, first[2] + kz);
          accum.weightSum += weight;
          accum.weightedValueSum += weight * v;
          accum.minValue = std::min(accum.minValue, v);
          accum.maxValue = std::max(accum.maxValue, v);
        }
      }
    }
    return accum;
  }

  double tentWeight(const Cell &cell, const vec3d &x)
  {
    const double h = cell.width();
    const vec3d c = cellBounds(cell).center();
    double w = 1.0;
    for (int a = 0; a < 3; ++a) w *= std::max(0.0, 1.0 - std::abs(x[a] - c[a]) / h);
    return w;
  }

} // ::amrpt
