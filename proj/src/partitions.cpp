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

#include "amrpt/partitions.h"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace amrpt {

  // ------------------------------------------------------------------
  // transfer function
  // ------------------------------------------------------------------

  void TransferFunction::validate() const
  {
    if (!(domain.lo < domain.hi) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi))
      throw std::invalid_argument("domain: expected finite [lo,hi] with lo < hi");
    if (rgba.size() < 2)
      throw std::invalid_argument("rgba: expected at least 2 entries, got " + std::to_string(rgba.size()));
    for (size_t i = 0; i < rgba.size(); ++i) {
      const float c[4] = {rgba[i].r, rgba[i].g, rgba[i].b, rgba[i].a};
      for (int k = 0; k < 4; ++k) {
        if (!(c[k] >= 0.f && c[k] <= 1.f)) {
          std::ostringstream msg;
          msg << "rgba[" << i << "][" << k << "]: component " << c[k] << " outside [0,1]";
          throw std::invalid_argument(msg.str());
        }
      }
    }
    if (!(unitExtinction > 0.f) || !std::isfinite(unitExtinction))
      throw std::invalid_argument("unitExtinction: expected a finite value > 0");
  }

  double TransferFunction::tableCoord(double value) const
  {
    const double last = double(rgba.size() - 1);
    const double u = (value - double(domain.lo)) / (double(domain.hi) - double(domain.lo));
    if (!(u > 0.0)) return 0.0;  // also maps NaN to the first entry
    return std::min(u * last, last);
  }

  namespace {

    // monotone in `frac`, bounded by the two entries
    inline double lerpBounded(double a0, double a1, double frac)
    {
      const double v = a0 + frac * (a1 - a0);
      return std::clamp(v, std::min(a0, a1), std::max(a0, a1));
    }

    inline void segmentOf(double coord, size_t numEntries, int &k, double &frac)
    {
      k = std::min(int(coord), int(numEntries) - 2);
      frac = coord - double(k);
    }

  } // namespace

  double TransferFunction::alphaAt(double value) const
  {
    int k;
    double frac;
    segmentOf(tableCoord(value), rgba.size(), k, frac);
    return lerpBounded(rgba[k].a, rgba[k + 1].a, frac);
  }

  vec3f TransferFunction::colorAt(double value) const
  {
    int k;
    double frac;
    segmentOf(tableCoord(value), rgba.size(), k, frac);
    return {float(lerpBounded(rgba[k].r, rgba[k + 1].r, frac)),
            float(lerpBounded(rgba[k].g, rgba[k + 1].g, frac)),
            float(lerpBounded(rgba[k].b, rgba[k + 1].b, frac))};
  }

  TransferFunction constantTransferFunction(RGBA rgba, float unitExtinction, ValueRange domain)
  {
    TransferFunction tf;
    tf.domain = domain;
    tf.rgba = {rgba, rgba};
    tf.unitExtinction = unitExtinction;
    return tf;
  }

  AlphaRangeMax::AlphaRangeMax(const TransferFunction &tf) : tf(tf)
  {
    const size_t n = tf.rgba.size();
    table.emplace_back(n);
    for (size_t i = 0; i < n; ++i) table[0][i] = tf.rgba[i].a;
    for (size_t span = 2; span <= n; span *= 2) {
      const auto &prev = table.back();
      std::vector<double> level(n - span + 1);
      for (size_t i = 0; i + span <= n; ++i) level[i] = std::max(prev[i], prev[i + span / 2]);
      table.push_back(std::move(level));
    }
  }

  double AlphaRangeMax::entryMax(int first, int last) const
  {
    const unsigned len = unsigned(last - first + 1);
    const int lvl = std::bit_width(len) - 1;
    return std::max(table[lvl][first], table[lvl][last - (1 << lvl) + 1]);
  }

  double AlphaRangeMax::operator()(const ValueRange &r) const
  {
    if (r.empty()) return 0.0;
    const size_t n = tf.rgba.size();
    int kLo, kHi;
    double fLo, fHi;
    segmentOf(tf.tableCoord(r.lo), n, kLo, fLo);
    segmentOf(tf.tableCoord(r.hi), n, kHi, fHi);
    double result = std::max(lerpBounded(tf.rgba[kLo].a, tf.rgba[kLo + 1].a, fLo),
                             lerpBounded(tf.rgba[kHi].a, tf.rgba[kHi + 1].a, fHi));
    // entries kLo+1..kHi lie inside the interval
    if (kHi >= kLo + 1) result = std::max(result, entryMax(kLo + 1, kHi));
    return result;
  }

  double rangeMaxAlpha(const TransferFunction &tf, const ValueRange &r)
  {
    return AlphaRangeMax(tf)(r);
  }

  float classify(const ValueRange &r, const TransferFunction &tf)
  {
    if (r.empty()) return 0.f;
    return tf.extinctionFromAlpha(rangeMaxAlpha(tf, r));
  }

  std::vector<float> classifyRanges(std::span<const ValueRange> ranges, const TransferFunction &tf)
  {
    const AlphaRangeMax rangeMax(tf);
    std::vector<float> majorants(ranges.size());
    for (size_t i = 0; i < ranges.size(); ++i)
      majorants[i] = ranges[i].empty() ? 0.f : tf.extinctionFromAlpha(rangeMax(ranges[i]));
    return majorants;
  }

  void reclassifyAll(ABRSet &abrs, const TransferFunction &tf)
  {
    abrs.majorants = classifyRanges(abrs.ranges(), tf);
    ++abrs.generation;
  }

  void reclassifyAll(BrickPartition &bricks, const TransferFunction &tf)
  {
    bricks.majorants = classifyRanges(bricks.ranges, tf);
    ++bricks.generation;
  }

  void reclassifyAll(MajorantGrid &grid, const TransferFunction &tf)
  {
    grid.majorants = classifyRanges(grid.ranges, tf);
    ++grid.generation;
  }

  // ------------------------------------------------------------------
  // helpers shared by the range projections
  // ------------------------------------------------------------------

  namespace {

    // index range of a brick's cells whose (closed) supports touch `box`;
    // returns false if none
    bool cellsTouching(const Brick &brick, const box3d &box, vec3i &first, vec3i &last)
    {
      const double h = brick.cellWidth();
      for (int a = 0; a < 3; ++a) {
        const double lo = (box.lower[a] - brick.lower[a]) / h - 1.5;
        const double hi = (box.upper[a] - brick.lower[a]) / h + 0.5;
        first[a] = std::max(0, int(std::ceil(lo)));
        last[a] = std::min(brick.size[a] - 1, int(std::floor(hi)));
        if (first[a] > last[a]) return false;
      }
      return true;
    }

    void extendByCells(const Brick &brick, const vec3i &first, const vec3i &last, ValueRange &range)
    {
      for (int iz = first.z; iz <= last.z; ++iz)
        for (int iy = first.y; iy <= last.y; ++iy)
          for (int ix = first.x; ix <= last.x; ++ix) range.extend(brick.value(ix, iy, iz));
    }

  } // namespace

  // ------------------------------------------------------------------
  // ABRs
  // ------------------------------------------------------------------

  std::vector<ValueRange> ABRSet::ranges() const
  {
    std::vector<ValueRange> result(abrs.size());
    for (size_t i = 0; i < abrs.size(); ++i) result[i] = abrs[i].range;
    return result;
  }

  namespace {

    struct ABRBuilder {
      std::span<const Brick> bricks;
      std::vector<box3d> extended;
      ABRSet &out;

      void build(const box3d &region, std::vector<uint32_t> &list)
      {
        if (list.empty()) return;

        std::vector<double> faces[3];
        for (uint32_t id : list) {
          const box3d &e = extended[id];
          for (int a = 0; a < 3; ++a) {
            if (e.lower[a] > region.lower[a] && e.lower[a] < region.upper[a]) faces[a].push_back(e.lower[a]);
            if (e.upper[a] > region.lower[a] && e.upper[a] < region.upper[a]) faces[a].push_back(e.upper[a]);
          }
        }
        int axis = -1;
        for (int a = 0; a < 3; ++a) {
          if (faces[a].empty()) continue;
          if (axis < 0 || region.size()[a] > region.size()[axis]) axis = a;
        }
        if (axis < 0) {
          emitLeaf(region, list);
          return;
        }
        auto &f = faces[axis];
        auto mid = f.begin() + f.size() / 2;
        std::nth_element(f.begin(), mid, f.end());
        const double plane = *mid;

        box3d leftRegion = region, rightRegion = region;
        leftRegion.upper[axis] = plane;
        rightRegion.lower[axis] = plane;
        std::vector<uint32_t> left, right;
        for (uint32_t id : list) {
          if (extended[id].overlaps(leftRegion)) left.push_back(id);
          if (extended[id].overlaps(rightRegion)) right.push_back(id);
        }
        list.clear();
        list.shrink_to_fit();
        build(leftRegion, left);
        build(rightRegion, right);
      }

      void emitLeaf(const box3d &region, std::vector<uint32_t> &list)
      {
        std::sort(list.begin(), list.end());
        ABR abr;
        abr.domain = region;
        abr.brickListBegin = uint32_t(out.brickIDs.size());
        abr.brickListSize = uint32_t(list.size());
        abr.finestLevel = kMaxLevel;
        for (uint32_t id : list) {
          const Brick &brick = bricks[id];
          out.brickIDs.push_back(id);
          abr.finestLevel = std::min(abr.finestLevel, brick.level);
          vec3i first, last;
          if (cellsTouching(brick, region, first, last)) extendByCells(brick, first, last, abr.range);
        }
        out.abrs.push_back(abr);
      }
    };

  } // namespace

  ABRSet buildABRs(std::span<const Brick> bricks)
  {
    ABRSet result;
    if (bricks.empty()) return result;
    ABRBuilder builder{bricks, {}, result};
    box3d region;
    builder.extended.reserve(bricks.size());
    for (const Brick &b : bricks) {
      builder.extended.push_back(b.filterDomain().box);
      region.extend(builder.extended.back());
    }
    std::vector<uint32_t> all(bricks.size());
    for (uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    builder.build(region, all);
    result.majorants.assign(result.abrs.size(), 0.f);
    return result;
  }

  // ------------------------------------------------------------------
  // brick partition
  // ------------------------------------------------------------------

  BrickPartition computeBrickRanges(std::span<const Brick> bricks, const CellSet &)
  {
    BrickPartition result;
    const size_t n = bricks.size();
    result.boxes.resize(n);
    result.ranges.resize(n);
    std::vector<box3d> extended(n);
    for (size_t i = 0; i < n; ++i) {
      result.boxes[i] = bricks[i].bounds();
      extended[i] = bricks[i].filterDomain().box;
    }
    // sweep along x over the extended domains: every cell support lies
    // inside its brick's extended domain, so only touching pairs matter
    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
      return extended[a].lower.x < extended[b].lower.x
          || (extended[a].lower.x == extended[b].lower.x && a < b);
    });
    std::vector<box3d> boxesSorted(n);
    for (size_t k = 0; k < n; ++k) boxesSorted[k] = result.boxes[order[k]];

    for (size_t k = 0; k < n; ++k) {
      const uint32_t src = order[k];
      const box3d &srcExt = extended[src];
      for (size_t j = 0; j < n; ++j) {
        const box3d &dst = boxesSorted[j];
        if (dst.lower.x > srcExt.upper.x) continue;
        if (!srcExt.touches(dst)) continue;
        vec3i first, last;
        if (cellsTouching(bricks[src], dst, first, last))
          extendByCells(bricks[src], first, last, result.ranges[order[j]]);
      }
    }
    result.majorants.assign(n, 0.f);
    return result;
  }

  // ------------------------------------------------------------------
  // uniform majorant grid
  // ------------------------------------------------------------------

  MajorantGrid buildMajorantGrid(const CellSet &cells, const vec3i &dims)
  {
    return buildMajorantGrid(cells, dims, cells.worldBounds);
  }

  MajorantGrid buildMajorantGrid(const CellSet &cells, const vec3i &dims, const box3d &worldBounds)
  {
    if (dims.x <= 0 || dims.y <= 0 || dims.z <= 0) {
      std::ostringstream msg;
      msg << "gridDims: every component must be >= 1, got " << dims;
      throw std::invalid_argument(msg.str());
    }
    if (worldBounds.empty() || worldBounds.volume() <= 0.0)
      throw std::invalid_argument("worldBounds: grid domain must have positive volume");
    MajorantGrid grid;
    grid.dims = dims;
    grid.worldBounds = worldBounds;
    grid.ranges.assign(grid.size(), ValueRange{});
    grid.majorants.assign(grid.size(), 0.f);

    const vec3d size = worldBounds.size();
    for (const Cell &cell : cells.cells) {
      const box3d support = filterSupport(cell).box;
      vec3i first, last;
      bool hit = true;
      for (int a = 0; a < 3 && hit; ++a) {
        const int n = dims[a];
        // estimate, then settle exactly against planeCoord(): macrocell i
        // spans [P(i),P(i+1)] and touching counts
        int lo = int(std::floor((support.lower[a] - worldBounds.lower[a]) / size[a] * n)) - 1;
        int hi = int(std::floor((support.upper[a] - worldBounds.lower[a]) / size[a] * n)) + 1;
        lo = std::clamp(lo, 0, n - 1);
        hi = std::clamp(hi, 0, n - 1);
        while (lo < n - 1 && grid.planeCoord(a, lo + 1) < support.lower[a]) ++lo;
        while (lo > 0 && grid.planeCoord(a, lo) >= support.lower[a]) --lo;
        while (hi > 0 && grid.planeCoord(a, hi) > support.upper[a]) --hi;
        while (hi < n - 1 && grid.planeCoord(a, hi + 1) <= support.upper[a]) ++hi;
        if (grid.planeCoord(a, lo + 1) < support.lower[a] || grid.planeCoord(a, hi) > support.upper[a]
            || lo > hi)
          hit = false;
        first[a] = lo;
        last[a] = hi;
      }
      if (!hit) continue;
      for (int iz = first.z; iz <= last.z; ++iz)
        for (int iy = first.y; iy <= last.y; ++iy)
          for (int ix = first.x; ix <= last.x; ++ix)
            grid.ranges[grid.linearIndex({ix, iy, iz})].extend(cell.scalar);
    }
    return grid;
  }

} // ::amrpt
