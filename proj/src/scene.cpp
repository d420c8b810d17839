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

#include "amrpt/scene.h"

#include <string>

namespace amrpt {

  namespace {
    std::vector<box3d> gridBoxes(const MajorantGrid &grid)
    {
      std::vector<box3d> boxes(grid.size());
      for (size_t i = 0; i < boxes.size(); ++i) boxes[i] = grid.cellBounds(grid.cellOf(i));
      return boxes;
    }

    std::vector<box3d> abrBoxes(const ABRSet &abrs)
    {
      std::vector<box3d> boxes(abrs.size());
      for (size_t i = 0; i < boxes.size(); ++i) boxes[i] = abrs.abrs[i].domain;
      return boxes;
    }
  } // namespace

  Scene::Scene(CellSet cells, const TransferFunction &initialTF, const vec3i &gridDims)
      : cellSet(std::move(cells)), tf(initialTF)
  {
    tf.validate();
    if (cellSet.cells.empty()) throw InvalidCellSet("cells: a scene needs at least one cell");
    extent = reduceMax(cellSet.worldBounds.size());
    updateWorldTF();
    brickList = buildBricks(cellSet);
    ++buildCounters.bricks;
    abrSet = buildABRs(brickList);
    ++buildCounters.abrs;
    brickPart = computeBrickRanges(brickList, cellSet);
    ++buildCounters.brickRanges;
    majorantGrid = buildMajorantGrid(cellSet, gridDims);
    ++buildCounters.grid;
    kdTree = KdTree::build(brickPart.boxes);
    ++buildCounters.kdTree;
    abrPoints = buildAbrPointBvh(abrSet);
    extBricks = buildExtBrickBvh(brickList);
    buildCounters.pointBvhs += 2;
    reclassifyAll(abrSet, worldTF);
    reclassifyAll(brickPart, worldTF);
    reclassifyAll(majorantGrid, worldTF);
    ++buildCounters.reclassifications;
  }

  void Scene::updateWorldTF()
  {
    worldTF = tf;
    worldTF.unitExtinction = float(double(tf.unitExtinction) / extent);
  }

  void Scene::setTransferFunction(const TransferFunction &newTF)
  {
    newTF.validate();
    tf = newTF;
    updateWorldTF();
    ++tfGen;
    reclassifyAll(abrSet, worldTF);
    reclassifyAll(brickPart, worldTF);
    reclassifyAll(majorantGrid, worldTF);
    ++buildCounters.reclassifications;
  }

  void Scene::setGridDims(const vec3i &dims)
  {
    MajorantGrid grid = buildMajorantGrid(cellSet, dims);
    reclassifyAll(grid, worldTF);
    majorantGrid = std::move(grid);
    ++buildCounters.grid;
    ++gridGen;
  }

  Scene::CulledBvh &Scene::culledSlot(TraversalMethod method)
  {
    return const_cast<CulledBvh &>(std::as_const(*this).culledSlot(method));
  }

  const Scene::CulledBvh &Scene::culledSlot(TraversalMethod method) const
  {
    switch (method) {
    case TraversalMethod::ABR_BVH: return abrBvh;
    case TraversalMethod::BRICK_BVH: return brickBvh;
    case TraversalMethod::GRID_BVH: return gridBvh;
    default: break;
    }
    throw ConfigurationError("traversal method '" + std::string(toString(method))
                             + "' does not use a BVH");
  }

  void Scene::prepare(TraversalMethod method)
  {
    if (method == TraversalMethod::GRID_DDA || method == TraversalMethod::BRICK_KD) return;
    CulledBvh &slot = culledSlot(method);
    const bool gridDependent = method == TraversalMethod::GRID_BVH;
    if (slot.tfGeneration == tfGen && (!gridDependent || slot.gridGeneration == gridGen)) return;
    switch (method) {
    case TraversalMethod::ABR_BVH: slot.bvh = BVH::build(abrBoxes(abrSet), abrSet.majorants); break;
    case TraversalMethod::BRICK_BVH: slot.bvh = BVH::build(brickPart.boxes, brickPart.majorants); break;
    default: slot.bvh = BVH::build(gridBoxes(majorantGrid), majorantGrid.majorants); break;
    }
    slot.tfGeneration = tfGen;
    slot.gridGeneration = gridGen;
    ++buildCounters.culledBvhs;
  }

  void Scene::prepareAll()
  {
    for (TraversalMethod m : kAllTraversalMethods) prepare(m);
  }

  const BVH &Scene::culledBvh(TraversalMethod method) const
  {
    const CulledBvh &slot = culledSlot(method);
    const bool gridDependent = method == TraversalMethod::GRID_BVH;
    if (slot.tfGeneration != tfGen || (gridDependent && slot.gridGeneration != gridGen))
      throw ConfigurationError("traversal method '" + std::string(toString(method))
                               + "': culled BVH not built for the current transfer function");
    return slot.bvh;
  }

  std::span<const float> Scene::majorants(TraversalMethod method) const
  {
    switch (method) {
    case TraversalMethod::ABR_BVH: return abrSet.majorants;
    case TraversalMethod::BRICK_KD:
    case TraversalMethod::BRICK_BVH: return brickPart.majorants;
    case TraversalMethod::GRID_DDA:
    case TraversalMethod::GRID_BVH: return majorantGrid.majorants;
    }
    return {};
  }

  StructureBytes Scene::bytes(TraversalMethod method) const
  {
    StructureBytes b;
    switch (method) {
    case TraversalMethod::ABR_BVH:
      b.ranges = abrSet.abrs.size() * sizeof(ABR) + abrSet.brickIDs.size() * sizeof(uint32_t);
      b.majorants = abrSet.majorants.size() * sizeof(float);
      b.hierarchy = abrBvh.bvh.bytes();
      break;
    case TraversalMethod::BRICK_KD:
    case TraversalMethod::BRICK_BVH:
      b.ranges = brickPart.ranges.size() * sizeof(ValueRange);
      b.majorants = brickPart.majorants.size() * sizeof(float);
      b.hierarchy = method == TraversalMethod::BRICK_KD ? kdTree.bytes() : brickBvh.bvh.bytes();
      break;
    case TraversalMethod::GRID_DDA:
    case TraversalMethod::GRID_BVH:
      b.ranges = majorantGrid.ranges.size() * sizeof(ValueRange);
      b.majorants = majorantGrid.majorants.size() * sizeof(float);
      b.hierarchy = method == TraversalMethod::GRID_BVH ? gridBvh.bvh.bytes() : 0;
      break;
    }
    return b;
  }

  BasisSample Scene::reconstruct(SamplerKind kind, const vec3d &x, std::optional<uint32_t> abrID) const
  {
    switch (kind) {
    case SamplerKind::ABR_DIRECT:
      if (!abrID) throw ConfigurationError("sampler 'abr-direct' needs the current ABR; use traversal 'abr'");
      return reconstructInAbr(abrSet, brickList, *abrID, x);
    case SamplerKind::ABR_QUERY: {
      const auto id = abrPointQuery(abrSet, abrPoints, x);
      if (!id) return {};
      return reconstructInAbr(abrSet, brickList, *id, x);
    }
    case SamplerKind::EXT_BRICK_QUERY:
      return reconstructExtBrick(extBricks, brickList, x);
    }
    return {};
  }

  Sample Scene::sample(SamplerKind kind, const vec3d &x, std::optional<uint32_t> abrID) const
  {
    return sampleFromBasis(reconstruct(kind, x, abrID), worldTF);
  }

} // ::amrpt
