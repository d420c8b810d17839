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

#include "amrpt/sampling.h"
#include "amrpt/traversal.h"

#include <memory>

namespace amrpt {

  /*! how often each piece of geometry was (re)built */
  struct BuildCounters {
    uint64_t bricks = 0;
    uint64_t abrs = 0;
    uint64_t brickRanges = 0;
    uint64_t grid = 0;
    uint64_t kdTree = 0;
    uint64_t pointBvhs = 0;
    /*! majorant-culled BVHs; these follow TF changes and are not geometry */
    uint64_t culledBvhs = 0;
    uint64_t reclassifications = 0;

    uint64_t geometryTotal() const { return bricks + abrs + brickRanges + grid + kdTree + pointBvhs; }
  };

  /*! analytic storage of one traversal structure, in bytes */
  struct StructureBytes {
    size_t ranges = 0;
    size_t majorants = 0;
    size_t hierarchy = 0;
    size_t total() const { return ranges + majorants + hierarchy; }
  };

  /*! a loaded dataset with every majorant subdivision and its hierarchies.
      Mutators are not thread safe; const members may be called concurrently
      once prepare() has been called for the methods in use. */
  class Scene {
   public:
    Scene(CellSet cells, const TransferFunction &tf, const vec3i &gridDims = {16, 16, 16});

    const CellSet &cells() const { return cellSet; }
    std::span<const Brick> bricks() const { return brickList; }
    const ABRSet &abrs() const { return abrSet; }
    const BrickPartition &brickPartition() const { return brickPart; }
    const MajorantGrid &grid() const { return majorantGrid; }
    const KdTree &brickKdTree() const { return kdTree; }
    const BVH &abrPointBvh() const { return abrPoints; }
    const BVH &extBrickBvh() const { return extBricks; }
    const TransferFunction &transferFunction() const { return tf; }
    /*! the TF with unitExtinction converted from per normalized length (the
        longest world extent is 1) to per finest-level unit; majorants and
        samples both use it */
    const TransferFunction &mediumTF() const { return worldTF; }
    /*! world units per normalized unit length */
    double worldExtent() const { return extent; }
    uint64_t tfGeneration() const { return tfGen; }
    const BuildCounters &counters() const { return buildCounters; }

    /*! the participating medium; every ray is clipped to it */
    const box3d &mediumBounds() const { return cellSet.worldBounds; }

    /*! reclassifies all three structures; culled BVHs go stale */
    void setTransferFunction(const TransferFunction &newTF);

    /*! rebuilds the grid (and only the grid) at new dims */
    void setGridDims(const vec3i &dims);

    /*! brings the culled BVH of `method` up to date with the current TF */
    void prepare(TraversalMethod method);
    void prepareAll();

    /*! culled BVH used by a BVH method; throws ConfigurationError when the
        method has none or it is stale */
    const BVH &culledBvh(TraversalMethod method) const;

    std::span<const float> majorants(TraversalMethod method) const;

    StructureBytes bytes(TraversalMethod method) const;

    /*! enumerate partitions along `ray` (already clipped or not) */
    template <typename V>
    void traverse(TraversalMethod method, const Ray &ray, const TraversalOptions &opt,
                  V &&visit) const;

    /*! f(x) and its TF mapping. `abrID` is required for ABR_DIRECT. */
    Sample sample(SamplerKind kind, const vec3d &x, std::optional<uint32_t> abrID = {}) const;
    BasisSample reconstruct(SamplerKind kind, const vec3d &x, std::optional<uint32_t> abrID = {}) const;

   private:
    struct CulledBvh {
      BVH bvh;
      uint64_t tfGeneration = ~0ull;
      uint64_t gridGeneration = ~0ull;
    };
    void updateWorldTF();
    CulledBvh &culledSlot(TraversalMethod method);
    const CulledBvh &culledSlot(TraversalMethod method) const;

    CellSet cellSet;
    TransferFunction tf;
    TransferFunction worldTF;
    double extent = 1.0;
    uint64_t tfGen = 0;
    uint64_t gridGen = 0;
    std::vector<Brick> brickList;
    ABRSet abrSet;
    BrickPartition brickPart;
    MajorantGrid majorantGrid;
    KdTree kdTree;
    BVH abrPoints;
    BVH extBricks;
    CulledBvh abrBvh, brickBvh, gridBvh;
    BuildCounters buildCounters;
  };

  template <typename V>
  void Scene::traverse(TraversalMethod method, const Ray &ray, const TraversalOptions &opt,
                       V &&visit) const
  {
    switch (method) {
    case TraversalMethod::GRID_DDA:
      ddaTraverse(majorantGrid, ray, visit);
      return;
    case TraversalMethod::BRICK_KD:
      kdTraverse(kdTree, brickPart.majorants, ray, visit);
      return;
    case TraversalMethod::ABR_BVH:
    case TraversalMethod::BRICK_BVH:
    case TraversalMethod::GRID_BVH:
      bvhTraverse(culledBvh(method), majorants(method), ray, opt, visit);
      return;
    }
  }

} // ::amrpt
