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

#include "fixtures.h"

#include <doctest.h>

using namespace amrpt;
using namespace amrpt::testing;

namespace {

  std::vector<box3d> gridBoxes(const MajorantGrid &g)
  {
    std::vector<box3d> boxes;
    for (size_t i = 0; i < g.size(); ++i) boxes.push_back(g.cellBounds(g.cellOf(i)));
    return boxes;
  }

  template <typename Traverse>
  std::vector<Interval> collect(Traverse &&traverse)
  {
    std::vector<Interval> out;
    traverse([&](const PartitionHit &h) {
      out.push_back({h.partID, h.t0, h.t1});
      return Visit::Continue;
    });
    return out;
  }

  void checkSame(const std::vector<Interval> &got, const std::vector<Interval> &expected, double tol = 0.0)
  {
    REQUIRE(got.size() == expected.size());
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == expected[i].id);
      CHECK(std::abs(got[i].t0 - expected[i].t0) <= tol);
      CHECK(std::abs(got[i].t1 - expected[i].t1) <= tol);
    }
  }

  /*! rays that exercise axis-parallel and plane-grazing cases as well */
  Ray probeRay(Random &rng, const box3d &world, int i)
  {
    Ray r = rng.ray(world, 0.25 * length(world.size()));
    const int kind = i % 5;
    if (kind == 1) r.direction[rng.integer(0, 2)] = 0.0;
    if (kind == 2) {
      const int keep = rng.integer(0, 2);
      for (int a = 0; a < 3; ++a)
        if (a != keep) r.direction[a] = 0.0;
      if (r.direction[keep] == 0.0) r.direction[keep] = 1.0;
    }
    if (kind == 3) r.origin[rng.integer(0, 2)] = std::round(r.origin[0]);
    if (kind == 4) {
      r.tmin = rng.uniform(0.0, 2.0);
      r.tmax = r.tmin + rng.uniform(0.0, length(world.size()));
    }
    if (length(r.direction) == 0.0) r.direction = {1.0, 0.0, 0.0};
    r.direction = normalize(r.direction);
    return r;
  }

  CellSet shellCells(int rootCells = 4)
  {
    SyntheticSpec spec = shellsSpec();
    spec.rootCells = rootCells;
    return generate(spec);
  }

} // namespace

TEST_CASE("method names round-trip")
{
  for (TraversalMethod m : kAllTraversalMethods) CHECK((parseTraversalMethod(toString(m)) == m));
  CHECK((parseTraversalMethod("abr") == TraversalMethod::ABR_BVH));
  CHECK((parseTraversalMethod("grid-dda") == TraversalMethod::GRID_DDA));
  CHECK_FALSE(parseTraversalMethod("octree").has_value());
}

TEST_CASE("DDA examples")
{
  MajorantGrid g = buildMajorantGrid(homogeneousCells(4), {4, 1, 1});
  reclassifyAll(g, homogeneousTF(4));
  SUBCASE("axis ray visits every macrocell in order")
  {
    const auto hits = collect([&](auto v) { ddaTraverse(g, Ray{{-1, 0.5, 0.5}, {1, 0, 0}, 0, 100}, v); });
    REQUIRE(hits.size() == 4);
    for (uint32_t i = 0; i < 4; ++i) {
      CHECK(hits[i].id == i);
      CHECK(hits[i].t0 == 1.0 + i);
      CHECK(hits[i].t1 == 2.0 + i);
    }
  }
  SUBCASE("negative direction")
  {
    const auto hits = collect([&](auto v) { ddaTraverse(g, Ray{{3.5, 0.5, 0.5}, {-1, 0, 0}, 0, 100}, v); });
    REQUIRE(hits.size() == 4);
    CHECK(hits[0].id == 3);
    CHECK(hits[0].t0 == 0.0);
    CHECK(hits[0].t1 == 0.5);
    CHECK(hits[3].id == 0);
    CHECK(hits[3].t1 == 3.5);
  }
  SUBCASE("miss and stop")
  {
    CHECK(collect([&](auto v) { ddaTraverse(g, Ray{{-1, 2, 0.5}, {1, 0, 0}, 0, 100}, v); }).empty());
    int n = 0;
    ddaTraverse(g, Ray{{-1, 0.5, 0.5}, {1, 0, 0}, 0, 100}, [&](const PartitionHit &) {
      ++n;
      return Visit::Stop;
    });
    CHECK(n == 1);
  }
  SUBCASE("empty macrocells are visited with majorant 0")
  {
    const CellSet one = makeCells({Cell{{0, 0, 0}, 0, 1.f}});
    MajorantGrid e = buildMajorantGrid(one, {4, 1, 1}, box3d{vec3d(0.0), vec3d(8.0, 1.0, 1.0)});
    reclassifyAll(e, homogeneousTF(1));
    std::vector<float> majorants;
    ddaTraverse(e, Ray{{-1, 0.5, 0.5}, {1, 0, 0}, 0, 100}, [&](const PartitionHit &h) {
      majorants.push_back(h.majorant);
      return Visit::Continue;
    });
    REQUIRE(majorants.size() == 4);
    CHECK(majorants[0] > 0.f);
    CHECK(majorants[3] == 0.f);
  }
}

TEST_CASE("DDA matches brute-force slab crossings")
{
  const CellSet cells = shellCells();
  Random rng(31);
  for (const vec3i dims : {vec3i(1, 1, 1), vec3i(3, 5, 7), vec3i(16, 16, 16), vec3i(7, 1, 2)}) {
    const MajorantGrid g = buildMajorantGrid(cells, dims);
    const auto boxes = gridBoxes(g);
    for (int i = 0; i < 400; ++i) {
      const Ray ray = probeRay(rng, g.worldBounds, i);
      const auto got = collect([&](auto v) { ddaTraverse(g, ray, v); });
      checkSame(got, oracleCrossings(boxes, ray), 1e-9);
    }
  }
}

TEST_CASE("BVH build examples")
{
  const std::vector<box3d> boxes{{vec3d(0.0), vec3d(1.0)}, {vec3d(1.0, 0, 0), vec3d(2.0, 1, 1)},
                                 {vec3d(2.0, 0, 0), vec3d(3.0, 1, 1)}};
  CHECK(BVH::build(boxes, std::vector<float>{0.f, 0.f, 0.f}).empty());
  {
    const BVH one = BVH::build(std::span(boxes).first(1));
    CHECK(one.numPrims() == 1);
    CHECK(one.numLeaves() == 1);
  }
  {
    const BVH culled = BVH::build(boxes, std::vector<float>{1.f, 0.f, 2.f});
    CHECK(culled.numPrims() == 2);
    const auto hits = collect([&](auto v) {
      bvhTraverse(culled, std::vector<float>{1.f, 0.f, 2.f}, Ray{{-1, .5, .5}, {1, 0, 0}, 0, 10}, {}, v);
    });
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].id == 0);
    CHECK(hits[1].id == 2);
  }
  CHECK_THROWS_AS(BVH::build(boxes, std::vector<float>{1.f}), std::invalid_argument);

  Random rng(32);
  std::vector<box3d> many;
  std::vector<float> majorants;
  for (int i = 0; i < 3000; ++i) {
    const vec3d p = rng.point({vec3d(0.0), vec3d(100.0)});
    many.push_back({p, p + vec3d(rng.uniform(0.1, 3.0))});
    majorants.push_back(rng.uniform() < 0.3 ? 0.f : 1.f);
  }
  const BVH bvh = BVH::build(many, majorants);
  CHECK(bvh.numPrims() == size_t(std::count(majorants.begin(), majorants.end(), 1.f)));
  std::vector<int> seen(many.size(), 0);
  for (const auto &node : bvh.getNodes()) {
    CHECK(node.count <= BVH::kMaxLeafSize);
    for (uint32_t i = 0; i < node.count; ++i) {
      const uint32_t prim = bvh.leafPrim(node.offset + i);
      ++seen[prim];
      CHECK(node.bounds.contains(many[prim].lower));
      CHECK(node.bounds.contains(many[prim].upper));
    }
  }
  for (size_t i = 0; i < many.size(); ++i) CHECK(seen[i] == (majorants[i] > 0.f ? 1 : 0));
}

TEST_CASE("kd, restart and ordered BVH agree with brute force on brick boxes")
{
  const CellSet cells = shellCells(8);
  TransferFunction tf = rampTF({-1.f, 1.f}, 20.f);
  tf.rgba.insert(tf.rgba.begin(), 2, tf.rgba.front());
  Scene scene(cells, tf);
  scene.prepareAll();
  const auto &part = scene.brickPartition();
  std::vector<box3d> nonzero;
  std::vector<uint32_t> ids;
  for (uint32_t i = 0; i < part.size(); ++i)
    if (part.majorants[i] > 0.f) {
      nonzero.push_back(part.boxes[i]);
      ids.push_back(i);
    }
  REQUIRE(nonzero.size() < part.size());
  Random rng(33);
  for (int i = 0; i < 1000; ++i) {
    const Ray ray = probeRay(rng, scene.mediumBounds(), i);
    checkSame(collect([&](auto v) { kdTraverse(scene.brickKdTree(), part.majorants, ray, v); }),
              oracleCrossings(part.boxes, ray), 1e-9);

    auto culled = oracleCrossings(nonzero, ray);
    for (auto &c : culled) c.id = ids[c.id];
    const BVH &bvh = scene.culledBvh(TraversalMethod::BRICK_BVH);
    checkSame(collect([&](auto v) { bvhTraverse(bvh, part.majorants, ray, {}, v); }), culled, 1e-9);
    checkSame(collect([&](auto v) { bvhTraverse(bvh, part.majorants, ray, {true, 0.0}, v); }), culled, 1e-9);
  }
}

TEST_CASE("kd traversal on overlapping extended domains reports each box once")
{
  std::vector<box3d> boxes;
  for (const Brick &b : buildBricks(shellCells())) boxes.push_back(b.filterDomain().box);
  const KdTree tree = KdTree::build(boxes);
  CHECK(tree.depth() < KdTree::kStackSize);
  const std::vector<float> ones(boxes.size(), 1.f);
  Random rng(34);
  for (int i = 0; i < 500; ++i) {
    const Ray ray = probeRay(rng, tree.bounds(), i);
    auto got = collect([&](auto v) { kdTraverse(tree, ones, ray, v); });
    for (size_t k = 1; k < got.size(); ++k) CHECK(got[k - 1].t0 <= got[k].t0);
    std::sort(got.begin(), got.end(), [](auto &a, auto &b) { return a.t0 < b.t0 || (a.t0 == b.t0 && a.id < b.id); });
    checkSame(got, oracleCrossings(boxes, ray), 1e-9);
  }
}

TEST_CASE("restart traversal with an epsilon still tiles the ray")
{
  Scene scene(shellCells(), rampTF({-1.f, 1.f}, 20.f));
  scene.prepareAll();
  Random rng(35);
  for (TraversalMethod m : {TraversalMethod::ABR_BVH, TraversalMethod::BRICK_BVH, TraversalMethod::GRID_BVH})
    for (int i = 0; i < 300; ++i) {
      const Ray ray = probeRay(rng, scene.mediumBounds(), i);
      const auto exact = collect([&](auto v) { scene.traverse(m, ray, {}, v); });
      const auto eps = collect([&](auto v) { scene.traverse(m, ray, {false, std::ldexp(1.0, -16)}, v); });
      for (size_t k = 1; k < eps.size(); ++k) CHECK(eps[k].t0 >= eps[k - 1].t1 - 1e-12);
      // an epsilon can only drop slivers thinner than itself
      CHECK(eps.size() <= exact.size());
      for (const auto &h : exact) {
        const bool found = std::any_of(eps.begin(), eps.end(), [&](auto &e) { return e.id == h.id; });
        if (!found) CHECK(h.t1 - h.t0 <= std::ldexp(1.0, -15));
      }
    }
}

TEST_CASE("every method tiles the ray and covers all positive extinction")
{
  const CellSet cells = shellCells();
  Random rng(36);
  Scene scene(cells, rng.tf({-1.f, 1.f}, 10, 40.f), {6, 5, 4});
  for (int trial = 0; trial < 3; ++trial) {
    scene.setTransferFunction(rng.tf({-1.f, 1.f}, 10, 40.f));
    scene.prepareAll();
    for (TraversalMethod m : kAllTraversalMethods)
      for (bool ordered : {false, true}) {
        const auto majorants = scene.majorants(m);
        for (int i = 0; i < 150; ++i) {
          Ray ray = probeRay(rng, scene.mediumBounds(), i);
          double m0 = ray.tmin, m1 = ray.tmax;
          if (!clipToBox(ray.origin, ray.direction, scene.mediumBounds(), m0, m1)) continue;
          ray.tmin = m0;
          ray.tmax = m1;
          std::vector<PartitionHit> hits;
          scene.traverse(m, ray, {ordered, 0.0}, [&](const PartitionHit &h) {
            hits.push_back(h);
            return Visit::Continue;
          });
          for (size_t k = 0; k < hits.size(); ++k) {
            CHECK(hits[k].t0 < hits[k].t1);
            CHECK(hits[k].t0 >= ray.tmin);
            CHECK(hits[k].t1 <= ray.tmax);
            CHECK(hits[k].majorant == majorants[hits[k].partID]);
            if (k) CHECK(hits[k].t0 >= hits[k - 1].t1 - 1e-9);
          }
          if (m == TraversalMethod::GRID_DDA && !hits.empty()) {
            CHECK(hits.front().t0 == doctest::Approx(ray.tmin));
            CHECK(hits.back().t1 == doctest::Approx(ray.tmax));
          }
          for (int s = 0; s < 40; ++s) {
            const double t = rng.uniform(ray.tmin, ray.tmax);
            const float mu = scene.sample(SamplerKind::EXT_BRICK_QUERY, ray.at(t)).extinction;
            if (mu <= 0.f) continue;
            const auto it = std::find_if(hits.begin(), hits.end(),
                                         [&](const PartitionHit &h) { return h.t0 <= t && t <= h.t1; });
            REQUIRE(it != hits.end());
            CHECK(mu <= it->majorant);
          }
        }
      }
  }
}

TEST_CASE("culled BVHs go stale on TF change and on grid resize")
{
  Scene scene(shellCells(), rampTF({-1.f, 1.f}, 20.f));
  CHECK_THROWS_AS(scene.culledBvh(TraversalMethod::ABR_BVH), ConfigurationError);
  CHECK_THROWS_AS(scene.culledBvh(TraversalMethod::GRID_DDA), ConfigurationError);
  CHECK_THROWS_AS(scene.culledBvh(TraversalMethod::BRICK_KD), ConfigurationError);
  scene.prepareAll();
  CHECK_NOTHROW(scene.culledBvh(TraversalMethod::ABR_BVH));
  const BuildCounters before = scene.counters();

  scene.setTransferFunction(rampTF({-1.f, 1.f}, 30.f));
  CHECK_THROWS_AS(scene.culledBvh(TraversalMethod::BRICK_BVH), ConfigurationError);
  const Ray ray{{-1, 1, 1}, {1, 0, 0}, 0, 100};
  CHECK_THROWS_AS(scene.traverse(TraversalMethod::GRID_BVH, ray, {}, [](const PartitionHit &) { return Visit::Continue; }),
                  ConfigurationError);
  scene.prepareAll();
  CHECK(scene.counters().geometryTotal() == before.geometryTotal());
  CHECK(scene.counters().reclassifications > before.reclassifications);

  scene.setGridDims({5, 5, 5});
  CHECK(scene.grid().dims == vec3i(5, 5, 5));
  CHECK(scene.counters().grid == before.grid + 1);
  CHECK(scene.counters().kdTree == before.kdTree);
  CHECK_NOTHROW(scene.culledBvh(TraversalMethod::ABR_BVH));
  CHECK_THROWS_AS(scene.culledBvh(TraversalMethod::GRID_BVH), ConfigurationError);
  scene.prepare(TraversalMethod::GRID_BVH);
  CHECK(scene.culledBvh(TraversalMethod::GRID_BVH).numInputPrims() == 125);
}

TEST_CASE("structure sizes are reported")
{
  Scene scene(shellCells(), rampTF({-1.f, 1.f}, 20.f), {8, 8, 8});
  scene.prepareAll();
  for (TraversalMethod m : kAllTraversalMethods) CHECK(scene.bytes(m).total() > 0);
  CHECK(scene.bytes(TraversalMethod::GRID_DDA).majorants == 512 * sizeof(float));
  CHECK(scene.bytes(TraversalMethod::GRID_DDA).hierarchy == 0);
}
