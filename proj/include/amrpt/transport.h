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

#include "amrpt/scene.h"

#include <array>
#include <bit>
#include <cmath>

namespace amrpt {

  // ------------------------------------------------------------------
  // counters
  // ------------------------------------------------------------------

  /*! histogram over non-negative integers: bin 0 holds value 0, bin k
      holds [2^(k-1), 2^k) */
  struct LogHistogram {
    static constexpr int kNumBins = 40;
    std::array<uint64_t, kNumBins> bins{};

    static int binOf(uint64_t v)
    {
      if (v == 0) return 0;
      return std::min(kNumBins - 1, int(std::bit_width(v)));
    }
    /*! smallest value that falls into bin k */
    static uint64_t binLower(int k) { return k == 0 ? 0 : uint64_t(1) << (k - 1); }
    void add(uint64_t v, uint64_t count = 1) { bins[binOf(v)] += count; }
    uint64_t mass() const
    {
      uint64_t m = 0;
      for (uint64_t b : bins) m += b;
      return m;
    }
    void merge(const LogHistogram &o)
    {
      for (int i = 0; i < kNumBins; ++i) bins[i] += o.bins[i];
    }
    friend bool operator==(const LogHistogram &, const LogHistogram &) = default;
  };

  struct RayStats {
    uint64_t rays = 0;
    uint64_t partitionsTraversed = 0;
    uint64_t volumeSamples = 0;
    uint64_t nullCollisions = 0;
    uint64_t realCollisions = 0;
    LogHistogram partitionsPerRay;
    LogHistogram samplesPerPartition;

    void merge(const RayStats &o);
    double meanPartitionsPerRay() const { return rays ? double(partitionsTraversed) / rays : 0.0; }
    double meanVolumeSamples() const { return rays ? double(volumeSamples) / rays : 0.0; }
    double meanNullCollisions() const { return rays ? double(nullCollisions) / rays : 0.0; }
    friend bool operator==(const RayStats &, const RayStats &) = default;
  };

  // ------------------------------------------------------------------
  // random numbers
  // ------------------------------------------------------------------

  /*! counter-based stream: draw k of bounce b for (seed, pixel, frame) is a
      pure function of those five integers */
  class RngStream {
   public:
    /*! slot for the sub-pixel jitter, disjoint from every path bounce */
    static constexpr uint32_t kCameraBounce = 0xffffffffu;

    RngStream(uint64_t seed, uint64_t pixel, uint64_t frame);
    void setBounce(uint32_t bounce)
    {
      bounceDepth = bounce;
      drawIndex = 0;
    }
    uint32_t bounce() const { return bounceDepth; }
    /*! uniform double in [0,1) with 53 random bits */
    double next();

   private:
    uint64_t key;
    uint32_t bounceDepth = 0;
    uint32_t drawIndex = 0;
  };

  /*! splitmix64 finalizer */
  constexpr uint64_t mix64(uint64_t z)
  {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // ------------------------------------------------------------------
  // tracking
  // ------------------------------------------------------------------

  /*! thrown when a sample's extinction exceeds its partition's majorant */
  class MajorantViolation : public std::logic_error {
   public:
    using std::logic_error::logic_error;
  };

  struct TrackingOptions {
    TraversalOptions traversal;
    /*! multiplies every majorant; values >= 1 keep the estimator unbiased */
    double majorantScale = 1.0;
  };

  struct TrackingEvent {
    enum Kind { Scatter, Escaped } kind = Escaped;
    double t = 0.0;
    Sample sample;
  };

  /*! largest accepted uniform draw before ln(1-xi) */
  inline constexpr double kMaxXi = 1.0 - 0x1p-33;

  /*! delta tracking through the partitions of `method`; the ray is clipped
      to the medium bounds first. Directions need not be unit length. */
  TrackingEvent woodcockTrack(const Scene &scene, TraversalMethod method, SamplerKind sampler,
                              const Ray &ray, RngStream &rng, RayStats &stats,
                              const TrackingOptions &opt = {});

  /*! binary transmittance estimate: 1 if the ray escapes, else 0 */
  double transmittance(const Scene &scene, TraversalMethod method, SamplerKind sampler, const Ray &ray,
                       RngStream &rng, RayStats &stats, const TrackingOptions &opt = {});

  /*! throws ConfigurationError for ABR_DIRECT with a non-ABR traversal */
  void checkCombination(TraversalMethod method, SamplerKind sampler);

  // ------------------------------------------------------------------
  // rendering
  // ------------------------------------------------------------------

  enum class RenderMode { DL, MS };
  std::string_view toString(RenderMode m);
  std::optional<RenderMode> parseRenderMode(std::string_view s);

  struct Camera {
    vec3d position{0.0, 0.0, -10.0};
    vec3d lookAt{0.0, 0.0, 0.0};
    vec3d up{0.0, 1.0, 0.0};
    double fovY = 45.0;  // degrees

    /*! camera looking at the center of `bounds` from a fixed oblique direction */
    static Camera framing(const box3d &bounds, double fovY = 45.0);
    friend bool operator==(const Camera &, const Camera &) = default;
  };

  struct PointLight {
    vec3d position{0.0, 0.0, 0.0};
    vec3f intensity{0.f, 0.f, 0.f};
    friend bool operator==(const PointLight &, const PointLight &) = default;
  };

  struct RenderConfig {
    TraversalMethod traversal = TraversalMethod::GRID_DDA;
    SamplerKind sampler = SamplerKind::EXT_BRICK_QUERY;
    RenderMode mode = RenderMode::DL;
    int spp = 1;
    int maxBounces = 16;
    int rrStart = 3;
    double rrMinSurvival = 0.05;
    double rrMaxSurvival = 0.95;
    uint64_t seed = 0;
    int width = 64;
    int height = 64;
    Camera camera;
    PointLight light;
    vec3f ambient{1.f, 1.f, 1.f};
    bool orderedBvh = false;
    double majorantScale = 1.0;
    /*! macrocell grid resolution of the scene this config renders */
    vec3i gridDims{16, 16, 16};

    TrackingOptions trackingOptions() const
    {
      TrackingOptions t;
      t.traversal.orderedBvh = orderedBvh;
      t.majorantScale = majorantScale;
      return t;
    }
    /*! throws std::invalid_argument naming the offending field */
    void validate() const;
    friend bool operator==(const RenderConfig &, const RenderConfig &) = default;
  };

  /*! primary ray through the pixel at sub-pixel offset (u,v) in [0,1)^2 */
  Ray cameraRay(const Camera &camera, int width, int height, int px, int py, double u, double v);

  /*! uniform direction on the unit sphere */
  vec3d sampleSphere(double u1, double u2);

  vec3d traceDL(const Scene &scene, const RenderConfig &config, const Ray &primary, RngStream &rng,
                RayStats &stats);
  vec3d traceMS(const Scene &scene, const RenderConfig &config, const Ray &primary, RngStream &rng,
                RayStats &stats);

  /*! running per-pixel sums; the mean image is sum / spp */
  struct Accumulator {
    int width = 0, height = 0;
    int spp = 0;
    uint64_t generation = 0;
    std::vector<vec3d> sum;
    std::vector<vec3d> sumSq;

    Accumulator() = default;
    Accumulator(int w, int h) { reset(w, h, 0); }
    void reset(int w, int h, uint64_t newGeneration);
    std::vector<vec3d> mean() const;
    /*! per-pixel, per-channel standard error of the mean */
    std::vector<vec3d> standardError() const;
  };

  struct FrameResult {
    RayStats stats;
    double seconds = 0.0;
    uint64_t cameraSamples = 0;
  };

  /*! adds one sample per pixel; frame index = accumulator.spp. `threads`
      <= 0 uses the hardware concurrency. */
  FrameResult renderFrame(Scene &scene, const RenderConfig &config, Accumulator &accum, int threads = 0);

  /*! config.spp frames into a fresh accumulator */
  FrameResult renderImage(Scene &scene, const RenderConfig &config, Accumulator &accum, int threads = 0);

} // ::amrpt
