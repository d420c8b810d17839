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

#include "amrpt/image.h"
#include "amrpt/transport.h"

#include <string>

namespace amrpt {

  struct BenchCombo {
    TraversalMethod method;
    SamplerKind sampler;
    RenderMode mode;
  };

  struct BenchReport {
    BenchCombo combo;
    double raysPerSecond = 0.0;  // camera samples per second
    double seconds = 0.0;
    uint64_t cameraSamples = 0;
    RayStats stats;
    StructureBytes bytes;
  };

  struct SkippedCombo {
    BenchCombo combo;
    std::string reason;
  };

  struct MatrixResult {
    std::vector<BenchReport> reports;
    std::vector<SkippedCombo> skipped;
  };

  /*! why a (method, sampler) pair is not benchmarked; empty if it is. The
      ABR traversal is measured with its direct brick-list sampler; the
      other traversals with both point-query samplers. */
  std::string matrixSkipReason(TraversalMethod method, SamplerKind sampler);

  /*! renders `base` (its spp, size, camera, seed) once per combination in
      methods x samplers x modes, sequentially */
  MatrixResult runMatrix(Scene &scene, const RenderConfig &base, std::span<const TraversalMethod> methods,
                         std::span<const SamplerKind> samplers, std::span<const RenderMode> modes,
                         int threads = 0);

  /*! deterministic columns only (counters, means, bytes); bit-identical for
      identical inputs */
  std::string matrixCsv(const MatrixResult &result);
  /*! method, sampler, mode, seconds, cameraSamples, raysPerSecond */
  std::string matrixTimingCsv(const MatrixResult &result);
  /*! per-combination log-binned histograms as JSON */
  std::string matrixHistogramsJson(const MatrixResult &result);

  struct SweepPoint {
    vec3i dims;
    double raysPerSecond = 0.0;
    double seconds = 0.0;
    size_t majorantEntries = 0;
    RayStats stats;
  };

  /*! one fixed-spp render per grid resolution, in input order; the scene's
      grid is left at the last dims */
  std::vector<SweepPoint> gridSweep(Scene &scene, const RenderConfig &config, std::span<const vec3i> dims,
                                    int threads = 0, int repeats = 1);
  std::string sweepCsv(const std::vector<SweepPoint> &points);
  /*! throughput against macrocells per axis, log2 x axis */
  std::string sweepSvg(const std::vector<SweepPoint> &points, const std::string &title);

  struct QuadratureResult {
    double transmittance = 1.0;
    double opticalDepth = 0.0;
    /*! |T(step) - T(step/2)| */
    double refinementDelta = 0.0;
    bool converged() const { return refinementDelta < 1e-4; }
  };

  /*! composite midpoint rule for the optical depth along the ray clipped to
      the medium, evaluated at `step` and `step/2`; the finer one is returned */
  QuadratureResult quadratureTransmittance(const Scene &scene, SamplerKind sampler, const Ray &ray, double step);

  /*! mean image of an accumulator */
  Image meanImage(const Accumulator &accum);
  /*! per-pixel standard error image */
  Image standardErrorImage(const Accumulator &accum);

} // ::amrpt
