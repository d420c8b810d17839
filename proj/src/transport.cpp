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

#include "amrpt/transport.h"

#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

namespace amrpt {

  void RayStats::merge(const RayStats &o)
  {
    rays += o.rays;
    partitionsTraversed += o.partitionsTraversed;
    volumeSamples += o.volumeSamples;
    nullCollisions += o.nullCollisions;
    realCollisions += o.realCollisions;
    partitionsPerRay.merge(o.partitionsPerRay);
    samplesPerPartition.merge(o.samplesPerPartition);
  }

  RngStream::RngStream(uint64_t seed, uint64_t pixel, uint64_t frame)
      : key(mix64(seed ^ mix64(pixel ^ mix64(frame ^ 0x5851f42d4c957f2dull))))
  {}

  double RngStream::next()
  {
    const uint64_t counter = (uint64_t(bounceDepth) << 32) | drawIndex++;
    const uint64_t h = mix64(key ^ mix64(counter));
    return double(h >> 11) * 0x1p-53;
  }

  void checkCombination(TraversalMethod method, SamplerKind sampler)
  {
    if (sampler == SamplerKind::ABR_DIRECT && method != TraversalMethod::ABR_BVH)
      throw ConfigurationError("sampler 'abr-direct' requires traversal 'abr', got '"
                               + std::string(toString(method)) + "'");
  }

  TrackingEvent woodcockTrack(const Scene &scene, TraversalMethod method, SamplerKind sampler,
                              const Ray &ray, RngStream &rng, RayStats &stats,
                              const TrackingOptions &opt)
  {
    checkCombination(method, sampler);
    TrackingEvent event;
    ++stats.rays;
    Ray clipped = ray;
    if (!clipToBox(ray.origin, ray.direction, scene.mediumBounds(), clipped.tmin, clipped.tmax)) {
      stats.partitionsPerRay.add(0);
      return event;
    }

    const bool direct = sampler == SamplerKind::ABR_DIRECT;
    // free paths are drawn in world distance; t advances per unit of direction
    const double speed = length(ray.direction);
    uint64_t partitions = 0;
    scene.traverse(method, clipped, opt.traversal, [&](const PartitionHit &hit) {
      ++partitions;
      const double mu = double(hit.majorant) * opt.majorantScale;
      if (!(mu > 0.0)) return Visit::Continue;
      double t = hit.t0;
      uint64_t samples = 0;
      while (true) {
        const double xi = std::min(rng.next(), kMaxXi);
        t -= std::log1p(-xi) / (mu * speed);
        if (t >= hit.t1) break;
        ++samples;
        const vec3d x = ray.at(t);
        const Sample s = direct ? scene.sample(sampler, x, hit.partID) : scene.sample(sampler, x);
        if (double(s.extinction) > mu) {
          std::ostringstream msg;
          msg << "majorant violation: extinction " << s.extinction << " > majorant " << mu
              << " in partition " << hit.partID << " of '" << toString(method) << "' at " << x;
          throw MajorantViolation(msg.str());
        }
        if (rng.next() * mu < double(s.extinction)) {
          ++stats.realCollisions;
          stats.volumeSamples += samples;
          stats.nullCollisions += samples - 1;
          stats.samplesPerPartition.add(samples);
          event.kind = TrackingEvent::Scatter;
          event.t = t;
          event.sample = s;
          return Visit::Stop;
        }
      }
      stats.volumeSamples += samples;
      stats.nullCollisions += samples;
      if (samples) stats.samplesPerPartition.add(samples);
      return Visit::Continue;
    });
    stats.partitionsTraversed += partitions;
    stats.partitionsPerRay.add(partitions);
    return event;
  }

  double transmittance(const Scene &scene, TraversalMethod method, SamplerKind sampler, const Ray &ray,
                       RngStream &rng, RayStats &stats, const TrackingOptions &opt)
  {
    return woodcockTrack(scene, method, sampler, ray, rng, stats, opt).kind == TrackingEvent::Escaped
             ? 1.0
             : 0.0;
  }

  // ------------------------------------------------------------------

  std::string_view toString(RenderMode m) { return m == RenderMode::DL ? "dl" : "ms"; }

  std::optional<RenderMode> parseRenderMode(std::string_view s)
  {
    if (s == "dl") return RenderMode::DL;
    if (s == "ms") return RenderMode::MS;
    return std::nullopt;
  }

  Camera Camera::framing(const box3d &bounds, double fovY)
  {
    Camera cam;
    const vec3d c = bounds.center();
    const double radius = 0.5 * length(bounds.size());
    const double dist = 1.05 * radius / std::sin(0.5 * fovY * kPi / 180.0);
    cam.lookAt = c;
    cam.position = c + normalize(vec3d(0.8, 0.5, -1.2)) * dist;
    cam.up = {0.0, 1.0, 0.0};
    cam.fovY = fovY;
    return cam;
  }

  void RenderConfig::validate() const
  {
    auto fail = [](const std::string &field, const std::string &why) {
      throw std::invalid_argument(field + ": " + why);
    };
    if (spp < 1) fail("spp", "must be >= 1");
    if (maxBounces < 1) fail("maxBounces", "must be >= 1");
    if (rrStart < 0) fail("rrStart", "must be >= 0");
    if (!(rrMinSurvival > 0.0 && rrMinSurvival <= rrMaxSurvival && rrMaxSurvival <= 1.0))
      fail("rrMinSurvival", "need 0 < rrMinSurvival <= rrMaxSurvival <= 1");
    if (width < 1) fail("width", "must be >= 1");
    if (height < 1) fail("height", "must be >= 1");
    if (!(camera.fovY > 0.0 && camera.fovY < 180.0)) fail("camera.fovY", "must be in (0,180)");
    if (camera.position == camera.lookAt) fail("camera.lookAt", "must differ from camera.position");
    if (length(cross(camera.lookAt - camera.position, camera.up)) == 0.0)
      fail("camera.up", "must not be parallel to the view direction");
    for (int c = 0; c < 3; ++c) {
      if (!(light.intensity[c] >= 0.f)) fail("light.intensity", "components must be >= 0");
      if (!(ambient[c] >= 0.f)) fail("ambient", "components must be >= 0");
    }
    if (!(majorantScale >= 1.0)) fail("majorantScale", "must be >= 1");
    if (gridDims.x < 1 || gridDims.y < 1 || gridDims.z < 1) fail("gridDims", "components must be >= 1");
    checkCombination(traversal, sampler);
  }

  Ray cameraRay(const Camera &camera, int width, int height, int px, int py, double u, double v)
  {
    const vec3d forward = normalize(camera.lookAt - camera.position);
    const vec3d right = normalize(cross(forward, camera.up));
    const vec3d up = cross(right, forward);
    const double tanHalf = std::tan(0.5 * camera.fovY * kPi / 180.0);
    const double aspect = double(width) / double(height);
    const double sx = ((px + u) / width * 2.0 - 1.0) * tanHalf * aspect;
    const double sy = (1.0 - (py + v) / height * 2.0) * tanHalf;
    Ray ray;
    ray.origin = camera.position;
    ray.direction = normalize(forward + sx * right + sy * up);
    ray.tmin = 0.0;
    ray.tmax = std::numeric_limits<double>::infinity();
    return ray;
  }

  vec3d sampleSphere(double u1, double u2)
  {
    const double z = 1.0 - 2.0 * u1;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * kPi * u2;
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

  namespace {
    vec3d toDouble(const vec3f &v) { return {double(v.x), double(v.y), double(v.z)}; }
  } // namespace

  vec3d traceDL(const Scene &scene, const RenderConfig &config, const Ray &primary, RngStream &rng,
                RayStats &stats)
  {
    const TrackingOptions opt = config.trackingOptions();
    rng.setBounce(0);
    const TrackingEvent ev = woodcockTrack(scene, config.traversal, config.sampler, primary, rng, stats, opt);
    if (ev.kind == TrackingEvent::Escaped) return toDouble(config.ambient);

    const vec3d x = primary.at(ev.t);
    const vec3d toLight = config.light.position - x;
    const double dist2 = dot(toLight, toLight);
    if (!(dist2 > 0.0)) return vec3d(0.0);
    const vec3d intensity = toDouble(config.light.intensity);
    if (intensity == vec3d(0.0)) return vec3d(0.0);
    rng.setBounce(1);
    const double dist = std::sqrt(dist2);
    Ray shadow{x, toLight / dist, 0.0, dist};
    const double T = transmittance(scene, config.traversal, config.sampler, shadow, rng, stats, opt);
    return toDouble(ev.sample.albedo) * intensity * (T / (dist2 * 4.0 * kPi));
  }

  vec3d traceMS(const Scene &scene, const RenderConfig &config, const Ray &primary, RngStream &rng,
                RayStats &stats)
  {
    const TrackingOptions opt = config.trackingOptions();
    vec3d throughput(1.0);
    Ray ray = primary;
    for (int bounce = 0;; ++bounce) {
      rng.setBounce(uint32_t(bounce));
      const TrackingEvent ev = woodcockTrack(scene, config.traversal, config.sampler, ray, rng, stats, opt);
      if (ev.kind == TrackingEvent::Escaped) return throughput * toDouble(config.ambient);
      throughput = throughput * toDouble(ev.sample.albedo);
      if (bounce + 1 >= config.maxBounces) return vec3d(0.0);
      if (bounce >= config.rrStart) {
        const double p = std::clamp(reduceMax(throughput), config.rrMinSurvival, config.rrMaxSurvival);
        if (rng.next() >= p) return vec3d(0.0);
        throughput = throughput / p;
      }
      const double u1 = rng.next(), u2 = rng.next();
      ray = Ray{ray.at(ev.t), sampleSphere(u1, u2), 0.0, std::numeric_limits<double>::infinity()};
    }
  }

  // ------------------------------------------------------------------

  void Accumulator::reset(int w, int h, uint64_t newGeneration)
  {
    width = w;
    height = h;
    spp = 0;
    generation = newGeneration;
    sum.assign(size_t(w) * h, vec3d(0.0));
    sumSq.assign(size_t(w) * h, vec3d(0.0));
  }

  std::vector<vec3d> Accumulator::mean() const
  {
    std::vector<vec3d> out(sum.size(), vec3d(0.0));
    if (spp == 0) return out;
    for (size_t i = 0; i < sum.size(); ++i) out[i] = sum[i] / double(spp);
    return out;
  }

  std::vector<vec3d> Accumulator::standardError() const
  {
    std::vector<vec3d> out(sum.size(), vec3d(0.0));
    if (spp < 2) return out;
    const double n = spp;
    for (size_t i = 0; i < sum.size(); ++i)
      for (int c = 0; c < 3; ++c) {
        const double m = sum[i][c] / n;
        const double var = std::max(0.0, (sumSq[i][c] / n - m * m) * n / (n - 1.0));
        out[i][c] = std::sqrt(var / n);
      }
    return out;
  }

  FrameResult renderFrame(Scene &scene, const RenderConfig &config, Accumulator &accum, int threads)
  {
    config.validate();
    if (accum.width != config.width || accum.height != config.height)
      accum.reset(config.width, config.height, accum.generation);
    scene.prepare(config.traversal);

    const auto start = std::chrono::steady_clock::now();
    const uint64_t frame = uint64_t(accum.spp);
    int numThreads = threads > 0 ? threads : int(std::max(1u, std::thread::hardware_concurrency()));
    numThreads = std::min(numThreads, config.height);
    std::atomic<int> nextRow{0};
    std::vector<RayStats> workerStats(numThreads);
    std::vector<std::exception_ptr> errors(numThreads);

    auto worker = [&](int w) {
      try {
        RayStats &stats = workerStats[w];
        for (int y = nextRow++; y < config.height; y = nextRow++) {
          for (int x = 0; x < config.width; ++x) {
            const size_t pixel = size_t(y) * config.width + x;
            RngStream rng(config.seed, pixel, frame);
            rng.setBounce(RngStream::kCameraBounce);
            const double u = rng.next(), v = rng.next();
            const Ray ray = cameraRay(config.camera, config.width, config.height, x, y, u, v);
            const vec3d L = config.mode == RenderMode::DL ? traceDL(scene, config, ray, rng, stats)
                                                          : traceMS(scene, config, ray, rng, stats);
            accum.sum[pixel] = accum.sum[pixel] + L;
            accum.sumSq[pixel] = accum.sumSq[pixel] + L * L;
          }
        }
      } catch (...) {
        errors[w] = std::current_exception();
        nextRow = config.height;
      }
    };
    if (numThreads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < numThreads; ++w) pool.emplace_back(worker, w);
      for (auto &t : pool) t.join();
    }
    for (auto &e : errors)
      if (e) std::rethrow_exception(e);

    FrameResult result;
    for (const RayStats &s : workerStats) result.stats.merge(s);
    ++accum.spp;
    result.cameraSamples = uint64_t(config.width) * config.height;
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

  FrameResult renderImage(Scene &scene, const RenderConfig &config, Accumulator &accum, int threads)
  {
    accum.reset(config.width, config.height, accum.generation);
    FrameResult total;
    for (int i = 0; i < config.spp; ++i) {
      const FrameResult r = renderFrame(scene, config, accum, threads);
      total.stats.merge(r.stats);
      total.seconds += r.seconds;
      total.cameraSamples += r.cameraSamples;
    }
    return total;
  }

} // ::amrpt
