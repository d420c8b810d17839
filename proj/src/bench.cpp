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

#include "amrpt/bench.h"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace amrpt {

  std::string matrixSkipReason(TraversalMethod method, SamplerKind sampler)
  {
    if (method == TraversalMethod::ABR_BVH) {
      if (sampler != SamplerKind::ABR_DIRECT)
        return "the ABR traversal is measured with its direct brick-list sampler";
      return {};
    }
    if (sampler == SamplerKind::ABR_DIRECT) return "abr-direct needs the ABR identity from the abr traversal";
    return {};
  }

  MatrixResult runMatrix(Scene &scene, const RenderConfig &base, std::span<const TraversalMethod> methods,
                         std::span<const SamplerKind> samplers, std::span<const RenderMode> modes, int threads)
  {
    MatrixResult result;
    for (TraversalMethod method : methods)
      for (SamplerKind sampler : samplers)
        for (RenderMode mode : modes) {
          const BenchCombo combo{method, sampler, mode};
          const std::string reason = matrixSkipReason(method, sampler);
          if (!reason.empty()) {
            result.skipped.push_back({combo, reason});
            continue;
          }
          RenderConfig config = base;
          config.traversal = method;
          config.sampler = sampler;
          config.mode = mode;
          Accumulator accum;
          const FrameResult frame = renderImage(scene, config, accum, threads);
          BenchReport report;
          report.combo = combo;
          report.seconds = frame.seconds;
          report.cameraSamples = frame.cameraSamples;
          report.raysPerSecond = frame.seconds > 0.0 ? double(frame.cameraSamples) / frame.seconds : 0.0;
          report.stats = frame.stats;
          report.bytes = scene.bytes(method);
          result.reports.push_back(report);
        }
    return result;
  }

  namespace {
    std::string comboColumns(const BenchCombo &c)
    {
      return std::string(toString(c.method)) + "," + std::string(toString(c.sampler)) + ","
           + std::string(toString(c.mode));
    }

    std::string fmt(double v)
    {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      return buf;
    }
  } // namespace

  std::string matrixCsv(const MatrixResult &result)
  {
    std::ostringstream out;
    out << "method,sampler,mode,rays,partitionsTraversed,volumeSamples,nullCollisions,realCollisions,"
           "meanPartitionsPerRay,meanVolumeSamples,meanNullCollisions,rangeBytes,majorantBytes,"
           "hierarchyBytes,totalBytes\n";
    for (const BenchReport &r : result.reports) {
      const RayStats &s = r.stats;
      out << comboColumns(r.combo) << "," << s.rays << "," << s.partitionsTraversed << "," << s.volumeSamples
          << "," << s.nullCollisions << "," << s.realCollisions << "," << fmt(s.meanPartitionsPerRay()) << ","
          << fmt(s.meanVolumeSamples()) << "," << fmt(s.meanNullCollisions()) << "," << r.bytes.ranges << ","
          << r.bytes.majorants << "," << r.bytes.hierarchy << "," << r.bytes.total() << "\n";
    }
    return out.str();
  }

  std::string matrixTimingCsv(const MatrixResult &result)
  {
    std::ostringstream out;
    out << "method,sampler,mode,seconds,cameraSamples,raysPerSecond\n";
    for (const BenchReport &r : result.reports)
      out << comboColumns(r.combo) << "," << fmt(r.seconds) << "," << r.cameraSamples << ","
          << fmt(r.raysPerSecond) << "\n";
    return out.str();
  }

  std::string matrixHistogramsJson(const MatrixResult &result)
  {
    nlohmann::json doc = nlohmann::json::array();
    for (const BenchReport &r : result.reports) {
      nlohmann::json entry;
      entry["method"] = std::string(toString(r.combo.method));
      entry["sampler"] = std::string(toString(r.combo.sampler));
      entry["mode"] = std::string(toString(r.combo.mode));
      entry["binLower"] = nlohmann::json::array();
      for (int k = 0; k < LogHistogram::kNumBins; ++k) entry["binLower"].push_back(LogHistogram::binLower(k));
      entry["partitionsPerRay"] = r.stats.partitionsPerRay.bins;
      entry["samplesPerPartition"] = r.stats.samplesPerPartition.bins;
      doc.push_back(entry);
    }
    nlohmann::json skipped = nlohmann::json::array();
    for (const SkippedCombo &s : result.skipped)
      skipped.push_back({{"combo", comboColumns(s.combo)}, {"reason", s.reason}});
    return nlohmann::json{{"reports", doc}, {"skipped", skipped}}.dump(2);
  }

  std::vector<SweepPoint> gridSweep(Scene &scene, const RenderConfig &config, std::span<const vec3i> dims,
                                    int threads, int repeats)
  {
    std::vector<SweepPoint> points;
    for (const vec3i &d : dims) {
      scene.setGridDims(d);
      SweepPoint p;
      p.dims = d;
      p.majorantEntries = scene.grid().majorants.size();
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < std::max(1, repeats); ++r) {
        Accumulator accum;
        const FrameResult frame = renderImage(scene, config, accum, threads);
        if (frame.seconds < best) {
          best = frame.seconds;
          p.stats = frame.stats;
          p.raysPerSecond = frame.seconds > 0.0 ? double(frame.cameraSamples) / frame.seconds : 0.0;
        }
      }
      p.seconds = best;
      points.push_back(p);
    }
    return points;
  }

  std::string sweepCsv(const std::vector<SweepPoint> &points)
  {
    std::ostringstream out;
    out << "nx,ny,nz,majorantEntries,seconds,raysPerSecond,meanPartitionsPerRay,meanVolumeSamples,"
           "meanNullCollisions\n";
    for (const SweepPoint &p : points)
      out << p.dims.x << "," << p.dims.y << "," << p.dims.z << "," << p.majorantEntries << "," << fmt(p.seconds)
          << "," << fmt(p.raysPerSecond) << "," << fmt(p.stats.meanPartitionsPerRay()) << ","
          << fmt(p.stats.meanVolumeSamples()) << "," << fmt(p.stats.meanNullCollisions()) << "\n";
    return out.str();
  }

  std::string sweepSvg(const std::vector<SweepPoint> &points, const std::string &title)
  {
    const double W = 640, H = 400, left = 80, right = 20, top = 40, bottom = 60;
    double xMax = 0.0, yMax = 0.0;
    for (const SweepPoint &p : points) {
      xMax = std::max(xMax, std::log2(double(p.dims.x)));
      yMax = std::max(yMax, p.raysPerSecond);
    }
    if (xMax <= 0.0) xMax = 1.0;
    if (yMax <= 0.0) yMax = 1.0;
    auto X = [&](double v) { return left + (W - left - right) * v / xMax; };
    auto Y = [&](double v) { return H - bottom - (H - top - bottom) * v / (1.1 * yMax); };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
        << "</text>\n"
        << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (W + left) / 2 << "\" y=\"" << H - 15
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\">macrocells per axis</text>\n"
        << "<text x=\"20\" y=\"" << (H - bottom + top) / 2 << "\" transform=\"rotate(-90 20 "
        << (H - bottom + top) / 2 << ")\" text-anchor=\"middle\" font-family=\"sans-serif\">camera rays / s</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const SweepPoint &p : points) svg << X(std::log2(double(p.dims.x))) << "," << Y(p.raysPerSecond) << " ";
    svg << "\"/>\n";
    for (const SweepPoint &p : points) {
      const double x = X(std::log2(double(p.dims.x)));
      svg << "<circle cx=\"" << x << "\" cy=\"" << Y(p.raysPerSecond) << "\" r=\"4\" fill=\"steelblue\"/>\n"
          << "<text x=\"" << x << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\" font-size=\"12\" "
          << "font-family=\"sans-serif\">" << p.dims.x << "</text>\n";
    }
    svg << "<text x=\"" << left - 6 << "\" y=\"" << Y(yMax) + 4 << "\" text-anchor=\"end\" font-size=\"12\" "
        << "font-family=\"sans-serif\">" << fmt(yMax) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
  }

  QuadratureResult quadratureTransmittance(const Scene &scene, SamplerKind sampler, const Ray &ray, double step)
  {
    if (!(step > 0.0)) throw std::invalid_argument("step: must be > 0");
    QuadratureResult result;
    double t0 = ray.tmin, t1 = ray.tmax;
    if (!clipToBox(ray.origin, ray.direction, scene.mediumBounds(), t0, t1)) return result;
    // abr-direct has no traversal here; locate the ABR per point instead
    const SamplerKind kind = sampler == SamplerKind::ABR_DIRECT ? SamplerKind::ABR_QUERY : sampler;
    auto depth = [&](double h) {
      const size_t n = size_t(std::ceil((t1 - t0) / h));
      const double dt = (t1 - t0) / double(n);
      double sum = 0.0;
      for (size_t i = 0; i < n; ++i)
        sum += double(scene.sample(kind, ray.at(t0 + (double(i) + 0.5) * dt)).extinction);
      return sum * dt;
    };
    const double coarse = depth(step);
    result.opticalDepth = depth(0.5 * step);
    result.transmittance = std::exp(-result.opticalDepth);
    result.refinementDelta = std::abs(std::exp(-coarse) - result.transmittance);
    return result;
  }

  Image meanImage(const Accumulator &accum)
  {
    return Image{accum.width, accum.height, accum.mean()};
  }

  Image standardErrorImage(const Accumulator &accum)
  {
    return Image{accum.width, accum.height, accum.standardError()};
  }

} // ::amrpt
