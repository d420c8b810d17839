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
#include "amrpt/image.h"
#include "amrpt/ingest.h"
#include "amrpt/scene.h"
#include "amrpt/transport.h"
#ifdef AMRPT_WITH_SERVICE
#  include "amrpt/service.h"
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>

using namespace amrpt;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

  struct DataOptions {
    std::string data;       // PREFIX of PREFIX.cells / PREFIX.scalars
    std::string synthetic;  // shells | turbulence | teapot
    uint64_t seed = 0;
    int levels = 3;
    double threshold = 0.1;
    int rootCells = 4;
  };

  struct RenderOptions {
    std::string traversal, sampler, mode, gridDims, tf, config;
    int spp = 0;
    int width = 0, height = 0;
    int threads = 0;
    std::optional<uint64_t> seed;
  };

  void addDataOptions(CLI::App *cmd, DataOptions &d)
  {
    auto *data = cmd->add_option("--data", d.data, "cell/scalar file prefix (PREFIX.cells, PREFIX.scalars)");
    cmd->add_option("--synthetic", d.synthetic, "generate a dataset in memory instead")
      ->check(CLI::IsMember({"shells", "turbulence", "teapot"}))
      ->excludes(data);
    cmd->add_option("--gen-seed", d.seed, "seed of the synthetic field");
    cmd->add_option("--levels", d.levels, "synthetic refinement levels")->check(CLI::Range(0, 6));
    cmd->add_option("--threshold", d.threshold, "synthetic refinement threshold");
    cmd->add_option("--root-cells", d.rootCells, "synthetic root cells per axis")->check(CLI::PositiveNumber);
  }

  void addRenderOptions(CLI::App *cmd, RenderOptions &r)
  {
    cmd->add_option("--traversal", r.traversal, "abr | brick-kd | brick-bvh | grid-dda | grid-bvh")
      ->check(CLI::IsMember({"abr", "brick-kd", "brick-bvh", "grid-dda", "grid-bvh"}));
    cmd->add_option("--sampler", r.sampler, "abr | abr-direct | ext-brick")
      ->check(CLI::IsMember({"abr", "abr-direct", "ext-brick"}));
    cmd->add_option("--mode", r.mode, "dl | ms")->check(CLI::IsMember({"dl", "ms"}));
    cmd->add_option("--spp", r.spp, "samples per pixel")->check(CLI::PositiveNumber);
    cmd->add_option("--grid-dims", r.gridDims, "macrocell grid, NxMxK");
    cmd->add_option("--tf", r.tf, "transfer function document")->check(CLI::ExistingFile);
    cmd->add_option("--config", r.config, "render configuration document")->check(CLI::ExistingFile);
    cmd->add_option("--seed", r.seed, "render seed");
    cmd->add_option("--width", r.width, "image width")->check(CLI::PositiveNumber);
    cmd->add_option("--height", r.height, "image height")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", r.threads, "worker threads, 0 = all cores");
  }

  vec3i parseDims(const std::string &text)
  {
    static const std::regex pattern(R"((\d+)[xX](\d+)[xX](\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, pattern))
      throw std::invalid_argument("--grid-dims: expected NxMxK, got '" + text + "'");
    const vec3i dims{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3])};
    if (dims.x < 1 || dims.y < 1 || dims.z < 1)
      throw std::invalid_argument("--grid-dims: every entry must be positive");
    return dims;
  }

  SyntheticSpec syntheticSpec(const DataOptions &d)
  {
    SyntheticSpec spec;
    spec.kind = *parseSyntheticKind(d.synthetic == "shells"       ? "sphere-shells"
                                    : d.synthetic == "turbulence" ? "turbulence"
                                                                  : "teapot-in-stadium");
    spec.seed = d.seed;
    spec.refineLevels = d.levels;
    spec.gradientThreshold = d.threshold;
    spec.rootCells = d.rootCells;
    return spec;
  }

  CellSet loadData(const DataOptions &d)
  {
    if (!d.data.empty()) return loadCells(d.data + ".cells", d.data + ".scalars");
    if (!d.synthetic.empty()) return generate(syntheticSpec(d));
    throw std::invalid_argument("one of --data or --synthetic is required");
  }

  ValueRange scalarRange(const CellSet &cells)
  {
    ValueRange r;
    for (const Cell &c : cells.cells) r.extend(c.scalar);
    if (r.empty()) return {0.f, 1.f};
    if (r.lo == r.hi) r.hi = r.lo + 1.f;
    return r;
  }

  /*! alpha ramp over the data range with a warm-to-cool colour map */
  TransferFunction defaultTransferFunction(const CellSet &cells)
  {
    TransferFunction tf;
    tf.domain = scalarRange(cells);
    tf.unitExtinction = 20.f;
    tf.rgba = {{0.2f, 0.3f, 0.9f, 0.0f}, {0.3f, 0.8f, 0.7f, 0.0f}, {0.9f, 0.9f, 0.3f, 0.4f},
               {0.9f, 0.4f, 0.1f, 0.8f}, {0.8f, 0.1f, 0.1f, 1.0f}};
    return tf;
  }

  RenderConfig defaultConfig(const CellSet &cells)
  {
    RenderConfig config;
    const box3d &b = cells.worldBounds;
    config.camera = Camera::framing(b);
    const vec3d light = b.upper + 0.5 * b.size();
    const double d = length(light - b.center());
    config.light = {light, vec3f(float(d * d))};
    return config;
  }

  TransferFunction resolveTF(const RenderOptions &r, const CellSet &cells)
  {
    return r.tf.empty() ? defaultTransferFunction(cells) : loadTransferFunction(r.tf);
  }

  RenderConfig resolveConfig(const RenderOptions &r, const CellSet &cells)
  {
    RenderConfig config = r.config.empty() ? defaultConfig(cells) : loadRenderConfig(r.config);
    if (!r.traversal.empty()) config.traversal = *parseTraversalMethod(r.traversal);
    if (!r.sampler.empty()) config.sampler = *parseSamplerKind(r.sampler);
    if (!r.mode.empty()) config.mode = *parseRenderMode(r.mode);
    if (r.spp > 0) config.spp = r.spp;
    if (r.width > 0) config.width = r.width;
    if (r.height > 0) config.height = r.height;
    if (r.seed) config.seed = *r.seed;
    if (!r.gridDims.empty()) config.gridDims = parseDims(r.gridDims);
    config.validate();
    return config;
  }

  void writeText(const fs::path &path, const std::string &text)
  {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  }

  json countersJson(const BuildCounters &c)
  {
    return {{"bricks", c.bricks},         {"abrs", c.abrs},       {"brickRanges", c.brickRanges},
            {"grid", c.grid},             {"kdTree", c.kdTree},   {"pointBvhs", c.pointBvhs},
            {"culledBvhs", c.culledBvhs}, {"reclassifications", c.reclassifications}};
  }

  // ------------------------------------------------------------------
  // subcommands
  // ------------------------------------------------------------------

  int runGen(const DataOptions &d, const std::string &out)
  {
    if (d.synthetic.empty()) throw std::invalid_argument("gen: --synthetic is required");
    if (out.empty()) throw std::invalid_argument("gen: --out PREFIX is required");
    const CellSet cells = generate(syntheticSpec(d));
    const fs::path prefix(out);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    saveCells(out + ".cells", out + ".scalars", cells);
    std::printf("%zu cells, %d levels, bounds [%g %g %g]-[%g %g %g] -> %s.{cells,scalars}\n", cells.cells.size(),
                cells.numLevels, cells.worldBounds.lower.x, cells.worldBounds.lower.y, cells.worldBounds.lower.z,
                cells.worldBounds.upper.x, cells.worldBounds.upper.y, cells.worldBounds.upper.z, out.c_str());
    return 0;
  }

  int runBuild(const DataOptions &d, const RenderOptions &r, const std::string &out)
  {
    CellSet cells = loadData(d);
    const TransferFunction tf = resolveTF(r, cells);
    const vec3i dims = r.gridDims.empty() ? vec3i(16, 16, 16) : parseDims(r.gridDims);
    const auto start = std::chrono::steady_clock::now();
    Scene scene(std::move(cells), tf, dims);
    scene.prepareAll();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json report;
    report["cells"] = scene.cells().cells.size();
    report["levels"] = scene.cells().numLevels;
    report["bricks"] = scene.bricks().size();
    report["abrs"] = scene.abrs().size();
    report["gridDims"] = {dims.x, dims.y, dims.z};
    report["buildSeconds"] = seconds;
    report["counters"] = countersJson(scene.counters());
    for (TraversalMethod m : kAllTraversalMethods) {
      const StructureBytes b = scene.bytes(m);
      const auto majorants = scene.majorants(m);
      const size_t active = std::count_if(majorants.begin(), majorants.end(), [](float v) { return v > 0.f; });
      report["structures"][std::string(toString(m))] = {{"partitions", majorants.size()},
                                                        {"nonEmpty", active},
                                                        {"rangeBytes", b.ranges},
                                                        {"majorantBytes", b.majorants},
                                                        {"hierarchyBytes", b.hierarchy}};
    }
    const std::string text = report.dump(2) + "\n";
    if (out.empty())
      std::cout << text;
    else
      writeText(out, text);
    return 0;
  }

  int runRender(const DataOptions &d, const RenderOptions &r, const std::string &out)
  {
    CellSet cells = loadData(d);
    const TransferFunction tf = resolveTF(r, cells);
    const RenderConfig config = resolveConfig(r, cells);
    Scene scene(std::move(cells), tf, config.gridDims);
    Accumulator accum;
    const FrameResult result = renderImage(scene, config, accum, r.threads);
    const Image image = meanImage(accum);
    const fs::path path = out.empty() ? fs::path("render.png") : fs::path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    if (path.extension() == ".ppm")
      writePPM(path, image);
    else
      writePNG(path, image);
    std::printf("%s %s %s, %d spp, %dx%d: %.3f s, %.3g samples/s, %.2f partitions/ray, %.2f null "
                "collisions/ray -> %s\n",
                std::string(toString(config.traversal)).c_str(), std::string(toString(config.sampler)).c_str(),
                std::string(toString(config.mode)).c_str(), config.spp, config.width, config.height,
                result.seconds, result.seconds > 0.0 ? double(result.cameraSamples) / result.seconds : 0.0,
                result.stats.meanPartitionsPerRay(), result.stats.meanNullCollisions(), path.string().c_str());
    return 0;
  }

  int runBench(const DataOptions &d, const RenderOptions &r, const std::string &out, const std::string &sweep)
  {
    CellSet cells = loadData(d);
    const TransferFunction tf = resolveTF(r, cells);
    RenderOptions small = r;
    if (small.width == 0) small.width = 32;
    if (small.height == 0) small.height = 32;
    if (small.spp == 0) small.spp = 4;
    const RenderConfig config = resolveConfig(small, cells);
    Scene scene(std::move(cells), tf, config.gridDims);
    const fs::path dir = out.empty() ? fs::path("bench") : fs::path(out);
    fs::create_directories(dir);

    std::vector<TraversalMethod> methods(std::begin(kAllTraversalMethods), std::end(kAllTraversalMethods));
    std::vector<SamplerKind> samplers(std::begin(kAllSamplerKinds), std::end(kAllSamplerKinds));
    std::vector<RenderMode> modes{RenderMode::DL, RenderMode::MS};
    if (!r.traversal.empty()) methods = {config.traversal};
    if (!r.sampler.empty()) samplers = {config.sampler};
    if (!r.mode.empty()) modes = {config.mode};

    const MatrixResult matrix = runMatrix(scene, config, methods, samplers, modes, r.threads);
    writeText(dir / "matrix.csv", matrixCsv(matrix));
    writeText(dir / "timing.csv", matrixTimingCsv(matrix));
    writeText(dir / "histograms.json", matrixHistogramsJson(matrix));
    std::printf("%-10s %-10s %-4s %12s %10s %10s\n", "traversal", "sampler", "mode", "samples/s", "parts/ray",
                "nulls/ray");
    for (const BenchReport &rep : matrix.reports)
      std::printf("%-10s %-10s %-4s %12.4g %10.3f %10.3f\n", std::string(toString(rep.combo.method)).c_str(),
                  std::string(toString(rep.combo.sampler)).c_str(), std::string(toString(rep.combo.mode)).c_str(),
                  rep.raysPerSecond, rep.stats.meanPartitionsPerRay(), rep.stats.meanNullCollisions());
    for (const SkippedCombo &s : matrix.skipped)
      std::printf("skipped %s/%s/%s: %s\n", std::string(toString(s.combo.method)).c_str(),
                  std::string(toString(s.combo.sampler)).c_str(), std::string(toString(s.combo.mode)).c_str(),
                  s.reason.c_str());

    if (!sweep.empty()) {
      std::vector<vec3i> dims;
      std::stringstream ss(sweep);
      for (std::string item; std::getline(ss, item, ',');) {
        const int n = std::stoi(item);
        if (n < 1) throw std::invalid_argument("--sweep: entries must be positive");
        dims.push_back({n, n, n});
      }
      RenderConfig sweepConfig = config;
      sweepConfig.traversal = r.traversal.empty() ? TraversalMethod::GRID_BVH : config.traversal;
      const auto points = gridSweep(scene, sweepConfig, dims, r.threads);
      writeText(dir / "sweep.csv", sweepCsv(points));
      writeText(dir / "sweep.svg", sweepSvg(points, "throughput vs macrocell resolution"));
      for (const SweepPoint &p : points)
        std::printf("grid %3d^3: %.4g samples/s, %.3f nulls/ray\n", p.dims.x, p.raysPerSecond,
                    p.stats.meanNullCollisions());
    }
    std::printf("results in %s\n", dir.string().c_str());
    return 0;
  }

#ifdef AMRPT_WITH_SERVICE
  int runServe(const std::vector<std::string> &datasets, const RenderOptions &r, const std::string &address,
               int port, int maxSpp)
  {
    std::vector<service::Dataset> list;
    for (const std::string &entry : datasets) {
      // name=PREFIX, or a synthetic kind
      service::Dataset ds;
      const size_t eq = entry.find('=');
      DataOptions d;
      if (eq == std::string::npos) {
        ds.name = entry;
        d.synthetic = entry;
        if (entry != "shells" && entry != "turbulence" && entry != "teapot")
          throw std::invalid_argument("--dataset: unknown synthetic kind '" + entry + "'");
      } else {
        ds.name = entry.substr(0, eq);
        d.data = entry.substr(eq + 1);
      }
      auto cells = std::make_shared<CellSet>(loadData(d));
      ds.tf = resolveTF(r, *cells);
      RenderOptions preview = r;
      if (preview.width == 0) preview.width = 256;
      if (preview.height == 0) preview.height = 256;
      ds.config = resolveConfig(preview, *cells);
      ds.cells = std::move(cells);
      list.push_back(std::move(ds));
    }
    if (list.empty()) throw std::invalid_argument("serve: at least one --dataset is required");
    service::ServerOptions opt;
    opt.address = address;
    opt.port = uint16_t(port);
    opt.renderThreads = r.threads;
    opt.maxSpp = maxSpp;
    service::Server server(std::move(list), opt);
    std::printf("listening on http://%s:%u (GET /datasets, ws /stream?session=ID)\n", address.c_str(),
                unsigned(server.port()));
    std::fflush(stdout);
    server.run();
    return 0;
  }
#endif

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"amrpt: path tracing of cell-centric AMR volumes"};
  app.require_subcommand(1);

  DataOptions data;
  RenderOptions render;
  std::string out;

  auto *gen = app.add_subcommand("gen", "generate a synthetic dataset and write it to disk");
  gen->add_option("--synthetic", data.synthetic, "shells | turbulence | teapot")
    ->required()
    ->check(CLI::IsMember({"shells", "turbulence", "teapot"}));
  gen->add_option("--seed", data.seed, "field seed");
  gen->add_option("--levels", data.levels, "refinement levels")->check(CLI::Range(0, 6));
  gen->add_option("--threshold", data.threshold, "refinement threshold");
  gen->add_option("--root-cells", data.rootCells, "root cells per axis")->check(CLI::PositiveNumber);
  gen->add_option("--out", out, "output prefix")->required();

  auto *build = app.add_subcommand("build", "build every majorant structure and report sizes as JSON");
  addDataOptions(build, data);
  build->add_option("--tf", render.tf, "transfer function document")->check(CLI::ExistingFile);
  build->add_option("--grid-dims", render.gridDims, "macrocell grid, NxMxK");
  build->add_option("--out", out, "report path (default: stdout)");

  auto *rend = app.add_subcommand("render", "render an image");
  addDataOptions(rend, data);
  addRenderOptions(rend, render);
  rend->add_option("--out", out, "image path, .png or .ppm (default: render.png)");

  std::string sweep;
  auto *bench = app.add_subcommand("bench", "run the method matrix and optionally a grid sweep");
  addDataOptions(bench, data);
  addRenderOptions(bench, render);
  bench->add_option("--sweep", sweep, "comma-separated macrocells per axis, e.g. 1,8,16,32,64");
  bench->add_option("--out", out, "output directory (default: bench)");

#ifdef AMRPT_WITH_SERVICE
  std::vector<std::string> datasets;
  std::string address = "127.0.0.1";
  int port = 8080;
  int maxSpp = 4096;
  auto *serve = app.add_subcommand("serve", "stream progressive frames to remote clients");
  serve->add_option("--dataset", datasets, "shells | turbulence | teapot | NAME=PREFIX (repeatable)");
  addRenderOptions(serve, render);
  serve->add_option("--address", address, "bind address");
  serve->add_option("--port", port, "TCP port, 0 picks a free one")->check(CLI::Range(0, 65535));
  serve->add_option("--max-spp", maxSpp, "stop accumulating at this many samples")->check(CLI::PositiveNumber);
#endif

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return runGen(data, out);
    if (*build) return runBuild(data, render, out);
    if (*rend) return runRender(data, render, out);
    if (*bench) return runBench(data, render, out, sweep);
#ifdef AMRPT_WITH_SERVICE
    if (*serve) return runServe(datasets, render, address, port, maxSpp);
#endif
  } catch (const std::exception &e) {
    std::fprintf(stderr, "amrpt: %s\n", e.what());
    return 1;
  }
  return 0;
}
