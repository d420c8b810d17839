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

#include "amrpt/ingest.h"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace amrpt {

  using json = nlohmann::json;

  // ------------------------------------------------------------------
  // binary cell files
  // ------------------------------------------------------------------

  namespace {

    void putU32(std::string &out, uint32_t v)
    {
      for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
    }
    void putU64(std::string &out, uint64_t v)
    {
      for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
    }
    uint32_t getU32(const unsigned char *p)
    {
      return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
    }
    uint64_t getU64(const unsigned char *p) { return uint64_t(getU32(p)) | uint64_t(getU32(p + 4)) << 32; }

    std::string readBinary(const std::filesystem::path &path)
    {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw IngestError(path.string() + ": cannot open");
      std::ostringstream buf;
      buf << in.rdbuf();
      return buf.str();
    }

    void writeBinary(const std::filesystem::path &path, const std::string &bytes)
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw IngestError(path.string() + ": cannot open for writing");
      out.write(bytes.data(), std::streamsize(bytes.size()));
      if (!out) throw IngestError(path.string() + ": write failed");
    }

  } // namespace

  void saveCells(const std::filesystem::path &cellsPath, const std::filesystem::path &scalarsPath,
                 const CellSet &cellSet)
  {
    std::string cells;
    cells.reserve(kCellHeaderBytes + kCellRecordBytes * cellSet.cells.size());
    cells.append(kCellMagic, 4);
    putU32(cells, kCellFileVersion);
    putU64(cells, cellSet.cells.size());
    putU64(cells, 0);  // reserved
    std::string scalars;
    scalars.reserve(4 * cellSet.cells.size());
    for (const Cell &c : cellSet.cells) {
      putU32(cells, uint32_t(c.lower.x));
      putU32(cells, uint32_t(c.lower.y));
      putU32(cells, uint32_t(c.lower.z));
      putU32(cells, uint32_t(c.level));
      putU32(scalars, std::bit_cast<uint32_t>(c.scalar));
    }
    writeBinary(cellsPath, cells);
    writeBinary(scalarsPath, scalars);
  }

  CellSet loadCells(const std::filesystem::path &cellsPath, const std::filesystem::path &scalarsPath)
  {
    const std::string cells = readBinary(cellsPath);
    const std::string scalars = readBinary(scalarsPath);
    const std::string name = cellsPath.string();
    if (cells.size() < kCellHeaderBytes)
      throw IngestError(name + ": file shorter than the 24-byte header");
    const auto *p = reinterpret_cast<const unsigned char *>(cells.data());
    if (std::memcmp(p, kCellMagic, 4) != 0) throw IngestError(name + ": bad magic, expected \"AMRC\"");
    const uint32_t version = getU32(p + 4);
    if (version != kCellFileVersion)
      throw IngestError(name + ": unsupported version " + std::to_string(version) + ", expected 1");
    const uint64_t count = getU64(p + 8);
    if (count > (cells.size() - kCellHeaderBytes) / kCellRecordBytes
        || cells.size() != kCellHeaderBytes + count * kCellRecordBytes)
      throw IngestError(name + ": length " + std::to_string(cells.size()) + " does not match cellCount "
                        + std::to_string(count));
    if (scalars.size() != 4 * count)
      throw IngestError(scalarsPath.string() + ": expected " + std::to_string(count)
                        + " float32 values, file has " + std::to_string(scalars.size()) + " bytes");

    std::vector<Cell> list(count);
    const auto *s = reinterpret_cast<const unsigned char *>(scalars.data());
    for (uint64_t i = 0; i < count; ++i) {
      const unsigned char *r = p + kCellHeaderBytes + i * kCellRecordBytes;
      Cell &c = list[i];
      c.lower = {int32_t(getU32(r)), int32_t(getU32(r + 4)), int32_t(getU32(r + 8))};
      c.level = int32_t(getU32(r + 12));
      c.scalar = std::bit_cast<float>(getU32(s + 4 * i));
    }
    CellSet result = CellSet::fromCells(std::move(list));
    validateCellSet(result);
    return result;
  }

  // ------------------------------------------------------------------
  // synthetic datasets
  // ------------------------------------------------------------------

  std::string_view toString(SyntheticKind k)
  {
    switch (k) {
    case SyntheticKind::SPHERE_SHELLS: return "sphere-shells";
    case SyntheticKind::TURBULENCE: return "turbulence";
    case SyntheticKind::TEAPOT_IN_STADIUM: return "teapot-in-stadium";
    }
    return "?";
  }

  std::optional<SyntheticKind> parseSyntheticKind(std::string_view s)
  {
    for (SyntheticKind k : {SyntheticKind::SPHERE_SHELLS, SyntheticKind::TURBULENCE,
                            SyntheticKind::TEAPOT_IN_STADIUM})
      if (toString(k) == s) return k;
    return std::nullopt;
  }

  namespace {

    double worldExtent(const SyntheticSpec &spec) { return double(spec.rootCells) * double(1 << spec.refineLevels); }

    double unitHash(uint64_t seed, uint64_t a, uint64_t b, uint64_t c, uint64_t d)
    {
      uint64_t h = mix64(seed);
      h = mix64(h ^ a);
      h = mix64(h ^ b);
      h = mix64(h ^ c);
      h = mix64(h ^ d);
      return double(h >> 11) * 0x1p-53;
    }

    double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

    double valueNoise(uint64_t seed, int octave, const vec3d &p)
    {
      const vec3d f(std::floor(p.x), std::floor(p.y), std::floor(p.z));
      const vec3d d = p - f;
      const vec3d w(fade(d.x), fade(d.y), fade(d.z));
      double result = 0.0;
      for (int corner = 0; corner < 8; ++corner) {
        const int cx = corner & 1, cy = (corner >> 1) & 1, cz = (corner >> 2) & 1;
        const double v = unitHash(seed, uint64_t(octave), uint64_t(int64_t(f.x) + cx),
                                  uint64_t(int64_t(f.y) + cy), uint64_t(int64_t(f.z) + cz));
        result += v * (cx ? w.x : 1.0 - w.x) * (cy ? w.y : 1.0 - w.y) * (cz ? w.z : 1.0 - w.z);
      }
      return result;
    }

  } // namespace

  box3d teapotBlobBounds(const SyntheticSpec &spec)
  {
    const double w = double(1 << spec.refineLevels);
    const double c = double(spec.rootCells / 2) * w;
    return {vec3d(c + 0.25 * w), vec3d(c + w)};
  }

  double syntheticField(const SyntheticSpec &spec, const vec3d &x)
  {
    const vec3d p = x / worldExtent(spec);
    switch (spec.kind) {
    case SyntheticKind::SPHERE_SHELLS: {
      const vec3d c(0.5 + 0.1 * (unitHash(spec.seed, 1, 0, 0, 0) - 0.5),
                    0.5 + 0.1 * (unitHash(spec.seed, 1, 1, 0, 0) - 0.5),
                    0.5 + 0.1 * (unitHash(spec.seed, 1, 2, 0, 0) - 0.5));
      return std::sin(8.0 * kPi * length(p - c));
    }
    case SyntheticKind::TURBULENCE: {
      double v = 0.0;
      double amp = 0.5, freq = 4.0;
      for (int octave = 0; octave < 3; ++octave) {
        v += amp * valueNoise(spec.seed, octave, p * freq);
        amp *= 0.5;
        freq *= 2.0;
      }
      return v / 0.875;
    }
    case SyntheticKind::TEAPOT_IN_STADIUM: {
      const box3d blob = teapotBlobBounds(spec);
      if (blob.containsHalfOpen(x)) {
        double v = 0.55;
        for (int a = 0; a < 3; ++a) {
          const double phase = 2.0 * kPi * unitHash(spec.seed, 2, uint64_t(a), 0, 0);
          v += 0.15 * std::sin(0.5 * kPi * x[a] + phase);
        }
        return v;
      }
      return 0.1 + 0.1 * p.x;
    }
    }
    return 0.0;
  }

  CellSet generate(const SyntheticSpec &spec)
  {
    if (spec.refineLevels < 0 || spec.refineLevels > 6)
      throw std::invalid_argument("refineLevels: must be in [0,6]");
    if (spec.rootCells < 1) throw std::invalid_argument("rootCells: must be >= 1");

    constexpr int kProbe = 5;
    std::vector<Cell> cells;
    std::function<void(const vec3i &, int)> refine = [&](const vec3i &lower, int level) {
      const int w = 1 << level;
      if (level > 0 && std::isfinite(spec.gradientThreshold)) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int k = 0; k < kProbe; ++k)
          for (int j = 0; j < kProbe; ++j)
            for (int i = 0; i < kProbe; ++i) {
              const vec3d x = vec3d(lower) + vec3d((i + 0.5) / kProbe, (j + 0.5) / kProbe, (k + 0.5) / kProbe) * double(w);
              const double v = syntheticField(spec, x);
              lo = std::min(lo, v);
              hi = std::max(hi, v);
            }
        if (hi - lo > spec.gradientThreshold) {
          const int h = w / 2;
          for (int c = 0; c < 8; ++c)
            refine(lower + vec3i((c & 1) * h, ((c >> 1) & 1) * h, ((c >> 2) & 1) * h), level - 1);
          return;
        }
      }
      const vec3d center = vec3d(lower) + vec3d(0.5 * w);
      cells.push_back(Cell{lower, level, float(syntheticField(spec, center))});
    };
    const int rootWidth = 1 << spec.refineLevels;
    for (int z = 0; z < spec.rootCells; ++z)
      for (int y = 0; y < spec.rootCells; ++y)
        for (int x = 0; x < spec.rootCells; ++x)
          refine({x * rootWidth, y * rootWidth, z * rootWidth}, spec.refineLevels);
    return CellSet::fromCells(std::move(cells));
  }

  // ------------------------------------------------------------------
  // JSON documents
  // ------------------------------------------------------------------

  namespace {

    [[noreturn]] void fail(const std::string &path, const std::string &why)
    {
      throw IngestError(path + ": " + why);
    }

    std::string join(const std::string &path, const std::string &key)
    {
      return path.empty() ? key : path + "." + key;
    }

    void rejectUnknown(const json &obj, const std::string &path, std::initializer_list<const char *> allowed)
    {
      if (!obj.is_object()) fail(path.empty() ? "document" : path, "expected an object");
      const std::set<std::string> keys(allowed.begin(), allowed.end());
      for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!keys.count(it.key())) fail(join(path, it.key()), "unknown field");
    }

    double number(const json &j, const std::string &path)
    {
      if (!j.is_number()) fail(path, "expected a number");
      return j.get<double>();
    }

    int integer(const json &j, const std::string &path)
    {
      if (!j.is_number_integer()) fail(path, "expected an integer");
      const int64_t v = j.get<int64_t>();
      if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        fail(path, "integer out of range");
      return int(v);
    }

    std::string string(const json &j, const std::string &path)
    {
      if (!j.is_string()) fail(path, "expected a string");
      return j.get<std::string>();
    }

    bool boolean(const json &j, const std::string &path)
    {
      if (!j.is_boolean()) fail(path, "expected true or false");
      return j.get<bool>();
    }

    std::vector<double> numbers(const json &j, const std::string &path, size_t n)
    {
      if (!j.is_array() || j.size() != n) fail(path, "expected an array of " + std::to_string(n) + " numbers");
      std::vector<double> v(n);
      for (size_t i = 0; i < n; ++i) v[i] = number(j[i], path + "[" + std::to_string(i) + "]");
      return v;
    }

    vec3d vec3dOf(const json &j, const std::string &path)
    {
      const auto v = numbers(j, path, 3);
      return {v[0], v[1], v[2]};
    }

    vec3f vec3fOf(const json &j, const std::string &path)
    {
      const auto v = numbers(j, path, 3);
      return {float(v[0]), float(v[1]), float(v[2])};
    }

    json parseDocument(const std::string &text)
    {
      try {
        return json::parse(text);
      } catch (const json::parse_error &e) {
        throw IngestError(std::string("document: ") + e.what());
      }
    }

    json toJson(const vec3d &v) { return json::array({v.x, v.y, v.z}); }
    json toJson(const vec3f &v) { return json::array({v.x, v.y, v.z}); }

  } // namespace

  TransferFunction parseTransferFunction(const std::string &text)
  {
    const json doc = parseDocument(text);
    rejectUnknown(doc, "", {"domain", "rgba", "unitExtinction"});
    TransferFunction tf;
    if (doc.contains("domain")) {
      const auto d = numbers(doc["domain"], "domain", 2);
      tf.domain = {float(d[0]), float(d[1])};
    }
    if (!doc.contains("rgba")) fail("rgba", "missing required field");
    const json &rgba = doc["rgba"];
    if (!rgba.is_array()) fail("rgba", "expected an array of [r,g,b,a] entries");
    for (size_t i = 0; i < rgba.size(); ++i) {
      const auto e = numbers(rgba[i], "rgba[" + std::to_string(i) + "]", 4);
      tf.rgba.push_back({float(e[0]), float(e[1]), float(e[2]), float(e[3])});
    }
    if (doc.contains("unitExtinction")) tf.unitExtinction = float(number(doc["unitExtinction"], "unitExtinction"));
    try {
      tf.validate();
    } catch (const std::invalid_argument &e) {
      throw IngestError(e.what());
    }
    return tf;
  }

  std::string serializeTransferFunction(const TransferFunction &tf)
  {
    json doc;
    doc["domain"] = json::array({tf.domain.lo, tf.domain.hi});
    json rgba = json::array();
    for (const RGBA &e : tf.rgba) rgba.push_back(json::array({e.r, e.g, e.b, e.a}));
    doc["rgba"] = rgba;
    doc["unitExtinction"] = tf.unitExtinction;
    return doc.dump(2);
  }

  std::string readTextFile(const std::filesystem::path &path)
  {
    std::ifstream in(path);
    if (!in) throw IngestError(path.string() + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  TransferFunction loadTransferFunction(const std::filesystem::path &path)
  {
    return parseTransferFunction(readTextFile(path));
  }

  RenderConfig parseRenderConfig(const std::string &text)
  {
    const json doc = parseDocument(text);
    rejectUnknown(doc, "",
                  {"traversal", "sampler", "mode", "spp", "maxBounces", "rrStart", "rrMinSurvival",
                   "rrMaxSurvival", "seed", "width", "height", "camera", "light", "ambient", "orderedBvh",
                   "majorantScale", "gridDims"});
    RenderConfig c;
    if (doc.contains("traversal")) {
      const auto m = parseTraversalMethod(string(doc["traversal"], "traversal"));
      if (!m) fail("traversal", "expected one of abr, brick-kd, brick-bvh, grid-dda, grid-bvh");
      c.traversal = *m;
    }
    if (doc.contains("sampler")) {
      const auto k = parseSamplerKind(string(doc["sampler"], "sampler"));
      if (!k) fail("sampler", "expected one of abr, abr-direct, ext-brick");
      c.sampler = *k;
    }
    if (doc.contains("mode")) {
      const auto m = parseRenderMode(string(doc["mode"], "mode"));
      if (!m) fail("mode", "expected dl or ms");
      c.mode = *m;
    }
    if (doc.contains("spp")) c.spp = integer(doc["spp"], "spp");
    if (doc.contains("maxBounces")) c.maxBounces = integer(doc["maxBounces"], "maxBounces");
    if (doc.contains("rrStart")) c.rrStart = integer(doc["rrStart"], "rrStart");
    if (doc.contains("rrMinSurvival")) c.rrMinSurvival = number(doc["rrMinSurvival"], "rrMinSurvival");
    if (doc.contains("rrMaxSurvival")) c.rrMaxSurvival = number(doc["rrMaxSurvival"], "rrMaxSurvival");
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
      c.seed = doc["seed"].get<uint64_t>();
    }
    if (doc.contains("width")) c.width = integer(doc["width"], "width");
    if (doc.contains("height")) c.height = integer(doc["height"], "height");
    if (doc.contains("camera")) {
      const json &cam = doc["camera"];
      rejectUnknown(cam, "camera", {"position", "lookAt", "up", "fovY"});
      if (cam.contains("position")) c.camera.position = vec3dOf(cam["position"], "camera.position");
      if (cam.contains("lookAt")) c.camera.lookAt = vec3dOf(cam["lookAt"], "camera.lookAt");
      if (cam.contains("up")) c.camera.up = vec3dOf(cam["up"], "camera.up");
      if (cam.contains("fovY")) c.camera.fovY = number(cam["fovY"], "camera.fovY");
    }
    if (doc.contains("light")) {
      const json &light = doc["light"];
      rejectUnknown(light, "light", {"position", "intensity"});
      if (light.contains("position")) c.light.position = vec3dOf(light["position"], "light.position");
      if (light.contains("intensity")) c.light.intensity = vec3fOf(light["intensity"], "light.intensity");
    }
    if (doc.contains("ambient")) c.ambient = vec3fOf(doc["ambient"], "ambient");
    if (doc.contains("orderedBvh")) c.orderedBvh = boolean(doc["orderedBvh"], "orderedBvh");
    if (doc.contains("majorantScale")) c.majorantScale = number(doc["majorantScale"], "majorantScale");
    if (doc.contains("gridDims")) {
      const json &g = doc["gridDims"];
      if (!g.is_array() || g.size() != 3) fail("gridDims", "expected an array of 3 integers");
      for (int a = 0; a < 3; ++a) c.gridDims[a] = integer(g[a], "gridDims[" + std::to_string(a) + "]");
    }
    try {
      c.validate();
    } catch (const std::invalid_argument &e) {
      throw IngestError(e.what());
    } catch (const ConfigurationError &e) {
      throw IngestError(std::string("sampler: ") + e.what());
    }
    return c;
  }

  std::string serializeRenderConfig(const RenderConfig &c)
  {
    json doc;
    doc["traversal"] = std::string(toString(c.traversal));
    doc["sampler"] = std::string(toString(c.sampler));
    doc["mode"] = std::string(toString(c.mode));
    doc["spp"] = c.spp;
    doc["maxBounces"] = c.maxBounces;
    doc["rrStart"] = c.rrStart;
    doc["rrMinSurvival"] = c.rrMinSurvival;
    doc["rrMaxSurvival"] = c.rrMaxSurvival;
    doc["seed"] = c.seed;
    doc["width"] = c.width;
    doc["height"] = c.height;
    doc["camera"] = {{"position", toJson(c.camera.position)},
                     {"lookAt", toJson(c.camera.lookAt)},
                     {"up", toJson(c.camera.up)},
                     {"fovY", c.camera.fovY}};
    doc["light"] = {{"position", toJson(c.light.position)}, {"intensity", toJson(c.light.intensity)}};
    doc["ambient"] = toJson(c.ambient);
    doc["orderedBvh"] = c.orderedBvh;
    doc["majorantScale"] = c.majorantScale;
    doc["gridDims"] = json::array({c.gridDims.x, c.gridDims.y, c.gridDims.z});
    return doc.dump(2);
  }

  RenderConfig loadRenderConfig(const std::filesystem::path &path)
  {
    return parseRenderConfig(readTextFile(path));
  }

} // ::amrpt
