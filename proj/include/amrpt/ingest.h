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

#include "amrpt/transport.h"

#include <filesystem>
#include <string>

namespace amrpt {

  /*! malformed input file or document; the message names the field or
      byte offset at fault */
  class IngestError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  // ------------------------------------------------------------------
  // binary cell files
  // ------------------------------------------------------------------

  inline constexpr char kCellMagic[4] = {'A', 'M', 'R', 'C'};
  inline constexpr uint32_t kCellFileVersion = 1;
  inline constexpr size_t kCellHeaderBytes = 24;
  inline constexpr size_t kCellRecordBytes = 16;

  /*! writes `cells` (int32 x,y,z,level records) and `scalars` (float32) */
  void saveCells(const std::filesystem::path &cellsPath, const std::filesystem::path &scalarsPath,
                 const CellSet &cellSet);

  /*! reads and validates; throws IngestError on format problems and
      InvalidCellSet on geometric ones */
  CellSet loadCells(const std::filesystem::path &cellsPath, const std::filesystem::path &scalarsPath);

  // ------------------------------------------------------------------
  // synthetic datasets
  // ------------------------------------------------------------------

  enum class SyntheticKind { SPHERE_SHELLS, TURBULENCE, TEAPOT_IN_STADIUM };
  std::string_view toString(SyntheticKind k);
  std::optional<SyntheticKind> parseSyntheticKind(std::string_view s);

  struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::SPHERE_SHELLS;
    uint64_t seed = 0;
    /*! root cells are at this level; refinement goes down to level 0 */
    int refineLevels = 3;
    /*! a cell is refined when the field's sampled range over it exceeds this */
    double gradientThreshold = 0.1;
    /*! root grid resolution per axis */
    int rootCells = 4;
  };

  /*! pure function of the spec; throws std::invalid_argument for
      refineLevels outside [0,6] or rootCells < 1 */
  CellSet generate(const SyntheticSpec &spec);

  /*! the analytic field the generator samples, in finest-level units */
  double syntheticField(const SyntheticSpec &spec, const vec3d &x);

  /*! sub-box of the teapot fixture holding the high-frequency blob */
  box3d teapotBlobBounds(const SyntheticSpec &spec);

  // ------------------------------------------------------------------
  // JSON documents
  // ------------------------------------------------------------------

  TransferFunction parseTransferFunction(const std::string &text);
  std::string serializeTransferFunction(const TransferFunction &tf);
  TransferFunction loadTransferFunction(const std::filesystem::path &path);

  /*! missing fields keep their defaults; unknown fields are rejected */
  RenderConfig parseRenderConfig(const std::string &text);
  std::string serializeRenderConfig(const RenderConfig &config);
  RenderConfig loadRenderConfig(const std::filesystem::path &path);

  std::string readTextFile(const std::filesystem::path &path);

} // ::amrpt
