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

#include "amrpt/bench.h"
#include "amrpt/ingest.h"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace amrpt::service {

  inline constexpr int kWireVersion = 1;

  /*! a dataset the service can open sessions on */
  struct Dataset {
    std::string name;
    std::shared_ptr<const CellSet> cells;
    TransferFunction tf;
    RenderConfig config;
  };

  /*! body of GET /datasets: {"v":1,"datasets":[{name,cells,levels,worldBounds},...]} */
  std::string datasetsDocument(const std::vector<Dataset> &datasets);

  /*! RFC 4648 base64 with padding */
  std::string base64Encode(std::string_view bytes);

  /*! server-side wire messages */
  std::string frameMessage(uint64_t generation, int spp, const Image &image);
  std::string statsMessage(uint64_t generation, int spp, const RenderConfig &config, const FrameResult &pass);
  std::string errorMessage(uint64_t generation, const std::string &field, const std::string &message);
  std::string ackMessage(uint64_t generation, const std::string &forType);

  /*! one render pass worth of outbound messages */
  struct FramePacket {
    uint64_t generation = 0;
    int spp = 0;
    std::string frame;
    std::string stats;
  };

  /*! back-pressure between a render loop and a slow writer. The first
      frame of a generation is kept until taken; after it only the newest
      frame is held, so a lagging reader skips intermediate passes but never
      sees them out of order and always sees spp 1 after a bump. */
  class FrameMailbox {
   public:
    void put(FramePacket packet)
    {
      std::lock_guard<std::mutex> lock(mutex);
      if (packet.spp == 1 || (first && first->generation != packet.generation)) {
        if (first) ++numDropped;
        first.reset();
      }
      if (latest) ++numDropped;
      latest.reset();
      if (packet.spp == 1)
        first = std::move(packet);
      else
        latest = std::move(packet);
    }
    std::optional<FramePacket> take()
    {
      std::lock_guard<std::mutex> lock(mutex);
      std::optional<FramePacket> out;
      if (first) {
        out = std::move(first);
        first.reset();
      } else {
        out = std::move(latest);
        latest.reset();
      }
      return out;
    }
    uint64_t dropped() const
    {
      std::lock_guard<std::mutex> lock(mutex);
      return numDropped;
    }

   private:
    mutable std::mutex mutex;
    std::optional<FramePacket> first, latest;
    uint64_t numDropped = 0;
  };

  /*! a client's renderer state: one scene, one config, one accumulator.
      Message handling and render passes are serialized by one mutex, so a
      pass always sees a single configuration. */
  class Session {
   public:
    Session(std::string id, const Dataset &dataset, int threads = 0, int maxSpp = 4096);

    /*! applies a client message and returns the ack or error reply. Every
        accepted message bumps the generation exactly once and restarts
        accumulation; rejected ones change nothing. */
    std::string handleMessage(const std::string &text);

    /*! one progressive pass, or nothing once maxSpp is reached */
    std::optional<FramePacket> renderPass();

    /*! blocks until a pass would render or `stop` is set, up to `timeout` */
    void waitForWork(const std::atomic<bool> &stop, std::chrono::milliseconds timeout);
    void notify() { workCv.notify_all(); }

    const std::string &id() const { return sessionID; }
    const std::string &datasetName() const { return dataset; }
    uint64_t generation() const { return gen.load(); }
    int spp() const;
    RenderConfig config() const;
    BuildCounters counters() const;
    std::vector<float> gridMajorants() const;

   private:
    std::string apply(const std::string &type, const nlohmann::json &payload);

    std::string sessionID;
    std::string dataset;
    int threads;
    int maxSpp;
    mutable std::mutex mutex;
    std::condition_variable workCv;
    Scene scene;
    RenderConfig renderConfig;
    Accumulator accum;
    std::atomic<uint64_t> gen{1};
  };

  struct ServerOptions {
    std::string address = "127.0.0.1";
    uint16_t port = 8080;  // 0 picks a free port
    int renderThreads = 0;
    int maxSpp = 4096;
  };

  /*! HTTP + WebSocket front end: GET /datasets and /stream?session=ID
      (optionally &dataset=NAME). One render loop per connected session. */
  class Server {
   public:
    Server(std::vector<Dataset> datasets, const ServerOptions &options);
    ~Server();
    Server(const Server &) = delete;
    Server &operator=(const Server &) = delete;

    uint16_t port() const;
    /*! serves on a background thread */
    void start();
    /*! serves on the calling thread until stop() */
    void run();
    void stop();

    /*! session by id, if it was ever opened */
    std::shared_ptr<Session> session(const std::string &id) const;

    struct Impl;  // opaque; public so connection types in the source can name it

   private:
    std::unique_ptr<Impl> impl;
  };

} // namespace amrpt::service
