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

#include "amrpt/service.h"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/core/detail/base64.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <map>
#include <thread>

namespace amrpt::service {

  using json = nlohmann::json;

  namespace {

    json boxJson(const box3d &b)
    {
      return json::array({json::array({b.lower.x, b.lower.y, b.lower.z}), json::array({b.upper.x, b.upper.y, b.upper.z})});
    }

    /*! "field: why" messages from the parsers */
    std::pair<std::string, std::string> splitFieldMessage(const std::string &what)
    {
      const size_t colon = what.find(": ");
      if (colon == std::string::npos) return {"document", what};
      return {what.substr(0, colon), what.substr(colon + 2)};
    }

  } // namespace

  std::string datasetsDocument(const std::vector<Dataset> &datasets)
  {
    json list = json::array();
    for (const Dataset &d : datasets) {
      int lo = kMaxLevel, hi = 0;
      for (const Cell &c : d.cells->cells) {
        lo = std::min(lo, c.level);
        hi = std::max(hi, c.level);
      }
      if (d.cells->cells.empty()) lo = hi = 0;
      list.push_back({{"name", d.name},
                      {"cells", d.cells->cells.size()},
                      {"levels", json::array({lo, hi})},
                      {"worldBounds", boxJson(d.cells->worldBounds)}});
    }
    return json{{"v", kWireVersion}, {"datasets", list}}.dump();
  }

  std::string base64Encode(std::string_view bytes)
  {
    namespace b64 = boost::beast::detail::base64;
    std::string out(b64::encoded_size(bytes.size()), '\0');
    out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
  }

  std::string frameMessage(uint64_t generation, int spp, const Image &image)
  {
    return json{{"v", kWireVersion},      {"type", "frame"},        {"generation", generation},
                {"spp", spp},             {"width", image.width},   {"height", image.height},
                {"encoding", "png"},      {"data", base64Encode(encodePNG(image))}}
        .dump();
  }

  std::string statsMessage(uint64_t generation, int spp, const RenderConfig &config, const FrameResult &pass)
  {
    const RayStats &s = pass.stats;
    json binLower = json::array();
    for (int k = 0; k < LogHistogram::kNumBins; ++k) binLower.push_back(LogHistogram::binLower(k));
    return json{{"v", kWireVersion},
                {"type", "stats"},
                {"generation", generation},
                {"spp", spp},
                {"method", std::string(toString(config.traversal))},
                {"sampler", std::string(toString(config.sampler))},
                {"mode", std::string(toString(config.mode))},
                {"rays", s.rays},
                {"raysPerSecond", pass.seconds > 0.0 ? double(pass.cameraSamples) / pass.seconds : 0.0},
                {"meanPartitionsPerRay", s.meanPartitionsPerRay()},
                {"meanVolumeSamples", s.meanVolumeSamples()},
                {"meanNullCollisions", s.meanNullCollisions()},
                {"histograms",
                 {{"binLower", binLower},
                  {"partitionsPerRay", s.partitionsPerRay.bins},
                  {"samplesPerPartition", s.samplesPerPartition.bins}}}}
        .dump();
  }

  std::string errorMessage(uint64_t generation, const std::string &field, const std::string &message)
  {
    return json{{"v", kWireVersion}, {"type", "error"}, {"generation", generation}, {"field", field}, {"message", message}}
        .dump();
  }

  std::string ackMessage(uint64_t generation, const std::string &forType)
  {
    return json{{"v", kWireVersion}, {"type", "ack"}, {"for", forType}, {"generation", generation}}.dump();
  }

  // ------------------------------------------------------------------
  // session
  // ------------------------------------------------------------------

  Session::Session(std::string id, const Dataset &ds, int threads, int maxSpp)
      : sessionID(std::move(id)), dataset(ds.name), threads(threads), maxSpp(std::max(1, maxSpp)),
        scene(*ds.cells, ds.tf, ds.config.gridDims), renderConfig(ds.config)
  {
    renderConfig.validate();
    accum.reset(renderConfig.width, renderConfig.height, gen.load());
  }

  int Session::spp() const
  {
    std::lock_guard<std::mutex> lock(mutex);
    return accum.spp;
  }

  RenderConfig Session::config() const
  {
    std::lock_guard<std::mutex> lock(mutex);
    return renderConfig;
  }

  BuildCounters Session::counters() const
  {
    std::lock_guard<std::mutex> lock(mutex);
    return scene.counters();
  }

  std::vector<float> Session::gridMajorants() const
  {
    std::lock_guard<std::mutex> lock(mutex);
    return scene.grid().majorants;
  }

  std::string Session::handleMessage(const std::string &text)
  {
    json msg;
    try {
      msg = json::parse(text);
    } catch (const json::exception &e) {
      return errorMessage(gen.load(), "document", e.what());
    }
    if (!msg.is_object()) return errorMessage(gen.load(), "document", "expected an object");
    if (!msg.contains("v") || msg["v"] != kWireVersion)
      return errorMessage(gen.load(), "v", "expected protocol version 1");
    if (!msg.contains("type") || !msg["type"].is_string())
      return errorMessage(gen.load(), "type", "expected a string");
    const std::string type = msg["type"];
    static const char *known[] = {"camera", "tf", "method", "mode", "gridDims"};
    if (std::find(std::begin(known), std::end(known), type) == std::end(known))
      return errorMessage(gen.load(), "type", "unknown message type '" + type + "'");
    for (const auto &[key, value] : msg.items())
      if (key != "v" && key != "type" && key != "payload")
        return errorMessage(gen.load(), key, "unknown field");
    if (!msg.contains("payload")) return errorMessage(gen.load(), "payload", "missing required field");
    std::string reply = apply(type, msg["payload"]);
    workCv.notify_all();
    return reply;
  }

  std::string Session::apply(const std::string &type, const json &payload)
  {
    std::lock_guard<std::mutex> lock(mutex);
    json doc = json::parse(serializeRenderConfig(renderConfig));
    std::optional<TransferFunction> newTF;
    try {
      if (type == "tf") {
        newTF = parseTransferFunction(payload.dump());
      } else if (type == "camera") {
        if (!payload.is_object()) return errorMessage(gen.load(), "payload", "expected an object");
        for (const auto &[key, value] : payload.items()) doc["camera"][key] = value;
      } else if (type == "method") {
        if (payload.is_string()) {
          doc["traversal"] = payload;
        } else if (payload.is_object()) {
          for (const auto &[key, value] : payload.items()) {
            if (key != "traversal" && key != "sampler" && key != "orderedBvh")
              return errorMessage(gen.load(), "payload." + key, "unknown field");
            doc[key] = value;
          }
        } else {
          return errorMessage(gen.load(), "payload", "expected a traversal name or an object");
        }
      } else if (type == "mode") {
        doc["mode"] = payload.is_object() && payload.contains("mode") ? payload["mode"] : payload;
      } else if (type == "gridDims") {
        doc["gridDims"] = payload;
      }
    } catch (const std::exception &e) {
      const auto [field, why] = splitFieldMessage(e.what());
      return errorMessage(gen.load(), field, why);
    }

    RenderConfig next;
    try {
      next = parseRenderConfig(doc.dump());
    } catch (const std::exception &e) {
      const auto [field, why] = splitFieldMessage(e.what());
      return errorMessage(gen.load(), field, why);
    }

    if (newTF) scene.setTransferFunction(*newTF);
    if (type == "gridDims") scene.setGridDims(next.gridDims);
    renderConfig = next;
    const uint64_t g = ++gen;
    accum.reset(renderConfig.width, renderConfig.height, g);
    return ackMessage(g, type);
  }

  std::optional<FramePacket> Session::renderPass()
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (accum.spp >= maxSpp) return std::nullopt;
    const FrameResult pass = renderFrame(scene, renderConfig, accum, threads);
    FramePacket p;
    p.generation = accum.generation;
    p.spp = accum.spp;
    p.frame = frameMessage(p.generation, p.spp, meanImage(accum));
    p.stats = statsMessage(p.generation, p.spp, renderConfig, pass);
    return p;
  }

  void Session::waitForWork(const std::atomic<bool> &stop, std::chrono::milliseconds timeout)
  {
    std::unique_lock<std::mutex> lock(mutex);
    workCv.wait_for(lock, timeout, [&] { return stop.load() || accum.spp < maxSpp; });
  }

  // ------------------------------------------------------------------
  // network front end
  // ------------------------------------------------------------------

  namespace net = boost::asio;
  namespace beast = boost::beast;
  namespace http = beast::http;
  namespace websocket = beast::websocket;
  using tcp = net::ip::tcp;

  namespace {

    std::map<std::string, std::string> parseQuery(std::string_view target)
    {
      std::map<std::string, std::string> out;
      const size_t q = target.find('?');
      if (q == std::string_view::npos) return out;
      std::string_view rest = target.substr(q + 1);
      while (!rest.empty()) {
        const size_t amp = rest.find('&');
        const std::string_view pair = rest.substr(0, amp);
        const size_t eq = pair.find('=');
        if (eq != std::string_view::npos) out[std::string(pair.substr(0, eq))] = std::string(pair.substr(eq + 1));
        if (amp == std::string_view::npos) break;
        rest = rest.substr(amp + 1);
      }
      return out;
    }

    bool validSessionID(const std::string &id)
    {
      if (id.empty() || id.size() > 64) return false;
      return std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(uint8_t(c)) || c == '-' || c == '_'; });
    }

    std::string_view pathOf(std::string_view target) { return target.substr(0, target.find('?')); }

  } // namespace

  struct SessionSlot {
    std::shared_ptr<Session> session;
    bool attached = false;
  };

  struct Server::Impl {
    std::vector<Dataset> datasets;
    ServerOptions options;
    mutable std::mutex sessionsMutex;
    std::map<std::string, SessionSlot> sessions;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::thread thread;

    void accept();
    /*! claims (creating if needed) a session; empty on conflict */
    std::shared_ptr<Session> attach(const std::string &id, const std::string &datasetName, std::string &error,
                                    http::status &status);
    void detach(const std::string &id)
    {
      std::lock_guard<std::mutex> lock(sessionsMutex);
      auto it = sessions.find(id);
      if (it != sessions.end()) it->second.attached = false;
    }
  };

  namespace {

    class StreamConnection : public std::enable_shared_from_this<StreamConnection> {
     public:
      StreamConnection(tcp::socket socket, std::shared_ptr<Session> session, Server::Impl *server)
          : ws(std::move(socket)), session(std::move(session)), server(server)
      {}

      ~StreamConnection()
      {
        stopRender();
        server->detach(session->id());
      }

      void run(http::request<http::string_body> req)
      {
        ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
          if (ec) return;
          self->startRender();
          self->read();
        });
      }

     private:
      void startRender()
      {
        std::weak_ptr<StreamConnection> weak = weak_from_this();
        auto executor = ws.get_executor();
        renderThread = std::thread([this, weak, executor] {
          while (!stopping.load()) {
            std::optional<FramePacket> packet;
            try {
              packet = session->renderPass();
            } catch (const std::exception &e) {
              net::post(executor, [weak, msg = std::string(e.what())] {
                if (auto self = weak.lock()) self->queueReply(errorMessage(self->session->generation(), "render", msg));
              });
              session->waitForWork(stopping, std::chrono::milliseconds(200));
              continue;
            }
            if (!packet) {
              session->waitForWork(stopping, std::chrono::milliseconds(200));
              continue;
            }
            frames.put(std::move(*packet));
            net::post(executor, [weak] {
              if (auto self = weak.lock()) self->pump();
            });
          }
        });
      }

      void stopRender()
      {
        stopping = true;
        session->notify();
        if (renderThread.joinable()) renderThread.join();
      }

      void read()
      {
        ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, size_t) {
          if (ec) {
            self->closed = true;
            self->stopping = true;
            return;
          }
          const std::string text = beast::buffers_to_string(self->buffer.data());
          self->buffer.consume(self->buffer.size());
          self->queueReply(self->session->handleMessage(text));
          self->read();
        });
      }

      void queueReply(std::string msg)
      {
        outbox.push_back(std::move(msg));
        pump();
      }

      void pump()
      {
        if (writing || closed) return;
        if (outbox.empty()) {
          auto packet = frames.take();
          // a pass that finished just before a generation bump is stale
          if (!packet || packet->generation != session->generation()) return;
          outbox.push_back(std::move(packet->frame));
          outbox.push_back(std::move(packet->stats));
        }
        writing = true;
        ws.text(true);
        ws.async_write(net::buffer(outbox.front()), [self = shared_from_this()](beast::error_code ec, size_t) {
          self->writing = false;
          self->outbox.pop_front();
          if (ec) {
            self->closed = true;
            self->stopping = true;
            return;
          }
          self->pump();
        });
      }

      websocket::stream<beast::tcp_stream> ws;
      std::shared_ptr<Session> session;
      Server::Impl *server;
      beast::flat_buffer buffer;
      std::deque<std::string> outbox;
      FrameMailbox frames;
      std::thread renderThread;
      std::atomic<bool> stopping{false};
      bool writing = false;
      bool closed = false;
    };

    class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
     public:
      HttpConnection(tcp::socket socket, Server::Impl *server) : stream(std::move(socket)), server(server) {}

      void read()
      {
        req = {};
        stream.expires_after(std::chrono::seconds(30));
        http::async_read(stream, buffer, req, [self = shared_from_this()](beast::error_code ec, size_t) {
          if (ec) return;
          self->handle();
        });
      }

     private:
      void handle()
      {
        const std::string target(req.target());
        const std::string_view path = pathOf(target);
        if (websocket::is_upgrade(req)) {
          if (path != "/stream") return respond(http::status::not_found, "unknown endpoint");
          const auto query = parseQuery(target);
          const auto it = query.find("session");
          if (it == query.end() || !validSessionID(it->second))
            return respond(http::status::bad_request, "session: expected 1-64 characters of [A-Za-z0-9_-]");
          const auto ds = query.find("dataset");
          std::string error;
          http::status status = http::status::ok;
          auto session = server->attach(it->second, ds == query.end() ? "" : ds->second, error, status);
          if (!session) return respond(status, error);
          stream.expires_never();
          std::make_shared<StreamConnection>(stream.release_socket(), std::move(session), server)->run(std::move(req));
          return;
        }
        if (req.method() == http::verb::get && path == "/datasets")
          return respond(http::status::ok, datasetsDocument(server->datasets), "application/json");
        respond(http::status::not_found, "unknown endpoint");
      }

      void respond(http::status status, std::string body, const char *contentType = "text/plain")
      {
        auto res = std::make_shared<http::response<http::string_body>>(status, req.version());
        res->set(http::field::content_type, contentType);
        res->set(http::field::access_control_allow_origin, "*");
        res->keep_alive(req.keep_alive());
        res->body() = std::move(body);
        res->prepare_payload();
        http::async_write(stream, *res, [self = shared_from_this(), res](beast::error_code ec, size_t) {
          if (ec) return;
          if (res->need_eof()) {
            beast::error_code ignored;
            self->stream.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
          }
          self->read();
        });
      }

      beast::tcp_stream stream;
      Server::Impl *server;
      beast::flat_buffer buffer;
      http::request<http::string_body> req;
    };

  } // namespace

  void Server::Impl::accept()
  {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpConnection>(std::move(socket), this)->read();
      accept();
    });
  }

  std::shared_ptr<Session> Server::Impl::attach(const std::string &id, const std::string &datasetName,
                                                std::string &error, http::status &status)
  {
    std::lock_guard<std::mutex> lock(sessionsMutex);
    auto it = sessions.find(id);
    if (it != sessions.end()) {
      if (it->second.attached) {
        status = http::status::conflict;
        error = "session: '" + id + "' already has a connected client";
        return nullptr;
      }
      if (!datasetName.empty() && datasetName != it->second.session->datasetName()) {
        status = http::status::conflict;
        error = "dataset: session '" + id + "' is bound to '" + it->second.session->datasetName() + "'";
        return nullptr;
      }
      it->second.attached = true;
      return it->second.session;
    }
    const Dataset *ds = nullptr;
    for (const Dataset &d : datasets)
      if (datasetName.empty() || d.name == datasetName) {
        ds = &d;
        break;
      }
    if (!ds) {
      status = http::status::not_found;
      error = "dataset: no dataset named '" + datasetName + "'";
      return nullptr;
    }
    auto session = std::make_shared<Session>(id, *ds, options.renderThreads, options.maxSpp);
    sessions[id] = {session, true};
    return session;
  }

  Server::Server(std::vector<Dataset> datasets, const ServerOptions &options) : impl(std::make_unique<Impl>())
  {
    if (datasets.empty()) throw std::invalid_argument("datasets: need at least one dataset");
    impl->datasets = std::move(datasets);
    impl->options = options;
    const tcp::endpoint endpoint(net::ip::make_address(options.address), options.port);
    impl->acceptor.open(endpoint.protocol());
    impl->acceptor.set_option(net::socket_base::reuse_address(true));
    impl->acceptor.bind(endpoint);
    impl->acceptor.listen();
    impl->accept();
  }

  Server::~Server() { stop(); }

  uint16_t Server::port() const { return impl->acceptor.local_endpoint().port(); }

  void Server::start()
  {
    impl->thread = std::thread([this] { impl->ioc.run(); });
  }

  void Server::run() { impl->ioc.run(); }

  void Server::stop()
  {
    if (!impl) return;
    net::post(impl->ioc, [this] {
      beast::error_code ignored;
      impl->acceptor.close(ignored);
    });
    impl->ioc.stop();
    if (impl->thread.joinable()) impl->thread.join();
  }

  std::shared_ptr<Session> Server::session(const std::string &id) const
  {
    std::lock_guard<std::mutex> lock(impl->sessionsMutex);
    auto it = impl->sessions.find(id);
    return it == impl->sessions.end() ? nullptr : it->second.session;
  }

} // namespace amrpt::service
