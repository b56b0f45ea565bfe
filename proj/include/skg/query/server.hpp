#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "skg/query/engine.hpp"

namespace httplib {
class Server;
}

namespace skg::query {

/// HTTP+JSON front end over a QueryEngine. Handlers only read the engine
/// snapshot they pick up at request start; set_engine swaps snapshots.
class ApiServer {
 public:
  explicit ApiServer(std::shared_ptr<const QueryEngine> engine);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  void set_engine(std::shared_ptr<const QueryEngine> engine);
  std::shared_ptr<const QueryEngine> engine() const;

  /// Serves files from `dir` under "/ui/".
  void mount_static(const std::filesystem::path& dir);

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws IoError when binding fails.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  std::unique_ptr<httplib::Server> server_;
  mutable std::mutex mu_;
  std::shared_ptr<const QueryEngine> engine_;
  std::thread thread_;
};

}  // namespace skg::query
