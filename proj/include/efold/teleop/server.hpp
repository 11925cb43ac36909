#pragma once

#include <functional>
#include <memory>
#include <string>

#include "efold/teleop/session.hpp"

namespace efold::teleop {

struct ServerOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8765;  // 0 picks an ephemeral port
    SessionOptions session;
    std::function<void(const std::string&)> log;  // diagnostics; may be empty
};

/// Websocket teleop service. One io_context thread owns every connection;
/// each connection gets its own Session and a 1/dt tick timer.
class Server {
public:
    /// Binds immediately; throws RuntimeFault if the address is unavailable.
    explicit Server(ServerOptions options);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    unsigned short port() const;

    /// Serves until stop() (or SIGINT/SIGTERM when `handle_signals`).
    void run(bool handle_signals = false);

    /// Thread-safe. Finalizes every session (logs persisted), closes the
    /// sockets and makes run() return.
    void stop();

    struct Impl;  // opaque; public only so connection handlers can name it

private:
    std::shared_ptr<Impl> impl_;
};

}  // namespace efold::teleop
