#include "efold/teleop/server.hpp"

#include <chrono>
#include <ctime>
#include <deque>
#include <set>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "efold/errors.hpp"

namespace efold::teleop {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

std::string session_prefix() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

}  // namespace

class Connection;

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
    ServerOptions options;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    net::signal_set signals{ioc};
    std::set<std::shared_ptr<Connection>> connections;
    std::string prefix = session_prefix();
    int next_id = 0;
    bool stopping = false;

    void log(const std::string& line) const {
        if (options.log) options.log(line);
    }
    void accept();
    void shutdown();
};

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, Server::Impl& server, std::string id)
        : ws_(std::move(socket)), timer_(ws_.get_executor()), server_(server),
          session_(std::move(id), server.options.session) {}

    void start() {
        ws_.text(true);
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (ec) return self->drop("handshake: " + ec.message());
            self->read();
        });
    }

    /// Persist the log, tell the client, close.
    void finish() {
        if (closing_) return;
        closing_ = true;
        timer_.cancel();
        if (auto end = session_.finish(SessionStatus::ended)) send(*end);
        close_after_flush_ = true;
        if (!writing_) close();
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                if (ec != websocket::error::closed) self->server_.log(self->session_.id() + ": read: " + ec.message());
                return self->drop({});
            }
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->on_message(text);
            if (!self->closing_) self->read();
        });
    }

    void on_message(const std::string& text) {
        const bool was_running = session_.status() == SessionStatus::running;
        auto replies = handle_client_message(session_, text, [this](const std::string& w) {
            server_.log(session_.id() + ": " + w);
        });
        for (auto& r : replies) send(r);
        const bool running = session_.status() == SessionStatus::running;
        // Every (re)start restarts the clock; lockstep sessions tick on goals instead.
        if (running && session_.pacing() == Pacing::realtime && (!was_running || is_reset(replies)))
            schedule(Clock::now() + period());
    }

    static bool is_reset(const std::vector<nlohmann::json>& replies) {
        for (const auto& r : replies)
            if (r.value("type", "") == "ack" && r.value("detail", "") == "reset") return true;
        return false;
    }

    Clock::duration period() const {
        return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(session_.dt()));
    }

    void schedule(Clock::time_point when) {
        deadline_ = when;
        timer_.expires_at(when);
        timer_.async_wait([self = shared_from_this(), gen = ++generation_](beast::error_code ec) {
            if (ec || gen != self->generation_ || self->closing_) return;
            self->on_tick();
        });
    }

    void on_tick() {
        if (session_.status() != SessionStatus::running || session_.pacing() != Pacing::realtime) return;
        const double late = std::chrono::duration<double, std::milli>(Clock::now() - deadline_).count();
        session_.note_jitter(late);
        for (auto& m : session_.tick()) send(m);
        if (session_.status() == SessionStatus::running) {
            auto next = deadline_ + period();
            // Fell more than a frame behind: skip ahead rather than burst.
            if (next < Clock::now()) next = Clock::now() + period();
            schedule(next);
        }
    }

    void send(const nlohmann::json& message) {
        queue_.push_back(message.dump());
        if (!writing_) write();
    }

    void write() {
        writing_ = true;
        ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->queue_.pop_front();
            if (ec) {
                self->writing_ = false;
                return self->drop("write: " + ec.message());
            }
            if (!self->queue_.empty()) return self->write();
            self->writing_ = false;
            if (self->close_after_flush_) self->close();
        });
    }

    void close() {
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->drop({}); });
    }

    // Connection gone: keep the log even if the client vanished mid-session.
    void drop(const std::string& why) {
        if (!why.empty()) server_.log(session_.id() + ": " + why);
        if (!dropped_) {
            dropped_ = true;
            timer_.cancel();
            if (auto end = session_.finish(SessionStatus::ended))
                server_.log(session_.id() + ": log persisted at " + end->value("log_path", ""));
            server_.connections.erase(shared_from_this());
            if (server_.stopping && server_.connections.empty()) server_.ioc.stop();
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    net::steady_timer timer_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    Server::Impl& server_;
    Session session_;
    Clock::time_point deadline_{};
    std::uint64_t generation_ = 0;
    bool writing_ = false;
    bool closing_ = false;
    bool close_after_flush_ = false;
    bool dropped_ = false;
};

void Server::Impl::accept() {
    acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            if (!self->stopping) self->log("accept: " + ec.message());
            return;
        }
        auto conn = std::make_shared<Connection>(std::move(socket), *self,
                                                 self->prefix + "-" + std::to_string(++self->next_id));
        self->connections.insert(conn);
        conn->start();
        self->accept();
    });
}

void Server::Impl::shutdown() {
    if (stopping) return;
    stopping = true;
    beast::error_code ignored;
    acceptor.close(ignored);
    signals.cancel(ignored);
    if (connections.empty()) return ioc.stop();
    for (const auto& c : std::vector(connections.begin(), connections.end())) c->finish();
    // Clients that never answer the close handshake must not hold us hostage.
    auto grace = std::make_shared<net::steady_timer>(ioc, std::chrono::seconds(2));
    grace->async_wait([grace, this](beast::error_code) { ioc.stop(); });
}

Server::Server(ServerOptions options) : impl_(std::make_shared<Impl>()) {
    impl_->options = std::move(options);
    beast::error_code ec;
    const auto address = net::ip::make_address(impl_->options.address, ec);
    if (ec) throw ConfigError("bad bind address '" + impl_->options.address + "': " + ec.message());
    const tcp::endpoint endpoint(address, impl_->options.port);
    auto& acc = impl_->acceptor;
    acc.open(endpoint.protocol(), ec);
    if (!ec) acc.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acc.bind(endpoint, ec);
    if (!ec) acc.listen(net::socket_base::max_listen_connections, ec);
    if (ec)
        throw RuntimeFault("cannot listen on " + impl_->options.address + ":" + std::to_string(impl_->options.port) +
                           ": " + ec.message());
}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run(bool handle_signals) {
    if (handle_signals) {
        impl_->signals.add(SIGINT);
        impl_->signals.add(SIGTERM);
        impl_->signals.async_wait([impl = impl_](beast::error_code ec, int) {
            if (!ec) impl->shutdown();
        });
    }
    impl_->accept();
    impl_->ioc.run();
}

void Server::stop() {
    net::post(impl_->ioc, [impl = impl_] { impl->shutdown(); });
}

}  // namespace efold::teleop
