#include "efold/teleop/client.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "efold/errors.hpp"

namespace efold::teleop {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

struct Client::Impl {
    net::io_context ioc;
    websocket::stream<tcp::socket> ws{ioc};
    beast::flat_buffer buffer;
};

Client::Client(const std::string& host, unsigned short port) : impl_(std::make_unique<Impl>()) {
    try {
        tcp::resolver resolver(impl_->ioc);
        const auto results = resolver.resolve(host, std::to_string(port));
        net::connect(impl_->ws.next_layer(), results.begin(), results.end());
        impl_->ws.text(true);
        impl_->ws.handshake(host + ":" + std::to_string(port), "/");
    } catch (const boost::system::system_error& e) {
        throw RuntimeFault("cannot connect to " + host + ":" + std::to_string(port) + ": " + e.what());
    }
}

Client::~Client() {
    try {
        close();
    } catch (...) {
    }
}

void Client::send(const json& message) { send_text(message.dump()); }

void Client::send_text(const std::string& text) {
    try {
        impl_->ws.write(net::buffer(text));
    } catch (const boost::system::system_error& e) {
        throw RuntimeFault(std::string("send failed: ") + e.what());
    }
}

json Client::receive() {
    try {
        impl_->buffer.consume(impl_->buffer.size());
        impl_->ws.read(impl_->buffer);
    } catch (const boost::system::system_error& e) {
        throw RuntimeFault(std::string("receive failed: ") + e.what());
    }
    return json::parse(beast::buffers_to_string(impl_->buffer.data()));
}

json Client::receive_until(const std::string& type, std::vector<json>* skipped) {
    for (;;) {
        json m = receive();
        if (m.value("type", "") == type) return m;
        if (skipped) skipped->push_back(std::move(m));
    }
}

void Client::close() {
    if (!impl_->ws.is_open()) return;
    beast::error_code ec;
    impl_->ws.close(websocket::close_code::normal, ec);
    // Drain until the server's close frame arrives.
    while (!ec) {
        impl_->buffer.consume(impl_->buffer.size());
        impl_->ws.read(impl_->buffer, ec);
    }
}

RemoteReplay replay_remote(Client& client, const std::vector<double>& goals, std::uint64_t seed, SensorKind sensor,
                           const std::string& checkpoint) {
    json start{{"type", "control"},
               {"action", "start"},
               {"mode", "free"},
               {"pacing", "lockstep"},
               {"sensor", std::string(to_string(sensor))},
               {"seed", seed}};
    if (!checkpoint.empty()) start["checkpoint"] = checkpoint;
    client.send(start);
    const json reply = client.receive();
    if (reply.value("type", "") != "ack")
        throw RuntimeFault("server refused start: " + reply.value("detail", reply.dump()));

    RemoteReplay out;
    for (double g : goals) {
        client.send({{"type", "goal"}, {"t_ms", 0}, {"angle_rad", g}});
        json m = client.receive_until("state");
        const bool dropped = m.value("dropped", false);
        out.states.push_back(std::move(m));
        if (dropped) {
            // The server closes the log on a drop and says so right away.
            out.session_end = client.receive_until("session_end");
            client.send({{"type", "control"}, {"action", "stop"}});
            client.receive_until("ack");
            return out;
        }
    }
    client.send({{"type", "control"}, {"action", "stop"}});
    out.session_end = client.receive_until("session_end");
    return out;
}

}  // namespace efold::teleop
