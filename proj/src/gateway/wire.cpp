#include <sys/socket.h>

#include <condition_variable>

#include <boost/asio.hpp>

#include "gravbench/gateway/gateway.hpp"

namespace gravbench::gateway {

namespace asio = boost::asio;
using asio::ip::tcp;

std::string encode_frame(const std::string& payload) {
  if (payload.size() > kMaxFrame) throw Error(ErrorCode::format, "frame too large");
  const auto n = static_cast<uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out += payload;
  return out;
}

namespace {

uint32_t read_length(const unsigned char* p) {
  return (uint32_t{p[0]} << 24) | (uint32_t{p[1]} << 16) | (uint32_t{p[2]} << 8) | uint32_t{p[3]};
}

std::string read_frame(tcp::socket& sock) {
  unsigned char head[4];
  asio::read(sock, asio::buffer(head, 4));
  const uint32_t n = read_length(head);
  if (n > kMaxFrame) throw Error(ErrorCode::format, "frame exceeds " + std::to_string(kMaxFrame) + " bytes");
  std::string body(n, '\0');
  if (n > 0) asio::read(sock, asio::buffer(body.data(), n));
  return body;
}

void write_frame(tcp::socket& sock, const std::string& payload) {
  asio::write(sock, asio::buffer(encode_frame(payload)));
}

tcp::endpoint resolve(asio::io_context& io, const std::string& host, uint16_t port) {
  tcp::resolver resolver(io);
  boost::system::error_code ec;
  auto results = resolver.resolve(host, std::to_string(port), ec);
  if (ec || results.empty()) throw Error(ErrorCode::io, "cannot resolve " + host + ": " + ec.message());
  return *results.begin();
}

}  // namespace

std::optional<std::string> decode_frame(std::string& buffer) {
  if (buffer.size() < 4) return std::nullopt;
  const uint32_t n = read_length(reinterpret_cast<const unsigned char*>(buffer.data()));
  if (n > kMaxFrame) throw Error(ErrorCode::format, "frame too large");
  if (buffer.size() < 4 + static_cast<size_t>(n)) return std::nullopt;
  std::string payload = buffer.substr(4, n);
  buffer.erase(0, 4 + static_cast<size_t>(n));
  return payload;
}

// ---- server ----------------------------------------------------------------

struct Server::Impl {
  Gateway& gateway;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::atomic<bool> stopping{false};
  std::thread background;
  std::mutex mutex;
  std::condition_variable wake;
  std::vector<std::shared_ptr<tcp::socket>> connections;
  std::vector<std::thread> workers;

  explicit Impl(Gateway& g) : gateway(g) {}

  void serve(std::shared_ptr<tcp::socket> sock) {
    try {
      while (!stopping) {
        std::string request;
        try {
          request = read_frame(*sock);
        } catch (const Error& e) {
          write_frame(*sock, nlohmann::json{{"kind", "error"}, {"code", "format"}, {"detail", e.detail()}}.dump());
          return;
        }
        write_frame(*sock, gateway.handle_text(request));
      }
    } catch (const std::exception&) {
      // peer closed or server stopping
    }
  }
};

Server::Server(Gateway& gateway, const std::string& bind) : impl_(std::make_unique<Impl>(gateway)) {
  const auto [host, port] = split_bind(bind);
  boost::system::error_code ec;
  const tcp::endpoint ep = resolve(impl_->io, host, port);
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::io, "cannot bind " + bind + ": " + ec.message());
}

Server::~Server() { stop(); }

uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  Impl& s = *impl_;
  std::thread sweeper([&s] {
    std::unique_lock lock(s.mutex);
    while (!s.stopping) {
      s.wake.wait_for(lock, std::chrono::seconds(1));
      if (s.stopping) break;
      lock.unlock();
      s.gateway.sweep();
      lock.lock();
    }
  });
  while (!s.stopping) {
    auto sock = std::make_shared<tcp::socket>(s.io);
    boost::system::error_code ec;
    s.acceptor.accept(*sock, ec);
    if (s.stopping) break;
    if (ec) continue;
    std::lock_guard lock(s.mutex);
    s.connections.push_back(sock);
    s.workers.emplace_back([&s, sock] { s.serve(sock); });
  }
  s.wake.notify_all();
  sweeper.join();
}

void Server::start() {
  impl_->background = std::thread([this] { run(); });
}

void Server::stop() {
  Impl& s = *impl_;
  if (s.stopping.exchange(true)) return;
  s.wake.notify_all();
  // Unblock a pending accept.
  try {
    asio::io_context io;
    tcp::socket poke(io);
    boost::system::error_code ec;
    poke.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), port()), ec);
  } catch (const std::exception&) {
  }
  if (s.background.joinable()) s.background.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(s.mutex);
    for (auto& c : s.connections) ::shutdown(c->native_handle(), SHUT_RDWR);
    workers.swap(s.workers);
  }
  for (auto& w : workers) w.join();
  boost::system::error_code ec;
  s.acceptor.close(ec);
}

// ---- client ----------------------------------------------------------------

struct Client::Impl {
  asio::io_context io;
  tcp::socket socket{io};
};

Client::Client(const std::string& host, uint16_t port) : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  impl_->socket.connect(resolve(impl_->io, host, port), ec);
  if (ec) throw Error(ErrorCode::io, "cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
}

Client::~Client() = default;

std::string Client::request_text(const std::string& payload) {
  try {
    write_frame(impl_->socket, payload);
    return read_frame(impl_->socket);
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::io, std::string("connection: ") + e.what());
  }
}

nlohmann::json Client::request(const nlohmann::json& message) {
  const std::string reply = request_text(message.dump());
  auto j = nlohmann::json::parse(reply, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::format, "reply is not JSON");
  return j;
}

}  // namespace gravbench::gateway
