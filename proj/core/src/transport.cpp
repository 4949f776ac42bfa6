#include "hiertask/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "hiertask/errors.hpp"

namespace hiertask {

namespace {

/// One direction of an in-process connection.
struct MsgQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Envelope> items;
  bool closed = false;

  bool push(const Envelope& e) {
    {
      std::lock_guard lock(mu);
      if (closed) return false;
      items.push_back(e);
    }
    cv.notify_one();
    return true;
  }

  std::optional<Envelope> pop() {
    std::unique_lock lock(mu);
    cv.wait(lock, [this] { return closed || !items.empty(); });
    if (items.empty()) return std::nullopt;
    Envelope e = std::move(items.front());
    items.pop_front();
    return e;
  }

  void close() {
    {
      std::lock_guard lock(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class InProcessChannel : public Channel {
 public:
  InProcessChannel(std::shared_ptr<MsgQueue> out, std::shared_ptr<MsgQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  ~InProcessChannel() override { InProcessChannel::close(); }

  bool send(const Envelope& e) override { return out_->push(e); }
  std::optional<Envelope> receive() override { return in_->pop(); }

  void close() override {
    out_->close();
    in_->close();
  }

 private:
  std::shared_ptr<MsgQueue> out_;
  std::shared_ptr<MsgQueue> in_;
};

/// Thread-safe queue of freshly dialed connections.
struct PendingConns {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<ChannelPtr> conns;
  bool closed = false;
};

class InProcessAcceptor : public Acceptor {
 public:
  explicit InProcessAcceptor(std::shared_ptr<PendingConns> pending)
      : pending_(std::move(pending)) {}

  ChannelPtr accept() override {
    std::unique_lock lock(pending_->mu);
    pending_->cv.wait(lock,
                      [&] { return pending_->closed || !pending_->conns.empty(); });
    if (pending_->conns.empty()) return nullptr;
    ChannelPtr c = std::move(pending_->conns.front());
    pending_->conns.pop_front();
    return c;
  }

  void close() override {
    {
      std::lock_guard lock(pending_->mu);
      pending_->closed = true;
    }
    pending_->cv.notify_all();
  }

 private:
  std::shared_ptr<PendingConns> pending_;
};

}  // namespace

std::pair<ChannelPtr, ChannelPtr> make_in_process_pair() {
  auto a_to_b = std::make_shared<MsgQueue>();
  auto b_to_a = std::make_shared<MsgQueue>();
  return {std::make_unique<InProcessChannel>(a_to_b, b_to_a),
          std::make_unique<InProcessChannel>(b_to_a, a_to_b)};
}

InProcessEndpoint make_in_process_endpoint() {
  auto pending = std::make_shared<PendingConns>();
  InProcessEndpoint ep;
  ep.acceptor = std::make_unique<InProcessAcceptor>(pending);
  ep.dial = [pending]() -> ChannelPtr {
    auto [client, server] = make_in_process_pair();
    {
      std::lock_guard lock(pending->mu);
      if (pending->closed) {
        throw ConfigError("in-process endpoint is closed");
      }
      pending->conns.push_back(std::move(server));
    }
    pending->cv.notify_one();
    return std::move(client);
  };
  return ep;
}

// ---------------------------------------------------------------------- TCP

namespace {

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~TcpChannel() override { TcpChannel::close(); }

  bool send(const Envelope& e) override {
    const std::string line = encode(e);
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::send(fd_, line.data() + off, line.size() - off,
                               MSG_NOSIGNAL);
      if (n <= 0) return false;
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  std::optional<Envelope> receive() override {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        const std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (line.empty()) continue;
        return decode(line);
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n <= 0) return std::nullopt;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
  std::string buffer_;
};

sockaddr_in make_addr(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError("bad IPv4 address: " + host);
  }
  return addr;
}

}  // namespace

TcpListener::TcpListener(const std::string& host, int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ConfigError("socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  auto addr = make_addr(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    throw ConfigError("bind to " + host + ":" + std::to_string(port) +
                      " failed: " + std::strerror(errno));
  }
  if (::listen(fd_, 16) != 0) {
    ::close(fd_);
    throw ConfigError("listen failed");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() { TcpListener::close(); }

ChannelPtr TcpListener::accept() {
  const int client = ::accept(fd_, nullptr, nullptr);
  if (client < 0) return nullptr;
  return std::make_unique<TcpChannel>(client);
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

ChannelPtr tcp_dial(const std::string& host, int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ConfigError("socket() failed");
  auto addr = make_addr(host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw ConfigError("connect to " + host + ":" + std::to_string(port) +
                      " failed: " + std::strerror(errno));
  }
  return std::make_unique<TcpChannel>(fd);
}

std::pair<std::string, int> parse_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= addr.size()) {
    throw ConfigError("address must be host:port, got \"" + addr + "\"");
  }
  try {
    return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("bad port in address \"" + addr + "\"");
  }
}

}  // namespace hiertask
