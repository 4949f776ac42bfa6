#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "hiertask/protocol.hpp"

namespace hiertask {

/// Bidirectional, FIFO, message-framed connection between two tiers. The
/// in-process and TCP implementations carry the same envelopes so the
/// service loops are transport-agnostic.
class Channel {
 public:
  virtual ~Channel() = default;

  /// False once the peer is gone.
  virtual bool send(const Envelope& e) = 0;

  /// Blocks until a message arrives or the channel closes (nullopt).
  virtual std::optional<Envelope> receive() = 0;

  /// Closes both directions; pending receives wake up with nullopt.
  virtual void close() = 0;
};

using ChannelPtr = std::unique_ptr<Channel>;

/// Pair of queue-backed endpoints for in-process wiring.
std::pair<ChannelPtr, ChannelPtr> make_in_process_pair();

/// Server side of a listen endpoint; accept() yields one Channel per peer.
class Acceptor {
 public:
  virtual ~Acceptor() = default;

  /// Blocks for the next connection; nullptr once closed.
  virtual ChannelPtr accept() = 0;
  virtual void close() = 0;
};

using AcceptorPtr = std::unique_ptr<Acceptor>;

/// In-process acceptor fed by its paired dialer.
struct InProcessEndpoint {
  AcceptorPtr acceptor;
  /// Creates a fresh connection to the acceptor; as dialable as a TCP addr.
  std::function<ChannelPtr()> dial;
};

InProcessEndpoint make_in_process_endpoint();

/// Newline-delimited-JSON over TCP. Binds immediately; port 0 picks an
/// ephemeral port (see bound_port()).
class TcpListener : public Acceptor {
 public:
  TcpListener(const std::string& host, int port);
  ~TcpListener() override;

  ChannelPtr accept() override;
  void close() override;
  int bound_port() const { return port_; }

 private:
  int fd_ = -1;
  int port_ = 0;
};

/// Connects to host:port; throws ConfigError on failure.
ChannelPtr tcp_dial(const std::string& host, int port);

/// Splits "host:port". Throws ConfigError on malformed input.
std::pair<std::string, int> parse_address(const std::string& addr);

/// Wraps a channel and appends every envelope that crosses it to a log via
/// the callback: direction is "in" or "out".
class LoggingChannel : public Channel {
 public:
  using LogFn =
      std::function<void(const std::string& dir, const Envelope& e)>;

  LoggingChannel(ChannelPtr inner, LogFn log)
      : inner_(std::move(inner)), log_(std::move(log)) {}

  bool send(const Envelope& e) override {
    if (log_) log_("out", e);
    return inner_->send(e);
  }

  std::optional<Envelope> receive() override {
    auto e = inner_->receive();
    if (e && log_) log_("in", *e);
    return e;
  }

  void close() override { inner_->close(); }

 private:
  ChannelPtr inner_;
  LogFn log_;
};

}  // namespace hiertask
