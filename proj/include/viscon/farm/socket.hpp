#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace viscon::farm {

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

HostPort parse_host_port(std::string_view text);  // "host:port"

// Owning TCP socket with newline-delimited reads.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(other.fd_), buffer_(std::move(other.buffer_)) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  ~Socket() { close(); }

  static Socket connect(const HostPort& address);  // throws Error(ConnectFailure)
  static Socket listen(const HostPort& address);   // throws Error(BindFailure)

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }
  std::uint16_t local_port() const;

  // Waits up to `timeout` for a client; nullopt on timeout.
  std::optional<Socket> accept(std::chrono::milliseconds timeout);

  // Returns false once the peer is gone.
  bool send_line(std::string_view line);

  enum class ReadStatus { Line, Timeout, Closed };
  // Reads one line (without the newline). Lines longer than max_line close the stream.
  ReadStatus read_line(std::string& line, std::chrono::milliseconds timeout, std::size_t max_line = 1 << 20);

  // Wakes any blocked reader without releasing the descriptor.
  void shutdown() noexcept;
  void close() noexcept;

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace viscon::farm
