#include <arpa/inet.h>
#include <csignal>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "ctxaug/error.hpp"
#include "ctxaug/scorer.hpp"

namespace ctxaug {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

class FdTransport : public LineTransport {
 public:
  FdTransport(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}
  ~FdTransport() override { close_fds(); }

  void write_line(std::string_view line) override {
    std::string buf(line);
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::write(write_fd_, buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerUnavailable(std::string("scorer write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> read_line(const std::atomic<bool>& stop) override {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (eof_ || read_fd_ < 0) return std::nullopt;
      pollfd p{read_fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, 50);
      if (stop.load()) return std::nullopt;
      if (r < 0) {
        if (errno == EINTR) continue;
        return std::nullopt;
      }
      if (r == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        eof_ = true;
      } else if (n == 0) {
        eof_ = true;
      } else {
        buffer_.append(chunk, static_cast<std::size_t>(n));
      }
    }
  }

  void close() noexcept override { close_fds(); }

 protected:
  void close_write() noexcept {
    if (write_fd_ < 0) return;
    if (write_fd_ == read_fd_) ::shutdown(write_fd_, SHUT_WR);
    else ::close(write_fd_);
    write_fd_ = -1;
  }
  void close_fds() noexcept {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    read_fd_ = write_fd_ = -1;
  }

  int read_fd_;
  int write_fd_;

 private:
  std::string buffer_;
  bool eof_ = false;
};

class ProcessTransport final : public FdTransport {
 public:
  ProcessTransport(int read_fd, int write_fd, pid_t pid) : FdTransport(read_fd, write_fd), pid_(pid) {}
  ~ProcessTransport() override { close(); }

  void close() noexcept override {
    if (pid_ <= 0) return;
    close_write();
    // Give the child a moment to exit on EOF before terminating it.
    for (int i = 0; i < 20; ++i) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        break;
      }
      ::usleep(10000);
    }
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      int status = 0;
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
    close_fds();
  }

 private:
  pid_t pid_;
};

class SocketTransport final : public FdTransport {
 public:
  explicit SocketTransport(int fd) : FdTransport(fd, fd) {}
  void write_line(std::string_view line) override {
    std::string buf(line);
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::send(write_fd_, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerUnavailable(std::string("scorer socket write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }
  void close() noexcept override {
    if (read_fd_ >= 0) ::shutdown(read_fd_, SHUT_RDWR);
    close_fds();
  }
};

}  // namespace

std::unique_ptr<LineTransport> spawn_process_transport(const std::string& command) {
  ignore_sigpipe();
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw ScorerUnavailable("pipe() failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ScorerUnavailable("pipe() failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ScorerUnavailable("fork() failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ProcessTransport>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineTransport> connect_tcp_transport(const std::string& host, int port) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res)
    throw ScorerUnavailable("cannot resolve scorer host " + host);
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ScorerUnavailable("cannot connect to scorer at " + host + ":" + service);
  return std::make_unique<SocketTransport>(fd);
}

}  // namespace ctxaug
