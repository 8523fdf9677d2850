#include "tacnet/transport/tcp_link.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace tacnet::transport {

namespace {

bool parse_endpoint(const std::string& addr, std::string& host, int& port) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) return false;
    host = addr.substr(0, colon);
    try {
        port = std::stoi(addr.substr(colon + 1));
    } catch (...) {
        return false;
    }
    return port > 0 && port < 65536;
}

} // namespace

TcpFrameServer::TcpFrameServer(device::DeviceEmulator& emulator, std::mutex& emulator_mutex)
    : emu_(emulator), emu_mu_(emulator_mutex) {}

TcpFrameServer::~TcpFrameServer() { stop(); }

int TcpFrameServer::start(int port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("tcp server: socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = htons(static_cast<uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0)
        throw std::runtime_error("tcp server: bind failed");
    socklen_t len = sizeof(sa);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
    if (::listen(listen_fd_, 1) != 0) throw std::runtime_error("tcp server: listen failed");

    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
    return port_;
}

void TcpFrameServer::stop() {
    if (!running_.exchange(false)) return;
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR), ::close(listen_fd_), listen_fd_ = -1;
    {
        std::lock_guard lk(client_mu_);
        if (client_fd_ >= 0) ::shutdown(client_fd_, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
}

void TcpFrameServer::accept_loop() {
    while (running_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        {
            std::lock_guard lk(client_mu_);
            client_fd_ = fd;
        }
        client_loop(fd);
        {
            std::lock_guard lk(client_mu_);
            if (client_fd_ == fd) client_fd_ = -1;
        }
        ::close(fd);
    }
}

void TcpFrameServer::client_loop(int fd) {
    device::FrameDecoder decoder;
    uint8_t buf[512];
    while (running_) {
        const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) break;
        decoder.feed({buf, static_cast<size_t>(n)});
        while (auto req = decoder.next()) {
            std::vector<device::Frame> responses;
            {
                std::lock_guard lk(emu_mu_);
                responses = emu_.handle_frame(*req);
                for (auto& f : emu_.drain_outbound()) responses.push_back(std::move(f));
            }
            for (const auto& f : responses)
                if (!send_all(fd, device::encode_frame(f))) return;
        }
    }
}

void TcpFrameServer::publish() {
    std::vector<device::Frame> frames;
    {
        std::lock_guard lk(emu_mu_);
        frames = emu_.drain_outbound();
    }
    std::lock_guard lk(client_mu_);
    if (client_fd_ < 0) return;
    for (const auto& f : frames)
        if (!send_all(client_fd_, device::encode_frame(f))) break;
}

bool TcpFrameServer::send_all(int fd, const std::vector<uint8_t>& bytes) {
    size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<size_t>(n);
    }
    return true;
}

namespace {

class TcpFrameLink : public FrameLink {
public:
    explicit TcpFrameLink(int fd) : fd_(fd) {}
    ~TcpFrameLink() override { close(); }

    void send(const device::Frame& f) override {
        const auto bytes = device::encode_frame(f);
        size_t sent = 0;
        while (sent < bytes.size()) {
            const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) {
                open_ = false;
                throw std::runtime_error("tcp link: send failed");
            }
            sent += static_cast<size_t>(n);
        }
    }

    std::optional<device::Frame> recv() override {
        if (auto f = decoder_.next()) return f;
        if (!open_) return std::nullopt;
        uint8_t buf[512];
        const ssize_t n = ::recv(fd_, buf, sizeof(buf), MSG_DONTWAIT);
        if (n == 0) {
            open_ = false;
            return std::nullopt;
        }
        if (n < 0) {
            if (errno != EAGAIN && errno != EWOULDBLOCK) open_ = false;
            return std::nullopt;
        }
        decoder_.feed({buf, static_cast<size_t>(n)});
        return decoder_.next();
    }

    bool is_open() const override { return open_; }

    void close() override {
        if (fd_ >= 0) ::close(fd_), fd_ = -1;
        open_ = false;
    }

private:
    int fd_;
    bool open_ = true;
    device::FrameDecoder decoder_;
};

} // namespace

std::unique_ptr<FrameLink> TcpTransport::connect(const std::string& address) {
    std::string host;
    int port = 0;
    if (!parse_endpoint(address, host, port)) return nullptr;

    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return nullptr;

    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<uint16_t>(port));
    if (host == "localhost") host = "127.0.0.1";
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
        ::close(fd);
        return nullptr;
    }

    // bounded non-blocking connect so scanning dead endpoints stays fast
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    const int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
    if (rc != 0 && errno != EINPROGRESS) {
        ::close(fd);
        return nullptr;
    }
    if (rc != 0) {
        pollfd pfd{fd, POLLOUT, 0};
        if (::poll(&pfd, 1, timeout_ms_) <= 0) {
            ::close(fd);
            return nullptr;
        }
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) {
            ::close(fd);
            return nullptr;
        }
    }
    ::fcntl(fd, F_SETFL, flags);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<TcpFrameLink>(fd);
}

} // namespace tacnet::transport
