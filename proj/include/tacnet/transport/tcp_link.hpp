#pragma once

/**
 * @file tcp_link.hpp
 * @brief Frame transport over local TCP sockets, for running the gateway
 *        against an emulator in another process.
 */

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tacnet/device/emulator.hpp"
#include "tacnet/transport/frame_link.hpp"

namespace tacnet::transport {

/**
 * Serves one emulator on a TCP port. Frame requests from the client are
 * handled under the supplied mutex, which the caller also holds while
 * ticking the emulator; pushes queued by ticks are flushed by publish().
 */
class TcpFrameServer {
public:
    TcpFrameServer(device::DeviceEmulator& emulator, std::mutex& emulator_mutex);
    ~TcpFrameServer();

    /// Binds and starts the accept thread. port 0 picks an ephemeral port.
    int start(int port);
    void stop();
    int port() const { return port_; }

    /// Sends any frames the emulator queued (call after ticking).
    void publish();

private:
    void accept_loop();
    void client_loop(int fd);
    bool send_all(int fd, const std::vector<uint8_t>& bytes);

    device::DeviceEmulator& emu_;
    std::mutex& emu_mu_;
    int listen_fd_ = -1;
    int client_fd_ = -1;
    std::mutex client_mu_;
    int port_ = 0;
    std::thread accept_thread_;
    std::atomic<bool> running_{false};
};

/// Connects to "host:port" endpoints given at construction.
class TcpTransport : public Transport {
public:
    explicit TcpTransport(std::vector<std::string> endpoints, int connect_timeout_ms = 200)
        : endpoints_(std::move(endpoints)), timeout_ms_(connect_timeout_ms) {}

    std::vector<std::string> endpoints() override { return endpoints_; }
    std::unique_ptr<FrameLink> connect(const std::string& address) override;

private:
    std::vector<std::string> endpoints_;
    int timeout_ms_;
};

} // namespace tacnet::transport
