#pragma once

/**
 * @file frame_link.hpp
 * @brief Transport abstraction for the device frame protocol, plus the
 *        in-process implementation used by the virtual-clock harness.
 */

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tacnet/device/emulator.hpp"
#include "tacnet/device/frame.hpp"

namespace tacnet::transport {

/// Gateway-side view of one connection to a device.
class FrameLink {
public:
    virtual ~FrameLink() = default;
    virtual void send(const device::Frame& f) = 0;
    virtual std::optional<device::Frame> recv() = 0;
    virtual bool is_open() const = 0;
    virtual void close() = 0;
};

/// Endpoint discovery + connection factory.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::vector<std::string> endpoints() = 0;
    virtual std::unique_ptr<FrameLink> connect(const std::string& address) = 0;
};

/**
 * In-process hub: registers emulators under "local:<name>" addresses and
 * wires links directly to DeviceEmulator::handle_frame. pump() moves
 * device-initiated frames (measurement pushes, dump chunks) into the open
 * link of each device; the harness calls it once per virtual second.
 */
class InProcessHub : public Transport {
public:
    void add_device(device::DeviceEmulator& emu) {
        devices_["local:" + emu.config().name] = &emu;
    }

    std::vector<std::string> endpoints() override {
        std::vector<std::string> out;
        for (const auto& [addr, emu] : devices_) {
            (void)emu;
            out.push_back(addr);
        }
        return out;
    }

    std::unique_ptr<FrameLink> connect(const std::string& address) override;

    void pump();

    /// Severs the link to one device (simulates the peripheral dropping out).
    void disconnect(const std::string& address);

private:
    struct Link;
    std::map<std::string, device::DeviceEmulator*> devices_;
    std::map<std::string, std::shared_ptr<Link>> open_links_;
};

struct InProcessHub::Link : public FrameLink {
    device::DeviceEmulator* emu = nullptr;
    std::deque<device::Frame> rx;
    bool open = true;

    void send(const device::Frame& f) override {
        if (!open) throw std::runtime_error("frame link closed");
        for (auto& resp : emu->handle_frame(f)) rx.push_back(std::move(resp));
        // responses ride behind anything the device already queued
        for (auto& push : emu->drain_outbound()) rx.push_back(std::move(push));
    }
    std::optional<device::Frame> recv() override {
        if (rx.empty()) return std::nullopt;
        device::Frame f = std::move(rx.front());
        rx.pop_front();
        return f;
    }
    bool is_open() const override { return open; }
    void close() override { open = false; }
};

inline std::unique_ptr<FrameLink> InProcessHub::connect(const std::string& address) {
    auto it = devices_.find(address);
    if (it == devices_.end()) return nullptr;
    auto link = std::make_shared<Link>();
    link->emu = it->second;
    open_links_[address] = link;

    struct Handle : FrameLink {
        std::shared_ptr<Link> impl;
        explicit Handle(std::shared_ptr<Link> l) : impl(std::move(l)) {}
        void send(const device::Frame& f) override { impl->send(f); }
        std::optional<device::Frame> recv() override { return impl->recv(); }
        bool is_open() const override { return impl->is_open(); }
        void close() override { impl->close(); }
    };
    return std::make_unique<Handle>(link);
}

inline void InProcessHub::pump() {
    for (auto& [addr, emu] : devices_) {
        auto frames = emu->drain_outbound();
        auto it = open_links_.find(addr);
        if (it == open_links_.end() || !it->second->open) continue; // undelivered pushes drop
        for (auto& f : frames) it->second->rx.push_back(std::move(f));
    }
}

inline void InProcessHub::disconnect(const std::string& address) {
    auto it = open_links_.find(address);
    if (it != open_links_.end()) it->second->open = false;
}

} // namespace tacnet::transport
