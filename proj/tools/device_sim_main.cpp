// device-sim: one emulated wearable served over TCP at accelerated real time.
//   device-sim --port 7400 --name TAC-01 --accel 60 [--scenario one_drink]

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <iostream>
#include <mutex>
#include <thread>

#include "tacnet/harness/scenario.hpp"
#include "tacnet/transport/tcp_link.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }
} // namespace

int main(int argc, char** argv) {
    CLI::App app{"emulated transdermal alcohol wearable on a TCP frame transport"};
    int port = 7400;
    double accel = 60.0;
    std::string name = "TAC-01";
    std::string scenario_name = "one_drink";
    std::string config_file;
    std::string flash_file = "./device-sim.flash";
    app.add_option("--port", port, "listen port");
    app.add_option("--name", name, "advertised device name");
    app.add_option("--accel", accel, "virtual seconds per wall second");
    app.add_option("--scenario", scenario_name, "built-in physio scenario driving the sensor");
    app.add_option("--config", config_file, "scenario JSON overriding --scenario");
    app.add_option("--flash", flash_file, "flash FIFO backing file");
    CLI11_PARSE(app, argc, argv);

    try {
        tacnet::harness::ScenarioConfig cfg =
            config_file.empty()
                ? tacnet::harness::default_scenario(
                      tacnet::harness::scenario_kind_from_string(scenario_name))
                : tacnet::harness::load_scenario(config_file);
        cfg.device.name = name;

        tacnet::device::DeviceEmulator emu(cfg.device, flash_file);
        std::mutex emu_mu;
        tacnet::transport::TcpFrameServer server(emu, emu_mu);
        const int bound = server.start(port);
        std::cout << "device-sim '" << name << "' on 127.0.0.1:" << bound << " at " << accel
                  << "x\n";

        tacnet::physio::PhysioSim sim(cfg.physio);
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);

        const auto tick_period =
            std::chrono::duration<double>(1.0 / std::max(1.0, accel));
        while (!g_stop) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto s = sim.step();
            {
                std::lock_guard lk(emu_mu);
                tacnet::device::AnalogInputs in;
                in.current_na = s.current_na;
                in.temp_c = s.chamber.chamber_temp_c;
                in.rh_pct = s.chamber.chamber_rh_pct;
                in.on_body = s.on_body;
                emu.tick(in);
            }
            server.publish();
            std::this_thread::sleep_until(t0 + tick_period);
        }
        server.stop();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
