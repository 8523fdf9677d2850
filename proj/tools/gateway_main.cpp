// gateway: headless device <-> service bridge over TCP transports.
//   gateway scan     --addrs 127.0.0.1:7400,127.0.0.1:7401 [--filter-prefix TAC]
//   gateway stream   <device> --addrs ... --service-url http://127.0.0.1:8086 [--duration 60]
//   gateway backfill <device> --addrs ... --service-url http://127.0.0.1:8086

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include "tacnet/gateway/gateway.hpp"
#include "tacnet/transport/tcp_link.hpp"

using namespace tacnet;

namespace {
volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

std::vector<std::string> split_addrs(const std::string& addrs) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= addrs.size()) {
        const auto comma = addrs.find(',', start);
        const auto part = addrs.substr(start, comma - start);
        if (!part.empty()) out.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<gateway::DeviceDescriptor> find_device(gateway::Gateway& gw,
                                                     const std::string& name) {
    for (const auto& d : gw.scan())
        if (d.device_name == name) return d;
    return std::nullopt;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"headless gateway bridging emulated wearables to the time-series service"};
    app.require_subcommand(1);

    std::string addrs = "127.0.0.1:7400,127.0.0.1:7401,127.0.0.1:7402,127.0.0.1:7403";
    std::string service_url = "http://127.0.0.1:8086";
    std::string filter_prefix = "TAC";
    std::string spool_dir = "./gateway-spool";
    std::string csv_dir = "./gateway-data";
    std::string device_name;
    double duration_s = 0.0; // 0 = until interrupted

    app.add_option("--addrs", addrs, "comma-separated device endpoints to probe");
    app.add_option("--service-url", service_url, "time-series service base URL");
    app.add_option("--filter-prefix", filter_prefix, "device name prefix filter");
    app.add_option("--spool-dir", spool_dir, "store-and-forward spool directory");
    app.add_option("--csv-dir", csv_dir, "local CSV directory");

    auto* scan = app.add_subcommand("scan", "list reachable devices matching the prefix");
    auto* stream = app.add_subcommand("stream", "subscribe to the 1 Hz realtime feed");
    stream->add_option("device", device_name, "device name from scan")->required();
    stream->add_option("--duration", duration_s, "seconds to stream (0 = until Ctrl-C)");
    auto* backfill = app.add_subcommand("backfill", "download flash history and upload it");
    backfill->add_option("device", device_name, "device name from scan")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        transport::TcpTransport transport(split_addrs(addrs));
        gateway::HttpWriteSink sink(service_url);
        SystemClock clock;
        gateway::GatewayConfig cfg;
        cfg.filter_prefix = filter_prefix;
        cfg.spool_dir = spool_dir;
        cfg.csv_dir = csv_dir;
        gateway::Gateway gw(cfg, transport, sink, clock);

        if (scan->parsed()) {
            for (const auto& d : gw.scan())
                std::cout << d.device_name << " @ " << d.transport_address << " latest_rec_id="
                          << d.latest_rec_id << " records=" << d.record_count << '\n';
            return 0;
        }

        const auto dev = find_device(gw, device_name);
        if (!dev) {
            std::cerr << "device '" << device_name << "' not found\n";
            return 2;
        }
        if (!gw.connect(*dev)) {
            std::cerr << "cannot connect to " << dev->transport_address << '\n';
            return 3;
        }

        if (stream->parsed()) {
            if (!gw.subscribe()) {
                std::cerr << "subscribe failed\n";
                return 3;
            }
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            const auto t_end = std::chrono::steady_clock::now() +
                               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(duration_s));
            while (!g_stop && (duration_s == 0.0 || std::chrono::steady_clock::now() < t_end)) {
                gw.poll();
                if (gw.saw_disconnect()) {
                    std::cerr << "device disconnected\n";
                    break;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
            gw.unsubscribe();
            gw.flush();
            std::cout << "streamed " << gw.realtime_points() << " points\n";
        } else if (backfill->parsed()) {
            const auto report = gw.backfill();
            std::cout << "backfill: " << report.records_fetched << " records, "
                      << report.points_enqueued << " new points";
            if (report.gap_records) std::cout << ", " << report.gap_records << " beyond the window";
            std::cout << '\n';
            gw.flush();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
