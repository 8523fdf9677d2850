// tsd: the time-series service, standalone.
//   tsd --port 8086 --data-dir ./data

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "tacnet/tsdb/service.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }
} // namespace

int main(int argc, char** argv) {
    CLI::App app{"append-only time-series service (write/query/export.csv)"};
    int port = 8086;
    std::string data_dir = "./tsd-data";
    app.add_option("--port", port, "listen port (0 = ephemeral)");
    app.add_option("--data-dir", data_dir, "log directory");
    CLI11_PARSE(app, argc, argv);

    try {
        tacnet::tsdb::SeriesStore store(data_dir);
        tacnet::tsdb::Service service(store);
        const int bound = service.start(port);
        std::cout << "tsd listening on 127.0.0.1:" << bound << ", data in " << data_dir << '\n';
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
