#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tacnet/gateway/gateway.hpp"
#include "tacnet/transport/frame_link.hpp"
#include "tacnet/transport/tcp_link.hpp"
#include "tacnet/tsdb/service.hpp"
#include "tacnet/util/clock.hpp"

using namespace tacnet;
using namespace tacnet::gateway;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("tacnet_gw_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

/// Upload sink writing straight into a store; failure can be toggled.
struct DirectSink : public WriteSink {
    explicit DirectSink(tsdb::SeriesStore& s) : store(s) {}
    Result write(const std::string& device, std::span<const tsdb::SeriesPoint> points) override {
        ++calls;
        if (fail) return {};
        const auto r = store.write(device, points);
        return {true, r.accepted, r.duplicates};
    }
    tsdb::SeriesStore& store;
    bool fail = false;
    int calls = 0;
};

struct Rig {
    explicit Rig(const std::string& name, const std::string& device_name = "TAC-01")
        : dir(temp_dir(name)), store(dir / "service"), emu(make_device(device_name), dir / "flash.bin"),
          sink(store) {
        hub.add_device(emu);
        GatewayConfig cfg;
        cfg.spool_dir = dir / "spool";
        cfg.csv_dir = dir / "gateway";
        cfg.upload_batch = 10;
        gw = std::make_unique<Gateway>(cfg, hub, sink, clock);
    }
    static device::DeviceConfig make_device(const std::string& name) {
        device::DeviceConfig cfg;
        cfg.name = name;
        cfg.noise_seed = 3;
        return cfg;
    }
    void run_ticks(int n, double current_na = 1000.0) {
        for (int t = 0; t < n; ++t) {
            device::AnalogInputs in;
            in.current_na = current_na;
            emu.tick(in);
            clock.advance_s(1);
            hub.pump();
            gw->poll();
        }
    }

    std::filesystem::path dir;
    tsdb::SeriesStore store;
    device::DeviceEmulator emu;
    DirectSink sink;
    transport::InProcessHub hub;
    VirtualClock clock;
    std::unique_ptr<Gateway> gw;
};

} // namespace

TEST_CASE("scan: empty transport yields an empty list, not an error") {
    transport::InProcessHub hub;
    tsdb::SeriesStore store(temp_dir("scan_empty") / "s");
    DirectSink sink(store);
    VirtualClock clock;
    Gateway gw({}, hub, sink, clock);
    CHECK(gw.scan().empty());
}

TEST_CASE("scan: prefix filter keeps matching devices only") {
    const auto dir = temp_dir("scan_filter");
    device::DeviceConfig c1, c2, c3;
    c1.name = "TAC-01";
    c2.name = "TAC-02";
    c3.name = "OTHER-01";
    device::DeviceEmulator e1(c1, dir / "1.flash"), e2(c2, dir / "2.flash"),
        e3(c3, dir / "3.flash");
    transport::InProcessHub hub;
    hub.add_device(e1);
    hub.add_device(e2);
    hub.add_device(e3);

    tsdb::SeriesStore store(dir / "service");
    DirectSink sink(store);
    VirtualClock clock;
    GatewayConfig cfg;
    cfg.filter_prefix = "TAC";
    Gateway gw(cfg, hub, sink, clock);
    const auto found = gw.scan();
    REQUIRE(found.size() == 2);
    CHECK(found[0].device_name == "TAC-01");
    CHECK(found[1].device_name == "TAC-02");
}

TEST_CASE("stream: ten virtual seconds produce ten points spaced 1 s") {
    Rig rig("stream10");
    const auto found = rig.gw->scan();
    REQUIRE(found.size() == 1);
    REQUIRE(rig.gw->connect(found[0]));
    REQUIRE(rig.gw->subscribe());
    rig.run_ticks(10);
    rig.gw->flush();

    CHECK(rig.gw->realtime_points() == 10);
    const auto pts = rig.store.query("TAC-01", 0, INT64_MAX);
    REQUIRE(pts.size() == 10);
    for (size_t i = 1; i < pts.size(); ++i)
        CHECK(pts[i].t_ns - pts[i - 1].t_ns == 1'000'000'000LL);
}

TEST_CASE("stream: a service outage loses nothing once it recovers") {
    Rig rig("outage");
    const auto found = rig.gw->scan();
    REQUIRE(rig.gw->connect(found[0]));
    REQUIRE(rig.gw->subscribe());

    rig.run_ticks(30);
    rig.sink.fail = true; // service goes dark mid-stream
    rig.run_ticks(25);
    CHECK(rig.gw->pending_uploads() > 0);
    rig.sink.fail = false; // recovery
    rig.run_ticks(30);
    rig.gw->flush();

    CHECK(rig.gw->pending_uploads() == 0);
    const auto pts = rig.store.query("TAC-01", 0, INT64_MAX);
    CHECK(pts.size() == 85); // zero points lost
    CHECK(rig.emu.push_count() == 85);
}

TEST_CASE("stream: local CSV is a superset of what the service received") {
    Rig rig("superset");
    const auto found = rig.gw->scan();
    REQUIRE(rig.gw->connect(found[0]));
    REQUIRE(rig.gw->subscribe());
    rig.sink.fail = true;
    rig.run_ticks(20);

    std::ifstream csv(rig.dir / "gateway" / "TAC-01.csv");
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line);
    CHECK(line == tsdb::kCsvHeader);
    size_t csv_rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++csv_rows;
    CHECK(csv_rows == 20);
    CHECK(rig.store.query("TAC-01", 0, INT64_MAX).empty()); // nothing uploaded yet
}

TEST_CASE("stream: device disconnect ends the feed with what was received") {
    Rig rig("disconnect");
    const auto found = rig.gw->scan();
    REQUIRE(rig.gw->connect(found[0]));
    REQUIRE(rig.gw->subscribe());
    rig.run_ticks(7);
    rig.hub.disconnect(found[0].transport_address);
    rig.run_ticks(5); // pushes go nowhere
    rig.gw->poll();
    rig.gw->flush();

    CHECK(rig.gw->saw_disconnect());
    CHECK(rig.gw->realtime_points() == 7);
    CHECK(rig.store.query("TAC-01", 0, INT64_MAX).size() == 7);
}

TEST_CASE("backfill: timestamps follow t = now - 60 s * (latest - id)") {
    Rig rig("timestamps");
    rig.run_ticks(60 * 100); // 100 minute records, no subscription
    const auto found = rig.gw->scan();
    REQUIRE(rig.gw->connect(found[0]));
    const auto report = rig.gw->backfill();
    CHECK(report.records_fetched == 100);
    CHECK(report.points_enqueued == 100);
    rig.gw->flush();

    const int64_t now = rig.clock.now_ns();
    const auto pts = rig.store.query("TAC-01", 0, INT64_MAX);
    REQUIRE(pts.size() == 100);
    // newest record id L = 100 maps to exactly now; id 40 to now - 3600 s
    CHECK(pts.back().t_ns == now);
    CHECK(pts[39].t_ns == now - 3600LL * 1'000'000'000);
    for (size_t i = 1; i < pts.size(); ++i)
        CHECK(pts[i].t_ns - pts[i - 1].t_ns == 60'000'000'000LL);
}

TEST_CASE("backfill: re-running adds zero duplicate points") {
    Rig rig("idempotent");
    rig.run_ticks(60 * 20);
    const auto found = rig.gw->scan();
    REQUIRE(rig.gw->connect(found[0]));
    rig.gw->backfill();
    rig.gw->flush();
    const auto count_before = rig.store.query("TAC-01", 0, INT64_MAX).size();
    CHECK(count_before == 20);

    const auto report = rig.gw->backfill(); // gateway-side skip
    CHECK(report.points_enqueued == 0);
    rig.gw->flush();
    CHECK(rig.store.query("TAC-01", 0, INT64_MAX).size() == count_before);

    // even a fresh gateway (no local skip state) adds nothing: service dedup
    GatewayConfig cfg2;
    cfg2.spool_dir = rig.dir / "spool2";
    cfg2.csv_dir = rig.dir / "gateway2";
    Gateway gw2(cfg2, rig.hub, rig.sink, rig.clock);
    REQUIRE(gw2.connect(rig.gw->scan().front()));
    gw2.backfill();
    gw2.flush();
    CHECK(rig.store.query("TAC-01", 0, INT64_MAX).size() == count_before);
}

TEST_CASE("backfill: streaming continues during the dump") {
    Rig rig("mid_dump");
    const auto found = rig.gw->scan();
    REQUIRE(rig.gw->connect(found[0]));
    REQUIRE(rig.gw->subscribe());
    rig.run_ticks(60 * 5);
    const uint64_t streamed_before = rig.gw->realtime_points();
    rig.gw->backfill();
    rig.gw->flush();
    CHECK(rig.gw->realtime_points() == streamed_before); // no pushes were dropped
    const auto pts = rig.store.query("TAC-01", 0, INT64_MAX);
    size_t backfill_count = 0, realtime_count = 0;
    for (const auto& p : pts)
        (p.source == tsdb::Source::backfill ? backfill_count : realtime_count)++;
    CHECK(backfill_count == 5);
    CHECK(realtime_count == 300);
}

TEST_CASE("to_json_points: golden payload and contract checks") {
    tsdb::SeriesPoint zero;
    zero.device_id = "TAC-01";
    const auto j = to_json_points("TAC-01", {&zero, 1});
    CHECK(j.dump() ==
          R"({"device":"TAC-01","points":[{"t_ns":0,"alcohol_raw":0.0,"temp_c":0.0,"rh_pct":0.0,"source":"realtime"}]})");

    std::vector<tsdb::SeriesPoint> batch(3, zero);
    batch[0].t_ns = 1;
    batch[1].t_ns = 2;
    batch[2].t_ns = 3;
    const auto j3 = to_json_points("TAC-01", batch);
    REQUIRE(j3["points"].size() == 3);
    int64_t prev = 0;
    for (const auto& pj : j3["points"]) {
        CHECK(pj["t_ns"].get<int64_t>() > prev);
        prev = pj["t_ns"].get<int64_t>();
    }

    CHECK_THROWS_AS(to_json_points("TAC-01", {}), std::invalid_argument);
    batch[1].source = tsdb::Source::backfill;
    CHECK_THROWS_AS(to_json_points("TAC-01", batch), std::invalid_argument);
}

namespace {

/// Wraps the in-process hub and corrupts the first FlashData payload byte on
/// each of the first `corrupt_dumps` dumps it sees.
struct CorruptingTransport : public transport::Transport {
    explicit CorruptingTransport(transport::Transport& inner, int corrupt_dumps)
        : inner(inner), remaining(corrupt_dumps) {}

    std::vector<std::string> endpoints() override { return inner.endpoints(); }
    std::unique_ptr<transport::FrameLink> connect(const std::string& addr) override {
        auto link = inner.connect(addr);
        if (!link) return nullptr;
        struct Wrapper : transport::FrameLink {
            std::unique_ptr<transport::FrameLink> inner;
            CorruptingTransport* owner;
            bool corrupted_this_dump = false;
            void send(const device::Frame& f) override {
                corrupted_this_dump = false;
                inner->send(f);
            }
            std::optional<device::Frame> recv() override {
                auto f = inner->recv();
                if (f && f->opcode == device::Opcode::FlashData && !corrupted_this_dump &&
                    owner->remaining > 0) {
                    f->payload[0] ^= 0xFF;
                    corrupted_this_dump = true;
                    --owner->remaining;
                }
                return f;
            }
            bool is_open() const override { return inner->is_open(); }
            void close() override { inner->close(); }
        };
        auto w = std::make_unique<Wrapper>();
        w->inner = std::move(link);
        w->owner = this;
        return w;
    }

    transport::Transport& inner;
    int remaining;
};

} // namespace

TEST_CASE("backfill: one corrupted dump triggers a retry that succeeds") {
    Rig rig("crc_retry");
    rig.run_ticks(60 * 10);
    CorruptingTransport corrupting(rig.hub, 1);
    GatewayConfig cfg;
    cfg.spool_dir = rig.dir / "spool_crc";
    cfg.csv_dir = rig.dir / "gateway_crc";
    Gateway gw(cfg, corrupting, rig.sink, rig.clock);
    const auto found = gw.scan();
    REQUIRE(found.size() == 1);
    REQUIRE(gw.connect(found[0]));
    const auto report = gw.backfill();
    CHECK(report.retries_used == 1);
    CHECK(report.records_fetched == 10);
    gw.flush();
    CHECK(rig.store.query("TAC-01", 0, INT64_MAX).size() == 10);
}

TEST_CASE("backfill: persistent corruption fails with an integrity error") {
    Rig rig("crc_fail");
    rig.run_ticks(60 * 5);
    CorruptingTransport corrupting(rig.hub, 1000);
    GatewayConfig cfg;
    cfg.spool_dir = rig.dir / "spool_crc2";
    cfg.csv_dir = rig.dir / "gateway_crc2";
    Gateway gw(cfg, corrupting, rig.sink, rig.clock);
    REQUIRE(gw.connect(gw.scan().front()));
    CHECK_THROWS_AS(gw.backfill(), std::runtime_error);
}

TEST_CASE("spool: pending points survive a gateway restart") {
    Rig rig("spool_replay");
    {
        const auto found = rig.gw->scan();
        REQUIRE(rig.gw->connect(found[0]));
        REQUIRE(rig.gw->subscribe());
        rig.sink.fail = true;
        rig.run_ticks(15);
        rig.gw->flush();
        CHECK(rig.gw->pending_uploads() == 15);
    }
    rig.gw.reset(); // gateway process dies with points spooled

    rig.sink.fail = false;
    GatewayConfig cfg;
    cfg.spool_dir = rig.dir / "spool";
    cfg.csv_dir = rig.dir / "gateway";
    Gateway gw2(cfg, rig.hub, rig.sink, rig.clock);
    REQUIRE(gw2.connect(gw2.scan().front())); // replays the spool
    CHECK(gw2.pending_uploads() == 15);
    gw2.flush();
    CHECK(rig.store.query("TAC-01", 0, INT64_MAX).size() == 15);

    // spool file truncated after a clean flush
    std::ifstream spool(rig.dir / "spool" / "TAC-01.spool");
    std::string contents((std::istreambuf_iterator<char>(spool)),
                         std::istreambuf_iterator<char>());
    CHECK(contents.empty());
}

TEST_CASE("tcp transport: scan, stream and backfill over a local socket") {
    const auto dir = temp_dir("tcp");
    device::DeviceConfig cfg;
    cfg.name = "TAC-09";
    device::DeviceEmulator emu(cfg, dir / "flash.bin");
    std::mutex emu_mu;
    {
        device::AnalogInputs in;
        in.current_na = 2000.0;
        std::lock_guard lk(emu_mu);
        for (int t = 0; t < 180; ++t) emu.tick(in); // three records before serving
    }
    transport::TcpFrameServer server(emu, emu_mu);
    const int port = server.start(0);

    transport::TcpTransport transport({"127.0.0.1:" + std::to_string(port),
                                       "127.0.0.1:1"}); // second endpoint is dead
    tsdb::SeriesStore store(dir / "service");
    DirectSink sink(store);
    SystemClock clock;
    GatewayConfig gcfg;
    gcfg.filter_prefix = "TAC";
    gcfg.spool_dir = dir / "spool";
    gcfg.csv_dir = dir / "gateway";
    Gateway gw(gcfg, transport, sink, clock);

    const auto found = gw.scan();
    REQUIRE(found.size() == 1);
    CHECK(found[0].device_name == "TAC-09");
    CHECK(found[0].latest_rec_id == 3);

    REQUIRE(gw.connect(found[0]));
    REQUIRE(gw.subscribe());
    for (int t = 0; t < 5; ++t) {
        {
            std::lock_guard lk(emu_mu);
            device::AnalogInputs in;
            in.current_na = 2000.0;
            emu.tick(in);
        }
        server.publish();
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
        while (gw.realtime_points() < static_cast<uint64_t>(t + 1) &&
               std::chrono::steady_clock::now() < deadline) {
            gw.poll();
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
    }
    CHECK(gw.realtime_points() == 5);

    const auto report = gw.backfill();
    CHECK(report.records_fetched == 3);
    gw.flush();
    size_t backfill_count = 0;
    for (const auto& p : store.query("TAC-09", 0, INT64_MAX))
        if (p.source == tsdb::Source::backfill) ++backfill_count;
    CHECK(backfill_count == 3);
    server.stop();
}
