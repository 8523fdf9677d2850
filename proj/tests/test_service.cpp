#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <thread>

#include "tacnet/tsdb/service.hpp"
#include "tacnet/tsdb/store.hpp"
#include "tacnet/util/rng.hpp"

using namespace tacnet;
using namespace tacnet::tsdb;
using nlohmann::json;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("tacnet_tsd_" + name);
    std::filesystem::remove_all(p);
    return p;
}

SeriesPoint make_point(int64_t t_ns, const std::string& device, double alcohol,
                       Source source = Source::realtime) {
    SeriesPoint p;
    p.t_ns = t_ns;
    p.device_id = device;
    p.alcohol_raw = alcohol;
    p.temp_c = 25.0;
    p.rh_pct = 40.0;
    p.source = source;
    return p;
}

std::string body_for(const std::string& device, const std::vector<SeriesPoint>& points) {
    nlohmann::ordered_json j;
    j["device"] = device;
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        nlohmann::ordered_json pj;
        pj["t_ns"] = p.t_ns;
        pj["alcohol_raw"] = p.alcohol_raw;
        pj["temp_c"] = p.temp_c;
        pj["rh_pct"] = p.rh_pct;
        pj["source"] = to_string(p.source);
        j["points"].push_back(pj);
    }
    return j.dump();
}

struct LiveService {
    explicit LiveService(const std::string& name)
        : dir(temp_dir(name)), store(dir), service(store), port(service.start(0)),
          client("127.0.0.1", port) {}
    std::filesystem::path dir;
    SeriesStore store;
    Service service;
    int port;
    httplib::Client client;
};

} // namespace

TEST_CASE("service: empty batch accepted with zero counts") {
    LiveService s("empty");
    const auto res = s.client.Post("/write", body_for("TAC-01", {}), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto j = json::parse(res->body);
    CHECK(j["accepted"] == 0);
    CHECK(j["duplicates"] == 0);
}

TEST_CASE("service: re-sending a batch drops every point as duplicate") {
    LiveService s("dupe");
    std::vector<SeriesPoint> pts;
    for (int i = 0; i < 5; ++i) pts.push_back(make_point(1000 + i, "TAC-01", i));
    auto res = s.client.Post("/write", body_for("TAC-01", pts), "application/json");
    REQUIRE(res);
    CHECK(json::parse(res->body)["accepted"] == 5);
    res = s.client.Post("/write", body_for("TAC-01", pts), "application/json");
    REQUIRE(res);
    const auto j = json::parse(res->body);
    CHECK(j["accepted"] == 0);
    CHECK(j["duplicates"] == 5);
}

TEST_CASE("service: same timestamp with different source is not a duplicate") {
    LiveService s("source");
    auto a = make_point(5000, "TAC-01", 1.0, Source::realtime);
    auto b = make_point(5000, "TAC-01", 2.0, Source::backfill);
    const auto res =
        s.client.Post("/write", body_for("TAC-01", {a, b}), "application/json");
    REQUIRE(res);
    CHECK(json::parse(res->body)["accepted"] == 2);
}

TEST_CASE("service: devices are isolated") {
    LiveService s("iso");
    s.client.Post("/write", body_for("TAC-01", {make_point(1, "TAC-01", 1)}), "application/json");
    s.client.Post("/write", body_for("TAC-02", {make_point(2, "TAC-02", 2)}), "application/json");
    auto res = s.client.Get("/query?device=TAC-01&from_ns=0&to_ns=100");
    REQUIRE(res);
    auto j = json::parse(res->body);
    REQUIRE(j["points"].size() == 1);
    CHECK(j["points"][0]["t_ns"] == 1);
    res = s.client.Get("/query?device=TAC-02&from_ns=0&to_ns=100");
    REQUIRE(res);
    j = json::parse(res->body);
    REQUIRE(j["points"].size() == 1);
    CHECK(j["points"][0]["t_ns"] == 2);
}

TEST_CASE("service: query is a sorted half-open interval") {
    LiveService s("halfopen");
    std::vector<SeriesPoint> pts;
    for (int i = 100; i > 0; --i) pts.push_back(make_point(i * 10, "TAC-01", i)); // descending in
    s.client.Post("/write", body_for("TAC-01", pts), "application/json");

    auto res = s.client.Get("/query?device=TAC-01&from_ns=10&to_ns=1000");
    REQUIRE(res);
    const auto j = json::parse(res->body);
    REQUIRE(j["points"].size() == 99); // t = 1000 excluded
    int64_t prev = -1;
    for (const auto& pj : j["points"]) {
        const int64_t t = pj["t_ns"].get<int64_t>();
        CHECK(t > prev);
        CHECK(t < 1000);
        prev = t;
    }
    // empty store / empty range
    res = s.client.Get("/query?device=NOPE&from_ns=0&to_ns=10");
    REQUIRE(res);
    CHECK(json::parse(res->body)["points"].empty());
}

TEST_CASE("service: write/query round trip over random batches") {
    LiveService s("roundtrip");
    Rng rng(42);
    std::vector<SeriesPoint> sent;
    for (int batch = 0; batch < 10; ++batch) {
        std::vector<SeriesPoint> pts;
        for (int i = 0; i < 50; ++i) {
            const int64_t t = static_cast<int64_t>(rng.next_u64() % 1'000'000);
            auto p = make_point(t, "TAC-01", rng.uniform(0, 5000),
                                rng.uniform01() < 0.5 ? Source::realtime : Source::backfill);
            p.temp_c = rng.uniform(15, 35);
            p.rh_pct = rng.uniform(10, 95);
            pts.push_back(p);
        }
        const auto res = s.client.Post("/write", body_for("TAC-01", pts), "application/json");
        REQUIRE(res);
        sent.insert(sent.end(), pts.begin(), pts.end());
    }
    // reference: dedup by (t, source), sort by (t, source)
    std::map<std::pair<int64_t, int>, SeriesPoint> expect;
    for (const auto& p : sent) expect.try_emplace({p.t_ns, static_cast<int>(p.source)}, p);

    const auto got = s.store.query("TAC-01", 0, 2'000'000);
    REQUIRE(got.size() == expect.size());
    size_t i = 0;
    for (const auto& [key, p] : expect) {
        CHECK(got[i].t_ns == p.t_ns);
        CHECK(got[i].alcohol_raw == doctest::Approx(p.alcohol_raw));
        CHECK(got[i].source == p.source);
        ++i;
    }
}

TEST_CASE("service: malformed requests answer 400") {
    LiveService s("bad");
    auto res = s.client.Post("/write", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    // unknown top-level field
    res = s.client.Post("/write", R"({"device":"X","points":[],"extra":1})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    // unknown point field
    res = s.client.Post(
        "/write",
        R"({"device":"X","points":[{"t_ns":1,"alcohol_raw":0,"temp_c":0,"rh_pct":0,"source":"realtime","boop":1}]})",
        "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    // bad range and missing params
    res = s.client.Get("/query?device=X&from_ns=10&to_ns=5");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = s.client.Get("/query?device=X");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = s.client.Get("/export.csv?device=X&from_ns=abc&to_ns=5");
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("service: csv export matches the golden fixture byte for byte") {
    LiveService s("golden");
    auto p1 = make_point(1000, "TAC-01", 1.5);
    auto p2 = make_point(61000, "TAC-01", 2.25, Source::backfill);
    p2.temp_c = 26.5;
    p2.rh_pct = 55.25;
    s.client.Post("/write", body_for("TAC-01", {p1, p2}), "application/json");

    const auto res = s.client.Get("/export.csv?device=TAC-01&from_ns=0&to_ns=100000");
    REQUIRE(res);
    CHECK(res->status == 200);
    const std::string golden = "t_ns,device,alcohol_raw,temp_c,rh_pct,source\n"
                               "1000,TAC-01,1.5,25,40,realtime\n"
                               "61000,TAC-01,2.25,26.5,55.25,backfill\n";
    CHECK(res->body == golden);
}

TEST_CASE("service: field projection") {
    LiveService s("fields");
    s.client.Post("/write", body_for("TAC-01", {make_point(1, "TAC-01", 3.5)}),
                  "application/json");
    auto res = s.client.Get("/query?device=TAC-01&from_ns=0&to_ns=10&fields=alcohol_raw");
    REQUIRE(res);
    const auto j = json::parse(res->body);
    REQUIRE(j["points"].size() == 1);
    CHECK(j["points"][0].contains("t_ns"));
    CHECK(j["points"][0].contains("alcohol_raw"));
    CHECK(!j["points"][0].contains("temp_c"));
    res = s.client.Get("/query?device=TAC-01&from_ns=0&to_ns=10&fields=bogus");
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("service: durability across restart") {
    const auto dir = temp_dir("durable");
    {
        SeriesStore store(dir);
        Service service(store);
        const int port = service.start(0);
        httplib::Client client("127.0.0.1", port);
        std::vector<SeriesPoint> pts;
        for (int i = 0; i < 200; ++i) pts.push_back(make_point(i, "TAC-01", i * 0.5));
        const auto res = client.Post("/write", body_for("TAC-01", pts), "application/json");
        REQUIRE(res);
        CHECK(json::parse(res->body)["accepted"] == 200);
        service.stop();
    }
    SeriesStore reopened(dir);
    const auto got = reopened.query("TAC-01", 0, 1'000'000);
    CHECK(got.size() == 200);
    for (size_t i = 0; i < got.size(); ++i)
        CHECK(got[i].alcohol_raw == doctest::Approx(static_cast<double>(i) * 0.5));
}

TEST_CASE("store: concurrent writers to different devices stay consistent") {
    const auto dir = temp_dir("concurrent");
    SeriesStore store(dir);
    std::vector<std::thread> writers;
    for (int w = 0; w < 4; ++w) {
        writers.emplace_back([&store, w] {
            const std::string device = "TAC-0" + std::to_string(w);
            for (int i = 0; i < 250; ++i) {
                SeriesPoint p;
                p.t_ns = i;
                p.device_id = device;
                p.alcohol_raw = w * 1000.0 + i;
                p.source = Source::realtime;
                store.write(device, {&p, 1});
            }
        });
    }
    for (auto& t : writers) t.join();
    for (int w = 0; w < 4; ++w) {
        const auto got = store.query("TAC-0" + std::to_string(w), 0, 1000);
        REQUIRE(got.size() == 250);
        for (int i = 0; i < 250; ++i)
            CHECK(got[static_cast<size_t>(i)].alcohol_raw == doctest::Approx(w * 1000.0 + i));
    }
}
