#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "tacnet/device/analog_frontend.hpp"
#include "tacnet/device/emulator.hpp"
#include "tacnet/device/flash_fifo.hpp"
#include "tacnet/device/flash_record.hpp"
#include "tacnet/util/rng.hpp"

using namespace tacnet;
using namespace tacnet::device;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("tacnet_test_" + name);
    std::filesystem::remove(p);
    return p;
}

} // namespace

TEST_CASE("adc chain: zero current with zero offset reads zero counts") {
    GainTable table;
    table.v_ref = 0.0;
    CHECK(adc_counts(0.0, table.resistance(3), table) == 0);
}

TEST_CASE("adc chain: full-scale input saturates at 4095") {
    GainTable table;
    CHECK(adc_counts(5e6, table.resistance(7), table) == 4095);
}

TEST_CASE("adc chain: mid-range conversion matches the hand-computed value") {
    // oracle: 1e5 nA * 14 kOhm = 1.4 V, +0.2 V offset = 1.6 V;
    // 1.6 / 3.0 * 4095 = 2184.0 counts exactly
    GainTable table;
    CHECK(adc_counts(1e5, table.resistance(3), table) == 2184);
    CHECK(table.offset_counts() == doctest::Approx(273.0));
}

TEST_CASE("auto_gain: steps one index per tick toward the band") {
    GainTable table;
    SensorSample s;
    s.adc_counts = 4095;
    s.gain_index = 3;
    CHECK(auto_gain(s, table) == 2); // saturating: reduce gain
    s.adc_counts = 2000;
    CHECK(auto_gain(s, table) == 3); // in-band: unchanged
    s.adc_counts = 100;
    CHECK(auto_gain(s, table) == 4); // starving: raise gain
    s.gain_index = 0;
    s.adc_counts = 4095;
    CHECK(auto_gain(s, table) == 0); // already at the bottom
    s.gain_index = 7;
    s.adc_counts = 100;
    CHECK(auto_gain(s, table) == 7); // already at the top
}

TEST_CASE("auto_gain: ramp stays in band except single-tick switch excursions") {
    GainTable table;
    // up to the in-band maximum at the lowest gain (the usable range top)
    const double full_scale_na =
        (kGainDownCounts / 4095.0 * table.v_fullscale - table.v_ref) / table.resistance(0) * 1e9;
    uint8_t gain = 7;
    int out_of_band_run = 0;
    bool entered_band = false;
    for (int t = 0; t <= 600; ++t) {
        const double current = full_scale_na * t / 600.0;
        SensorSample s;
        s.gain_index = gain;
        s.adc_counts = adc_counts(current, table.resistance(gain), table);
        const bool in_band = s.adc_counts >= kGainUpCounts && s.adc_counts <= kGainDownCounts;
        const uint8_t next = auto_gain(s, table);
        if (!entered_band) {
            entered_band = in_band;
        } else if (in_band) {
            out_of_band_run = 0;
        } else {
            CHECK(next != gain); // every excursion forces a switch
            ++out_of_band_run;
            CHECK(out_of_band_run <= 1); // and lasts one tick
        }
        gain = next;
    }
    CHECK(entered_band);
}

TEST_CASE("auto_gain: recovery within 8 ticks for any bounded step") {
    GainTable table;
    Rng rng(321);
    for (int trial = 0; trial < 200; ++trial) {
        const double current =
            rng.uniform(1.0, (table.v_fullscale - table.v_ref) / table.resistance(0) * 1e9);
        uint8_t gain = static_cast<uint8_t>(rng.next_u64() % 8);
        bool recovered = false;
        for (int tick = 0; tick < 8; ++tick) {
            SensorSample s;
            s.gain_index = gain;
            s.adc_counts = adc_counts(current, table.resistance(gain), table);
            if (s.adc_counts >= kGainUpCounts && s.adc_counts <= kGainDownCounts) {
                recovered = true;
                break;
            }
            const uint8_t next = auto_gain(s, table);
            if (next == gain) break; // clamped at an end of the ladder
            gain = next;
        }
        // only currents with some in-band gain can recover: above the band
        // floor at max gain and below the band ceiling at min gain
        const double hi_gain_counts = adc_counts(current, table.resistance(7), table);
        const double lo_gain_counts = adc_counts(current, table.resistance(0), table);
        if (hi_gain_counts >= kGainUpCounts && lo_gain_counts <= kGainDownCounts)
            CHECK(recovered);
    }
}

TEST_CASE("minute_average: identical samples average to themselves") {
    GainTable table;
    std::vector<SensorSample> buf(60, SensorSample{1500, 5, 30.0, 55.0});
    const auto rec = minute_average(buf, 7, 5, table);
    CHECK(rec.rec_id == 7);
    CHECK(rec.v1 == doctest::Approx(1500.0));
    CHECK(rec.v2 == doctest::Approx(30.0));
    CHECK(rec.v3 == doctest::Approx(55.0));
}

TEST_CASE("minute_average: gain switch mid-minute uses per-sample normalization") {
    GainTable table;
    // hand normalization oracle: norm = (counts - 273) * R_ref/R + 273
    std::vector<SensorSample> buf;
    buf.push_back({2000, 5, 25.0, 40.0}); // at ref gain: stays 2000
    buf.push_back({2000, 4, 25.0, 40.0}); // 35 kOhm -> (2000-273)*120/35+273
    const double norm1 = 2000.0;
    const double norm2 = (2000.0 - 273.0) * (120000.0 / 35000.0) + 273.0;
    const auto rec = minute_average(buf, 1, 5, table);
    CHECK(rec.v1 == doctest::Approx(0.5 * (norm1 + norm2)));
}

TEST_CASE("minute_average: alternating rail samples at the reference gain") {
    GainTable table;
    std::vector<SensorSample> buf;
    for (int i = 0; i < 60; ++i)
        buf.push_back({static_cast<uint16_t>(i % 2 ? 4095 : 0), 5, 25.0, 40.0});
    const auto rec = minute_average(buf, 1, 5, table);
    CHECK(rec.v1 == doctest::Approx(2047.5));
}

TEST_CASE("minute_average: empty buffer is rejected") {
    GainTable table;
    CHECK_THROWS_AS(minute_average({}, 1, 5, table), std::invalid_argument);
}

TEST_CASE("record codec: all-zero bytes decode to the zero record") {
    std::array<uint8_t, kFlashRecordSize> zeros{};
    const auto rec = decode_record(zeros);
    CHECK(rec.rec_type == 0);
    CHECK(rec.rec_id == 0);
    CHECK(rec.v1 == 0.0f);
    CHECK(rec.v2 == 0.0f);
    CHECK(rec.v3 == 0.0f);
}

TEST_CASE("record codec: golden little-endian layout") {
    FlashRecord rec{1, 2, 1.5f, 25.0f, 50.0f};
    const auto bytes = encode_record(rec);
    const std::array<uint8_t, 16> golden{0x01, 0x00, 0x02, 0x00, 0x00, 0x00, 0xC0, 0x3F,
                                         0x00, 0x00, 0xC8, 0x41, 0x00, 0x00, 0x48, 0x42};
    CHECK(std::equal(bytes.begin(), bytes.end(), golden.begin()));
}

TEST_CASE("record codec: decode rejects wrong lengths") {
    std::vector<uint8_t> short_buf(15, 0);
    CHECK_THROWS_AS(decode_record(short_buf), std::length_error);
    std::vector<uint8_t> long_buf(17, 0);
    CHECK_THROWS_AS(decode_record(long_buf), std::length_error);
}

TEST_CASE("record codec: 10^4 random round trips, NaN payloads included") {
    Rng rng(12345);
    for (int i = 0; i < 10000; ++i) {
        FlashRecord rec;
        rec.rec_type = static_cast<uint16_t>(rng.next_u64());
        rec.rec_id = static_cast<uint16_t>(rng.next_u64());
        const auto rand_f32 = [&] {
            return std::bit_cast<float>(static_cast<uint32_t>(rng.next_u64()));
        };
        rec.v1 = rand_f32(); // arbitrary bit patterns: NaNs, infs, denormals
        rec.v2 = rand_f32();
        rec.v3 = rand_f32();
        const auto bytes = encode_record(rec);
        const auto back = decode_record(bytes);
        // byte-level identity is the contract (float compare would lose NaNs)
        CHECK(encode_record(back) == bytes);
        CHECK(back.rec_type == rec.rec_type);
        CHECK(back.rec_id == rec.rec_id);
    }
}

TEST_CASE("flash fifo: append then read returns the record") {
    FlashFifo fifo(temp_file("fifo_basic.bin"), 160);
    FlashRecord rec{1, 5, 1.0f, 2.0f, 3.0f};
    fifo.append(rec);
    const auto got = fifo.read_range(5, 5);
    REQUIRE(got.size() == 1);
    CHECK(encode_record(got[0]) == encode_record(rec));
}

TEST_CASE("flash fifo: default capacity holds over 100 days of minutes") {
    FlashFifo fifo(temp_file("fifo_cap.bin"));
    CHECK(fifo.capacity_records() == 524288);   // 8 MiB / 16 B
    CHECK(fifo.capacity_records() >= 144000);   // 100 days of minutes
}

TEST_CASE("flash fifo: oldest record evicted at capacity") {
    FlashFifo fifo(temp_file("fifo_evict.bin"), 16 * 8); // 8 slots
    for (uint16_t id = 1; id <= 9; ++id) fifo.append({1, id, float(id), 0, 0});
    CHECK(fifo.size() == 8);
    CHECK_THROWS_AS(fifo.read_range(1, 1), NotRetainedError); // evicted
    const auto got = fifo.read_range(2, 9);
    REQUIRE(got.size() == 8);
    CHECK(got.front().rec_id == 2);
    CHECK(got.back().rec_id == 9);
}

TEST_CASE("flash fifo: persistence round-trip is bit-exact") {
    const auto path = temp_file("fifo_persist.bin");
    std::vector<std::array<uint8_t, 16>> written;
    {
        FlashFifo fifo(path, 16 * 2048);
        Rng rng(55);
        for (uint16_t id = 1; id <= 1000; ++id) {
            FlashRecord rec{1, id, static_cast<float>(rng.uniform(0, 5000)),
                            static_cast<float>(rng.uniform(15, 35)),
                            static_cast<float>(rng.uniform(20, 90))};
            fifo.append(rec);
            written.push_back(encode_record(rec));
        }
    } // destructor flushes
    FlashFifo reloaded(path, 16 * 2048);
    CHECK(reloaded.size() == 1000);
    const auto got = reloaded.read_range(1, 1000);
    REQUIRE(got.size() == 1000);
    for (size_t i = 0; i < got.size(); ++i) CHECK(encode_record(got[i]) == written[i]);
}

TEST_CASE("flash fifo: not-retained error carries the available range") {
    FlashFifo fifo(temp_file("fifo_range.bin"), 16 * 16);
    for (uint16_t id = 100; id <= 110; ++id) fifo.append({1, id, 0, 0, 0});
    try {
        fifo.read_range(10, 50);
        FAIL("expected NotRetainedError");
    } catch (const NotRetainedError& e) {
        CHECK(e.avail_from_id == 100);
        CHECK(e.avail_to_id == 110);
    }
}

TEST_CASE("flash fifo: windowed reads survive id wraparound") {
    FlashFifo fifo(temp_file("fifo_wrap.bin"), 16 * 64);
    // ids 65530..65535 then 0..5 (wrap at 65536)
    for (uint32_t i = 0; i < 12; ++i) {
        const uint16_t id = static_cast<uint16_t>(65530 + i);
        fifo.append({1, id, float(i), 0, 0});
    }
    const auto got = fifo.read_range(65530, 5);
    REQUIRE(got.size() == 12);
    CHECK(got.front().rec_id == 65530);
    CHECK(got.back().rec_id == 5);
}

TEST_CASE("emulator: one record per virtual minute with strictly increasing ids") {
    DeviceConfig cfg;
    cfg.noise_sigma_counts_clean = 0.0;
    cfg.noise_sigma_counts_onbody = 0.0;
    DeviceEmulator emu(cfg, temp_file("emu_minutes.flash"));
    AnalogInputs in;
    in.current_na = 1000.0;
    for (int t = 0; t < 600; ++t) emu.tick(in);
    CHECK(emu.fifo().size() == 10);
    const auto recs = emu.fifo().read_range(1, 10);
    REQUIRE(recs.size() == 10);
    for (size_t i = 0; i < recs.size(); ++i) CHECK(recs[i].rec_id == i + 1);
}

TEST_CASE("emulator: paused acquisition leaves id gaps") {
    DeviceConfig cfg;
    DeviceEmulator emu(cfg, temp_file("emu_gap.flash"));
    AnalogInputs in;
    for (int t = 0; t < 120; ++t) emu.tick(in); // minutes 1,2
    emu.set_acquiring(false);
    for (int t = 0; t < 120; ++t) emu.tick(in); // minutes 3,4 skipped
    emu.set_acquiring(true);
    for (int t = 0; t < 60; ++t) emu.tick(in); // minute 5
    CHECK(emu.latest_rec_id() == 5);
    const auto recs = emu.fifo().read_range(1, 5);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].rec_id == 1);
    CHECK(recs[1].rec_id == 2);
    CHECK(recs[2].rec_id == 5);
}

TEST_CASE("emulator: measurement noise is seeded and deterministic") {
    DeviceConfig cfg;
    cfg.noise_seed = 77;
    DeviceEmulator a(cfg, temp_file("emu_det_a.flash"));
    DeviceEmulator b(cfg, temp_file("emu_det_b.flash"));
    AnalogInputs in;
    in.current_na = 5000.0;
    in.on_body = true;
    for (int t = 0; t < 180; ++t) {
        a.tick(in);
        b.tick(in);
        CHECK(a.last_sample().adc_counts == b.last_sample().adc_counts);
    }
    DeviceConfig other = cfg;
    other.noise_seed = 78;
    DeviceEmulator c(other, temp_file("emu_det_c.flash"));
    bool any_diff = false;
    DeviceEmulator a2(cfg, temp_file("emu_det_a2.flash"));
    for (int t = 0; t < 180; ++t) {
        a2.tick(in);
        c.tick(in);
        any_diff |= a2.last_sample().adc_counts != c.last_sample().adc_counts;
    }
    CHECK(any_diff);
}

TEST_CASE("emulator: restart resumes the record id sequence") {
    const auto path = temp_file("emu_restart.flash");
    DeviceConfig cfg;
    {
        DeviceEmulator emu(cfg, path);
        AnalogInputs in;
        for (int t = 0; t < 300; ++t) emu.tick(in);
        CHECK(emu.latest_rec_id() == 5);
    }
    DeviceEmulator emu(cfg, path);
    CHECK(emu.fifo().size() == 5);
    AnalogInputs in;
    for (int t = 0; t < 60; ++t) emu.tick(in);
    CHECK(emu.latest_rec_id() == 6);
}
