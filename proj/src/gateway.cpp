#include "tacnet/gateway/gateway.hpp"

#include <httplib.h>

#include <chrono>
#include <iostream>
#include <thread>

#include "tacnet/util/crc32.hpp"
#include "tacnet/util/strfmt.hpp"

namespace tacnet::gateway {

using device::Frame;
using device::Opcode;
using tsdb::SeriesPoint;
using tsdb::Source;

nlohmann::ordered_json to_json_points(const std::string& device,
                                      std::span<const SeriesPoint> points) {
    if (points.empty()) throw std::invalid_argument("to_json_points: empty batch");
    const Source source = points.front().source;
    nlohmann::ordered_json j;
    j["device"] = device;
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        if (p.source != source)
            throw std::invalid_argument("to_json_points: batches are single-source");
        nlohmann::ordered_json pj;
        pj["t_ns"] = p.t_ns;
        pj["alcohol_raw"] = p.alcohol_raw;
        pj["temp_c"] = p.temp_c;
        pj["rh_pct"] = p.rh_pct;
        pj["source"] = to_string(p.source);
        j["points"].push_back(std::move(pj));
    }
    return j;
}

WriteSink::Result HttpWriteSink::write(const std::string& device,
                                       std::span<const SeriesPoint> points) {
    Result res;
    try {
        httplib::Client client(base_url_);
        client.set_connection_timeout(2, 0);
        const auto body = to_json_points(device, points).dump();
        auto http = client.Post("/write", body, "application/json");
        if (!http || http->status != 200) return res;
        const auto j = nlohmann::json::parse(http->body);
        res.ok = true;
        res.accepted = j.at("accepted").get<size_t>();
        res.duplicates = j.at("duplicates").get<size_t>();
    } catch (...) {
        res.ok = false;
    }
    return res;
}

Gateway::Gateway(GatewayConfig config, transport::Transport& transport, WriteSink& sink,
                 Clock& clock)
    : cfg_(std::move(config)), transport_(transport), sink_(sink), clock_(clock) {
    if (!cfg_.spool_dir.empty()) std::filesystem::create_directories(cfg_.spool_dir);
    if (!cfg_.csv_dir.empty()) std::filesystem::create_directories(cfg_.csv_dir);
}

std::optional<DeviceDescriptor> Gateway::probe(const std::string& address,
                                               transport::FrameLink& link) {
    Frame req;
    req.opcode = Opcode::GetInfo;
    req.seq = 0;
    try {
        link.send(req);
    } catch (...) {
        return std::nullopt;
    }
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(cfg_.reply_timeout_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        if (auto f = link.recv()) {
            if (f->opcode != Opcode::Info || f->payload.size() < 8) continue;
            DeviceDescriptor d;
            d.transport_address = address;
            d.latest_rec_id = device::read_u16le(f->payload, 2);
            d.record_count = device::read_u32le(f->payload, 4);
            d.device_name.assign(f->payload.begin() + 8, f->payload.end());
            return d;
        }
        if (!link.is_open()) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return std::nullopt;
}

std::vector<DeviceDescriptor> Gateway::scan() {
    std::vector<DeviceDescriptor> out;
    std::vector<std::string> endpoints;
    try {
        endpoints = transport_.endpoints();
    } catch (const std::exception& e) {
        std::cerr << "gateway: transport unavailable (" << e.what() << ")\n";
        return out;
    }
    for (const auto& addr : endpoints) {
        std::unique_ptr<transport::FrameLink> link;
        try {
            link = transport_.connect(addr);
        } catch (...) {
            link = nullptr;
        }
        if (!link) continue;
        auto d = probe(addr, *link);
        link->close();
        if (d && d->device_name.rfind(cfg_.filter_prefix, 0) == 0) out.push_back(*d);
    }
    if (out.empty()) std::cerr << "gateway: no devices matched prefix '" << cfg_.filter_prefix << "'\n";
    return out;
}

bool Gateway::connect(const DeviceDescriptor& device) {
    link_ = transport_.connect(device.transport_address);
    if (!link_) return false;
    device_ = device;
    saw_disconnect_ = false;
    load_spool();
    return true;
}

void Gateway::disconnect() {
    if (link_) link_->close();
    link_.reset();
}

bool Gateway::connected() const { return link_ && link_->is_open(); }

std::optional<Frame> Gateway::request(const Frame& req) {
    if (!connected()) return std::nullopt;
    try {
        link_->send(req);
    } catch (...) {
        saw_disconnect_ = true;
        return std::nullopt;
    }
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(cfg_.reply_timeout_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        if (auto f = link_->recv()) {
            if (f->opcode == Opcode::Meas) {
                handle_push(*f);
                continue;
            }
            return f;
        }
        if (!link_->is_open()) {
            saw_disconnect_ = true;
            return std::nullopt;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return std::nullopt;
}

bool Gateway::subscribe() {
    Frame req;
    req.opcode = Opcode::Subscribe;
    const auto resp = request(req);
    return resp && resp->opcode == Opcode::Ack;
}

bool Gateway::unsubscribe() {
    Frame req;
    req.opcode = Opcode::Unsubscribe;
    const auto resp = request(req);
    return resp && resp->opcode == Opcode::Ack;
}

void Gateway::handle_push(const Frame& frame) {
    if (frame.opcode != Opcode::Meas || frame.payload.size() != 12) return;
    SeriesPoint p;
    p.t_ns = clock_.now_ns();
    p.device_id = device_.device_name;
    p.alcohol_raw = device::read_f32le(frame.payload, 0);
    p.temp_c = device::read_f32le(frame.payload, 4);
    p.rh_pct = device::read_f32le(frame.payload, 8);
    p.source = Source::realtime;
    enqueue(p);
    ++realtime_points_;
}

size_t Gateway::poll() {
    if (!link_) return 0;
    size_t n = 0;
    while (auto f = link_->recv()) {
        if (f->opcode == Opcode::Meas) {
            handle_push(*f);
            ++n;
        }
    }
    if (!link_->is_open()) saw_disconnect_ = true;
    if (pending_.size() >= cfg_.upload_batch) flush();
    return n;
}

std::vector<device::FlashRecord> Gateway::fetch_records(uint16_t from_id, uint16_t to_id) {
    Frame req;
    req.opcode = Opcode::FlashRead;
    device::append_u16le(req.payload, from_id);
    device::append_u16le(req.payload, to_id);
    if (!connected()) throw std::runtime_error("backfill: not connected");
    link_->send(req);

    std::vector<device::FlashRecord> records;
    uint32_t crc = 0;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(cfg_.reply_timeout_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        auto f = link_->recv();
        if (!f) {
            if (!link_->is_open()) {
                saw_disconnect_ = true;
                throw std::runtime_error("backfill: device disconnected during dump");
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
            continue;
        }
        switch (f->opcode) {
        case Opcode::Meas:
            handle_push(*f); // streaming continues during dumps
            break;
        case Opcode::FlashData: {
            crc = crc32(f->payload, crc);
            records.push_back(device::decode_record(f->payload));
            break;
        }
        case Opcode::FlashEnd: {
            if (f->payload.size() != 8) throw std::runtime_error("backfill: malformed end frame");
            const uint32_t count = device::read_u32le(f->payload, 0);
            const uint32_t want_crc = device::read_u32le(f->payload, 4);
            if (count != records.size() || want_crc != crc)
                throw std::runtime_error("backfill: checksum mismatch");
            return records;
        }
        case Opcode::Nak:
            return {}; // entire range gone; caller reports the gap
        default:
            break;
        }
    }
    throw std::runtime_error("backfill: timed out waiting for dump");
}

BackfillReport Gateway::backfill() {
    BackfillReport report;

    Frame info_req;
    info_req.opcode = Opcode::GetInfo;
    const auto info = request(info_req);
    if (!info || info->opcode != Opcode::Info || info->payload.size() < 8)
        throw std::runtime_error("backfill: device info unavailable");
    const uint16_t latest = device::read_u16le(info->payload, 2);
    const uint32_t count = device::read_u32le(info->payload, 4);
    if (count == 0) return report;

    // wrap-aware window: at most 32,768 minutes of history is addressable
    const uint16_t from_id = static_cast<uint16_t>(latest - 32767);

    std::vector<device::FlashRecord> records;
    int attempt = 0;
    for (;;) {
        try {
            records = fetch_records(from_id, latest);
            break;
        } catch (const std::exception&) {
            if (attempt++ >= cfg_.integrity_retries) throw;
            ++report.retries_used;
        }
    }
    report.records_fetched = records.size();
    report.gap_records = count > records.size() ? count - records.size() : 0;

    const int64_t now = clock_.now_ns();
    for (const auto& rec : records) {
        if (uploaded_backfill_ids_.contains(rec.rec_id)) continue;
        const uint16_t delta_min = static_cast<uint16_t>(latest - rec.rec_id);
        SeriesPoint p;
        p.t_ns = now - static_cast<int64_t>(delta_min) * 60'000'000'000LL;
        p.device_id = device_.device_name;
        p.alcohol_raw = rec.v1;
        p.temp_c = rec.v2;
        p.rh_pct = rec.v3;
        p.source = Source::backfill;
        enqueue(p);
        uploaded_backfill_ids_.insert(rec.rec_id);
        ++report.points_enqueued;
    }
    flush();
    return report;
}

void Gateway::enqueue(const SeriesPoint& p) {
    append_csv(p); // local copy always leads the service
    pending_.push_back(p);
    if (!cfg_.spool_dir.empty()) {
        std::ofstream spool(cfg_.spool_dir / (device_.device_name + ".spool"),
                            std::ios::app | std::ios::binary);
        nlohmann::ordered_json j;
        j["t_ns"] = p.t_ns;
        j["alcohol_raw"] = p.alcohol_raw;
        j["temp_c"] = p.temp_c;
        j["rh_pct"] = p.rh_pct;
        j["source"] = to_string(p.source);
        spool << j.dump() << '\n';
    }
}

void Gateway::append_csv(const SeriesPoint& p) {
    if (cfg_.csv_dir.empty()) return;
    if (!csv_) {
        const auto path = cfg_.csv_dir / (device_.device_name + ".csv");
        const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
        csv_ = std::make_unique<std::ofstream>(path, std::ios::app | std::ios::binary);
        if (fresh) *csv_ << tsdb::kCsvHeader << '\n';
    }
    *csv_ << fmt_i64(p.t_ns) << ',' << p.device_id << ',' << fmt_g(p.alcohol_raw) << ','
          << fmt_g(p.temp_c) << ',' << fmt_g(p.rh_pct) << ',' << to_string(p.source) << '\n';
    csv_->flush();
}

bool Gateway::flush() {
    while (!pending_.empty()) {
        const size_t n = std::min(cfg_.upload_batch, pending_.size());
        std::vector<SeriesPoint> batch(pending_.begin(), pending_.begin() + static_cast<long>(n));
        const auto res = sink_.write(device_.device_name, batch);
        if (!res.ok) {
            rewrite_spool();
            return false;
        }
        pending_.erase(pending_.begin(), pending_.begin() + static_cast<long>(n));
    }
    rewrite_spool();
    return true;
}

void Gateway::rewrite_spool() {
    if (cfg_.spool_dir.empty()) return;
    std::ofstream spool(cfg_.spool_dir / (device_.device_name + ".spool"),
                        std::ios::trunc | std::ios::binary);
    for (const auto& p : pending_) {
        nlohmann::ordered_json j;
        j["t_ns"] = p.t_ns;
        j["alcohol_raw"] = p.alcohol_raw;
        j["temp_c"] = p.temp_c;
        j["rh_pct"] = p.rh_pct;
        j["source"] = to_string(p.source);
        spool << j.dump() << '\n';
    }
}

void Gateway::load_spool() {
    if (cfg_.spool_dir.empty()) return;
    const auto path = cfg_.spool_dir / (device_.device_name + ".spool");
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            SeriesPoint p;
            p.t_ns = j.at("t_ns").get<int64_t>();
            p.device_id = device_.device_name;
            p.alcohol_raw = j.at("alcohol_raw").get<double>();
            p.temp_c = j.at("temp_c").get<double>();
            p.rh_pct = j.at("rh_pct").get<double>();
            p.source = tsdb::source_from_string(j.at("source").get<std::string>());
            // replayed points may already be at the service; its (device,
            // source, t_ns) dedup makes the re-send idempotent
            pending_.push_back(std::move(p));
        } catch (...) {
            continue;
        }
    }
}

} // namespace tacnet::gateway
