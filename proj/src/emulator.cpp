#include "tacnet/device/emulator.hpp"

#include <cmath>

#include "tacnet/util/crc32.hpp"

namespace tacnet::device {

DeviceEmulator::DeviceEmulator(DeviceConfig config, const std::filesystem::path& flash_file)
    : cfg_(std::move(config)), fifo_(flash_file), noise_(cfg_.noise_seed) {
    cfg_.gains.validate();
    cfg_.gains.resistance(cfg_.ref_gain_index); // bounds check
    gain_index_ = static_cast<uint8_t>(cfg_.ref_gain_index);
    if (auto last = fifo_.newest()) next_rec_id_ = static_cast<uint16_t>(last->rec_id + 1);
}

void DeviceEmulator::tick(const AnalogInputs& in) {
    ++uptime_s_;

    if (acquiring_) {
        const double sigma_counts =
            in.on_body ? cfg_.noise_sigma_counts_onbody : cfg_.noise_sigma_counts_clean;
        // counts noise at the reference gain, expressed as input current noise
        const double sigma_na = sigma_counts * cfg_.gains.v_fullscale / 4095.0 /
                                cfg_.gains.resistance(cfg_.ref_gain_index) * 1e9;
        const double current = in.current_na + noise_.gaussian(0.0, sigma_na);

        SensorSample s;
        s.gain_index = gain_index_;
        s.adc_counts = adc_counts(current, cfg_.gains.resistance(gain_index_), cfg_.gains);
        s.temp_c = quantize_temp_c(in.temp_c);
        s.rh_pct = quantize_rh_pct(in.rh_pct);
        last_sample_ = s;

        sum_norm_ += normalize_counts(s.adc_counts, s.gain_index, cfg_.ref_gain_index, cfg_.gains);
        sum_temp_ += s.temp_c;
        sum_rh_ += s.rh_pct;
        ++minute_count_;

        if (subscribed_) {
            Frame f;
            f.opcode = Opcode::Meas;
            f.seq = meas_seq_++;
            append_f32le(f.payload, static_cast<float>(normalize_counts(
                                        s.adc_counts, s.gain_index, cfg_.ref_gain_index, cfg_.gains)));
            append_f32le(f.payload, static_cast<float>(s.temp_c));
            append_f32le(f.payload, static_cast<float>(s.rh_pct));
            outbound_.push_back(std::move(f));
            ++meas_pushed_;
        }

        gain_index_ = auto_gain(s, cfg_.gains);
    }

    if (uptime_s_ % 60 == 0) close_minute();
}

void DeviceEmulator::close_minute() {
    const uint16_t id = next_rec_id_++;
    if (minute_count_ == 0) return; // gap: id consumed, no record

    FlashRecord rec;
    rec.rec_type = kRecTypeMinuteAvg;
    rec.rec_id = id;
    rec.v1 = static_cast<float>(sum_norm_ / minute_count_);
    rec.v2 = static_cast<float>(sum_temp_ / minute_count_);
    rec.v3 = static_cast<float>(sum_rh_ / minute_count_);
    fifo_.append(rec);

    sum_norm_ = sum_temp_ = sum_rh_ = 0.0;
    minute_count_ = 0;
}

std::vector<Frame> DeviceEmulator::handle_frame(const Frame& req) {
    std::vector<Frame> out;
    const auto ack = [&](const Frame& r) {
        Frame f;
        f.opcode = Opcode::Ack;
        f.seq = r.seq;
        f.payload = {static_cast<uint8_t>(r.opcode)};
        return f;
    };

    switch (req.opcode) {
    case Opcode::GetInfo: {
        if (!req.payload.empty()) return {make_nak(req, NakReason::BadLength)};
        Frame f;
        f.opcode = Opcode::Info;
        f.seq = req.seq;
        f.payload.push_back(1); // protocol version
        f.payload.push_back(cfg_.fw_version);
        append_u16le(f.payload, latest_rec_id());
        append_u32le(f.payload, static_cast<uint32_t>(fifo_.size()));
        const size_t room = kMaxPayload - f.payload.size();
        for (size_t i = 0; i < cfg_.name.size() && i < room; ++i)
            f.payload.push_back(static_cast<uint8_t>(cfg_.name[i]));
        out.push_back(std::move(f));
        break;
    }
    case Opcode::Subscribe:
        if (!req.payload.empty()) return {make_nak(req, NakReason::BadLength)};
        subscribed_ = true;
        out.push_back(ack(req));
        break;
    case Opcode::Unsubscribe:
        if (!req.payload.empty()) return {make_nak(req, NakReason::BadLength)};
        subscribed_ = false;
        out.push_back(ack(req));
        break;
    case Opcode::SetTimeRef:
        // the device keeps no wall clock; acknowledged and ignored
        out.push_back(ack(req));
        break;
    case Opcode::FlashRead: {
        if (req.payload.size() != 4) return {make_nak(req, NakReason::BadLength)};
        const uint16_t from_id = read_u16le(req.payload, 0);
        const uint16_t to_id = read_u16le(req.payload, 2);
        try {
            const auto records = fifo_.read_range(from_id, to_id);
            uint8_t seq = 0;
            uint32_t crc = 0;
            for (const auto& rec : records) {
                Frame f;
                f.opcode = Opcode::FlashData;
                f.seq = seq++;
                const auto bytes = encode_record(rec);
                f.payload.assign(bytes.begin(), bytes.end());
                crc = crc32(bytes, crc);
                outbound_.push_back(std::move(f));
            }
            Frame end;
            end.opcode = Opcode::FlashEnd;
            end.seq = seq;
            append_u32le(end.payload, static_cast<uint32_t>(records.size()));
            append_u32le(end.payload, crc);
            outbound_.push_back(std::move(end));
        } catch (const NotRetainedError& e) {
            std::vector<uint8_t> detail;
            append_u16le(detail, e.avail_from_id);
            append_u16le(detail, e.avail_to_id);
            return {make_nak(req, NakReason::NotRetained, std::move(detail))};
        } catch (const std::invalid_argument&) {
            return {make_nak(req, NakReason::BadLength)};
        }
        break;
    }
    default:
        return {make_nak(req, NakReason::UnknownOpcode)};
    }
    return out;
}

std::vector<Frame> DeviceEmulator::drain_outbound() {
    std::vector<Frame> out(outbound_.begin(), outbound_.end());
    outbound_.clear();
    return out;
}

Frame DeviceEmulator::make_nak(const Frame& req, NakReason reason,
                               std::vector<uint8_t> detail) const {
    Frame f;
    f.opcode = Opcode::Nak;
    f.seq = req.seq;
    f.payload.push_back(static_cast<uint8_t>(req.opcode));
    f.payload.push_back(static_cast<uint8_t>(reason));
    f.payload.insert(f.payload.end(), detail.begin(), detail.end());
    return f;
}

FlashRecord minute_average(const std::vector<SensorSample>& buffer, uint16_t rec_id,
                           int ref_gain_index, const GainTable& table) {
    if (buffer.empty()) throw std::invalid_argument("minute_average: empty buffer");
    double sum_norm = 0.0, sum_temp = 0.0, sum_rh = 0.0;
    for (const auto& s : buffer) {
        sum_norm += normalize_counts(s.adc_counts, s.gain_index, ref_gain_index, table);
        sum_temp += s.temp_c;
        sum_rh += s.rh_pct;
    }
    const double n = static_cast<double>(buffer.size());
    FlashRecord rec;
    rec.rec_type = kRecTypeMinuteAvg;
    rec.rec_id = rec_id;
    rec.v1 = static_cast<float>(sum_norm / n);
    rec.v2 = static_cast<float>(sum_temp / n);
    rec.v3 = static_cast<float>(sum_rh / n);
    return rec;
}

} // namespace tacnet::device
