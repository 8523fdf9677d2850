#include "tacnet/tsdb/store.hpp"

#include <json.hpp>

#include <mutex>

namespace tacnet::tsdb {

namespace {

nlohmann::ordered_json point_json(int64_t t_ns, double alcohol, double temp, double rh,
                                  Source source) {
    nlohmann::ordered_json j;
    j["t_ns"] = t_ns;
    j["alcohol_raw"] = alcohol;
    j["temp_c"] = temp;
    j["rh_pct"] = rh;
    j["source"] = to_string(source);
    return j;
}

} // namespace

SeriesStore::SeriesStore(std::filesystem::path data_dir) : dir_(std::move(data_dir)) {
    std::filesystem::create_directories(dir_);
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() != ".log") continue;
        replay(entry.path(), entry.path().stem().string());
    }
}

void SeriesStore::replay(const std::filesystem::path& file, const std::string& device) {
    std::ifstream in(file, std::ios::binary);
    auto& dev = devices_[device];
    std::string len_str;
    while (in >> len_str) {
        in.get(); // the separating space
        size_t len = 0;
        try {
            len = std::stoul(len_str);
        } catch (...) {
            break; // torn tail write; keep what replayed cleanly
        }
        std::string body(len, '\0');
        in.read(body.data(), static_cast<std::streamsize>(len));
        if (static_cast<size_t>(in.gcount()) != len) break;
        in.get(); // trailing newline
        try {
            const auto j = nlohmann::json::parse(body);
            const Source src = source_from_string(j.at("source").get<std::string>());
            dev.points[{j.at("t_ns").get<int64_t>(), static_cast<uint8_t>(src)}] =
                Values{j.at("alcohol_raw").get<double>(), j.at("temp_c").get<double>(),
                       j.at("rh_pct").get<double>()};
        } catch (...) {
            break;
        }
    }
}

SeriesStore::DeviceLog& SeriesStore::device_log(const std::string& device) {
    auto& dev = devices_[device];
    if (!dev.log) {
        dev.log = std::make_unique<std::ofstream>(dir_ / (device + ".log"),
                                                  std::ios::app | std::ios::binary);
        if (!*dev.log)
            throw std::runtime_error("SeriesStore: cannot open log for device " + device);
    }
    return dev;
}

SeriesStore::WriteResult SeriesStore::write(const std::string& device,
                                            std::span<const SeriesPoint> points) {
    std::unique_lock lk(mu_);
    auto& dev = device_log(device);
    WriteResult res;
    std::string pending;
    for (const auto& p : points) {
        const std::pair<int64_t, uint8_t> key{p.t_ns, static_cast<uint8_t>(p.source)};
        if (dev.points.contains(key)) {
            ++res.duplicates;
            continue;
        }
        dev.points[key] = Values{p.alcohol_raw, p.temp_c, p.rh_pct};
        const std::string line =
            point_json(p.t_ns, p.alcohol_raw, p.temp_c, p.rh_pct, p.source).dump();
        pending += std::to_string(line.size());
        pending += ' ';
        pending += line;
        pending += '\n';
        ++res.accepted;
    }
    if (!pending.empty()) {
        *dev.log << pending;
        dev.log->flush(); // batch is durable before the response goes out
    }
    return res;
}

std::vector<SeriesPoint> SeriesStore::query(const std::string& device, int64_t from_ns,
                                            int64_t to_ns) const {
    if (from_ns > to_ns) throw std::invalid_argument("query: from_ns > to_ns");
    std::shared_lock lk(mu_);
    std::vector<SeriesPoint> out;
    auto it = devices_.find(device);
    if (it == devices_.end()) return out;
    auto lo = it->second.points.lower_bound({from_ns, 0});
    for (; lo != it->second.points.end() && lo->first.first < to_ns; ++lo) {
        SeriesPoint p;
        p.t_ns = lo->first.first;
        p.device_id = device;
        p.source = static_cast<Source>(lo->first.second);
        p.alcohol_raw = lo->second.alcohol_raw;
        p.temp_c = lo->second.temp_c;
        p.rh_pct = lo->second.rh_pct;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::string> SeriesStore::devices() const {
    std::shared_lock lk(mu_);
    std::vector<std::string> out;
    for (const auto& [name, dev] : devices_) {
        (void)dev;
        out.push_back(name);
    }
    return out;
}

size_t SeriesStore::total_points() const {
    std::shared_lock lk(mu_);
    size_t n = 0;
    for (const auto& [name, dev] : devices_) {
        (void)name;
        n += dev.points.size();
    }
    return n;
}

} // namespace tacnet::tsdb
