#include "tacnet/tsdb/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include "tacnet/util/strfmt.hpp"

namespace tacnet::tsdb {

using nlohmann::json;

std::vector<SeriesPoint> parse_write_batch(const std::string& body, std::string& device_out) {
    const json j = json::parse(body);
    if (!j.is_object()) throw std::invalid_argument("batch must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "device" && key != "points")
            throw std::invalid_argument("unknown field: " + key);
    }
    device_out = j.at("device").get<std::string>();
    if (device_out.empty()) throw std::invalid_argument("device must be non-empty");

    std::vector<SeriesPoint> points;
    for (const auto& pj : j.at("points")) {
        if (!pj.is_object()) throw std::invalid_argument("point must be an object");
        for (const auto& [key, value] : pj.items()) {
            (void)value;
            if (key != "t_ns" && key != "alcohol_raw" && key != "temp_c" && key != "rh_pct" &&
                key != "source")
                throw std::invalid_argument("unknown point field: " + key);
        }
        SeriesPoint p;
        p.t_ns = pj.at("t_ns").get<int64_t>();
        p.device_id = device_out;
        p.alcohol_raw = pj.at("alcohol_raw").get<double>();
        p.temp_c = pj.at("temp_c").get<double>();
        p.rh_pct = pj.at("rh_pct").get<double>();
        p.source = source_from_string(pj.at("source").get<std::string>());
        points.push_back(std::move(p));
    }
    return points;
}

std::string points_to_csv(const std::vector<SeriesPoint>& points, bool header) {
    std::string out;
    if (header) {
        out += kCsvHeader;
        out += '\n';
    }
    for (const auto& p : points) {
        out += fmt_i64(p.t_ns);
        out += ',';
        out += p.device_id;
        out += ',';
        out += fmt_g(p.alcohol_raw);
        out += ',';
        out += fmt_g(p.temp_c);
        out += ',';
        out += fmt_g(p.rh_pct);
        out += ',';
        out += to_string(p.source);
        out += '\n';
    }
    return out;
}

namespace {

bool parse_i64(const std::string& s, int64_t& out) {
    try {
        size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

/// Query-range extraction shared by /query and /export.csv. Returns false
/// (and fills the 400 response) on a bad request.
bool query_range(const httplib::Request& req, httplib::Response& res, std::string& device,
                 int64_t& from_ns, int64_t& to_ns) {
    device = req.get_param_value("device");
    if (device.empty() || !req.has_param("from_ns") || !req.has_param("to_ns") ||
        !parse_i64(req.get_param_value("from_ns"), from_ns) ||
        !parse_i64(req.get_param_value("to_ns"), to_ns) || from_ns > to_ns) {
        res.status = 400;
        res.set_content("{\"error\":\"bad query range\"}", "application/json");
        return false;
    }
    return true;
}

} // namespace

Service::Service(SeriesStore& store) : store_(store), server_(std::make_unique<httplib::Server>()) {
    server_->Post("/write", [this](const httplib::Request& req, httplib::Response& res) {
        std::string device;
        std::vector<SeriesPoint> points;
        try {
            points = parse_write_batch(req.body, device);
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            return;
        }
        const auto result = store_.write(device, points);
        nlohmann::ordered_json out;
        out["accepted"] = result.accepted;
        out["duplicates"] = result.duplicates;
        res.set_content(out.dump(), "application/json");
    });

    server_->Get("/query", [this](const httplib::Request& req, httplib::Response& res) {
        std::string device;
        int64_t from_ns = 0, to_ns = 0;
        if (!query_range(req, res, device, from_ns, to_ns)) return;

        std::vector<std::string> fields{"alcohol_raw", "temp_c", "rh_pct", "source"};
        if (req.has_param("fields")) {
            fields.clear();
            std::string spec = req.get_param_value("fields");
            size_t start = 0;
            while (start <= spec.size()) {
                const size_t comma = spec.find(',', start);
                const std::string f = spec.substr(start, comma - start);
                if (f != "alcohol_raw" && f != "temp_c" && f != "rh_pct" && f != "source") {
                    res.status = 400;
                    res.set_content("{\"error\":\"unknown field\"}", "application/json");
                    return;
                }
                fields.push_back(f);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }

        nlohmann::ordered_json out;
        out["device"] = device;
        out["points"] = nlohmann::ordered_json::array();
        for (const auto& p : store_.query(device, from_ns, to_ns)) {
            nlohmann::ordered_json pj;
            pj["t_ns"] = p.t_ns;
            for (const auto& f : fields) {
                if (f == "alcohol_raw") pj["alcohol_raw"] = p.alcohol_raw;
                if (f == "temp_c") pj["temp_c"] = p.temp_c;
                if (f == "rh_pct") pj["rh_pct"] = p.rh_pct;
                if (f == "source") pj["source"] = to_string(p.source);
            }
            out["points"].push_back(std::move(pj));
        }
        res.set_content(out.dump(), "application/json");
    });

    server_->Get("/export.csv", [this](const httplib::Request& req, httplib::Response& res) {
        std::string device;
        int64_t from_ns = 0, to_ns = 0;
        if (!query_range(req, res, device, from_ns, to_ns)) return;
        res.set_content(points_to_csv(store_.query(device, from_ns, to_ns)), "text/csv");
    });

    server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
}

Service::~Service() { stop(); }

int Service::start(int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port("127.0.0.1");
    } else {
        if (!server_->bind_to_port("127.0.0.1", port))
            throw std::runtime_error("service: cannot bind port " + std::to_string(port));
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void Service::stop() {
    if (server_ && server_->is_running()) server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace tacnet::tsdb
