#include "predformer/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace predformer {

namespace {

using nlohmann::json;

std::string format_metric(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

json to_json(const MetricsReport& r) {
    json j;
    j["run_id"] = r.run_id;
    j["variant"] = r.variant;
    j["layers"] = r.layers;
    j["params"] = r.params;
    j["flops"] = r.flops;
    j["fps"] = r.fps;
    j["mse"] = r.mse;
    j["mae"] = r.mae;
    j["rmse"] = r.rmse;
    j["ssim"] = r.ssim;
    j["psnr"] = r.psnr;
    return j;
}

MetricsReport from_json(const json& j) {
    MetricsReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.layers = j.at("layers").get<int64_t>();
    r.params = j.at("params").get<int64_t>();
    r.flops = j.at("flops").get<int64_t>();
    r.fps = j.at("fps").get<double>();
    r.mse = j.at("mse").get<double>();
    r.mae = j.at("mae").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.ssim = j.at("ssim").get<double>();
    r.psnr = j.at("psnr").get<double>();
    return r;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols = {"run_id", "variant", "layers", "params", "flops", "fps",
                                                  "mse",    "mae",     "rmse",   "ssim",   "psnr"};
    return cols;
}

void emit_reports(const std::vector<MetricsReport>& reports, const std::string& path, ReportFormat format) {
    std::ofstream os(path);
    if (!os) throw IoError(IoError::Code::Unwritable, "report: cannot open '" + path + "' for writing");
    if (format == ReportFormat::Csv) {
        const auto& cols = report_columns();
        for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
        os << '\n';
        for (const auto& r : reports) {
            os << r.run_id << ',' << r.variant << ',' << r.layers << ',' << r.params << ',' << r.flops << ','
               << format_metric(r.fps) << ',' << format_metric(r.mse) << ',' << format_metric(r.mae) << ','
               << format_metric(r.rmse) << ',' << format_metric(r.ssim) << ',' << format_metric(r.psnr) << '\n';
        }
    } else {
        for (const auto& r : reports) os << to_json(r).dump() << '\n';
    }
    if (!os) throw IoError(IoError::Code::Unwritable, "report: write to '" + path + "' failed");
}

std::vector<MetricsReport> parse_reports(const std::string& path, ReportFormat format) {
    std::ifstream is(path);
    if (!is) throw IoError(IoError::Code::Unreadable, "report: cannot open '" + path + "'");
    std::vector<MetricsReport> out;
    std::string line;
    if (format == ReportFormat::Csv) {
        if (!std::getline(is, line)) throw IoError(IoError::Code::Truncated, "report: empty CSV");
        const auto header = split_csv_line(line);
        const auto& cols = report_columns();
        if (header != cols) throw IoError(IoError::Code::BadHeader, "report: unexpected CSV header");
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto f = split_csv_line(line);
            if (f.size() != cols.size()) throw IoError(IoError::Code::BadHeader, "report: malformed CSV row");
            MetricsReport r;
            r.run_id = f[0];
            r.variant = f[1];
            r.layers = std::stoll(f[2]);
            r.params = std::stoll(f[3]);
            r.flops = std::stoll(f[4]);
            r.fps = std::stod(f[5]);
            r.mse = std::stod(f[6]);
            r.mae = std::stod(f[7]);
            r.rmse = std::stod(f[8]);
            r.ssim = std::stod(f[9]);
            r.psnr = std::stod(f[10]);
            out.push_back(std::move(r));
        }
    } else {
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            out.push_back(from_json(json::parse(line)));
        }
    }
    return out;
}

void emit_per_frame_csv(const MetricsReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError(IoError::Code::Unwritable, "report: cannot open '" + path + "' for writing");
    os << "frame,mse,mae,ssim\n";
    for (size_t t = 0; t < report.per_frame_mse.size(); ++t) {
        os << t << ',' << format_metric(report.per_frame_mse[t]) << ',' << format_metric(report.per_frame_mae[t])
           << ',' << format_metric(report.per_frame_ssim[t]) << '\n';
    }
}

}  // namespace predformer
