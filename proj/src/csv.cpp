#include "cip/harness.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cip {

namespace {

const char* kHeader = "scenario_id,trial,slot,algorithm,metric,value";

}  // namespace

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string to_csv(const std::vector<MetricRecord>& rows) {
    std::string s = kHeader;
    s += '\n';
    for (const auto& r : rows) {
        s += r.scenario_id;
        s += ',';
        s += std::to_string(r.trial);
        s += ',';
        s += std::to_string(r.slot);
        s += ',';
        s += r.algorithm;
        s += ',';
        s += r.metric;
        s += ',';
        s += format_value(r.value);
        s += '\n';
    }
    return s;
}

void write_csv(const std::vector<MetricRecord>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, path + ": cannot open for writing");
    const std::string s = to_csv(rows);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out) throw Error(Errc::Io, path + ": write failed");
}

std::vector<MetricRecord> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, path + ": cannot open for reading");
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw Error(Errc::Io, path + ": missing or unexpected header");
    std::vector<MetricRecord> rows;
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 6) throw Error(Errc::Io, path + ":" + std::to_string(n) + ": expected 6 fields");
        try {
            rows.push_back(MetricRecord{f[0], std::stoi(f[1]), std::stoi(f[2]), f[3], f[4],
                                        std::stod(f[5])});
        } catch (const std::exception&) {
            throw Error(Errc::Io, path + ":" + std::to_string(n) + ": malformed row");
        }
    }
    return rows;
}

}  // namespace cip
