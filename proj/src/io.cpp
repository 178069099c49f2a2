#include "rca/io.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rca {

using nlohmann::json;

namespace {

void append_double(std::string &out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool missing_cell(std::string_view s) { return s.empty() || s == "nan" || s == "NaN" || s == "NA"; }

double parse_number(std::string_view s, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string dataset_to_csv(const TimeSeriesDataset &dataset) {
    std::string out = "timestamp";
    for (const auto &m : dataset.metrics()) {
        out += ',';
        out += m.key();
    }
    out += '\n';
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        append_double(out, dataset.timestamps()[r]);
        for (std::size_t c = 0; c < dataset.cols(); ++c) {
            out += ',';
            append_double(out, dataset.at(r, c));
        }
        out += '\n';
    }
    return out;
}

TimeSeriesDataset dataset_from_csv(std::string_view text, const MetricCatalog &catalog) {
    std::vector<std::string_view> lines;
    for (auto l : split(text, '\n')) {
        l = trim(l);
        if (!l.empty()) lines.push_back(l);
    }
    if (lines.empty()) throw Error(ErrorCode::ParseError, "empty dataset file");

    auto header = split(lines[0], ',');
    if (trim(header[0]) != "timestamp") throw Error(ErrorCode::SchemaError, "first column must be 'timestamp'");
    std::vector<MetricId> metrics;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const auto key = trim(header[i]);
        MetricId m = parse_metric_key(key, Resource::Application);
        m.resource = infer_resource(m.name, m.layer, catalog);
        metrics.push_back(std::move(m));
    }

    const std::size_t rows = lines.size() - 1, cols = metrics.size();
    std::vector<double> timestamps(rows);
    std::vector<double> data(rows * cols, 0.0);
    std::vector<char> present(rows * cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        auto cells = split(lines[r + 1], ',');
        if (cells.size() != cols + 1)
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(r + 2) + ": expected " +
                                                    std::to_string(cols + 1) + " fields, got " +
                                                    std::to_string(cells.size()));
        timestamps[r] = parse_number(trim(cells[0]), r + 2);
        for (std::size_t c = 0; c < cols; ++c) {
            const auto cell = trim(cells[c + 1]);
            if (missing_cell(cell)) continue;
            data[c * rows + r] = parse_number(cell, r + 2);
            present[c * rows + r] = 1;
        }
    }

    for (std::size_t c = 0; c < cols; ++c) {
        double *col = data.data() + c * rows;
        const char *seen = present.data() + c * rows;
        std::size_t first = 0;
        while (first < rows && !seen[first]) ++first;
        if (rows > 0 && first == rows)
            throw Error(ErrorCode::SchemaError, "column '" + metrics[c].key() + "' has no observations");
        for (std::size_t r = 0; r < first; ++r) col[r] = col[first];
        for (std::size_t r = first + 1; r < rows; ++r)
            if (!seen[r]) col[r] = col[r - 1];
    }

    double interval = 0.0;
    if (rows >= 2) {
        interval = timestamps[1] - timestamps[0];
        for (std::size_t r = 1; r < rows; ++r) {
            const double step = timestamps[r] - timestamps[r - 1];
            if (step <= 0.0 || std::abs(step - interval) > 1e-6 * std::max(1.0, interval))
                throw Error(ErrorCode::Misaligned, "timestamps must be strictly increasing with constant spacing");
        }
    }
    return TimeSeriesDataset(std::move(metrics), std::move(timestamps), interval, std::move(data));
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file_atomic(const std::string &path, std::string_view content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::Io, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::Io, "cannot rename onto '" + path + "'");
    }
}

TimeSeriesDataset load_dataset_file(const std::string &path, const MetricCatalog &catalog) {
    return dataset_from_csv(read_text_file(path), catalog);
}

json metric_to_json(const MetricId &m) {
    return {{"class", to_string(m.cls)},       {"name", m.name},
            {"endpoint", m.endpoint},          {"layer", to_string(m.layer)},
            {"resource", to_string(m.resource)}, {"key", m.key()}};
}

MetricId metric_from_json(const json &j) {
    try {
        MetricId m;
        auto cls = parse_metric_class(j.at("class").get<std::string>());
        auto layer = parse_layer(j.at("layer").get<std::string>());
        auto res = parse_resource(j.at("resource").get<std::string>());
        if (!cls || !layer || !res) throw Error(ErrorCode::SchemaError, "bad metric enum value");
        m.cls = *cls;
        m.layer = *layer;
        m.resource = *res;
        m.name = j.at("name").get<std::string>();
        m.endpoint = j.at("endpoint").get<std::string>();
        return m;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::SchemaError, std::string("metric: ") + e.what());
    }
}

json scenario_to_json(const FaultScenario &s) {
    return {{"kind", to_string(s.kind)},
            {"target_node", s.target_node},
            {"target_layer", to_string(s.target_layer)},
            {"magnitude", s.magnitude},
            {"normal_duration", s.normal_duration},
            {"anomalous_duration", s.anomalous_duration},
            {"seed", s.seed}};
}

FaultScenario scenario_from_json(const json &j) {
    try {
        FaultScenario s;
        auto kind = parse_fault_kind(j.at("kind").get<std::string>());
        auto layer = parse_layer(j.at("target_layer").get<std::string>());
        if (!kind || !layer) throw Error(ErrorCode::SchemaError, "bad scenario kind or layer");
        s.kind = *kind;
        s.target_layer = *layer;
        s.target_node = j.at("target_node").get<std::string>();
        s.magnitude = j.at("magnitude").get<double>();
        s.normal_duration = j.value("normal_duration", s.normal_duration);
        s.anomalous_duration = j.value("anomalous_duration", s.anomalous_duration);
        s.seed = j.value("seed", std::uint64_t{0});
        return s;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::SchemaError, std::string("scenario: ") + e.what());
    }
}

json manifest_json(const FaultScenario &scenario, const SimulationOptions &options, const GroundTruth &truth) {
    return {{"schema_version", kSchemaVersion},
            {"scenario", scenario_to_json(scenario)},
            {"options",
             {{"interval", options.interval},
              {"workload_mean_users", options.workload_mean_users},
              {"workload_std_users", options.workload_std_users},
              {"noise_fraction", options.noise_fraction},
              {"start_time", options.start_time}}},
            {"ground_truth", metric_to_json(truth.root_cause_metric)}};
}

json ranked_to_json(const RankedRootCauses &result) {
    json entries = json::array();
    for (const auto &e : result.entries) {
        json row = {{"rank", e.rank}, {"metric", metric_to_json(e.metric)}, {"p_value", e.p_value}};
        if (e.weighted_p_value) row["weighted_p_value"] = *e.weighted_p_value;
        entries.push_back(std::move(row));
    }
    return {{"entries", std::move(entries)}, {"low_confidence", result.low_confidence}};
}

} // namespace rca
