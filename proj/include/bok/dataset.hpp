#pragma once

// Demo dataset types and JSONL persistence.
//
// File format: line 1 is the header object
//   {"feature_len":int,"tasks":[...],"stats":{"low":[6],"high":[6]},
//    "expert":{"kp":..,"kr":..,"max_step":..,"max_rot":..,"grasp_radius":..}}
// followed by one record per line:
//   {"features":[...],"instruction":int,"action":[7 floats]}
// Floats are written with 17 significant digits so save/load round-trips are
// lossless. Actions are stored normalized.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bok/action.hpp"
#include "bok/common.hpp"

namespace bok {

struct Observation {
    std::vector<double> features;
    int instruction_id = 0;
};

// Proportional-controller constants baked into a dataset so policies built
// from it can recover the expert action from any observation.
struct ExpertParams {
    double kp = 0.4;
    double kr = 0.4;
    double max_step = 0.2;
    double max_rot = 0.2;
    double grasp_radius = 0.1;
};

struct DatasetHeader {
    int feature_len = 16;
    std::vector<std::string> tasks;
    NormalizationStats stats;
    ExpertParams expert;
};

struct DemoRecord {
    Observation obs;
    ActionVector action;  // normalized under header.stats
};

struct DemoDataset {
    DatasetHeader header;
    std::vector<DemoRecord> records;
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void append_array17(std::string& out, const double* v, std::size_t n) {
    out += '[';
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ',';
        out += fmt17(v[i]);
    }
    out += ']';
}

inline void check_normalized(const ActionVector& a) {
    for (double d : a.delta) {
        if (!(d >= -1.0 - 1e-12 && d <= 1.0 + 1e-12)) {
            throw Error(Errc::action_not_normalized,
                        "action component " + fmt17(d) + " outside [-1, 1]");
        }
    }
    if (a.gripper != 0 && a.gripper != 1) {
        throw Error(Errc::action_not_normalized, "gripper must be 0 or 1");
    }
}

}  // namespace detail

inline std::string header_to_line(const DatasetHeader& h) {
    std::string line = "{\"feature_len\":" + std::to_string(h.feature_len) + ",\"tasks\":[";
    for (std::size_t i = 0; i < h.tasks.size(); ++i) {
        if (i) line += ',';
        line += nlohmann::json(h.tasks[i]).dump();
    }
    line += "],\"stats\":{\"low\":";
    detail::append_array17(line, h.stats.low.data(), kContinuousDims);
    line += ",\"high\":";
    detail::append_array17(line, h.stats.high.data(), kContinuousDims);
    line += "},\"expert\":{\"kp\":" + detail::fmt17(h.expert.kp) +
            ",\"kr\":" + detail::fmt17(h.expert.kr) +
            ",\"max_step\":" + detail::fmt17(h.expert.max_step) +
            ",\"max_rot\":" + detail::fmt17(h.expert.max_rot) +
            ",\"grasp_radius\":" + detail::fmt17(h.expert.grasp_radius) + "}}";
    return line;
}

inline std::string record_to_line(const DemoRecord& r) {
    std::string line = "{\"features\":";
    detail::append_array17(line, r.obs.features.data(), r.obs.features.size());
    line += ",\"instruction\":" + std::to_string(r.obs.instruction_id) + ",\"action\":[";
    for (int i = 0; i < kActionDims; ++i) {
        if (i) line += ',';
        line += detail::fmt17(r.action.component(i));
    }
    line += "]}";
    return line;
}

inline void save_demos(const DemoDataset& ds, const std::string& path) {
    ds.header.stats.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot open for writing: " + path);
    out << header_to_line(ds.header) << '\n';
    for (const auto& r : ds.records) {
        detail::check_normalized(r.action);
        out << record_to_line(r) << '\n';
    }
    if (!out) throw Error(Errc::io_error, "write failed: " + path);
}

inline DatasetHeader header_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("feature_len") || !j.contains("tasks") ||
        !j.contains("stats")) {
        throw Error(Errc::malformed_header,
                    "header must contain feature_len, tasks and stats");
    }
    DatasetHeader h;
    h.feature_len = j.at("feature_len").get<int>();
    if (h.feature_len <= 0) throw Error(Errc::malformed_header, "feature_len must be positive");
    h.tasks = j.at("tasks").get<std::vector<std::string>>();
    if (h.tasks.empty()) throw Error(Errc::malformed_header, "tasks must be nonempty");
    h.stats = stats_from_json(j.at("stats"));
    if (j.contains("expert")) {
        const auto& e = j.at("expert");
        h.expert.kp = e.value("kp", h.expert.kp);
        h.expert.kr = e.value("kr", h.expert.kr);
        h.expert.max_step = e.value("max_step", h.expert.max_step);
        h.expert.max_rot = e.value("max_rot", h.expert.max_rot);
        h.expert.grasp_radius = e.value("grasp_radius", h.expert.grasp_radius);
    }
    return h;
}

inline DemoDataset load_demos(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open: " + path);

    DemoDataset ds;
    std::string line;
    std::size_t offset = 0;

    auto parse_line = [&](const std::string& text) {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::parse_error, "parse error at byte offset " +
                                               std::to_string(offset + (e.byte > 0 ? e.byte - 1 : 0)) +
                                               ": " + e.what());
        }
    };

    if (!std::getline(in, line)) throw Error(Errc::malformed_header, "missing header line");
    nlohmann::json jh = parse_line(line);
    try {
        ds.header = header_from_json(jh);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_header, std::string("bad header: ") + e.what());
    }
    offset += line.size() + 1;

    while (std::getline(in, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        nlohmann::json j = parse_line(line);
        if (!j.is_object() || !j.contains("features") || !j.contains("instruction") ||
            !j.contains("action") || !j["action"].is_array() ||
            j["action"].size() != kActionDims) {
            throw Error(Errc::parse_error, "bad record at byte offset " + std::to_string(offset));
        }
        DemoRecord r;
        r.obs.features = j["features"].get<std::vector<double>>();
        r.obs.instruction_id = j["instruction"].get<int>();
        if (static_cast<int>(r.obs.features.size()) != ds.header.feature_len) {
            throw Error(Errc::feature_length_mismatch,
                        "record has " + std::to_string(r.obs.features.size()) +
                            " features, header says " + std::to_string(ds.header.feature_len));
        }
        if (r.obs.instruction_id < 0 ||
            r.obs.instruction_id >= static_cast<int>(ds.header.tasks.size())) {
            throw Error(Errc::parse_error,
                        "instruction id out of range at byte offset " + std::to_string(offset));
        }
        for (std::size_t i = 0; i < kContinuousDims; ++i) {
            r.action.delta[i] = j["action"][i].get<double>();
        }
        const double g = j["action"][kContinuousDims].get<double>();
        if (g != 0.0 && g != 1.0) {
            throw Error(Errc::action_not_normalized, "gripper must be exactly 0 or 1");
        }
        r.action.gripper = static_cast<int>(g);
        detail::check_normalized(r.action);
        ds.records.push_back(std::move(r));
        offset += line.size() + 1;
    }
    if (ds.records.empty()) throw Error(Errc::parse_error, "dataset has no records");
    return ds;
}

// Uniform subsample without replacement; returns the input unchanged when
// count >= size. Used to draw D_buf-style tuple sets from a full dataset.
inline DemoDataset subsample(const DemoDataset& ds, std::size_t count, std::uint64_t seed) {
    if (count >= ds.records.size()) return ds;
    std::vector<std::size_t> idx;
    idx.reserve(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) idx.push_back(i);
    Rng rng(seed);
    for (std::size_t i = 0; i < count && i < idx.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    DemoDataset out;
    out.header = ds.header;
    out.records.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.records.push_back(ds.records[idx[i]]);
    return out;
}

}  // namespace bok
