#include "sylrate/params.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "sylrate/errors.hpp"

namespace sylrate {

namespace {

nlohmann::json read_json(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot open ") + what + ": " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return doc;
}

void write_json(const std::string& path, const nlohmann::json& doc, const char* what) {
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot write ") + what + ": " + path);
    out << doc.dump(2) << "\n";
}

PipelineConfig config_from_json(const nlohmann::json& doc, const std::string& path) {
    static const std::set<std::string> known{
        "window_s",      "hop_s",          "energy_threshold_db", "smoothing_cutoff_hz",
        "band_edges_hz", "transition_width_hz", "log_floor"};
    PipelineConfig config;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!known.count(key))
                throw FormatError(path + ": unknown pipeline config field \"" + key + "\"");
            if (key == "window_s") config.window_s = value.get<double>();
            else if (key == "hop_s") config.hop_s = value.get<double>();
            else if (key == "energy_threshold_db") config.energy_threshold_db = value.get<double>();
            else if (key == "smoothing_cutoff_hz") config.smoothing_cutoff_hz = value.get<double>();
            else if (key == "transition_width_hz") config.transition_width_hz = value.get<double>();
            else if (key == "log_floor") config.log_floor = value.get<double>();
            else { // band_edges_hz
                const auto edges = value.get<std::vector<double>>();
                if (edges.size() != config.band_edges_hz.size())
                    throw FormatError(path + ": band_edges_hz must list exactly 8 edges");
                std::copy(edges.begin(), edges.end(), config.band_edges_hz.begin());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    config.validate();
    return config;
}

nlohmann::json config_to_json(const PipelineConfig& config) {
    nlohmann::json doc;
    doc["window_s"] = config.window_s;
    doc["hop_s"] = config.hop_s;
    doc["energy_threshold_db"] = config.energy_threshold_db;
    doc["smoothing_cutoff_hz"] = config.smoothing_cutoff_hz;
    doc["band_edges_hz"] = config.band_edges_hz;
    doc["transition_width_hz"] = config.transition_width_hz;
    doc["log_floor"] = config.log_floor;
    return doc;
}

} // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    return config_from_json(read_json(path, "pipeline config"), path);
}

void save_pipeline_config(const std::string& path, const PipelineConfig& config) {
    write_json(path, config_to_json(config), "pipeline config");
}

ParamsFile load_params_file(const std::string& path) {
    const nlohmann::json doc = read_json(path, "params file");
    ParamsFile file;
    try {
        const auto weights = doc.at("weights").get<std::vector<double>>();
        if (weights.size() != kNumBands)
            throw FormatError(path + ": weights must list exactly 7 values");
        std::copy(weights.begin(), weights.end(), file.params.weights.w.begin());
        file.params.prominence_threshold = doc.at("prominence_threshold").get<double>();
        if (doc.contains("pipeline_config"))
            file.pipeline_config = config_from_json(doc["pipeline_config"], path);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    if (!(file.params.prominence_threshold > 0.0))
        throw ValidationError(path + ": prominence_threshold must be positive");
    return file;
}

void save_params_file(const std::string& path, const ParamsFile& file) {
    nlohmann::json doc;
    doc["weights"] = file.params.weights.w;
    doc["prominence_threshold"] = file.params.prominence_threshold;
    doc["pipeline_config"] = config_to_json(file.pipeline_config);
    write_json(path, doc, "params file");
}

} // namespace sylrate
