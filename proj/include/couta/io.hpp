#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "couta/data.hpp"
#include "couta/network.hpp"
#include "couta/scoring.hpp"
#include "couta/trainer.hpp"

namespace couta {

inline constexpr const char* kModelFormatTag = "couta-model";
inline constexpr int kModelFormatVersion = 1;

// Self-describing model file: shapes, parameter arrays, center, geometry,
// and the normalization stats needed at inference. JSON doubles are emitted
// with shortest round-trip precision, so the round trip is lossless.
inline nlohmann::json model_to_json(const CoutaModel& model, const NormalizationStats& stats) {
    nlohmann::json j;
    j["format"] = kModelFormatTag;
    j["version"] = kModelFormatVersion;
    j["input_dims"] = model.input_dims();
    j["window_len"] = model.window_len();
    j["hidden"] = model.hidden_width();
    j["feature_dims"] = model.feature_dims();
    j["center"] = model.center().values;
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : model.parameters()) {
        params.push_back({{"name", p.name}, {"shape", p.value.shape}, {"values", p.value.values}});
    }
    j["parameters"] = std::move(params);
    j["normalization"] = {{"min", stats.min},
                          {"max", stats.max},
                          {"degenerate", std::vector<int>(stats.degenerate.begin(),
                                                          stats.degenerate.end())}};
    return j;
}

inline void save_model(const CoutaModel& model, const NormalizationStats& stats,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot write " + path);
    out << model_to_json(model, stats).dump(2) << "\n";
}

inline std::pair<CoutaModel, NormalizationStats> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_model: " + path + " is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != kModelFormatTag)
        throw std::runtime_error("load_model: " + path + " is not a model file");
    if (j.value("version", 0) != kModelFormatVersion)
        throw std::runtime_error("load_model: unsupported model format version");

    Rng dummy(0);
    CoutaModel model(j.at("input_dims").get<std::size_t>(),
                     j.at("window_len").get<std::size_t>(),
                     j.at("hidden").get<std::size_t>(),
                     j.at("feature_dims").get<std::size_t>(), dummy);
    auto& params = model.parameters();
    const auto& jp = j.at("parameters");
    if (jp.size() != params.size())
        throw std::runtime_error("load_model: parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (jp[i].at("name").get<std::string>() != params[i].name)
            throw std::runtime_error("load_model: unexpected parameter " +
                                     jp[i].at("name").get<std::string>());
        auto shape = jp[i].at("shape").get<std::vector<std::size_t>>();
        auto values = jp[i].at("values").get<std::vector<double>>();
        params[i].value = Tensor(std::move(shape), std::move(values));
    }
    model.set_center(Tensor({model.feature_dims()}, j.at("center").get<std::vector<double>>()));

    NormalizationStats stats;
    stats.min = j.at("normalization").at("min").get<std::vector<double>>();
    stats.max = j.at("normalization").at("max").get<std::vector<double>>();
    for (int v : j.at("normalization").at("degenerate").get<std::vector<int>>())
        stats.degenerate.push_back(v != 0);
    if (stats.min.size() != model.input_dims())
        throw std::runtime_error("load_model: normalization stats dimensionality mismatch");
    return {std::move(model), std::move(stats)};
}

inline nlohmann::json report_to_json(const TrainReport& report) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& bd : report.epoch_losses)
        epochs.push_back({{"l_umc", bd.l_umc},
                          {"l_nac", bd.l_nac},
                          {"total", bd.total},
                          {"alpha", bd.alpha},
                          {"original_count", bd.original_count},
                          {"perturbed_count", bd.perturbed_count}});
    return {{"epochs", std::move(epochs)}, {"wall_seconds", report.wall_seconds}};
}

inline nlohmann::json eval_to_json(const EvalReport& rep) {
    return {{"f1", rep.f1},
            {"precision", rep.precision},
            {"recall", rep.recall},
            {"threshold", rep.threshold},
            {"auc_pr", rep.auc_pr}};
}

// timestamp index, raw score, adjusted score
inline void write_scores_csv(const std::string& path, const std::vector<double>& raw,
                             const std::vector<double>& adjusted) {
    if (raw.size() != adjusted.size())
        throw std::invalid_argument("write_scores_csv: series length mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_scores_csv: cannot write " + path);
    out.precision(17);
    out << "timestamp,score,adjusted_score\n";
    for (std::size_t t = 0; t < raw.size(); ++t)
        out << t << "," << raw[t] << "," << adjusted[t] << "\n";
}

inline void write_dataset_csv(const std::string& path, const TimeSeriesDataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset_csv: cannot write " + path);
    out.precision(17);
    for (std::size_t j = 0; j < ds.d; ++j) out << (j ? "," : "") << "dim" << j;
    if (ds.has_labels()) out << ",label";
    out << "\n";
    for (std::size_t t = 0; t < ds.n; ++t) {
        for (std::size_t j = 0; j < ds.d; ++j) out << (j ? "," : "") << ds.at(t, j);
        if (ds.has_labels()) out << "," << ds.labels[t];
        out << "\n";
    }
}

}  // namespace couta
