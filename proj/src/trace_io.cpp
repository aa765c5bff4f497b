// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/trace_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cott/error.hpp"

namespace cott {

using nlohmann::json;

namespace {

json dist_to_json(const SlotDistribution& dist) {
    std::vector<double> probs(dist.probs.data(), dist.probs.data() + dist.probs.size());
    return json{{"symbols", dist.symbols}, {"probs", probs}};
}

SlotDistribution dist_from_json(const json& j) {
    SlotDistribution dist;
    dist.symbols = j.at("symbols").get<std::vector<std::string>>();
    auto probs = j.at("probs").get<std::vector<double>>();
    dist.probs = Eigen::Map<Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
    return dist;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
    auto values = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

json trace_to_json(const ReasoningTrace& trace) {
    json j;
    j["schema_version"] = kTraceSchemaVersion;
    j["id"] = trace.id;
    j["step_dists"] = json::array();
    for (const auto& dist : trace.step_dists) j["step_dists"].push_back(dist_to_json(dist));
    j["step_pred"] = trace.step_pred;
    j["step_conf"] = trace.step_conf;
    j["label_step1"] = dist_to_json(trace.label_step1);
    j["label_pred_step1"] = trace.label_pred_step1;
    j["label_step2"] = dist_to_json(trace.label_step2);
    j["label_pred_step2"] = trace.label_pred_step2;
    j["label_rectified"] = dist_to_json(trace.label_rectified);
    j["label_pred"] = trace.label_pred;
    j["hidden_step1"] = vector_to_json(trace.hidden_step1);
    j["hidden_step2"] = vector_to_json(trace.hidden_step2);
    if (trace.hidden_counterfactual)
        j["hidden_counterfactual"] = vector_to_json(*trace.hidden_counterfactual);
    if (trace.counterfactual_step) j["counterfactual_step"] = *trace.counterfactual_step;
    return j;
}

ReasoningTrace trace_from_json(const json& j) {
    try {
        int version = j.at("schema_version").get<int>();
        if (version != kTraceSchemaVersion)
            raise(ErrorCode::VersionMismatch,
                  "trace schema " + std::to_string(version) + ", reader supports " +
                      std::to_string(kTraceSchemaVersion));
        ReasoningTrace trace;
        trace.id = j.at("id").get<std::string>();
        for (const auto& dist : j.at("step_dists")) trace.step_dists.push_back(dist_from_json(dist));
        trace.step_pred = j.at("step_pred").get<std::vector<std::string>>();
        trace.step_conf = j.at("step_conf").get<double>();
        trace.label_step1 = dist_from_json(j.at("label_step1"));
        trace.label_pred_step1 = j.at("label_pred_step1").get<std::string>();
        trace.label_step2 = dist_from_json(j.at("label_step2"));
        trace.label_pred_step2 = j.at("label_pred_step2").get<std::string>();
        trace.label_rectified = dist_from_json(j.at("label_rectified"));
        trace.label_pred = j.at("label_pred").get<std::string>();
        trace.hidden_step1 = vector_from_json(j.at("hidden_step1"));
        trace.hidden_step2 = vector_from_json(j.at("hidden_step2"));
        if (j.contains("hidden_counterfactual"))
            trace.hidden_counterfactual = vector_from_json(j.at("hidden_counterfactual"));
        if (j.contains("counterfactual_step"))
            trace.counterfactual_step = j.at("counterfactual_step").get<std::vector<std::string>>();
        return trace;
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidConfig, std::string("bad trace record: ") + e.what());
    }
}

std::string traces_to_jsonl(const std::vector<ReasoningTrace>& traces) {
    std::ostringstream out;
    for (const auto& trace : traces) out << trace_to_json(trace).dump() << '\n';
    return out.str();
}

std::vector<ReasoningTrace> read_traces_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::InvalidConfig, "cannot open " + path);
    std::vector<ReasoningTrace> traces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            traces.push_back(trace_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            raise(ErrorCode::InvalidConfig,
                  path + ":" + std::to_string(line_no) + ": not valid JSON: " + e.what());
        }
    }
    if (traces.empty()) raise(ErrorCode::EmptyDataset, path);
    return traces;
}

}  // namespace cott
