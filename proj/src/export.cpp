#include "valsteer/export.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace valsteer {

using nlohmann::json;

namespace {

std::string quote_dot(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += "\"";
    return out;
}

std::string fixed3(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    return buf;
}

std::string rational_cell(const std::optional<Rational>& r) {
    if (!r) return "-";
    return fixed3(to_double(*r)) + " (" + to_string(*r) + ")";
}

json optional_rational_json(const std::optional<Rational>& r) {
    if (!r) return nullptr;
    return json{{"num", r->numerator().str()},
                {"den", r->denominator().str()},
                {"value", to_double(*r)}};
}

std::optional<Rational> optional_rational_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return Rational(BigInt(j.at("num").get<std::string>()), BigInt(j.at("den").get<std::string>()));
}

} // namespace

std::string export_dot(const CausalGraph& graph) {
    std::string out = "digraph values {\n";
    for (const auto& node : graph.nodes) out += "  " + quote_dot(node) + ";\n";
    for (const auto& [f, t] : graph.directed_edges)
        out += "  " + quote_dot(f) + " -> " + quote_dot(t) + ";\n";
    for (const auto& e : graph.undirected_edges)
        out += "  " + quote_dot(e[0]) + " -> " + quote_dot(e[1]) + " [dir=none];\n";
    out += "}\n";
    return out;
}

std::string report_to_json(const MetricReport& report) {
    json per_value = json::object();
    for (const auto& [v, m] : report.per_value) {
        per_value[v] = {{"expected_accuracy", optional_rational_json(m.expected_accuracy)},
                        {"unexpected_frequency", optional_rational_json(m.unexpected_frequency)},
                        {"changed_count", m.changed_count},
                        {"successor_count", m.successor_count}};
    }
    json j{{"mode", to_string(report.mode)},
           {"per_value", std::move(per_value)},
           {"macro_expected_accuracy", optional_rational_json(report.macro_expected_accuracy)},
           {"macro_unexpected_frequency", optional_rational_json(report.macro_unexpected_frequency)},
           {"values_without_expected", report.values_without_expected},
           {"values_without_unexpected", report.values_without_unexpected}};
    return j.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("report is not valid JSON: ") + e.what());
    }
    try {
        MetricReport report;
        report.mode = change_mode_from_string(j.at("mode").get<std::string>());
        for (auto it = j.at("per_value").begin(); it != j.at("per_value").end(); ++it) {
            ValueMetrics m;
            m.expected_accuracy = optional_rational_from_json(it.value().at("expected_accuracy"));
            m.unexpected_frequency =
                optional_rational_from_json(it.value().at("unexpected_frequency"));
            m.changed_count = it.value().at("changed_count").get<std::size_t>();
            m.successor_count = it.value().at("successor_count").get<std::size_t>();
            report.per_value[it.key()] = std::move(m);
        }
        report.macro_expected_accuracy =
            optional_rational_from_json(j.at("macro_expected_accuracy"));
        report.macro_unexpected_frequency =
            optional_rational_from_json(j.at("macro_unexpected_frequency"));
        report.values_without_expected =
            j.at("values_without_expected").get<std::vector<std::string>>();
        report.values_without_unexpected =
            j.at("values_without_unexpected").get<std::vector<std::string>>();
        return report;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

std::string report_to_markdown(const MetricReport& report) {
    std::string out = "# Steering effect report (mode: " + to_string(report.mode) + ")\n\n";
    out += "| value | expected accuracy | unexpected frequency | steered conditions | successors |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& [v, m] : report.per_value) {
        out += "| " + v + " | " + rational_cell(m.expected_accuracy) + " | " +
               rational_cell(m.unexpected_frequency) + " | " + std::to_string(m.changed_count) +
               " | " + std::to_string(m.successor_count) + " |\n";
    }
    out += "| **macro** | " + rational_cell(report.macro_expected_accuracy) + " | " +
           rational_cell(report.macro_unexpected_frequency) + " | | |\n";
    if (!report.values_without_expected.empty()) {
        out += "\nValues without a defined expected accuracy:";
        for (const auto& v : report.values_without_expected) out += " " + v;
        out += "\n";
    }
    if (!report.values_without_unexpected.empty()) {
        out += "\nValues without a defined unexpected frequency:";
        for (const auto& v : report.values_without_unexpected) out += " " + v;
        out += "\n";
    }
    return out;
}

std::string report_to_csv(const MetricReport& report) {
    std::string out = "value,expected_accuracy,unexpected_frequency,changed_count,successor_count\n";
    for (const auto& [v, m] : report.per_value) {
        out += v + ",";
        out += (m.expected_accuracy ? fixed3(to_double(*m.expected_accuracy)) : "") + ",";
        out += (m.unexpected_frequency ? fixed3(to_double(*m.unexpected_frequency)) : "") + ",";
        out += std::to_string(m.changed_count) + "," + std::to_string(m.successor_count) + "\n";
    }
    return out;
}

std::string paired_report_to_json(const PairedReport& paired) {
    json deltas = json::object();
    for (const auto& [v, d] : paired.deltas) {
        deltas[v] = {{"expected_accuracy_delta", optional_rational_json(d.first)},
                     {"unexpected_frequency_delta", optional_rational_json(d.second)}};
    }
    json j{{"graph_a", json::parse(report_to_json(paired.report_a))},
           {"graph_b", json::parse(report_to_json(paired.report_b))},
           {"deltas", std::move(deltas)}};
    return j.dump(2) + "\n";
}

std::string paired_report_to_markdown(const PairedReport& paired) {
    std::string out = "# Graph comparison (mode: " + to_string(paired.report_a.mode) + ")\n\n";
    out += "| value | expected A | expected B | Δ expected | unexpected A | unexpected B | Δ unexpected |\n";
    out += "|---|---|---|---|---|---|---|\n";
    for (const auto& [v, d] : paired.deltas) {
        const auto& ma = paired.report_a.per_value.at(v);
        const auto& mb = paired.report_b.per_value.at(v);
        out += "| " + v + " | " + rational_cell(ma.expected_accuracy) + " | " +
               rational_cell(mb.expected_accuracy) + " | " + rational_cell(d.first) + " | " +
               rational_cell(ma.unexpected_frequency) + " | " +
               rational_cell(mb.unexpected_frequency) + " | " + rational_cell(d.second) + " |\n";
    }
    out += "| **macro** | " + rational_cell(paired.report_a.macro_expected_accuracy) + " | " +
           rational_cell(paired.report_b.macro_expected_accuracy) + " | | " +
           rational_cell(paired.report_a.macro_unexpected_frequency) + " | " +
           rational_cell(paired.report_b.macro_unexpected_frequency) + " | |\n";
    return out;
}

std::string steer_table_to_markdown(const SteerTable& table) {
    std::string out = "| feature |";
    for (const auto& v : table.value_ids) out += " " + v + " |";
    out += " mean similarity |\n|---|";
    for (std::size_t i = 0; i < table.value_ids.size(); ++i) out += "---|";
    out += "---|\n";
    for (const auto& fk : table.feature_keys) {
        out += "| " + fk + " |";
        const auto& row = table.cells.at(fk);
        for (const auto& v : table.value_ids) {
            auto it = row.find(v);
            if (it == row.end()) {
                out += " |";
                continue;
            }
            const auto& cell = it->second;
            std::string text = fixed3(to_double(cell.train.p_stim)) + "/" +
                               fixed3(to_double(cell.train.p_supp)) + "/" +
                               fixed3(to_double(cell.train.p_maint));
            if (cell.cosine) text += " (" + fixed3(*cell.cosine) + ")";
            out += " " + text + " |";
        }
        const auto& sim = table.mean_similarity.at(fk);
        out += sim ? " " + fixed3(*sim) + " |" : " |";
        out += "\n";
    }
    out += "| noise ratio |";
    for (const auto& v : table.value_ids) {
        const auto& noise = table.noise_row.at(v);
        out += noise ? " " + fixed3(to_double(*noise)) + " |" : " |";
    }
    out += " |\n";
    return out;
}

} // namespace valsteer
