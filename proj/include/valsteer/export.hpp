#pragma once

#include <string>

#include "valsteer/graph.hpp"
#include "valsteer/metrics.hpp"

namespace valsteer {

/// Graphviz document with one node per value and stable ordering.
std::string export_dot(const CausalGraph& graph);

std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(const std::string& json_text);
std::string report_to_markdown(const MetricReport& report);
std::string report_to_csv(const MetricReport& report);

std::string paired_report_to_json(const PairedReport& paired);
std::string paired_report_to_markdown(const PairedReport& paired);

/// Markdown table with features as rows and values as columns; each cell
/// shows stim/supp/maintain proportions plus the train-vs-test cosine, with a
/// mean-similarity column and a closing per-value noise-ratio row.
std::string steer_table_to_markdown(const SteerTable& table);

} // namespace valsteer
