#pragma once

#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "poisonrank/harness.hpp"

namespace poisonrank {

// Fixed-precision rendering used by every writer, so repeated runs emit
// byte-identical files.
std::string format_double(double v);

// Columns: round, chosen_count, chosen_ratio, cumulative_cost, plus _std
// columns for each when more than one replication was aggregated.
void write_run_csv(const std::string& path, const Aggregate& agg,
                   int replications);

// One polyline per series on a shared grid; a self-contained SVG document.
struct PlotSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};
void write_plot_svg(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series,
                    bool log_x = false);

nlohmann::json summary_json(const nlohmann::json& resolved_spec,
                            const Aggregate& agg);

void write_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace poisonrank
