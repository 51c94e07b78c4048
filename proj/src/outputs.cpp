#include "poisonrank/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "poisonrank/errors.hpp"

namespace poisonrank {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_run_csv(const std::string& path, const Aggregate& agg,
                   int replications) {
  std::string out;
  const bool with_std = replications > 1;
  out += "round,chosen_count,chosen_ratio,cumulative_cost";
  if (with_std) out += ",chosen_count_std,chosen_ratio_std,cumulative_cost_std";
  out += "\n";
  for (std::size_t i = 0; i < agg.rounds.size(); ++i) {
    out += std::to_string(agg.rounds[i]);
    out += ',';
    out += format_double(agg.chosen_mean[i]);
    out += ',';
    out += format_double(agg.ratio_mean[i]);
    out += ',';
    out += format_double(agg.cost_mean[i]);
    if (with_std) {
      out += ',';
      out += format_double(agg.chosen_std[i]);
      out += ',';
      out += format_double(agg.ratio_std[i]);
      out += ',';
      out += format_double(agg.cost_std[i]);
    }
    out += '\n';
  }
  write_text(path, out);
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Ticks {
  std::vector<double> values;
};

// Round tick steps to a 1/2/5 ladder covering [lo, hi] with about n ticks.
Ticks nice_ticks(double lo, double hi, int n) {
  Ticks t;
  const double span = hi - lo;
  if (span <= 0.0) {
    t.values.push_back(lo);
    return t;
  }
  const double raw = span / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  const double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + step * 1e-9; v += step)
    t.values.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  return t;
}

std::string axis_label(double v) {
  char buf[32];
  if (std::abs(v) >= 10000.0)
    std::snprintf(buf, sizeof(buf), "%.3g", v);
  else
    std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_plot_svg(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series, bool log_x) {
  if (series.empty()) throw InvariantError("write_plot_svg: no series");
  const double W = 860, H = 520;
  const double ml = 80, mr = 190, mt = 46, mb = 58;
  const double pw = W - ml - mr, ph = H - mt - mb;

  auto tx = [log_x](double x) { return log_x ? std::log10(x) : x; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const PlotSeries& s : series) {
    if (s.xs.size() != s.ys.size() || s.xs.empty())
      throw InvariantError("write_plot_svg: malformed series");
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (log_x && !(s.xs[i] > 0.0))
        throw InvariantError("write_plot_svg: log axis needs positive x");
      xmin = std::min(xmin, tx(s.xs[i]));
      xmax = std::max(xmax, tx(s.xs[i]));
      ymin = std::min(ymin, s.ys[i]);
      ymax = std::max(ymax, s.ys[i]);
    }
  }
  if (xmax <= xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax <= ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double ypad = (ymax - ymin) * 0.05;
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(W) +
         "\" height=\"" + coord(H) + "\" viewBox=\"0 0 " + coord(W) + " " +
         coord(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + coord(ml + pw / 2) + "\" y=\"24\" font-size=\"16\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\">" +
         xml_escape(title) + "</text>\n";

  const Ticks xt = nice_ticks(xmin, xmax, 6);
  const Ticks yt = nice_ticks(ymin, ymax, 6);
  svg += "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (double v : xt.values)
    svg += "<line x1=\"" + coord(ml + (v - xmin) / (xmax - xmin) * pw) +
           "\" y1=\"" + coord(mt) + "\" x2=\"" +
           coord(ml + (v - xmin) / (xmax - xmin) * pw) + "\" y2=\"" +
           coord(mt + ph) + "\"/>\n";
  for (double v : yt.values)
    svg += "<line x1=\"" + coord(ml) + "\" y1=\"" + coord(py(v)) +
           "\" x2=\"" + coord(ml + pw) + "\" y2=\"" + coord(py(v)) + "\"/>\n";
  svg += "</g>\n";

  svg += "<g font-size=\"12\" font-family=\"sans-serif\" fill=\"#333333\">\n";
  for (double v : xt.values) {
    const std::string label =
        log_x ? axis_label(std::pow(10.0, v)) : axis_label(v);
    svg += "<text x=\"" + coord(ml + (v - xmin) / (xmax - xmin) * pw) +
           "\" y=\"" + coord(mt + ph + 18) +
           "\" text-anchor=\"middle\">" + label + "</text>\n";
  }
  for (double v : yt.values)
    svg += "<text x=\"" + coord(ml - 8) + "\" y=\"" + coord(py(v) + 4) +
           "\" text-anchor=\"end\">" + axis_label(v) + "</text>\n";
  svg += "<text x=\"" + coord(ml + pw / 2) + "\" y=\"" + coord(H - 14) +
         "\" text-anchor=\"middle\">" + xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + coord(mt + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         coord(mt + ph / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
  svg += "</g>\n";

  svg += "<rect x=\"" + coord(ml) + "\" y=\"" + coord(mt) + "\" width=\"" +
         coord(pw) + "\" height=\"" + coord(ph) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(*kPalette))];
    const std::size_t n = s.xs.size();
    const std::size_t stride = n > 1500 ? (n + 1499) / 1500 : 1;
    std::string pts;
    for (std::size_t i = 0; i < n; i += stride) {
      pts += coord(px(s.xs[i])) + "," + coord(py(s.ys[i])) + " ";
    }
    if ((n - 1) % stride != 0)
      pts += coord(px(s.xs[n - 1])) + "," + coord(py(s.ys[n - 1])) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
    const double ly = mt + 16 + 22 * static_cast<double>(si);
    svg += "<line x1=\"" + coord(ml + pw + 12) + "\" y1=\"" + coord(ly) +
           "\" x2=\"" + coord(ml + pw + 40) + "\" y2=\"" + coord(ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + coord(ml + pw + 46) + "\" y=\"" + coord(ly + 4) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" +
           xml_escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  write_text(path, svg);
}

nlohmann::json summary_json(const nlohmann::json& resolved_spec,
                            const Aggregate& agg) {
  nlohmann::json j;
  j["spec"] = resolved_spec;
  j["replications"] = agg.per_rep.size();
  j["final"] = {
      {"round", agg.rounds.empty() ? 0 : agg.rounds.back()},
      {"chosen_ratio_mean", agg.final_ratio_mean},
      {"chosen_ratio_std", agg.final_ratio_std},
      {"cost_mean", agg.final_cost_mean},
      {"cost_std", agg.final_cost_std},
  };
  j["checks"] = {
      {"concentration_event_replications", agg.concentrated_count},
      {"pull_bound_violations", agg.pull_bound_violations},
      {"budget_bound_violations", agg.conservative_violations},
  };
  nlohmann::json reps = nlohmann::json::array();
  for (const Metrics& m : agg.per_rep) {
    nlohmann::json r;
    r["target"] = m.target + 1;  // item ids are 1-based in outputs
    nlohmann::json prot = nlohmann::json::array();
    for (int a : m.protected_set) prot.push_back(a + 1);
    r["protected"] = prot;
    r["final_ratio"] = m.final_ratio();
    r["final_cost"] = m.final_cost();
    r["attacked_rounds"] = m.attacked_rounds;
    r["concentration_event"] = m.means_concentrated;
    r["pulls"] = m.final_pulls;
    reps.push_back(std::move(r));
  }
  j["replication_details"] = std::move(reps);
  return j;
}

}  // namespace poisonrank
