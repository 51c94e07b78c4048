#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "poisonrank/config.hpp"
#include "poisonrank/errors.hpp"
#include "poisonrank/movielens.hpp"
#include "poisonrank/outputs.hpp"

#ifdef POISONRANK_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

using namespace poisonrank;
using nlohmann::json;

int default_jobs() {
#ifdef POISONRANK_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::string default_out_dir() {
  const char* env = std::getenv("POISONRANK_OUT");
  return env && *env ? env : "out";
}

struct CommonOpts {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = default_out_dir();
  int jobs = default_jobs();
  std::vector<std::string> formats = {"csv", "json", "plot"};

  std::optional<long> horizon;
  std::optional<int> items;
  std::optional<int> list_len;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<double> delta0;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<std::string> strategy;
  std::optional<std::string> target;
  std::optional<std::string> ratings;

  bool want(const std::string& fmt) const {
    for (const std::string& f : formats)
      if (f == fmt) return true;
    return false;
  }
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "experiment config file (JSON)");
  cmd->add_option("--preset", o.preset_name, "named preset scenario");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--jobs", o.jobs, "max parallel replications");
  cmd->add_option("--formats", o.formats, "outputs to write: csv,json,plot")
      ->delimiter(',');
  cmd->add_option("--horizon,-T", [&o](const CLI::results_t& r) {
        o.horizon = std::stol(r[0]);
        return true;
      }, "rounds per replication");
  cmd->add_option("--items,-L", [&o](const CLI::results_t& r) {
        o.items = std::stoi(r[0]);
        return true;
      }, "number of items");
  cmd->add_option("--list-len,-K", [&o](const CLI::results_t& r) {
        o.list_len = std::stoi(r[0]);
        return true;
      }, "list length");
  cmd->add_option("--seed", [&o](const CLI::results_t& r) {
        o.seed = std::stoull(r[0]);
        return true;
      }, "base seed");
  cmd->add_option("--replications,-R", [&o](const CLI::results_t& r) {
        o.replications = std::stoi(r[0]);
        return true;
      }, "number of replications");
  cmd->add_option("--delta0", [&o](const CLI::results_t& r) {
        o.delta0 = std::stod(r[0]);
        return true;
      }, "attacker margin");
  cmd->add_option("--delta", [&o](const CLI::results_t& r) {
        o.delta = std::stod(r[0]);
        return true;
      }, "attacker confidence parameter");
  cmd->add_option("--epsilon", [&o](const CLI::results_t& r) {
        o.epsilon = std::stod(r[0]);
        return true;
      }, "position-based learner width parameter");
  cmd->add_option("--strategy", [&o](const CLI::results_t& r) {
        o.strategy = r[0];
        return true;
      }, "attack strategy override");
  cmd->add_option("--target", [&o](const CLI::results_t& r) {
        o.target = r[0];
        return true;
      }, "target item (1-based id, 'last', or 'min_mean')");
  cmd->add_option("--ratings", [&o](const CLI::results_t& r) {
        o.ratings = r[0];
        return true;
      }, "ratings CSV for movielens means");
}

void apply_overrides(ExperimentSpec& s, const CommonOpts& o) {
  if (o.horizon) s.horizon = *o.horizon;
  if (o.items) s.num_items = *o.items;
  if (o.list_len) s.list_len = *o.list_len;
  if (o.seed) s.seed = *o.seed;
  if (o.replications) s.replications = *o.replications;
  if (o.delta0) s.delta0 = *o.delta0;
  if (o.delta) s.delta = *o.delta;
  if (o.epsilon) s.epsilon = *o.epsilon;
  if (o.strategy) {
    const auto strat = strategy_from_name(*o.strategy);
    if (!strat) throw ConfigError("unknown attack strategy '" + *o.strategy + "'");
    s.strategy = *strat;
  }
  if (o.target) {
    if (*o.target == "last") {
      s.target = kTargetLastItem;
    } else if (*o.target == "min_mean") {
      s.target = kTargetMinMean;
    } else {
      try {
        const long v = std::stol(*o.target);
        if (v < 1 || v > s.num_items)
          throw ConfigError("target item id out of range (ids are 1-based)");
        s.target = static_cast<int>(v - 1);
      } catch (const std::logic_error&) {
        throw ConfigError("target must be an item id, 'last', or 'min_mean'");
      }
    }
  }
  if (o.ratings) {
    if (s.means.kind != MeanSpec::Kind::kMovieLens)
      throw ConfigError("--ratings only applies to movielens means");
    s.means.ratings_file = *o.ratings;
  }
}

LoadedConfig load(const CommonOpts& o) {
  if (!o.config_path.empty() && !o.preset_name.empty())
    throw ConfigError("pass either --config or --preset, not both");
  if (!o.config_path.empty()) return load_config_file(o.config_path);
  if (!o.preset_name.empty()) return preset(o.preset_name);
  throw ConfigError("missing config: pass --config FILE or --preset NAME");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

void emit_resolved(const json& resolved, const CommonOpts& o) {
  std::cout << resolved.dump(2) << "\n";
  ensure_out_dir(o.out_dir);
  write_json(o.out_dir + "/spec.json", resolved);
}

void write_run_outputs(const std::string& dir, const std::string& stem,
                       const ExperimentSpec& spec, const Aggregate& agg,
                       const CommonOpts& o) {
  if (o.want("csv"))
    write_run_csv(dir + "/" + stem + ".csv", agg, spec.replications);
  if (o.want("json"))
    write_json(dir + "/" + stem + "_summary.json",
               summary_json(spec_to_json(spec), agg));
  if (o.want("plot")) {
    std::vector<double> xs(agg.rounds.begin(), agg.rounds.end());
    write_plot_svg(dir + "/" + stem + "_ratio.svg", spec.name,
                   "round", "target chosen ratio",
                   {{std::string(strategy_name(spec.strategy)), xs,
                     agg.ratio_mean}});
    write_plot_svg(dir + "/" + stem + "_cost.svg", spec.name, "round",
                   "cumulative cost",
                   {{std::string(strategy_name(spec.strategy)), xs,
                     agg.cost_mean}});
  }
}

int cmd_run(const CommonOpts& o) {
  LoadedConfig cfg = load(o);
  if (cfg.mode != LoadedConfig::Mode::kRun)
    throw ConfigError("this config describes a sweep; use the sweep command");
  apply_overrides(cfg.run, o);
  cfg.run.validate();
  emit_resolved(config_to_json(cfg), o);

  const Aggregate agg = run_experiment(cfg.run, o.jobs);
  write_run_outputs(o.out_dir, "run", cfg.run, agg, o);
  std::printf("final: chosen_ratio=%.4f cost=%.1f (over %d replications)\n",
              agg.final_ratio_mean, agg.final_cost_mean,
              cfg.run.replications);
  return 0;
}

int cmd_compare(const CommonOpts& o, const std::vector<std::string>& names) {
  if (names.size() < 2)
    throw ConfigError("compare needs at least two strategies");
  LoadedConfig cfg = load(o);
  if (cfg.mode != LoadedConfig::Mode::kRun)
    throw ConfigError("compare needs a run config as the base");
  apply_overrides(cfg.run, o);

  std::vector<AttackStrategy> strategies;
  for (const std::string& n : names) {
    const auto strat = strategy_from_name(n);
    if (!strat) throw ConfigError("unknown attack strategy '" + n + "'");
    strategies.push_back(*strat);
  }
  for (AttackStrategy s : strategies) {
    ExperimentSpec probe = cfg.run;
    probe.strategy = s;
    try {
      probe.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("strategy '" + std::string(strategy_name(s)) +
                        "' is incompatible with this config: " + e.what());
    }
  }

  json resolved = config_to_json(cfg);
  resolved["mode"] = "compare";
  json strat_names = json::array();
  for (AttackStrategy s : strategies)
    strat_names.push_back(std::string(strategy_name(s)));
  resolved["strategies"] = strat_names;
  emit_resolved(resolved, o);

  std::vector<Aggregate> aggs;
  std::vector<PlotSeries> ratio_series, cost_series;
  json finals = json::object();
  for (AttackStrategy s : strategies) {
    ExperimentSpec spec = cfg.run;
    spec.strategy = s;
    spec.name = cfg.run.name + "/" + std::string(strategy_name(s));
    Aggregate agg = run_experiment(spec, o.jobs);
    const std::string sname(strategy_name(s));
    if (o.want("csv"))
      write_run_csv(o.out_dir + "/run_" + sname + ".csv", agg,
                    spec.replications);
    std::vector<double> xs(agg.rounds.begin(), agg.rounds.end());
    ratio_series.push_back({sname, xs, agg.ratio_mean});
    cost_series.push_back({sname, xs, agg.cost_mean});
    finals[sname] = {{"chosen_ratio_mean", agg.final_ratio_mean},
                     {"chosen_ratio_std", agg.final_ratio_std},
                     {"cost_mean", agg.final_cost_mean},
                     {"cost_std", agg.final_cost_std}};
    aggs.push_back(std::move(agg));
  }

  json rel = json::object();
  const std::string base_name(strategy_name(strategies[0]));
  const double base_cost = aggs[0].final_cost_mean;
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const std::string sname(strategy_name(strategies[i]));
    rel[sname + "/" + base_name] =
        base_cost > 0.0 ? aggs[i].final_cost_mean / base_cost : 0.0;
  }
  if (o.want("json")) {
    json j;
    j["spec"] = resolved;
    j["final"] = finals;
    j["relative_cost"] = rel;
    write_json(o.out_dir + "/compare.json", j);
  }
  if (o.want("plot")) {
    write_plot_svg(o.out_dir + "/ratio.svg", cfg.run.name, "round",
                   "target chosen ratio", ratio_series);
    write_plot_svg(o.out_dir + "/cost.svg", cfg.run.name, "round",
                   "cumulative cost", cost_series);
  }
  std::printf("compared %zu strategies; relative cost vs %s written\n",
              strategies.size(), base_name.c_str());
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& param_flag,
              const std::vector<double>& values_flag) {
  LoadedConfig cfg = load(o);
  if (cfg.mode == LoadedConfig::Mode::kRun) {
    if (param_flag.empty() || values_flag.empty())
      throw ConfigError(
          "run config needs --param and --values to define the sweep grid");
    SweepConfig sw;
    sw.param = param_flag;
    sw.values = values_flag;
    sw.base = cfg.run;
    sw.strategies = {cfg.run.strategy};
    cfg.mode = LoadedConfig::Mode::kSweep;
    cfg.sweeps = {std::move(sw)};
  } else if (!param_flag.empty() || !values_flag.empty()) {
    throw ConfigError("--param/--values conflict with a sweep config");
  }
  for (SweepConfig& sw : cfg.sweeps) apply_overrides(sw.base, o);
  emit_resolved(config_to_json(cfg), o);

  for (const SweepConfig& sw : cfg.sweeps) {
    const bool single = sw.strategies.size() == 1;
    std::string csv = "param_value";
    for (AttackStrategy s : sw.strategies) {
      const std::string prefix =
          single ? "" : std::string(strategy_name(s)) + "_";
      csv += "," + prefix + "final_cost_mean," + prefix + "final_cost_std," +
             prefix + "final_ratio_mean," + prefix + "final_ratio_std";
    }
    csv += "\n";
    json points = json::array();
    std::vector<PlotSeries> cost_series(sw.strategies.size()),
        ratio_series(sw.strategies.size());
    for (std::size_t si = 0; si < sw.strategies.size(); ++si) {
      cost_series[si].name = strategy_name(sw.strategies[si]);
      ratio_series[si].name = strategy_name(sw.strategies[si]);
    }
    for (double v : sw.values) {
      csv += format_double(v);
      json point;
      point["param_value"] = v;
      for (std::size_t si = 0; si < sw.strategies.size(); ++si) {
        ExperimentSpec spec = sw.base;
        apply_sweep_value(spec, sw.param, v);
        spec.strategy = sw.strategies[si];
        spec.validate();
        const Aggregate agg = run_experiment(spec, o.jobs);
        csv += "," + format_double(agg.final_cost_mean) + "," +
               format_double(agg.final_cost_std) + "," +
               format_double(agg.final_ratio_mean) + "," +
               format_double(agg.final_ratio_std);
        const std::string sname(strategy_name(sw.strategies[si]));
        point[sname] = {{"final_cost_mean", agg.final_cost_mean},
                        {"final_cost_std", agg.final_cost_std},
                        {"final_ratio_mean", agg.final_ratio_mean},
                        {"final_ratio_std", agg.final_ratio_std}};
        cost_series[si].xs.push_back(v);
        cost_series[si].ys.push_back(agg.final_cost_mean);
        ratio_series[si].xs.push_back(v);
        ratio_series[si].ys.push_back(agg.final_ratio_mean);
      }
      csv += "\n";
      points.push_back(std::move(point));
    }
    if (o.want("csv"))
      write_text(o.out_dir + "/sweep_" + sw.param + ".csv", csv);
    if (o.want("json")) {
      json j;
      j["param"] = sw.param;
      j["points"] = points;
      write_json(o.out_dir + "/sweep_" + sw.param + ".json", j);
    }
    if (o.want("plot")) {
      write_plot_svg(o.out_dir + "/cost_vs_" + sw.param + ".svg",
                     sw.base.name, sw.param, "final cost", cost_series);
      write_plot_svg(o.out_dir + "/ratio_vs_" + sw.param + ".svg",
                     sw.base.name, sw.param, "final target chosen ratio",
                     ratio_series);
    }
    std::printf("sweep over %s: %zu points done\n", sw.param.c_str(),
                sw.values.size());
  }
  return 0;
}

int cmd_ingest(const std::string& ratings, int items, double threshold,
               const std::string& out_file) {
  if (ratings.empty()) throw ConfigError("ingest needs --ratings FILE");
  const MovieLensResult ml = ingest_movielens(ratings, items, threshold);
  json j;
  j["items"] = items;
  j["threshold"] = threshold;
  j["means"] = ml.means;
  j["movie_ids"] = ml.movie_ids;
  j["rating_counts"] = ml.rating_counts;
  if (out_file.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(out_file, j);
    std::printf("wrote %d item means to %s\n", items, out_file.c_str());
  }
  return 0;
}

int cmd_presets(const std::string& name) {
  if (!name.empty()) {
    std::cout << config_to_json(preset(name)).dump(2) << "\n";
    return 0;
  }
  const char* blurbs[] = {
      "two-armed head-to-head over a target mean grid",
      "position-based lists, 16 synthetic items",
      "position-based lists, 100 movielens items",
      "cascade lists, 16 synthetic items",
      "cascade lists, 100 movielens items",
      "margin and mean-range sweeps on the single recommendation model",
      "single recommendation, 16 synthetic items",
  };
  const std::vector<std::string> names = preset_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    std::printf("%-24s %s\n", names[i].c_str(), blurbs[i]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reward-poisoning simulator for online learning to rank"};
  app.require_subcommand(1);

  CommonOpts run_opts, compare_opts, sweep_opts;
  std::vector<std::string> compare_strategies;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string ingest_ratings, ingest_out, preset_arg;
  int ingest_items = 100;
  double ingest_threshold = 4.0;

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_common_flags(run, run_opts);

  CLI::App* compare =
      app.add_subcommand("compare", "run several strategies with paired seeds");
  add_common_flags(compare, compare_opts);
  compare->add_option("--strategies", compare_strategies,
                      "strategies to compare")
      ->delimiter(',');

  CLI::App* sweep = app.add_subcommand("sweep", "grid over one parameter");
  add_common_flags(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param,
                    "one of: mu_target, delta0, x, epsilon");
  sweep->add_option("--values", sweep_values, "grid values")->delimiter(',');

  CLI::App* ingest =
      app.add_subcommand("ingest", "extract item means from a ratings CSV");
  ingest->add_option("--ratings", ingest_ratings, "ratings CSV file");
  ingest->add_option("--items", ingest_items, "number of items to keep");
  ingest->add_option("--threshold", ingest_threshold,
                     "rating counted as positive when >= this");
  ingest->add_option("--out", ingest_out, "output JSON file (default stdout)");

  CLI::App* presets = app.add_subcommand("presets", "list preset scenarios");
  presets->add_option("name", preset_arg, "print one preset's resolved spec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (compare->parsed()) return cmd_compare(compare_opts, compare_strategies);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_param, sweep_values);
    if (ingest->parsed())
      return cmd_ingest(ingest_ratings, ingest_items, ingest_threshold,
                        ingest_out);
    if (presets->parsed()) return cmd_presets(preset_arg);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
}
