// Command-line front end for the network-reporting estimation toolkit.
//
// Subcommands:
//   simulate           synthetic population + survey files with a truth sidecar
//   estimate           hidden-population size estimates with bootstrap intervals
//   ic                 per-group internal consistency checks
//   tae                consistency comparison between two tie-definition arms
//   sensitivity-sweep  mixing-grid sweep of measured vs predicted factors
//   validate           schema and weighting sanity checks for survey files
//
// Exit codes: 0 ok, 1 data error, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netreport/diagnostics.hpp"
#include "netreport/estimators.hpp"
#include "netreport/io.hpp"
#include "netreport/population.hpp"
#include "netreport/sensitivity.hpp"
#include "netreport/survey.hpp"
#include "netreport/uncertainty.hpp"
#include "netreport/version.hpp"

namespace fs = std::filesystem;
using namespace netreport;

namespace {

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format = "csv";
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, const std::string& name) {
  cmd->add_option("--seed", opts.seed,
                  "Master seed; all randomness derives from it");
  cmd->add_option("--out", opts.out_dir,
                  "Output directory (default: ./" + name + "-seed<seed>)");
  cmd->add_option("--format", opts.format, "Result format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--quiet", opts.quiet, "Suppress progress output");
}

fs::path resolve_out_dir(const CommonOptions& opts, const std::string& name) {
  fs::path dir = opts.out_dir.empty()
                     ? fs::path(name + "-seed" + std::to_string(opts.seed))
                     : fs::path(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

void progress(const CommonOptions& opts, const std::string& message) {
  if (!opts.quiet) std::cerr << message << "\n";
}

void check_file_exists(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw UsageError(what + " file does not exist: " + path);
  }
}

// Applies `key=value` config-file entries as defaults for flags the user did
// not pass on the command line.
void apply_config_defaults(CLI::App* cmd, const std::string& config_path) {
  if (config_path.empty()) return;
  check_file_exists(config_path, "config");
  std::set<std::string> allowed;
  for (const CLI::Option* opt : cmd->get_options()) {
    for (const std::string& name : opt->get_lnames()) allowed.insert(name);
  }
  allowed.erase("config");
  for (const auto& [key, value] : load_run_config(config_path, allowed)) {
    if (key == "schema_version") continue;
    CLI::Option* opt = cmd->get_option("--" + key);
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

std::set<std::string> margin_groups(const FrameMargins& margins) {
  std::set<std::string> known;
  for (const auto& [g, _] : margins.by_group) known.insert(g);
  return known;
}

// --------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  CommonOptions common;
  std::string config_path;
  std::string model = "er";
  long long n_hidden = 2000;
  long long n_frame = 400;
  double edge_prob = 0.01;
  double phi = 0.02;
  double sigma = 1.0;
  long long n_hidden_only = 0;
  std::vector<std::string> subpops;  // n_hidden:n_frame:p
  long long sample_size = 200;
  int max_alters = 3;
  double homophily = 1.0;
  std::vector<std::string> homophilous_groups;
  double fn_hidden = 0.0, fp_hidden = 0.0, fn_frame = 0.0, fp_frame = 0.0;
  double awareness = 1.0;
  int heaping_threshold = 0;  // 0 = off
  std::vector<std::string> group_response;  // group:prob
  int n_groups = 12;
};

Population build_population(const SimulateOptions& opts) {
  GroupModel groups = GroupModel::twelve_cells();
  if (opts.n_groups != 12) {
    groups.labels.clear();
    for (int k = 1; k <= opts.n_groups; ++k) {
      groups.labels.push_back("g" + std::to_string(k));
    }
    groups.probabilities.assign(opts.n_groups, 1.0 / opts.n_groups);
  }
  if (opts.model == "er") {
    return generate_er(opts.n_hidden, opts.n_frame, opts.edge_prob,
                       opts.common.seed, groups);
  }
  if (opts.model == "block") {
    BlockModelSpec spec{opts.phi, opts.sigma, opts.n_frame, opts.n_hidden_only};
    return generate_block(spec, opts.common.seed, groups);
  }
  MixtureSpec spec;
  for (const std::string& text : opts.subpops) {
    MixtureComponent c;
    if (std::sscanf(text.c_str(), "%lld:%lld:%lf", &c.n_hidden, &c.n_frame,
                    &c.edge_probability) != 3) {
      throw UsageError("--subpop expects n_hidden:n_frame:p, got " + text);
    }
    spec.components.push_back(c);
  }
  return generate_mixture(spec, opts.common.seed, groups);
}

ReportingModel build_reporting(const SimulateOptions& opts) {
  ReportingModel reporting;
  reporting.false_negative_hidden = opts.fn_hidden;
  reporting.false_positive_hidden = opts.fp_hidden;
  reporting.false_negative_frame = opts.fn_frame;
  reporting.false_positive_frame = opts.fp_frame;
  reporting.awareness_prob = opts.awareness;
  if (opts.heaping_threshold > 0) {
    reporting.degree_heaping_threshold = opts.heaping_threshold;
  }
  return reporting;
}

int run_simulate(const SimulateOptions& opts) {
  const fs::path dir = resolve_out_dir(opts.common, "simulate");
  const Population pop = build_population(opts);
  const ReportingModel reporting = build_reporting(opts);

  SamplingDesign design;
  design.sample_size = opts.sample_size;
  for (const std::string& text : opts.group_response) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
      throw UsageError("--group-response expects group:prob, got " + text);
    }
    design.group_response_prob[text.substr(0, colon)] =
        std::stod(text.substr(colon + 1));
  }

  AlterSelectionModel alter_model =
      opts.homophily == 1.0
          ? AlterSelectionModel::uniform(opts.max_alters)
          : AlterSelectionModel::homophilous(opts.max_alters, opts.homophily,
                                             opts.homophilous_groups);

  progress(opts.common, "simulating survey...");
  const auto records = run_survey(pop, design, alter_model, reporting,
                                  derive_seed(opts.common.seed, 1));

  const FrameMargins margins = FrameMargins::from_population(pop);
  save_respondents(records, (dir / "survey.csv").string(), opts.max_alters);
  save_margins(margins, (dir / "margins.csv").string());
  save_population(pop, (dir / "population_edges.txt").string(),
                  (dir / "population_nodes.csv").string());

  // Ground-truth sidecar for downstream validation.
  const auto factors = measure_factors(pop, reporting);
  nlohmann::json truth;
  truth["n_hidden"] = pop.hidden_size();
  truth["n_frame"] = pop.frame_size();
  truth["n_total"] = pop.node_count();
  truth["mean_degree_frame_frame"] =
      mean_degree_between(pop, frame_members(), frame_members());
  truth["mean_degree_hidden_frame"] =
      mean_degree_between(pop, hidden_members(), frame_members());
  truth["eta_hidden"] = factors.eta_hidden;
  truth["eta_frame"] = factors.eta_frame;
  truth["nu"] = factors.nu;
  truth["visibility"] = true_visibility(pop, reporting);
  {
    std::ofstream out(dir / "truth.json", std::ios::binary);
    out << truth.dump(2) << "\n";
  }

  RunMetadata meta;
  meta.command = "simulate";
  meta.seed = opts.common.seed;
  meta.parameters["model"] = opts.model;
  meta.parameters["sample_size"] = std::to_string(opts.sample_size);
  meta.parameters["max_alters"] = std::to_string(opts.max_alters);
  meta.excluded_records = excluded_record_count(records);
  write_metadata(meta, (dir / "metadata.json").string());
  progress(opts.common, "wrote " + dir.string());
  return 0;
}

// --------------------------------------------------------------------------
// estimate

struct EstimateOptions {
  CommonOptions common;
  std::string config_path;
  std::string records_path;
  std::string margins_path;
  int replicates = 1000;
  int resample_size = 0;  // 0 = n-1
  double ci_level = 0.95;
  bool export_replicate_weights = false;
};

BootstrapConfig make_bootstrap_config(std::uint64_t seed, int replicates,
                                      int resample_size, double ci_level) {
  BootstrapConfig config;
  config.replicates = replicates;
  if (resample_size > 0) config.resample_size = resample_size;
  config.seed = seed;
  config.ci_level = ci_level;
  return config;
}

int run_estimate(const EstimateOptions& opts) {
  check_file_exists(opts.records_path, "records");
  check_file_exists(opts.margins_path, "margins");
  const fs::path dir = resolve_out_dir(opts.common, "estimate");

  const FrameMargins margins = load_margins(opts.margins_path);
  const auto known = margin_groups(margins);
  const auto records = load_respondents(opts.records_path, &known);
  if (records.empty()) {
    throw DataError("no respondent rows in " + opts.records_path);
  }

  const BootstrapConfig config = make_bootstrap_config(
      opts.common.seed, opts.replicates, opts.resample_size, opts.ci_level);

  // A census has no sampling variability: every frame unit is present with
  // weight one, so intervals collapse to the point estimate.
  double design_total = 0.0;
  for (const auto& rec : records) design_total += rec.design_weight;
  const bool census =
      records.size() == static_cast<std::size_t>(margins.total()) &&
      std::abs(design_total - static_cast<double>(margins.total())) < 1e-9;

  auto guarded = [](auto estimator) {
    return [estimator](std::span<const RespondentRecord> recs,
                       std::span<const double> w) -> std::optional<double> {
      try {
        return estimator(recs, w);
      } catch (const EstimationError&) {
        return std::nullopt;
      }
    };
  };

  std::vector<ResultRow> rows;
  int degenerate = 0;
  // `required` estimates abort the run when undefined; optional ones (the
  // generalized estimator needs at least one aware frame alter) are skipped
  // with a warning.
  auto push_estimate = [&](const std::string& name, const EstimatorFn& fn,
                           bool required) {
    ResultRow row;
    row.quantity = name;
    row.ci_level = opts.ci_level;
    try {
      if (census) {
        const auto w = poststratify(records, margins);
        const auto value = fn(records, w.calibrated);
        if (!value) throw EstimationError("estimator undefined for " + name);
        row.point = *value;
        row.ci_low = *value;
        row.ci_high = *value;
        row.replicates = 0;
      } else {
        const EstimateWithCI est =
            bootstrap_estimate(records, margins, config, fn);
        row.point = est.point;
        row.ci_low = est.ci_low;
        row.ci_high = est.ci_high;
        row.replicates = static_cast<long long>(est.replicates.size());
        degenerate += est.degenerate_replicates;
      }
    } catch (const EstimationError& e) {
      if (required) throw DataError(e.what());
      std::cerr << "warning: skipping " << name << ": " << e.what() << "\n";
      return;
    }
    rows.push_back(row);
  };

  progress(opts.common, "estimating hidden population size...");
  push_estimate("hidden_population_size",
                guarded([](auto recs, auto w) {
                  return hidden_population_size(recs, w);
                }),
                true);
  push_estimate("hidden_population_size_generalized",
                guarded([](auto recs, auto w) {
                  return hidden_population_size_generalized(recs, w);
                }),
                false);
  push_estimate("mean_reported_degree",
                guarded([](auto recs, auto w) {
                  return mean_reported_degree(recs, w);
                }),
                true);

  const std::string ext = opts.common.format;
  const std::string results_path = (dir / ("estimates." + ext)).string();
  if (ext == "csv") {
    write_results_csv(rows, results_path);
  } else {
    write_results_json(rows, results_path);
  }

  // Degree summary: one row per dataset, mean reported degree with interval.
  for (const auto& candidate : rows) {
    if (candidate.quantity != "mean_reported_degree") continue;
    std::vector<ResultRow> degree_rows;
    ResultRow row = candidate;
    row.quantity = fs::path(opts.records_path).stem().string();
    degree_rows.push_back(row);
    write_results_csv(degree_rows, (dir / "degree_summary.csv").string());
  }

  if (opts.export_replicate_weights && !census) {
    const WeightSet base = poststratify(records, margins);
    const auto reps = replicate_weights(records, base.design, margins, config);
    write_replicate_weights(records, reps,
                            (dir / "replicate_weights.csv").string());
  }

  RunMetadata meta;
  meta.command = "estimate";
  meta.seed = opts.common.seed;
  meta.parameters["records"] = opts.records_path;
  meta.parameters["margins"] = opts.margins_path;
  meta.parameters["replicates"] = std::to_string(opts.replicates);
  meta.parameters["ci_level"] = format_double(opts.ci_level);
  meta.parameters["census"] = census ? "true" : "false";
  meta.input_digests[opts.records_path] = file_digest(opts.records_path);
  meta.input_digests[opts.margins_path] = file_digest(opts.margins_path);
  meta.excluded_records = excluded_record_count(records);
  meta.degenerate_replicates = degenerate;
  write_metadata(meta, (dir / "metadata.json").string());
  progress(opts.common, "wrote " + results_path);
  return 0;
}

// --------------------------------------------------------------------------
// ic / tae

struct IcOptions {
  CommonOptions common;
  std::string config_path;
  std::string records_path;
  std::string margins_path;
  int replicates = 1000;
  double ci_level = 0.95;
};

void write_checks_csv(const std::vector<ConsistencyCheck>& checks,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << "group,delta,delta_raw,k,ci_low,ci_high,n_respondents_in,"
         "n_respondents_out\n";
  for (const auto& c : checks) {
    out << c.group << ',' << format_double(c.delta) << ','
        << format_double(c.delta_raw) << ',' << format_double(c.scale_k) << ','
        << format_double(c.ci_low) << ',' << format_double(c.ci_high) << ','
        << c.respondents_in << ',' << c.respondents_out << "\n";
  }
}

int run_ic(const IcOptions& opts) {
  check_file_exists(opts.records_path, "records");
  check_file_exists(opts.margins_path, "margins");
  const fs::path dir = resolve_out_dir(opts.common, "ic");
  const FrameMargins margins = load_margins(opts.margins_path);
  const auto known = margin_groups(margins);
  const auto records = load_respondents(opts.records_path, &known);

  const BootstrapConfig config =
      make_bootstrap_config(opts.common.seed, opts.replicates, 0, opts.ci_level);
  std::vector<std::string> skipped;
  progress(opts.common, "running consistency checks...");
  const auto checks =
      consistency_checks_bootstrap(records, margins, config, &skipped);
  for (const auto& group : skipped) {
    std::cerr << "warning: skipping one-sided group " << group << "\n";
  }
  write_checks_csv(checks, (dir / "ic_checks.csv").string());

  RunMetadata meta;
  meta.command = "ic";
  meta.seed = opts.common.seed;
  meta.parameters["records"] = opts.records_path;
  meta.parameters["margins"] = opts.margins_path;
  meta.parameters["replicates"] = std::to_string(opts.replicates);
  meta.parameters["skipped_groups"] = std::to_string(skipped.size());
  meta.input_digests[opts.records_path] = file_digest(opts.records_path);
  meta.input_digests[opts.margins_path] = file_digest(opts.margins_path);
  meta.excluded_records = excluded_record_count(records);
  write_metadata(meta, (dir / "metadata.json").string());
  progress(opts.common, "wrote " + (dir / "ic_checks.csv").string());
  return 0;
}

struct TaeOptions {
  CommonOptions common;
  std::string config_path;
  std::string records_cc_path;
  std::string records_meal_path;
  std::string margins_path;
  int replicates = 1000;
  double ci_level = 0.95;
};

int run_tae(const TaeOptions& opts) {
  check_file_exists(opts.records_cc_path, "records-cc");
  check_file_exists(opts.records_meal_path, "records-meal");
  check_file_exists(opts.margins_path, "margins");
  const fs::path dir = resolve_out_dir(opts.common, "tae");
  const FrameMargins margins = load_margins(opts.margins_path);
  const auto known = margin_groups(margins);
  const auto cc = load_respondents(opts.records_cc_path, &known);
  const auto meal = load_respondents(opts.records_meal_path, &known);

  const BootstrapConfig config =
      make_bootstrap_config(opts.common.seed, opts.replicates, 0, opts.ci_level);

  progress(opts.common, "bootstrapping both arms...");
  const EstimateWithCI dist = tae_distribution(cc, meal, margins, config);

  // Per-arm check tables, on the same replicate streams the comparison used.
  BootstrapConfig cc_config = config;
  cc_config.seed = derive_seed(config.seed, record_stream_signature(cc));
  BootstrapConfig meal_config = config;
  meal_config.seed = derive_seed(config.seed, record_stream_signature(meal));
  write_checks_csv(consistency_checks_bootstrap(cc, margins, cc_config),
                   (dir / "ic_cc.csv").string());
  write_checks_csv(consistency_checks_bootstrap(meal, margins, meal_config),
                   (dir / "ic_meal.csv").string());

  std::vector<ResultRow> rows;
  ResultRow row;
  row.quantity = "tae";
  row.point = dist.point;
  row.ci_low = dist.ci_low;
  row.ci_high = dist.ci_high;
  row.ci_level = opts.ci_level;
  row.replicates = static_cast<long long>(dist.replicates.size());
  rows.push_back(row);
  const std::string ext = opts.common.format;
  const std::string results_path = (dir / ("tae." + ext)).string();
  if (ext == "csv") {
    write_results_csv(rows, results_path);
  } else {
    write_results_json(rows, results_path);
  }
  if (!opts.common.quiet) {
    std::cout << "tae=" << format_double(dist.point) << " ("
              << tae_interpretation(dist.point) << ")\n";
  }

  RunMetadata meta;
  meta.command = "tae";
  meta.seed = opts.common.seed;
  meta.parameters["records_cc"] = opts.records_cc_path;
  meta.parameters["records_meal"] = opts.records_meal_path;
  meta.parameters["margins"] = opts.margins_path;
  meta.parameters["replicates"] = std::to_string(opts.replicates);
  meta.input_digests[opts.records_cc_path] = file_digest(opts.records_cc_path);
  meta.input_digests[opts.records_meal_path] =
      file_digest(opts.records_meal_path);
  meta.input_digests[opts.margins_path] = file_digest(opts.margins_path);
  write_metadata(meta, (dir / "metadata.json").string());
  progress(opts.common, "wrote " + results_path);
  return 0;
}

// --------------------------------------------------------------------------
// sensitivity-sweep

struct SweepOptions {
  CommonOptions common;
  std::string config_path;
  std::string sigma_grid = "0,0.25,0.5,0.75,1";
  std::string p_grid = "0.1,0.5,0.9";
  int seeds_per_cell = 20;
  int surveys_per_cell = 20;
  long long n_hidden = 2000;
  double phi = 0.02;
  long long sample_size = 200;
  int max_alters = 3;
  long long max_cells = 64;
};

std::vector<double> parse_grid(const std::string& text,
                               const std::string& flag) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (...) {
      throw UsageError(flag + ": malformed number '" + cell + "'");
    }
  }
  if (values.empty()) throw UsageError(flag + ": empty grid");
  return values;
}

int run_sweep(const SweepOptions& opts) {
  const auto sigmas = parse_grid(opts.sigma_grid, "--sigma-grid");
  const auto ps = parse_grid(opts.p_grid, "--p-grid");
  const long long cells = static_cast<long long>(sigmas.size()) *
                          static_cast<long long>(ps.size());
  if (cells > opts.max_cells) {
    throw UsageError("grid has " + std::to_string(cells) +
                     " cells, over the budget of " +
                     std::to_string(opts.max_cells) +
                     "; shrink the grid or raise --max-cells");
  }
  const fs::path dir = resolve_out_dir(opts.common, "sweep");

  std::ofstream out(dir / "sweep.csv", std::ios::binary);
  out << "sigma,p_f_given_h,nu_measured,nu_predicted,eta_f,eta_h,nh_hat_mean,"
         "nh_true\n";

  const int surveys_per_seed =
      (opts.surveys_per_cell + opts.seeds_per_cell - 1) / opts.seeds_per_cell;
  std::uint64_t cell_index = 0;
  for (double p : ps) {
    for (double sigma : sigmas) {
      const long long n_frame =
          std::max<long long>(1, std::llround(p * opts.n_hidden));
      const long long n_only = opts.n_hidden - n_frame;
      double nu_sum = 0.0, eta_f_sum = 0.0, eta_h_sum = 0.0;
      double nh_sum = 0.0;
      long long nh_count = 0;
      for (int s = 0; s < opts.seeds_per_cell; ++s) {
        const std::uint64_t cell_seed =
            derive_seed(opts.common.seed, (cell_index << 20) + s);
        const auto pop = generate_block(
            BlockModelSpec{opts.phi, sigma, n_frame, n_only}, cell_seed);
        const auto factors = measure_factors(pop, ReportingModel::accurate());
        nu_sum += factors.nu;
        eta_f_sum += factors.eta_frame;
        eta_h_sum += factors.eta_hidden;
        const auto margins = FrameMargins::from_population(pop);
        for (int v = 0;
             v < surveys_per_seed && nh_count < opts.surveys_per_cell; ++v) {
          SamplingDesign design;
          design.sample_size = std::min(opts.sample_size, pop.frame_size());
          const auto records = run_survey(
              pop, design, AlterSelectionModel::uniform(opts.max_alters),
              ReportingModel::accurate(), derive_seed(cell_seed, 7000 + v));
          const auto w = poststratify(records, margins);
          nh_sum += hidden_population_size(records, w.calibrated);
          ++nh_count;
        }
      }
      const double nu_measured = nu_sum / opts.seeds_per_cell;
      out << format_double(sigma) << ',' << format_double(p) << ','
          << format_double(nu_measured) << ','
          << format_double(p + (1.0 - p) * sigma) << ','
          << format_double(eta_f_sum / opts.seeds_per_cell) << ','
          << format_double(eta_h_sum / opts.seeds_per_cell) << ','
          << format_double(nh_sum / static_cast<double>(nh_count)) << ','
          << opts.n_hidden << "\n";
      progress(opts.common, "cell sigma=" + format_double(sigma) +
                                " p=" + format_double(p));
      ++cell_index;
    }
  }

  RunMetadata meta;
  meta.command = "sensitivity-sweep";
  meta.seed = opts.common.seed;
  meta.parameters["sigma_grid"] = opts.sigma_grid;
  meta.parameters["p_grid"] = opts.p_grid;
  meta.parameters["seeds_per_cell"] = std::to_string(opts.seeds_per_cell);
  meta.parameters["surveys_per_cell"] = std::to_string(opts.surveys_per_cell);
  meta.parameters["n_hidden"] = std::to_string(opts.n_hidden);
  meta.parameters["phi"] = format_double(opts.phi);
  write_metadata(meta, (dir / "metadata.json").string());
  progress(opts.common, "wrote " + (dir / "sweep.csv").string());
  return 0;
}

// --------------------------------------------------------------------------
// validate

struct ValidateOptions {
  std::string records_path;
  std::string margins_path;
};

int run_validate(const ValidateOptions& opts) {
  check_file_exists(opts.records_path, "records");
  check_file_exists(opts.margins_path, "margins");
  const FrameMargins margins = load_margins(opts.margins_path);
  const auto known = margin_groups(margins);
  const auto records = load_respondents(opts.records_path, &known);
  if (records.empty()) throw DataError("no respondent rows");

  poststratify(records, margins);  // rejects uncalibratable inputs
  std::map<std::string, double> design_sums;
  std::map<std::string, int> counts;
  for (const auto& rec : records) {
    design_sums[rec.group] += rec.design_weight;
    counts[rec.group] += 1;
  }
  std::cout << "rows: " << records.size() << "\n";
  std::cout << "excluded (degree>0, no detail answers): "
            << excluded_record_count(records) << "\n";
  std::cout << "group,respondents,design_weight_sum,margin,calibration_factor\n";
  for (const auto& [group, margin] : margins.by_group) {
    const double design_sum =
        design_sums.count(group) ? design_sums.at(group) : 0.0;
    const double factor = design_sum > 0 ? margin / design_sum : 0.0;
    std::cout << group << ',' << (counts.count(group) ? counts.at(group) : 0)
              << ',' << format_double(design_sum) << ',' << margin << ','
              << format_double(factor) << "\n";
  }
  std::cout << "ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-based network-reporting estimation toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateOptions sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Generate a synthetic population and survey");
  add_common(simulate, sim.common, "simulate");
  simulate->add_option("--config", sim.config_path, "key=value defaults file");
  simulate->add_option("--model", sim.model, "er | block | mixture")
      ->check(CLI::IsMember({"er", "block", "mixture"}));
  simulate->add_option("--n-hidden", sim.n_hidden, "Hidden population size");
  simulate->add_option("--n-frame", sim.n_frame, "Frame size");
  simulate->add_option("--edge-prob", sim.edge_prob, "Edge probability (er)");
  simulate->add_option("--phi", sim.phi, "Within-block edge probability");
  simulate->add_option("--sigma", sim.sigma, "Cross-block attenuation");
  simulate->add_option("--n-hidden-only", sim.n_hidden_only,
                       "Off-frame block size (block model)");
  simulate->add_option("--subpop", sim.subpops,
                       "Mixture component n_hidden:n_frame:p (repeatable)");
  simulate->add_option("--sample-size", sim.sample_size, "Respondents to draw");
  simulate->add_option("--max-alters", sim.max_alters, "Detail questions cap");
  simulate->add_option("--homophily", sim.homophily,
                       "Same-group alter propensity multiplier");
  simulate->add_option("--homophilous-group", sim.homophilous_groups,
                       "Restrict homophily to these respondent groups");
  simulate->add_option("--fn-hidden", sim.fn_hidden,
                       "P(hidden alter reported as not hidden)");
  simulate->add_option("--fp-hidden", sim.fp_hidden,
                       "P(non-hidden alter reported as hidden)");
  simulate->add_option("--fn-frame", sim.fn_frame,
                       "P(frame alter reported as not frame)");
  simulate->add_option("--fp-frame", sim.fp_frame,
                       "P(non-frame alter reported as frame)");
  simulate->add_option("--awareness", sim.awareness,
                       "P(alter aware of respondent's hidden status)");
  simulate->add_option("--heaping-threshold", sim.heaping_threshold,
                       "Round reported degrees >= threshold to multiples of 5");
  simulate->add_option("--group-response", sim.group_response,
                       "Response probability group:p (repeatable)");
  simulate->add_option("--n-groups", sim.n_groups,
                       "Number of uniform demographic cells");

  EstimateOptions est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Hidden-population size estimates with intervals");
  add_common(estimate, est.common, "estimate");
  estimate->add_option("--config", est.config_path, "key=value defaults file");
  estimate->add_option("--records", est.records_path, "Respondent CSV");
  estimate->add_option("--margins", est.margins_path, "Frame margins CSV");
  estimate->add_option("--replicates", est.replicates, "Bootstrap replicates");
  estimate->add_option("--resample-size", est.resample_size,
                       "Bootstrap resample size m (default n-1)");
  estimate->add_option("--ci-level", est.ci_level, "Interval level");
  estimate->add_flag("--export-replicate-weights",
                     est.export_replicate_weights,
                     "Also write replicate_weights.csv");

  IcOptions ic;
  CLI::App* ic_cmd =
      app.add_subcommand("ic", "Per-group internal consistency checks");
  add_common(ic_cmd, ic.common, "ic");
  ic_cmd->add_option("--config", ic.config_path, "key=value defaults file");
  ic_cmd->add_option("--records", ic.records_path, "Respondent CSV");
  ic_cmd->add_option("--margins", ic.margins_path, "Frame margins CSV");
  ic_cmd->add_option("--replicates", ic.replicates, "Bootstrap replicates");
  ic_cmd->add_option("--ci-level", ic.ci_level, "Interval level");

  TaeOptions tae;
  CLI::App* tae_cmd = app.add_subcommand(
      "tae", "Consistency comparison between two tie definitions");
  add_common(tae_cmd, tae.common, "tae");
  tae_cmd->add_option("--config", tae.config_path, "key=value defaults file");
  tae_cmd->add_option("--records-cc", tae.records_cc_path,
                      "First arm respondent CSV");
  tae_cmd->add_option("--records-meal", tae.records_meal_path,
                      "Second arm respondent CSV");
  tae_cmd->add_option("--margins", tae.margins_path, "Frame margins CSV");
  tae_cmd->add_option("--replicates", tae.replicates, "Bootstrap replicates");
  tae_cmd->add_option("--ci-level", tae.ci_level, "Interval level");

  SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sensitivity-sweep",
      "Mixing-grid sweep of measured vs predicted factors");
  add_common(sweep_cmd, sweep.common, "sweep");
  sweep_cmd->add_option("--config", sweep.config_path, "key=value defaults file");
  sweep_cmd->add_option("--sigma-grid", sweep.sigma_grid,
                        "Comma-separated attenuation values");
  sweep_cmd->add_option("--p-grid", sweep.p_grid, "Comma-separated frame shares");
  sweep_cmd->add_option("--seeds-per-cell", sweep.seeds_per_cell,
                        "Populations per grid cell");
  sweep_cmd->add_option("--surveys-per-cell", sweep.surveys_per_cell,
                        "Simulated surveys per grid cell");
  sweep_cmd->add_option("--n-hidden", sweep.n_hidden, "Hidden size per cell");
  sweep_cmd->add_option("--phi", sweep.phi, "Within-block edge probability");
  sweep_cmd->add_option("--sample-size", sweep.sample_size, "Respondents");
  sweep_cmd->add_option("--max-alters", sweep.max_alters, "Detail cap");
  sweep_cmd->add_option("--max-cells", sweep.max_cells, "Grid budget");

  ValidateOptions val;
  CLI::App* validate =
      app.add_subcommand("validate", "Schema and weighting sanity checks");
  validate->add_option("--records", val.records_path, "Respondent CSV")
      ->required();
  validate->add_option("--margins", val.margins_path, "Frame margins CSV")
      ->required();

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) {
      apply_config_defaults(simulate, sim.config_path);
      return run_simulate(sim);
    }
    if (estimate->parsed()) {
      apply_config_defaults(estimate, est.config_path);
      if (est.records_path.empty() || est.margins_path.empty()) {
        throw UsageError("estimate requires --records and --margins");
      }
      return run_estimate(est);
    }
    if (ic_cmd->parsed()) {
      apply_config_defaults(ic_cmd, ic.config_path);
      if (ic.records_path.empty() || ic.margins_path.empty()) {
        throw UsageError("ic requires --records and --margins");
      }
      return run_ic(ic);
    }
    if (tae_cmd->parsed()) {
      apply_config_defaults(tae_cmd, tae.config_path);
      if (tae.records_cc_path.empty() || tae.records_meal_path.empty() ||
          tae.margins_path.empty()) {
        throw UsageError("tae requires --records-cc, --records-meal, --margins");
      }
      return run_tae(tae);
    }
    if (sweep_cmd->parsed()) {
      apply_config_defaults(sweep_cmd, sweep.config_path);
      return run_sweep(sweep);
    }
    return run_validate(val);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  }
}
