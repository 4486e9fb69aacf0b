#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "regimecast/pipeline.hpp"

namespace fs = std::filesystem;
namespace pl = regimecast::pipeline;
using regimecast::Error;
using regimecast::ErrorKind;

namespace {

void write_files(const fs::path& dir, const pl::Artifacts& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) regimecast::fail(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
  for (const auto& [name, content] : files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) regimecast::fail(ErrorKind::io, "cannot write '" + (dir / name).string() + "'");
    out << content;
    std::cout << (dir / name).string() << '\n';
  }
}

int report_error(const fs::path& dir, const std::string& kind, const std::string& message) {
  const std::string text = pl::dump(regimecast::report::error_json(kind, message));
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream(dir / "error.json", std::ios::binary) << text;
  std::cerr << text;
  return 1;
}

template <class T>
void override_if(const CLI::Option* opt, const std::optional<T>& value, T& target) {
  if (opt->count() > 0 && value) target = *value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regime-shift statistics for daily EMS demand"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path, out_dir, method, model, penalty, spec_path;
  std::optional<std::string> incidents, hosp, calls, input, segmentation, synth, stage_name, pattern;
  std::optional<std::string> fit_start, fit_end;
  std::optional<std::uint64_t> seed;
  std::optional<int> window, qmax;
  std::optional<double> train_frac, alpha, penalty_value;
  std::optional<std::size_t> min_calls;
  std::vector<std::string> periods;
  bool no_changepoints = false, detect = false, welch = false;

  auto* o_config = app.add_option("--config", config_path, "JSON config file; flags override it");
  auto* o_out = app.add_option("--out", out_dir, "Output directory (default $REGIMECAST_OUT or ./out)");
  auto* o_seed = app.add_option("--seed", seed, "Seed for synthetic data");
  auto* o_window = app.add_option("--window", window, "Smoothing window in days")->check(CLI::PositiveNumber);
  auto* o_train = app.add_option("--train-frac", train_frac, "Chronological training fraction");
  auto* o_alpha = app.add_option("--alpha", alpha, "Family-wise significance level");
  auto* o_method = app.add_option("--method", method, "Changepoint solver")
                       ->check(CLI::IsMember({"binseg", "pelt", "oracle"}));
  auto* o_model = app.add_option("--model", model, "Cost model")->check(CLI::IsMember({"mean", "variance", "meanvar"}));
  auto* o_penalty = app.add_option("--penalty", penalty, "Penalty")
                        ->check(CLI::IsMember({"aic", "bic", "sic", "mbic", "manual"}));
  auto* o_pvalue = app.add_option("--penalty-value", penalty_value, "Manual penalty value");
  auto* o_qmax = app.add_option("--qmax", qmax, "Maximum number of changepoints (binseg, oracle)");
  auto* o_nocp = app.add_flag("--no-changepoints", no_changepoints, "Fit without regime dummies");
  auto* o_incidents = app.add_option("--incidents", incidents, "Incident CSV");
  auto* o_hosp = app.add_option("--hosp", hosp, "Hospitalization CSV (date,count)");
  auto* o_calls = app.add_option("--calls", calls, "Pandemic calls series CSV (date,value)");
  auto* o_input = app.add_option("--input", input, "Series CSV (date,value)");
  auto* o_seg = app.add_option("--segmentation", segmentation, "Segmentation JSON supplying the changepoints");
  auto* o_synth = app.add_option("--synth", synth, "Synthetic scenario ('paper') or synth spec JSON");
  app.add_option("--stage", stage_name, "Changepoint stage: ems or hosp")
                      ->check(CLI::IsMember({"ems", "hosp"}));
  auto* o_detect = app.add_flag("--detect", detect, "Detect changepoints on synthetic hospitalization");
  auto* o_welch = app.add_flag("--welch", welch, "Welch t test instead of pooled");
  auto* o_periods = app.add_option("--periods", periods, "Period boundary dates");
  auto* o_min_calls = app.add_option("--min-problem-calls", min_calls, "Calls a problem needs to enter the family");
  auto* o_fit_start = app.add_option("--fit-start", fit_start, "First day of the forecast window");
  auto* o_fit_end = app.add_option("--fit-end", fit_end, "Last day of the forecast window");
  auto* o_pattern = app.add_option("--timestamp-pattern", pattern, "strftime pattern for incident timestamps");
  auto* o_spec = app.add_option("--spec", spec_path, "Synth spec JSON (same as --synth PATH)");

  auto* c_changepoint = app.add_subcommand("changepoint", "Segment a daily series");
  auto* c_forecast = app.add_subcommand("forecast", "Regime-dummy regression of pandemic calls on hospitalization");
  auto* c_compare = app.add_subcommand("compare", "Period t tests and response-time ANOVA");
  auto* c_synth = app.add_subcommand("synth", "Generate synthetic data");
  auto* c_ingest = app.add_subcommand("ingest-check", "Parse inputs and report");

  pl::PipelineConfig cfg;
  if (const char* env = std::getenv("REGIMECAST_OUT"); env && *env) cfg.out = env;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(out_dir ? fs::path(*out_dir) : fs::path(cfg.out), "parameter", e.what());
  }
  fs::path out = out_dir ? *out_dir : cfg.out;
  try {
    if (o_config->count() > 0) cfg = pl::load_config(pl::read_file(*config_path), cfg);
    override_if(o_out, out_dir, cfg.out);
    out = cfg.out;
    if (o_seed->count() > 0) cfg.seed = seed;
    override_if(o_window, window, cfg.window);
    override_if(o_train, train_frac, cfg.train_fraction);
    override_if(o_alpha, alpha, cfg.alpha);
    if (o_nocp->count() > 0) cfg.no_changepoints = no_changepoints;
    if (o_detect->count() > 0) cfg.detect_on_synth = detect;
    if (o_welch->count() > 0) cfg.welch = welch;
    if (o_incidents->count() > 0) cfg.incidents_path = incidents;
    if (o_hosp->count() > 0) cfg.hosp_path = hosp;
    if (o_calls->count() > 0) cfg.calls_path = calls;
    if (o_input->count() > 0) cfg.series_path = input;
    if (o_seg->count() > 0) cfg.segmentation_path = segmentation;
    if (o_synth->count() > 0) cfg.synth = synth;
    if (o_spec->count() > 0) cfg.synth = spec_path;
    if (o_min_calls->count() > 0) cfg.min_problem_calls = *min_calls;
    if (o_pattern->count() > 0) cfg.timestamp_pattern = *pattern;
    if (o_fit_start->count() > 0) cfg.fit_start = regimecast::parse_date(*fit_start);
    if (o_fit_end->count() > 0) cfg.fit_end = regimecast::parse_date(*fit_end);
    if (o_periods->count() > 0) {
      cfg.period_boundaries.clear();
      for (const auto& p : periods) cfg.period_boundaries.push_back(regimecast::parse_date(p));
    }

    const std::string stage = stage_name ? *stage_name : "ems";
    auto& settings = (*c_changepoint && stage == "ems") ? cfg.ems : cfg.hosp;
    override_if(o_method, method, settings.method);
    if (o_model->count() > 0) settings.model = regimecast::changepoint::parse_cost_kind(*model);
    override_if(o_penalty, penalty, settings.penalty);
    if (o_pvalue->count() > 0) settings.penalty_value = penalty_value;
    override_if(o_qmax, qmax, settings.q_max);

    if (*c_changepoint) {
      write_files(out, pl::cmd_changepoint(cfg, stage).files);
    } else if (*c_forecast) {
      write_files(out, pl::cmd_forecast(cfg).files);
    } else if (*c_compare) {
      const auto run = pl::cmd_compare(cfg);
      write_files(out, run.files);
      if (run.error) return report_error(out, regimecast::to_string(run.error->kind()), run.error->what());
    } else if (*c_synth) {
      write_files(out, pl::cmd_synth(cfg).files);
    } else if (*c_ingest) {
      write_files(out, pl::cmd_ingest_check(cfg).files);
    }
  } catch (const Error& e) {
    return report_error(out, regimecast::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error(out, "internal", e.what());
  }
  return 0;
}
