#include "ricsec/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ricsec/eval.hpp"
#include "ricsec/scenario.hpp"

namespace ricsec {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

struct Flags {
  std::string scenario = "paper_default";
  std::string detector;
  int confirmations = 0;
  std::int64_t threshold = 0;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
  VirtualMs duration = 0;
  std::string out;
  std::string endpoint;
  std::string model;
  bool debug_prompts = false;
  bool wall_clock = false;
  // gen-dataset / eval
  std::size_t n = 0;
  std::string dataset;
  std::size_t in_flight = 1;
  double max_error_rate = 0.5;
  // replay
  std::string trace;
  std::string replay_scenario;
};

void add_scenario_flags(CLI::App* cmd, Flags& f, Overrides& o) {
  cmd->add_option("--scenario", f.scenario, "scenario file or 'paper_default'");
  cmd->add_option_function<std::string>(
      "--detector", [&o](const std::string& v) { o.detector = v; }, "oracle|static|llm|mock");
  cmd->add_option_function<int>(
      "--confirmations", [&o](int v) { o.confirmations = v; }, "static threshold K");
  cmd->add_option_function<std::int64_t>(
      "--threshold", [&o](std::int64_t v) { o.threshold_pkts = v; }, "static threshold packets");
  cmd->add_option_function<double>(
      "--accuracy", [&o](double v) { o.accuracy = v; }, "mock LLM accuracy");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&o](std::uint64_t v) { o.seed = v; }, "scenario seed");
  cmd->add_option_function<VirtualMs>(
      "--duration", [&o](VirtualMs v) { o.duration_ms = v; }, "virtual duration in ms");
  cmd->add_option_function<std::string>(
      "--out", [&o](const std::string& v) { o.output_dir = v; }, "output directory");
  cmd->add_option_function<std::string>(
      "--endpoint", [&o](const std::string& v) { o.endpoint = v; }, "chat-completions URL");
  cmd->add_option_function<std::string>(
      "--model", [&o](const std::string& v) { o.model = v; }, "model name");
  cmd->add_flag_function(
      "--debug-prompts", [&o](std::int64_t) { o.debug_prompts = true; },
      "log prompts and responses to stderr");
  cmd->add_flag_function(
      "--wall-clock", [&o](std::int64_t) { o.wall_clock = true; },
      "time live detector calls into the virtual timeline");
}

/// Loads, overrides and checks the scenario; attaches the API key for the live backend.
Scenario prepare_scenario(const Flags& f, const Overrides& o) {
  auto scenario = load_scenario(f.scenario);
  apply_overrides(scenario, o);
  if (scenario.detector.backend == DetectorKind::ExternalLlm) {
    const char* key = std::getenv(kApiKeyEnv);
    scenario.detector.external.api_key = key ? key : "";
    scenario.detector.external.debug = scenario.debug_prompts;
    scenario.effective_detector().validate();
  }
  return scenario;
}

int cmd_simulate(const Flags& f, const Overrides& o, std::ostream& out) {
  const auto scenario = prepare_scenario(f, o);
  const auto run = run_timeline_experiment(scenario);
  write_run_outputs(run, scenario.output_dir);
  const auto& tl = run.timeline;
  out << "scenario " << scenario.name << " detector " << to_string(scenario.detector.backend)
      << " -> " << scenario.output_dir << '\n';
  out << "reports stored " << run.reports.size() << ", dropped " << run.reports_dropped
      << ", alerts " << run.llm.alerts << '\n';
  if (tl.detection_time) {
    out << "attack onset " << *tl.attack_onset << " ms, detected on report " << *tl.detection_time
        << " ms, mitigated " << tl.mitigation_time.value_or(-1) << " ms, recovered "
        << tl.recovery_time.value_or(-1) << " ms\n";
  } else if (tl.attacker) {
    out << "attack onset " << *tl.attack_onset << " ms, not detected\n";
  } else {
    out << "no attacker in scenario\n";
  }
  return kExitOk;
}

int cmd_gen_dataset(const Flags& f, const Overrides& o, std::ostream& out) {
  const auto scenario = prepare_scenario(f, o);
  const auto n = f.n ? f.n : scenario.dataset.n;
  const auto samples =
      generate_dataset(n, scenario.seed, scenario.dataset, scenario.detector.base_limit_per_ue);
  const std::filesystem::path dir = scenario.output_dir;
  const PromptTemplate tmpl{.base_limit_per_ue = scenario.detector.base_limit_per_ue};
  write_file(dir / "dataset.jsonl", dataset_jsonl(samples, tmpl));
  write_file(dir / "samples.csv", samples_csv(samples));
  const auto malicious = std::count_if(samples.begin(), samples.end(), [](const auto& s) {
    return s.label == Label::Malicious;
  });
  out << "wrote " << n << " samples (" << malicious << " malicious) to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const Flags& f, const Overrides& o, std::ostream& out) {
  const auto scenario = prepare_scenario(f, o);
  std::vector<LabeledSample> samples;
  if (!f.dataset.empty()) {
    std::ifstream in(f.dataset, std::ios::binary);
    if (!in) throw ConfigError("cannot read dataset " + f.dataset);
    samples = read_samples_csv(in);
  } else {
    samples = generate_dataset(f.n ? f.n : scenario.dataset.n, scenario.seed, scenario.dataset,
                               scenario.detector.base_limit_per_ue);
  }
  EvalOptions options;
  options.max_in_flight = f.in_flight;
  options.max_error_rate = f.max_error_rate;
  const auto result = evaluate_detector(samples, scenario.effective_detector(), options);
  const std::filesystem::path dir = scenario.output_dir;
  write_file(dir / "accuracy.json", accuracy_json(result));
  out << result.detector << ": " << result.n_correct << "/" << result.n_samples
      << " correct (accuracy " << result.accuracy() << "), undecided " << result.n_undecided
      << ", errors " << result.n_detector_errors << (result.aborted ? " [aborted]" : "") << '\n';
  return result.aborted ? kExitRuntime : kExitOk;
}

int cmd_replay(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.trace.empty()) throw ConfigError("--trace is required");
  const std::filesystem::path trace_path = f.trace;
  auto scenario_path = f.replay_scenario;
  if (scenario_path.empty()) {
    scenario_path = (trace_path.parent_path() / "effective_scenario.yaml").string();
    if (!std::filesystem::exists(scenario_path)) {
      throw ConfigError("no --scenario given and no effective_scenario.yaml next to the trace");
    }
  }
  const auto scenario = load_scenario(scenario_path);
  const auto expected = read_file(trace_path);
  for (std::size_t start = 0; start < expected.size();) {
    const auto end = expected.find('\n', start);
    const auto line = std::string_view(expected).substr(start, end - start);
    if (!line.empty()) message_from_json_line(line);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  const auto actual = trace_jsonl(run_timeline_experiment(scenario).trace);
  if (actual == expected) {
    out << "replay ok: " << std::count(actual.begin(), actual.end(), '\n')
        << " messages byte-identical\n";
    return kExitOk;
  }
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(actual.size(), expected.size()); ++i) {
    if (actual[i] != expected[i]) break;
    if (actual[i] == '\n') ++line;
  }
  err << "replay mismatch: trace diverges at line " << line << '\n';
  return kExitRuntime;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"O-RAN RIC intrusion detection and secure slicing simulator", "ricsec"};
  app.require_subcommand(1);

  Flags flags;
  Overrides overrides;

  auto* simulate = app.add_subcommand("simulate", "run a scenario end to end");
  add_scenario_flags(simulate, flags, overrides);

  auto* gen = app.add_subcommand("gen-dataset", "write a labelled instruction corpus");
  add_scenario_flags(gen, flags, overrides);
  gen->add_option("--n", flags.n, "number of samples");

  auto* eval = app.add_subcommand("eval", "measure detector accuracy on a labelled dataset");
  add_scenario_flags(eval, flags, overrides);
  eval->add_option("--n", flags.n, "number of generated samples");
  eval->add_option("--dataset", flags.dataset, "samples.csv to evaluate instead of generating");
  eval->add_option("--in-flight", flags.in_flight, "concurrent requests for the llm backend")
      ->check(CLI::PositiveNumber);
  eval->add_option("--max-error-rate", flags.max_error_rate, "abort above this error rate");

  auto* replay = app.add_subcommand("replay", "re-run a scenario and byte-compare its bus trace");
  replay->add_option("--trace", flags.trace, "bus_trace.jsonl from a previous simulate")
      ->required();
  replay->add_option("--scenario", flags.replay_scenario,
                     "scenario file (default: effective_scenario.yaml next to the trace)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(flags, overrides, out);
    if (gen->parsed()) return cmd_gen_dataset(flags, overrides, out);
    if (eval->parsed()) return cmd_eval(flags, overrides, out);
    if (replay->parsed()) return cmd_replay(flags, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace ricsec
