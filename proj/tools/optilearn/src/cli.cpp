// Copyright 2026 The Optilearn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "optilearn/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "optilearn/campaign.hpp"
#include "optilearn/errors.hpp"
#include "optilearn/json_util.hpp"
#include "optilearn/rng.hpp"
#include "optilearn/service.hpp"
#include "optilearn/version.hpp"

namespace optilearn::cli {

namespace {

namespace ju = json_util;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string hash_text(const std::string& text) { return hex64(fnv1a64(text.data(), text.size())); }

std::string file_label(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return out;
}

std::string num(double v) { return ju::number_text(v); }

bool wants_csv(const RunConfig& c) { return c.output.format == "csv" || c.output.format == "both"; }
bool wants_json(const RunConfig& c) { return c.output.format == "json" || c.output.format == "both"; }

json estimate_json(const Estimate& e) {
  return {{"mean", ju::number(e.mean)}, {"stddev", ju::number(e.stddev)}, {"half_width", ju::number(e.half_width)},
          {"count", e.count}};
}

std::string estimate_cells(const Estimate& e) { return num(e.mean) + "," + num(e.half_width); }

json report_json(const EvaluationReport& r) {
  return {{"policy", r.policy},
          {"objective", std::string(to_string(r.mode))},
          {"budget", r.budget},
          {"replications", r.replications},
          {"repetitions", r.repetitions},
          {"score", estimate_json(r.objective())},
          {"final_value", estimate_json(r.final_value)},
          {"cumulative_reward", estimate_json(r.cumulative_reward)},
          {"opportunity_cost", estimate_json(r.opportunity_cost)},
          {"true_value", estimate_json(r.true_value)},
          {"probability", estimate_json(r.probability)}};
}

const char* kReportHeader =
    "policy,objective,budget,replications,score_mean,score_half_width,final_value_mean,final_value_half_width,"
    "cumulative_reward_mean,cumulative_reward_half_width,opportunity_cost_mean,opportunity_cost_half_width,"
    "true_value_mean,true_value_half_width,probability_mean,probability_half_width\n";

std::string report_row(const EvaluationReport& r) {
  std::ostringstream os;
  os << r.policy << "," << to_string(r.mode) << "," << r.budget << "," << r.replications << ","
     << estimate_cells(r.objective()) << "," << estimate_cells(r.final_value) << ","
     << estimate_cells(r.cumulative_reward) << "," << estimate_cells(r.opportunity_cost) << ","
     << estimate_cells(r.true_value) << "," << estimate_cells(r.probability) << "\n";
  return os.str();
}

std::string traces_csv(const EvaluationReport& r) {
  std::ostringstream os;
  os << "replication,n,alternative,outcome,theta,sigma\n";
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    for (const auto& s : r.traces[i].steps) {
      os << i << "," << s.n << "," << s.alternative << "," << num(s.outcome) << "," << num(s.theta) << ","
         << num(s.sigma) << "\n";
    }
  }
  return os.str();
}

json manifest(const RunConfig& config, const std::string& command, const OutputFiles& files) {
  json doc;
  doc["tool"] = "optilearn";
  doc["command"] = command;
  doc["version"] = kVersion;
  doc["config_hash"] = config_hash(config);
  doc["seed"] = config.seed;
  doc["replications"] = config.replications;
  doc["libraries"] = {
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                            "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  json hashes = json::object();
  for (const auto& [name, content] : files) hashes[name] = hash_text(content);
  doc["files"] = hashes;
  return doc;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  int parallel = 1;
};

RunConfig load_config(const CommonFlags& f) {
  RunConfig c = parse_run_config(read_text(f.config), f.seed);
  if (!f.out.empty()) c.output.dir = f.out;
  if (!f.format.empty()) {
    if (f.format != "csv" && f.format != "json" && f.format != "both") {
      throw ConfigError("--format: expected csv, json or both");
    }
    c.output.format = f.format;
  }
  return c;
}

int effective_parallel(int p) {
  if (p > 0) return p;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_serve(const std::string& config_path, const std::string& host, int port, const std::string& data_dir,
              std::ostream& out) {
  ServiceOptions options;
  if (!config_path.empty()) options = service_options_from_json(json::parse(read_text(config_path)));
  if (const char* env = std::getenv("OPTILEARN_DATA_DIR"); env != nullptr && config_path.empty()) options.data_dir = env;
  if (!data_dir.empty()) options.data_dir = data_dir;
  if (!host.empty()) options.host = host;
  if (port >= 0) options.port = port;
  options.log = &out;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  AdvisorService service(options);
  service.bind();
  out << "optilearn " << kVersion << " serving " << options.data_dir.string() << " on port " << service.port()
      << std::endl;
  std::atomic<bool> done{false};
  std::thread waiter([&] {
    const timespec tick{0, 200000000};
    while (!done.load()) {
      if (sigtimedwait(&signals, nullptr, &tick) > 0) {
        service.stop();
        return;
      }
    }
  });
  service.run();
  done.store(true);
  waiter.join();
  return kExitOk;
}

int cmd_advise(const std::string& path, const std::string& format, const std::string& out_dir, std::ostream& out,
               std::ostream& err) {
  if (format != "text" && format != "json" && format != "both") throw ConfigError("--format: expected text, json or both");
  std::string text;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read campaign file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    text = os.str();
  }
  bool dropped = false;
  std::optional<Campaign> campaign;
  try {
    campaign = Campaign::from_document(text, &dropped);
  } catch (const Error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (dropped) err << "warning: ignored a torn final line in " << path << "\n";
  const Recommendation r = recommend(*campaign);
  const std::string json_text = to_json(r).dump(2) + "\n";
  if (format != "json") out << to_text(r);
  if (format != "text") out << json_text;
  if (!out_dir.empty()) write_outputs(out_dir, {{"recommendation.json", json_text}});
  return kExitOk;
}

}  // namespace

std::string config_hash(const RunConfig& config) { return hash_text(to_json(config).dump()); }

OutputFiles bench_outputs(const RunConfig& config, int parallel) {
  const Problem problem = build_problem(config.problem);
  const EvaluationOptions options = config.evaluation_options(parallel);
  const Comparison cmp = compare_policies(config.policies, problem, options, config.objective);

  OutputFiles files;
  json doc;
  doc["config_hash"] = config_hash(config);
  doc["seed"] = config.seed;
  doc["problem"] = config.problem;
  doc["objective"] = std::string(to_string(config.objective));
  doc["budget"] = config.budget;
  doc["replications"] = config.replications;
  doc["confidence"] = config.confidence;
  doc["policies"] = json::array();
  std::string table = kReportHeader;
  for (const auto& r : cmp.reports) {
    doc["policies"].push_back(report_json(r));
    table += report_row(r);
  }
  doc["pairwise"] = json::array();
  std::string pairs = "first,second,metric,mean_difference,stddev,half_width,standard_error\n";
  for (const auto& d : cmp.differences) {
    const double se = d.difference.count > 0 ? d.difference.stddev / std::sqrt(static_cast<double>(d.difference.count)) : 0.0;
    doc["pairwise"].push_back({{"first", d.first},
                               {"second", d.second},
                               {"metric", d.metric},
                               {"difference", estimate_json(d.difference)},
                               {"standard_error", ju::number(se)}});
    pairs += d.first + "," + d.second + "," + d.metric + "," + num(d.difference.mean) + "," + num(d.difference.stddev) +
             "," + num(d.difference.half_width) + "," + num(se) + "\n";
  }

  if (config.tuning) {
    const TuneResult t = tune_policy(config.tuning->policy, config.tuning->grid, problem, options, config.objective);
    std::string csv;
    for (const auto& [name, values] : config.tuning->grid.axes) csv += name + ",";
    csv += "policy,score_mean,score_half_width\n";
    json rows = json::array();
    for (const auto& p : t.table) {
      for (const auto& [name, v] : p.values) csv += num(v) + ",";
      csv += p.report.policy + "," + estimate_cells(p.report.objective()) + "\n";
      rows.push_back({{"values", p.values}, {"policy", p.report.policy}, {"score", estimate_json(p.report.objective())}});
    }
    doc["tuning"] = {{"best", t.best}, {"best_policy", to_json(t.best_policy)}, {"table", rows}};
    if (wants_csv(config)) files["tuning.csv"] = csv;
  }

  if (wants_csv(config)) {
    files["comparison.csv"] = table;
    files["pairwise.csv"] = pairs;
  }
  if (wants_json(config)) files["comparison.json"] = doc.dump(2) + "\n";
  if (config.output.traces > 0) {
    for (const auto& r : cmp.reports) files["traces_" + file_label(r.policy) + ".csv"] = traces_csv(r);
  }
  files["manifest.json"] = manifest(config, "bench", files).dump(2) + "\n";
  return files;
}

OutputFiles risk_outputs(const RunConfig& config, int parallel) {
  if (!config.threshold) throw ConfigError("threshold: cmd risk needs a threshold", "threshold");
  const Problem problem = build_problem(config.problem);
  const std::vector<int> budgets = config.budgets.empty() ? std::vector<int>{config.budget} : config.budgets;

  OutputFiles files;
  json doc;
  doc["config_hash"] = config_hash(config);
  doc["seed"] = config.seed;
  doc["threshold"] = ju::number(*config.threshold);
  doc["replications"] = config.replications;
  doc["rows"] = json::array();
  std::string csv = "policy,budget,threshold,replications,probability,probability_half_width,probability_stddev,"
                    "final_value_mean,final_value_half_width\n";
  for (const auto& policy : config.policies) {
    for (int budget : budgets) {
      EvaluationOptions options = config.evaluation_options(parallel);
      options.budget = budget;
      options.keep_traces = 0;
      const RiskReport risk = risk_probability(policy, problem, options, config.histogram_bins);
      const auto& r = risk.report;
      csv += r.policy + "," + std::to_string(budget) + "," + num(*config.threshold) + "," +
             std::to_string(r.replications) + "," + num(r.probability.mean) + "," + num(r.probability.half_width) + "," +
             num(r.probability.stddev) + "," + estimate_cells(r.final_value) + "\n";
      json bins = json::array();
      std::string hist = "bin_left,bin_right,count\n";
      for (std::size_t b = 0; b < risk.histogram.counts.size(); ++b) {
        hist += num(risk.histogram.edges[b]) + "," + num(risk.histogram.edges[b + 1]) + "," +
                std::to_string(risk.histogram.counts[b]) + "\n";
        bins.push_back({{"bin_left", ju::number(risk.histogram.edges[b])},
                        {"bin_right", ju::number(risk.histogram.edges[b + 1])},
                        {"count", risk.histogram.counts[b]}});
      }
      files["histogram_" + file_label(r.policy) + "_N" + std::to_string(budget) + ".csv"] = hist;
      doc["rows"].push_back({{"policy", r.policy},
                             {"budget", budget},
                             {"probability", estimate_json(r.probability)},
                             {"final_value", estimate_json(r.final_value)},
                             {"histogram", bins}});
    }
  }
  if (wants_csv(config)) files["risk.csv"] = csv;
  if (wants_json(config)) files["risk.json"] = doc.dump(2) + "\n";
  files["manifest.json"] = manifest(config, "risk", files).dump(2) + "\n";
  return files;
}

void write_outputs(const std::string& dir, const OutputFiles& files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"optilearn: optimal learning for sequential experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonFlags bench_flags;
  CommonFlags risk_flags;
  auto add_common = [](CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "Run configuration (JSON)")->required();
    cmd->add_option("--seed", f.seed, "Master seed (overrides the configuration)");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--format", f.format, "csv, json or both");
    cmd->add_option("--parallel", f.parallel, "Worker threads (0 = all cores)");
  };
  CLI::App* bench = app.add_subcommand("bench", "Compare policies on a benchmark problem");
  add_common(bench, bench_flags);
  CLI::App* risk = app.add_subcommand("risk", "Probability of reaching the threshold within the budget");
  add_common(risk, risk_flags);

  std::string campaign_path;
  std::string advise_format = "text";
  std::string advise_out;
  CLI::App* advise = app.add_subcommand("advise", "Recommend the next experiment for a campaign file");
  advise->add_option("campaign", campaign_path, "Campaign JSON-lines file")->required();
  advise->add_option("--format", advise_format, "text, json or both");
  advise->add_option("--out", advise_out, "Also write recommendation.json here");

  std::string serve_config;
  std::string serve_host;
  std::string serve_data;
  int serve_port = -1;
  CLI::App* serve = app.add_subcommand("serve", "Run the advisor HTTP service");
  serve->add_option("--config", serve_config, "Service configuration (JSON)");
  serve->add_option("--host", serve_host, "Listen address");
  serve->add_option("--port", serve_port, "Listen port (0 = ephemeral)");
  serve->add_option("--data-dir", serve_data, "Campaign directory (default $OPTILEARN_DATA_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (bench->parsed()) {
      const RunConfig c = load_config(bench_flags);
      const OutputFiles files = bench_outputs(c, effective_parallel(bench_flags.parallel));
      write_outputs(c.output.dir, files);
      out << "wrote " << files.size() << " files to " << c.output.dir << "\n";
      return kExitOk;
    }
    if (risk->parsed()) {
      const RunConfig c = load_config(risk_flags);
      const OutputFiles files = risk_outputs(c, effective_parallel(risk_flags.parallel));
      write_outputs(c.output.dir, files);
      out << "wrote " << files.size() << " files to " << c.output.dir << "\n";
      return kExitOk;
    }
    if (advise->parsed()) return cmd_advise(campaign_path, advise_format, advise_out, out, err);
    if (serve->parsed()) return cmd_serve(serve_config, serve_host, serve_port, serve_data, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::parse_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace optilearn::cli
