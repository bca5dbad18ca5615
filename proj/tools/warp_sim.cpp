/*
 * Copyright 2026 the warp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "warp/warp.hpp"

namespace {

int run_command(const std::string& scenario_path, std::uint64_t seed,
                std::optional<double> until_seconds, const std::string& metrics_path,
                const std::string& transcript_path, bool quiet) {
  warp::Scenario scenario;
  try {
    scenario = warp::Scenario::parse_file(scenario_path);
  } catch (const warp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }

  std::optional<warp::SimTime> until;
  if (until_seconds) {
    until = static_cast<warp::SimTime>(*until_seconds * static_cast<double>(warp::kSecond));
  }

  warp::ScenarioRunner runner(seed);
  warp::RunOutcome outcome = runner.run(scenario, until);

  if (!metrics_path.empty()) {
    std::ofstream out(metrics_path);
    out << warp::render_metrics_kv(outcome.metrics);
  }
  if (!transcript_path.empty()) {
    std::ofstream out(transcript_path);
    for (const auto& line : outcome.transcript) {
      out << line << "\n";
    }
  }
  if (!quiet) {
    for (const auto& [line, message] : outcome.failures) {
      std::cout << "FAIL line " << line << ": " << message << "\n";
    }
    std::cout << (outcome.ok ? "OK" : "FAILED") << " - " << outcome.failures.size()
              << " failed expectation(s), stale_serves = " << outcome.metrics.stale_serves
              << ", " << outcome.metrics.messages_total << " messages\n";
  }
  return outcome.ok ? 0 : 1;
}

int report_command(const std::string& metrics_path, const std::string& format) {
  std::ifstream in(metrics_path);
  if (!in) {
    std::cerr << "cannot open metrics file: " << metrics_path << "\n";
    return 2;
  }
  try {
    warp::Metrics metrics = warp::parse_metrics_kv(in);
    std::cout << (format == "kv" ? warp::render_metrics_kv(metrics)
                                 : warp::render_metrics_table(metrics));
  } catch (const warp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"warp_sim - scenario runner for the WARP protocol simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::uint64_t seed = 1;
  std::optional<double> until;
  std::string metrics_path;
  std::string transcript_path;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "replay a scenario file");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("--seed", seed, "rng seed (default 1)");
  run->add_option("--until", until, "stop at this virtual time (seconds)");
  run->add_option("--metrics", metrics_path, "write the metrics key-value file here");
  run->add_option("--transcript", transcript_path, "write the delivery transcript here");
  run->add_flag("--quiet", quiet, "suppress the summary line");

  std::string report_path;
  std::string format = "text";
  CLI::App* report = app.add_subcommand("report", "render a metrics file");
  report->add_option("metrics", report_path, "metrics key-value file")->required();
  report->add_option("--format", format, "text or kv")
      ->check(CLI::IsMember({"text", "kv"}));

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return run_command(scenario_path, seed, until, metrics_path, transcript_path, quiet);
  }
  return report_command(report_path, format);
}
