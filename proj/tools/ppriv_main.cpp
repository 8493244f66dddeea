// Copyright 2026 The ppriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppriv/ppriv.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerificationFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumericalFailure = 3;

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    grid.push_back(std::stod(csv.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return grid;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write output file: " + path);
  out << contents;
}

int cmd_synthesize(const std::string& graph_path, const std::string& algorithm,
                   const std::string& output_path) {
  const ppriv::ProfileGraph graph = ppriv::load_graph(graph_path);
  ppriv::Mechanism mech;
  if (algorithm == "cluster") {
    mech = ppriv::one_bit_cluster(graph);
  } else if (algorithm == "smooth-onebit") {
    mech = ppriv::smooth_one_bit(graph);
  } else if (algorithm == "smooth-categorical") {
    mech = ppriv::smooth_categorical(graph);
  } else if (algorithm == "ldp") {
    mech = ppriv::as_profile_mechanism(
        ppriv::randomized_response(graph.dimension(), graph.epsilon), graph);
  } else {
    throw std::invalid_argument("unknown algorithm: " + algorithm);
  }
  ppriv::save_mechanism(mech, output_path);
  return kExitPass;
}

int cmd_sample(const std::string& graph_path, const std::string& mechanism_path,
               const std::string& profile, std::size_t value, std::uint64_t seed) {
  const ppriv::ProfileGraph graph = ppriv::load_graph(graph_path);
  const ppriv::Mechanism mech = ppriv::load_mechanism(mechanism_path, graph);
  if (mech.graph_hash != ppriv::graph_hash(graph))
    throw std::invalid_argument("mechanism was synthesized for a different graph (hash mismatch)");
  const ppriv::Release release = ppriv::apply(mech, profile, value, seed);
  std::cout << release.value << '\n';
  return kExitPass;
}

int cmd_verify(const std::string& graph_path, const std::string& mechanism_path,
               const std::string& format, const std::string& output_path) {
  const ppriv::ProfileGraph graph = ppriv::load_graph(graph_path);
  const ppriv::Mechanism mech = ppriv::load_mechanism(mechanism_path, graph);
  if (mech.graph_hash != ppriv::graph_hash(graph))
    std::cerr << "warning: mechanism graph_hash does not match this graph; auditing anyway\n";
  const ppriv::PrivacyReport report = ppriv::verify_exact(graph, mech);
  const std::string text =
      format == "csv" ? ppriv::report_to_csv(report) : ppriv::report_to_json(report).dump(2) + "\n";
  if (output_path.empty())
    std::cout << text;
  else
    write_file(output_path, text);
  return report.pass ? kExitPass : kExitVerificationFail;
}

int cmd_experiment(const std::string& name, const std::string& output_path,
                   const std::string& epsilons, const std::string& p_grid_csv) {
  const std::vector<double> grid =
      epsilons.empty() ? ppriv::default_epsilon_grid() : parse_grid(epsilons);
  if (name == "bernoulli-couplet") {
    const std::vector<double> p_grid =
        p_grid_csv.empty() ? ppriv::default_p_grid() : parse_grid(p_grid_csv);
    std::vector<ppriv::CoupletRow> rows;
    for (double eps : grid) {
      auto r = ppriv::run_bernoulli_couplet(eps, p_grid);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    write_file(output_path, ppriv::couplet_csv(rows));
  } else if (name == "bernoulli-chain-6" || name == "bernoulli-chain-21") {
    const int k = name == "bernoulli-chain-6" ? 6 : 21;
    write_file(output_path, ppriv::chain_csv(ppriv::run_bernoulli_chain(k, grid)));
  } else if (name == "categorical-chain") {
    write_file(output_path, ppriv::cost_csv(ppriv::run_categorical_chain(grid)));
  } else {
    throw std::invalid_argument("unknown experiment: " + name);
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profile-based privacy mechanism synthesis and verification"};
  app.require_subcommand(1);

  std::string graph_path, mechanism_path, output_path, algorithm, format = "json";
  std::string experiment_name, epsilons, p_grid;
  std::string profile;
  std::size_t value = 0;
  std::uint64_t seed = 0;

  CLI::App* synth = app.add_subcommand("synthesize", "Synthesize a mechanism for a graph file");
  synth->add_option("--graph", graph_path, "Profile graph file")->required();
  synth->add_option("--algorithm", algorithm, "cluster | smooth-onebit | smooth-categorical | ldp")
      ->required();
  synth->add_option("--output", output_path, "Mechanism file to write")->required();

  CLI::App* sample = app.add_subcommand("sample", "Release one observation through a mechanism");
  sample->add_option("--graph", graph_path, "Profile graph file")->required();
  sample->add_option("--mechanism", mechanism_path, "Mechanism file")->required();
  sample->add_option("--profile", profile, "Profile id the observation came from")->required();
  sample->add_option("--value", value, "Observed category index")->required();
  sample->add_option("--seed", seed, "RNG seed")->required();

  CLI::App* verify = app.add_subcommand("verify", "Audit a mechanism against a graph");
  verify->add_option("--graph", graph_path, "Profile graph file")->required();
  verify->add_option("--mechanism", mechanism_path, "Mechanism file")->required();
  verify->add_option("--format", format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  verify->add_option("--output", output_path, "Write report here instead of stdout");

  CLI::App* experiment = app.add_subcommand("experiment", "Reproduce a simulation as CSV");
  experiment
      ->add_option("--name", experiment_name,
                   "bernoulli-couplet | bernoulli-chain-6 | bernoulli-chain-21 | categorical-chain")
      ->required();
  experiment->add_option("--output", output_path, "CSV file to write")->required();
  experiment->add_option("--epsilons", epsilons, "Comma-separated ascending grid (default: 40 log-spaced in [0.05, 5])");
  experiment->add_option("--p-grid", p_grid, "Comma-separated Bernoulli parameters (couplet only)");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synthesize(graph_path, algorithm, output_path);
    if (sample->parsed()) return cmd_sample(graph_path, mechanism_path, profile, value, seed);
    if (verify->parsed()) return cmd_verify(graph_path, mechanism_path, format, output_path);
    if (experiment->parsed()) return cmd_experiment(experiment_name, output_path, epsilons, p_grid);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const ppriv::LpError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
