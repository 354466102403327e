#ifndef LRP_EXPERIMENT_H_
#define LRP_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lrp/estimators.h"
#include "lrp/graph_model.h"

namespace lrp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitFlagged = 3;

enum class OutputFormat { kCsv, kJson };

struct ExperimentConfig {
  std::string command;
  ModelConfig model{.window_radius = 64};
  // Explicit i.i.d. law on Z_nn for `decay`; the sampled model otherwise.
  std::optional<ConductanceLaw> law;
  std::vector<Site> radii{4, 8, 16, 32};
  std::vector<int> scales{1, 2, 3, 4, 5};
  std::vector<double> n_grid{1e2, 1e3, 1e4, 1e5, 1e6};
  int quadrature_resolution = 32;
  std::uint64_t replicas = 100;
  std::uint64_t max_steps = 1000000;
  // Edge-list file for conductance, project and walk; empty means sample the
  // model instead.
  std::string input;
  std::vector<Site> sources;
  std::vector<Site> sinks;
  Site origin = 0;
  // "-" writes results to standard output.
  std::string output_path = "-";
  OutputFormat format = OutputFormat::kCsv;
  std::uint64_t master_seed = 1;
  // 0 selects the machine parallelism.
  int workers = 0;

  // Throws DomainError.
  void Validate() const;
  // Every field except workers and output_path, in a fixed textual form.
  std::string Canonical() const;
  // 16 hex digits of FNV-1a over Canonical().
  std::string Digest() const;
};

// Known commands, in the order they are listed by the CLI.
const std::vector<std::string>& ExperimentCommands();

// Parses a YAML document. Unknown keys are rejected. Throws DomainError.
ExperimentConfig ParseExperimentConfig(const std::string& yaml);
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Runs config.command, writes the result file and prints one summary line per
// estimator to `summary`. Returns kExitOk, kExitConfigError or kExitFlagged;
// errors are reported on `errors`.
int RunExperiment(const ExperimentConfig& config, std::ostream& summary,
                  std::ostream& errors);

// Command-line entry point: `lrp <command> [--config FILE] [flags]`.
int RunCli(int argc, char** argv);

}  // namespace lrp

#endif  // LRP_EXPERIMENT_H_
