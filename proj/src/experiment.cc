#include "lrp/experiment.h"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lrp/edge_list.h"
#include "lrp/electric.h"
#include "lrp/errors.h"
#include "lrp/parallel.h"
#include "lrp/projection.h"

namespace lrp {
namespace {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// YAML reading

[[noreturn]] void Fail(const std::string& where, const std::string& what) {
  throw DomainError("config: " + where + ": " + what);
}

void CheckKeys(const YAML::Node& node, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!node.IsMap()) Fail(where, "expected a mapping");
  for (const auto& entry : node) {
    const auto key = entry.first.as<std::string>();
    if (!allowed.count(key)) Fail(where, "unknown key '" + key + "'");
  }
}

std::string Scalar(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) Fail(where, "expected a scalar");
  return node.Scalar();
}

double ParseReal(const YAML::Node& node, const std::string& where) {
  const std::string text = Scalar(node, where);
  if (text == "inf" || text == ".inf" || text == ".Inf" || text == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    Fail(where, "expected a number, got '" + text + "'");
  }
  return value;
}

template <typename Int>
Int ParseInt(const YAML::Node& node, const std::string& where) {
  const std::string text = Scalar(node, where);
  Int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    // Accept integral values written in floating-point notation (1e6).
    double real = 0.0;
    const auto [rend, rec] = std::from_chars(text.data(), text.data() + text.size(), real);
    if (rec != std::errc() || rend != text.data() + text.size() ||
        real != std::floor(real) ||
        real < static_cast<double>(std::numeric_limits<Int>::min()) ||
        real > static_cast<double>(std::numeric_limits<Int>::max())) {
      Fail(where, "expected an integer, got '" + text + "'");
    }
    value = static_cast<Int>(real);
  }
  return value;
}

bool ParseBool(const YAML::Node& node, const std::string& where) {
  const std::string text = Scalar(node, where);
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  Fail(where, "expected a boolean, got '" + text + "'");
}

template <typename T, typename ParseOne>
std::vector<T> ParseList(const YAML::Node& node, const std::string& where,
                         ParseOne parse_one) {
  if (!node.IsSequence()) Fail(where, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(parse_one(node[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

KernelSpec ParseKernel(const YAML::Node& node) {
  const std::string where = "model.kernel";
  CheckKeys(node, where, {"type", "value", "gamma", "table"});
  if (!node["type"]) Fail(where, "missing 'type'");
  const std::string type = Scalar(node["type"], where + ".type");
  auto require = [&](const char* key) {
    if (!node[key]) Fail(where, std::string("'") + type + "' needs '" + key + "'");
    return node[key];
  };
  if (type == "constant") {
    return KernelSpec::Constant(node["value"] ? ParseReal(node["value"], where + ".value") : 1.0);
  }
  if (type == "product") return KernelSpec::Product(ParseReal(require("gamma"), where + ".gamma"));
  if (type == "min") return KernelSpec::Min(ParseReal(require("gamma"), where + ".gamma"));
  if (type == "custom") {
    const auto rows = ParseList<std::vector<double>>(
        require("table"), where + ".table", [](const YAML::Node& row, const std::string& w) {
          return ParseList<double>(row, w, ParseReal);
        });
    return KernelSpec::Custom(rows);
  }
  Fail(where + ".type", "unknown kernel '" + type + "'");
}

ConnectionFunction ParseConnection(const YAML::Node& node) {
  const std::string where = "model.connection";
  CheckKeys(node, where, {"type", "p", "delta", "r0"});
  if (!node["type"]) Fail(where, "missing 'type'");
  const std::string type = Scalar(node["type"], where + ".type");
  auto real = [&](const char* key, double fallback) {
    return node[key] ? ParseReal(node[key], where + "." + key) : fallback;
  };
  if (type == "polynomial") return ConnectionFunction::Polynomial(real("p", 1.0), real("delta", 3.0));
  if (type == "truncated") return ConnectionFunction::Truncated(real("p", 1.0), real("delta", 3.0));
  if (type == "indicator") return ConnectionFunction::Indicator(real("r0", 1.0));
  Fail(where + ".type", "unknown connection function '" + type + "'");
}

ConductanceLaw ParseLaw(const YAML::Node& node) {
  CheckKeys(node, "law", {"type", "parameter"});
  if (!node["type"]) Fail("law", "missing 'type'");
  const std::string type = Scalar(node["type"], "law.type");
  const double parameter = node["parameter"] ? ParseReal(node["parameter"], "law.parameter") : 1.0;
  ConductanceLaw law;
  if (type == "unit") {
    law = ConductanceLaw::Unit();
  } else if (type == "constant") {
    law = ConductanceLaw::Constant(parameter);
  } else if (type == "exponential") {
    law = ConductanceLaw::Exponential(parameter);
  } else if (type == "pareto") {
    law = ConductanceLaw::Pareto(parameter);
  } else {
    Fail("law.type", "unknown law '" + type + "'");
  }
  law.Validate();
  return law;
}

OutputFormat ParseFormat(const std::string& text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw DomainError("unknown output format '" + text + "' (expected csv or json)");
}

const char* FormatName(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

template <typename T>
std::string JoinValues(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    if constexpr (std::is_floating_point_v<T>) {
      out += FormatReal(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Result records

// A finite double as a JSON number; inf and nan as strings.
Json Real(double value) {
  if (std::isfinite(value)) return value;
  return FormatReal(value);
}

struct Record {
  std::string quantity;
  std::string coordinate_name;  // empty when the record has no coordinate
  Json coordinate;
  Json point;
  Json standard_error;  // null when not applicable
  std::uint64_t replicas = 0;
  Json diagnostics = Json::object();
};

struct Outcome {
  std::string estimator;
  std::vector<Record> records;
  std::string summary;
  std::vector<std::string> flags;
};

std::string CsvCell(const Json& value) {
  if (value.is_null()) return "";
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number_integer()) return value.dump();
  if (value.is_number()) return FormatReal(value.get<double>());
  if (value.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i) out += '|';
      out += CsvCell(value[i]);
    }
    return out;
  }
  std::string out;
  for (const auto& [key, item] : value.items()) {
    if (!out.empty()) out += ';';
    out += key + "=" + CsvCell(item);
  }
  return out;
}

std::string CsvQuote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string RenderCsv(const Outcome& outcome, const ExperimentConfig& config,
                      const std::string& digest) {
  std::string out =
      "estimator,quantity,coordinate_name,coordinate,point,stderr,replicas,"
      "seed,config_digest,diagnostics\n";
  for (const Record& r : outcome.records) {
    const std::vector<std::string> cells = {
        outcome.estimator,
        r.quantity,
        r.coordinate_name,
        CsvCell(r.coordinate),
        CsvCell(r.point),
        CsvCell(r.standard_error),
        std::to_string(r.replicas),
        std::to_string(config.master_seed),
        digest,
        CsvCell(r.diagnostics)};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += CsvQuote(cells[i]);
    }
    out += '\n';
  }
  return out;
}

std::string RenderJson(const Outcome& outcome, const ExperimentConfig& config,
                       const std::string& digest) {
  std::string out;
  for (const Record& r : outcome.records) {
    Json line;
    line["estimator"] = outcome.estimator;
    line["config_digest"] = digest;
    line["seed"] = config.master_seed;
    line["quantity"] = r.quantity;
    if (r.coordinate_name.empty()) {
      line["coordinate"] = nullptr;
    } else {
      line["coordinate"] = Json{{r.coordinate_name, r.coordinate}};
    }
    line["point"] = r.point;
    line["stderr"] = r.standard_error;
    line["replicas"] = r.replicas;
    line["diagnostics"] = r.diagnostics;
    out += line.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

ModelConfig SeededModel(const ExperimentConfig& config) {
  ModelConfig model = config.model;
  model.seed = config.master_seed;
  return model;
}

Network LoadNetwork(const ExperimentConfig& config) {
  if (!config.input.empty()) return NetworkFromEdgeList(ReadEdgeList(config.input));
  return NetworkFromSample(SampleGraph(SeededModel(config)));
}

TerminalPair RequireTerminals(const ExperimentConfig& config) {
  if (config.sources.empty() || config.sinks.empty()) {
    throw DomainError(config.command + " needs both 'sources' and 'sinks'");
  }
  return {config.sources, config.sinks};
}

Outcome RunConductance(const ExperimentConfig& config) {
  Outcome out{"conductance", {}, "", {}};
  const Network net = LoadNetwork(config);
  std::ostringstream summary;
  summary << "conductance:";
  if (!config.sources.empty() || !config.sinks.empty()) {
    const TerminalPair terminals = RequireTerminals(config);
    const double c = EffectiveConductance(net, terminals);
    Record r{"effective_conductance", "", nullptr, Real(c), nullptr, 1, Json::object()};
    r.diagnostics["sources"] = JoinValues(terminals.sources);
    r.diagnostics["sinks"] = JoinValues(terminals.sinks);
    out.records.push_back(r);
    summary << " C_eff=" << FormatReal(c);
  } else {
    for (Site m : config.radii) {
      const double c = ConductanceToBoundary(net, config.origin, m);
      out.records.push_back({"boundary_conductance", "m", m, Real(c), nullptr, 1,
                             Json{{"origin", config.origin}}});
      summary << " m=" << m << ":" << FormatReal(c);
    }
  }
  out.summary = summary.str();
  return out;
}

Outcome RunDecay(const ExperimentConfig& config) {
  Outcome out{"decay", {}, "", {}};
  const int workers = config.workers;
  const DecayFit fit =
      config.law ? ConductanceDecay(*config.law, config.radii, config.replicas,
                                    config.master_seed, workers)
                 : ConductanceDecay(SeededModel(config), config.radii,
                                    config.replicas, config.master_seed, workers);
  for (std::size_t j = 0; j < fit.radii.size(); ++j) {
    out.records.push_back({"mean_conductance", "m", fit.radii[j], Real(fit.mean[j]),
                           Real(fit.standard_error[j]), fit.replicas, Json::object()});
  }
  Record slope{"slope", "", nullptr, Real(fit.slope), Real(fit.slope_stderr),
               fit.replicas, Json::object()};
  slope.diagnostics["slope_defined"] = fit.slope_defined;
  slope.diagnostics["source"] = config.law ? config.law->Describe() : config.model.Describe();
  out.records.push_back(slope);
  out.flags = fit.flags;
  std::ostringstream summary;
  summary << "decay: slope=" << FormatReal(fit.slope)
          << " stderr=" << FormatReal(fit.slope_stderr) << " radii="
          << fit.radii.front() << ".." << fit.radii.back()
          << " replicas=" << fit.replicas;
  out.summary = summary.str();
  return out;
}

Outcome RunDeltaEff(const ExperimentConfig& config) {
  Outcome out{"delta-eff", {}, "", {}};
  const DeltaEffEstimate est =
      EstimateDeltaEff(config.model.kernel, config.model.connection,
                       config.n_grid, config.quadrature_resolution);
  for (std::size_t i = 0; i < est.scales.size(); ++i) {
    out.records.push_back({"integral", "n", Real(est.scales[i]), Real(est.integrals[i]),
                           nullptr, 0,
                           Json{{"refinement_error", Real(est.refinement_errors[i])}}});
  }
  Record r{"delta_eff", "", nullptr, Real(est.estimate), Real(est.half_width), 0,
           Json::object()};
  r.diagnostics["divergent"] = est.divergent;
  r.diagnostics["quadrature_converged"] = est.quadrature_converged;
  out.records.push_back(r);
  if (!est.quadrature_converged) {
    out.flags.push_back("quadrature refinements differ by more than " +
                        FormatReal(kQuadratureTolerance));
  }
  if (est.divergent) out.flags.push_back("divergent: I(n) vanishes");
  std::ostringstream summary;
  summary << "delta-eff: estimate=" << FormatReal(est.estimate)
          << " half_width=" << FormatReal(est.half_width)
          << " converged=" << (est.quadrature_converged ? "yes" : "no")
          << " divergent=" << (est.divergent ? "yes" : "no");
  out.summary = summary.str();
  return out;
}

Outcome RunLongEdges(const ExperimentConfig& config) {
  Outcome out{"long-edges", {}, "", {}};
  const ModelConfig model = SeededModel(config);
  std::vector<LongEdgeEstimate> ladder;
  for (int k : config.scales) {
    ladder.push_back(LongEdgeProbability(model, k, config.replicas,
                                         DeriveSeed(config.master_seed, static_cast<std::uint64_t>(k)),
                                         config.workers));
    const LongEdgeEstimate& est = ladder.back();
    Record r{"probability", "k", k, Real(est.probability), Real(est.standard_error),
             est.replicas, Json::object()};
    if (est.exact) r.diagnostics["exact"] = Real(*est.exact);
    out.records.push_back(r);
  }
  const ScaleExponentFit fit = FitScaleExponent(ladder);
  Record r{"theta", "", nullptr, Real(fit.theta), Real(fit.standard_error),
           config.replicas, Json::object()};
  r.diagnostics["lower_95"] = Real(fit.lower_95());
  r.diagnostics["points"] = fit.points;
  out.records.push_back(r);
  bool all_zero = true;
  for (const auto& est : ladder) all_zero = all_zero && est.probability == 0.0;
  if (fit.points < 2 && !all_zero) {
    out.flags.push_back("theta undefined: fewer than two positive scale probabilities");
  }
  std::ostringstream summary;
  summary << "long-edges: theta=" << FormatReal(fit.theta)
          << " stderr=" << FormatReal(fit.standard_error)
          << " lower_95=" << FormatReal(fit.lower_95()) << " scales=" << ladder.size()
          << " replicas=" << config.replicas;
  out.summary = summary.str();
  return out;
}

Outcome RunEdgesAboveZero(const ExperimentConfig& config) {
  Outcome out{"edges-above-zero", {}, "", {}};
  const ModelConfig model = SeededModel(config);
  const CountEstimate mc =
      EdgesAboveZeroMc(model, config.replicas, config.master_seed, config.workers);
  out.records.push_back({"mean_count", "", nullptr, Real(mc.mean), Real(mc.standard_error),
                         mc.replicas, Json::object()});
  std::ostringstream summary;
  summary << "edges-above-zero: mean=" << FormatReal(mc.mean)
          << " stderr=" << FormatReal(mc.standard_error) << " replicas=" << mc.replicas;
  if (model.kernel.is_constant()) {
    const EdgesAboveZeroMoments exact = HomogeneousEdgesAboveZero(model);
    out.records.push_back({"analytic_mean", "", nullptr, Real(exact.mean), nullptr, 0,
                           Json{{"variance", Real(exact.variance)},
                                {"tail_bound", Real(exact.tail_bound)}}});
    summary << " analytic=" << FormatReal(exact.mean);
  }
  out.summary = summary.str();
  return out;
}

Outcome RunWalk(const ExperimentConfig& config) {
  Outcome out{"walk", {}, "", {}};
  const Network net = LoadNetwork(config);
  const TerminalPair terminals = RequireTerminals(config);
  EscapeEstimate est;
  try {
    est = EscapeProbabilityMc(net, terminals, config.replicas, config.max_steps,
                              config.master_seed, config.workers);
  } catch (const UndefinedWalkError& e) {
    out.flags.push_back(std::string("walk undefined, cluster declared transient: ") + e.what());
    out.summary = "walk: undefined (" + std::string(e.what()) + ")";
    out.records.push_back({"escape_probability", "", nullptr, nullptr, nullptr,
                           config.replicas, Json{{"error", e.what()}}});
    return out;
  }
  const double solver = EffectiveConductance(net, terminals);
  out.records.push_back({"escape_probability", "", nullptr, Real(est.probability),
                         Real(est.standard_error), config.replicas,
                         Json{{"escaped", est.escaped},
                              {"returned", est.returned},
                              {"censored", est.censored},
                              {"censored_rate", Real(est.censored_rate)}}});
  out.records.push_back({"conductance", "", nullptr, Real(est.conductance),
                         Real(est.conductance_stderr), config.replicas,
                         Json{{"source_conductance", Real(est.source_conductance)},
                              {"solver", Real(solver)}}});
  if (est.censored > 0) {
    out.flags.push_back(std::to_string(est.censored) + " walks censored at max_steps=" +
                        std::to_string(config.max_steps));
  }
  std::ostringstream summary;
  summary << "walk: escape=" << FormatReal(est.probability)
          << " stderr=" << FormatReal(est.standard_error)
          << " conductance=" << FormatReal(est.conductance)
          << " solver=" << FormatReal(solver) << " censored=" << est.censored;
  out.summary = summary.str();
  return out;
}

Outcome RunVerdict(const ExperimentConfig& config) {
  Outcome out{"verdict", {}, "", {}};
  VerdictBudget budget;
  budget.n_grid = config.n_grid;
  budget.quadrature_resolution = config.quadrature_resolution;
  budget.max_scale = 0;
  for (int k : config.scales) budget.max_scale = std::max(budget.max_scale, k);
  budget.long_edge_replicas = config.replicas;
  budget.decay_radii = config.radii;
  budget.decay_replicas = config.replicas;
  budget.seed = config.master_seed;
  budget.workers = config.workers;
  const VerdictReport report = RecurrenceVerdict(config.model, budget);

  out.records.push_back({"delta_eff", "", nullptr, Real(report.delta_eff.estimate),
                         Real(report.delta_eff.half_width), 0,
                         Json{{"regime", report.regime},
                              {"divergent", report.delta_eff.divergent}}});
  for (const auto& est : report.long_edges) {
    out.records.push_back({"long_edge_probability", "k", est.scale, Real(est.probability),
                           Real(est.standard_error), est.replicas, Json::object()});
  }
  out.records.push_back({"theta", "", nullptr, Real(report.long_edge_fit.theta),
                         Real(report.long_edge_fit.standard_error), budget.long_edge_replicas,
                         Json{{"summable", report.long_edges_summable}}});
  out.records.push_back({"decay_slope", "", nullptr, Real(report.decay.slope),
                         Real(report.decay.slope_stderr), report.decay.replicas,
                         Json{{"consistent", report.decay_consistent}}});
  Record verdict{"verdict", "", nullptr, VerdictName(report.verdict), nullptr, 0,
                 Json::object()};
  verdict.diagnostics["flags"] = report.flags;
  out.records.push_back(verdict);

  if (report.verdict == Verdict::kInconclusive) {
    out.flags.push_back("verdict inconclusive");
  }
  if (!report.delta_eff.quadrature_converged) {
    out.flags.push_back("delta_eff quadrature did not converge");
  }
  std::ostringstream summary;
  summary << "verdict: " << VerdictName(report.verdict)
          << " delta_eff=" << FormatReal(report.delta_eff.estimate) << " regime="
          << report.regime << " theta=" << FormatReal(report.long_edge_fit.theta)
          << " decay_slope=" << FormatReal(report.decay.slope)
          << " (numerical consistency only, not a proof)";
  out.summary = summary.str();
  return out;
}

// Opens the result destination before any work so that an unwritable path
// fails fast.
class ResultSink {
 public:
  explicit ResultSink(const std::string& path) : to_stdout_(path == "-") {
    if (!to_stdout_) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw DomainError("cannot open output file '" + path + "'");
    }
  }

  void Write(const std::string& text) {
    std::ostream& out = to_stdout_ ? std::cout : file_;
    out << text;
    out.flush();
    if (!out) throw DomainError("failed to write results");
  }

 private:
  bool to_stdout_;
  std::ofstream file_;
};

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

const std::vector<std::string>& ExperimentCommands() {
  static const std::vector<std::string> commands = {
      "sample", "conductance", "project", "decay", "delta-eff",
      "long-edges", "edges-above-zero", "walk", "verdict"};
  return commands;
}

void ExperimentConfig::Validate() const {
  const auto& commands = ExperimentCommands();
  if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
    throw DomainError("unknown command '" + command + "'");
  }
  model.Validate();
  if (law) law->Validate();
  if (replicas < 1) throw DomainError("replicas must be positive");
  if (max_steps < 1) throw DomainError("max_steps must be positive");
  if (quadrature_resolution < 1) throw DomainError("quadrature_resolution must be positive");
  if (workers < 0) throw DomainError("workers must be non-negative");
  if (radii.empty()) throw DomainError("radii must be nonempty");
  for (Site m : radii) {
    if (m < 1) throw DomainError("radii must be positive");
  }
  if (scales.empty()) throw DomainError("scales must be nonempty");
  for (int k : scales) {
    if (k < 1) throw DomainError("scales must be positive");
  }
  for (double n : n_grid) {
    if (!(n > 0.0)) throw DomainError("n_grid entries must be positive");
  }
  if (output_path.empty()) throw DomainError("output path is empty");
}

std::string ExperimentConfig::Canonical() const {
  std::ostringstream out;
  out << "command=" << command << "\n"
      << "seed=" << master_seed << "\n"
      << "replicas=" << replicas << "\n"
      << "model.window_radius=" << model.window_radius << "\n"
      << "model.kernel=" << model.kernel.Describe() << "\n"
      << "model.connection=" << model.connection.Describe() << "\n"
      << "model.backbone=" << (model.backbone ? "true" : "false") << "\n"
      << "model.long_edge_conductance=" << FormatReal(model.long_edge_conductance) << "\n"
      << "law=" << (law ? law->Describe() : "none") << "\n"
      << "radii=" << JoinValues(radii) << "\n"
      << "scales=" << JoinValues(scales) << "\n"
      << "n_grid=" << JoinValues(n_grid) << "\n"
      << "quadrature_resolution=" << quadrature_resolution << "\n"
      << "max_steps=" << max_steps << "\n"
      << "input=" << input << "\n"
      << "sources=" << JoinValues(sources) << "\n"
      << "sinks=" << JoinValues(sinks) << "\n"
      << "origin=" << origin << "\n"
      << "format=" << FormatName(format) << "\n";
  return out.str();
}

std::string ExperimentConfig::Digest() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : Canonical()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

ExperimentConfig ParseExperimentConfig(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  ExperimentConfig config;
  if (root.IsNull()) return config;
  CheckKeys(root, "top level",
            {"command", "seed", "workers", "replicas", "model", "law", "radii", "scales",
             "n_grid", "quadrature_resolution", "max_steps", "input", "sources", "sinks",
             "origin", "output"});
  if (root["command"]) config.command = Scalar(root["command"], "command");
  if (root["seed"]) config.master_seed = ParseInt<std::uint64_t>(root["seed"], "seed");
  if (root["workers"]) config.workers = ParseInt<int>(root["workers"], "workers");
  if (root["replicas"]) config.replicas = ParseInt<std::uint64_t>(root["replicas"], "replicas");
  if (const YAML::Node model = root["model"]) {
    CheckKeys(model, "model",
              {"window_radius", "backbone", "long_edge_conductance", "kernel", "connection"});
    if (model["window_radius"]) {
      config.model.window_radius = ParseInt<Site>(model["window_radius"], "model.window_radius");
    }
    if (model["backbone"]) config.model.backbone = ParseBool(model["backbone"], "model.backbone");
    if (model["long_edge_conductance"]) {
      config.model.long_edge_conductance =
          ParseReal(model["long_edge_conductance"], "model.long_edge_conductance");
    }
    if (model["kernel"]) config.model.kernel = ParseKernel(model["kernel"]);
    if (model["connection"]) config.model.connection = ParseConnection(model["connection"]);
  }
  if (root["law"]) config.law = ParseLaw(root["law"]);
  if (root["radii"]) config.radii = ParseList<Site>(root["radii"], "radii", ParseInt<Site>);
  if (root["scales"]) config.scales = ParseList<int>(root["scales"], "scales", ParseInt<int>);
  if (root["n_grid"]) config.n_grid = ParseList<double>(root["n_grid"], "n_grid", ParseReal);
  if (root["quadrature_resolution"]) {
    config.quadrature_resolution =
        ParseInt<int>(root["quadrature_resolution"], "quadrature_resolution");
  }
  if (root["max_steps"]) config.max_steps = ParseInt<std::uint64_t>(root["max_steps"], "max_steps");
  if (root["input"]) config.input = Scalar(root["input"], "input");
  if (root["sources"]) config.sources = ParseList<Site>(root["sources"], "sources", ParseInt<Site>);
  if (root["sinks"]) config.sinks = ParseList<Site>(root["sinks"], "sinks", ParseInt<Site>);
  if (root["origin"]) config.origin = ParseInt<Site>(root["origin"], "origin");
  if (const YAML::Node output = root["output"]) {
    CheckKeys(output, "output", {"path", "format"});
    if (output["path"]) config.output_path = Scalar(output["path"], "output.path");
    if (output["format"]) config.format = ParseFormat(Scalar(output["format"], "output.format"));
  }
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseExperimentConfig(text.str());
}

int RunExperiment(const ExperimentConfig& input_config, std::ostream& summary,
                  std::ostream& errors) {
  ExperimentConfig config = input_config;
  try {
    config.Validate();
    if (config.workers == 0) config.workers = DefaultWorkers();
    const std::string digest = config.Digest();
    ResultSink sink(config.output_path);

    if (config.command == "sample") {
      const GraphSample sample = SampleGraph(SeededModel(config));
      std::ostringstream text;
      WriteGraphSample(sample, text,
                       {"config_digest=" + digest, "model " + sample.config.Describe()});
      sink.Write(text.str());
      std::size_t long_edges = 0;
      for (const auto& e : sample.edges) long_edges += e.v - e.u > 1 ? 1 : 0;
      summary << "sample: n=" << sample.window_radius() << " edges=" << sample.edges.size()
              << " long_edges=" << long_edges << " seed=" << config.master_seed
              << " digest=" << digest << "\n";
      return kExitOk;
    }
    if (config.command == "project") {
      if (config.input.empty()) throw DomainError("project needs an 'input' edge list");
      const LineNetwork line =
          ProjectToZnn(SpatialNetworkFromEdgeList(ReadEdgeList(config.input)));
      std::vector<WeightedEdge> edges;
      for (Site z = line.first; z < line.last(); ++z) {
        edges.push_back({z, z + 1, line.EdgeConductance(z)});
      }
      std::ostringstream text;
      WriteEdges(text, {"config_digest=" + digest, "projection onto Z_nn"}, edges);
      sink.Write(text.str());
      summary << "project: sites=" << line.first << ".." << line.last()
              << " edges=" << edges.size();
      if (!edges.empty()) {
        summary << " C_eff(" << line.first << "," << line.last() << ")="
                << FormatReal(SeriesChainConductance(line.conductance));
      }
      summary << " digest=" << digest << "\n";
      return kExitOk;
    }

    Outcome outcome;
    if (config.command == "conductance") {
      outcome = RunConductance(config);
    } else if (config.command == "decay") {
      outcome = RunDecay(config);
    } else if (config.command == "delta-eff") {
      outcome = RunDeltaEff(config);
    } else if (config.command == "long-edges") {
      outcome = RunLongEdges(config);
    } else if (config.command == "edges-above-zero") {
      outcome = RunEdgesAboveZero(config);
    } else if (config.command == "walk") {
      outcome = RunWalk(config);
    } else {
      outcome = RunVerdict(config);
    }
    sink.Write(config.format == OutputFormat::kCsv ? RenderCsv(outcome, config, digest)
                                                   : RenderJson(outcome, config, digest));
    summary << outcome.summary << " digest=" << digest << "\n";
    for (const auto& flag : outcome.flags) errors << "flagged: " << flag << "\n";
    return outcome.flags.empty() ? kExitOk : kExitFlagged;
  } catch (const DomainError& e) {
    errors << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int RunCli(int argc, char** argv) {
  CLI::App app{"Long-range percolation and random-network experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed, replicas;
  std::optional<int> workers;
  std::optional<std::string> out, format, input;
  app.add_option("--config", config_path, "YAML experiment file");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--replicas", replicas, "Monte Carlo replicas");
  app.add_option("--out", out, "Result file ('-' for standard output)");
  app.add_option("--format", format, "Result format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", workers, "Worker threads (0: machine parallelism)");
  app.add_option("--input", input, "Edge-list input file");

  const std::vector<std::pair<std::string, std::string>> descriptions = {
      {"sample", "Sample a graph and write its edge list"},
      {"conductance", "Effective conductance between sets or to the boundary"},
      {"project", "Project a spatial network onto the nearest-neighbour line"},
      {"decay", "Mean boundary conductance against radius"},
      {"delta-eff", "Effective decay exponent of the connection rule"},
      {"long-edges", "Long-edge probabilities at dyadic scales"},
      {"edges-above-zero", "Number of edges crossing 0+"},
      {"walk", "Escape probability of the conductance-biased walk"},
      {"verdict", "Combined recurrence diagnostics"}};
  for (const auto& [name, description] : descriptions) {
    app.add_subcommand(name, description)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  ExperimentConfig config;
  try {
    if (!config_path.empty()) config = LoadExperimentConfig(config_path);
    config.command = app.get_subcommands().front()->get_name();
    if (seed) config.master_seed = *seed;
    if (replicas) config.replicas = *replicas;
    if (workers) config.workers = *workers;
    if (out) config.output_path = *out;
    if (format) config.format = ParseFormat(*format);
    if (input) config.input = *input;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  std::ostream& summary = config.output_path == "-" ? std::cerr : std::cout;
  return RunExperiment(config, summary, std::cerr);
}

}  // namespace lrp
