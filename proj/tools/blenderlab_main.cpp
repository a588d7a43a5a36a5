#include "blenderlab/pipeline.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

using namespace blenderlab;

namespace {

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParamError("config is not valid JSON: " + std::string(e.what()));
  }
  return PipelineConfig::from_json(j);
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParamError("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certificates for symplectic one-step blenders and tangencies"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> net;
  std::optional<int> max_word_len;
  std::optional<std::size_t> budget;
  bool no_timestamp = false;
  auto* certify_cmd = app.add_subcommand("certify", "run every check and write a certificate");
  certify_cmd->add_option("--config", config_path, "configuration JSON")->required()->check(CLI::ExistingFile);
  certify_cmd->add_option("--out", out_path, "certificate path ('-' for stdout)");
  certify_cmd->add_option("--seed", seed);
  certify_cmd->add_option("--net", net, "blending cover net spacing");
  certify_cmd->add_option("--max-word-len", max_word_len);
  certify_cmd->add_option("--budget", budget, "node budget of the globalization search");
  certify_cmd->add_flag("--no-timestamp", no_timestamp);

  std::string sweep_config, sweep_out;
  std::vector<double> etas;
  std::optional<int> trials;
  auto* sweep_cmd = app.add_subcommand("sweep", "re-verify seeded perturbations");
  sweep_cmd->add_option("--config", sweep_config)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--eta", etas, "comma separated perturbation sizes")->delimiter(',');
  sweep_cmd->add_option("--trials", trials);
  sweep_cmd->add_option("--out", sweep_out);

  std::string audit_config, audit_out;
  int samples = 50;
  auto* audit_cmd = app.add_subcommand("audit-realization", "symplectic defect of the glued product map");
  audit_cmd->add_option("--config", audit_config)->required()->check(CLI::ExistingFile);
  audit_cmd->add_option("--samples", samples, "samples per zone");
  audit_cmd->add_option("--out", audit_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*certify_cmd) {
      PipelineConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (net) cfg.blend_net = *net;
      if (max_word_len) cfg.max_word_len = *max_word_len;
      if (budget) cfg.node_budget = *budget;
      cfg.validate();
      Certificate cert = certify(cfg);
      if (!no_timestamp) cert.timestamp = utc_now();
      write_json(cert.to_json(), out_path.empty() ? cfg.output : out_path);
      std::cerr << "overall: " << cert.overall << "\n";
      return cert.overall == "pass" ? 0 : 1;
    }
    if (*sweep_cmd) {
      PipelineConfig cfg = load_config(sweep_config);
      if (etas.empty()) etas = cfg.eta;
      if (etas.empty()) throw ParamError("no eta values given");
      const SweepTable table = robustness_sweep(cfg, etas, trials.value_or(cfg.trials));
      write_json(table.to_json(), sweep_out);
      return 0;
    }
    if (*audit_cmd) {
      const PipelineConfig cfg = load_config(audit_config);
      const AuditReport rep = audit_realization(cfg, samples);
      json j = rep.to_json();
      j.erase("rows");
      write_json(j, audit_out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
