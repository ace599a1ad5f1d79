// dealer-eq <mode> --config <path> [--out-dir <path>] [--seed <int>] [--beta <real>]
//           [--gamma-d <real>] [--k <int>]
#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "dealer/run.hpp"

namespace {

int config_failure(const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", "config_error"}, {"message", message}, {"exit_code", dealer::kExitConfig}};
  std::cerr << j.dump() << '\n';
  return dealer::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dealer price schedules under adverse selection and inventory costs"};
  std::string mode;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<double> gamma_d;
  std::optional<int> k;
  app.add_option("mode", mode, "monopoly | oligopoly | verify | figures | sweep")->required();
  app.add_option("--config", config_path, "key=value config file")->required();
  app.add_option("--out-dir", out_dir, "directory for CSV and JSON artifacts");
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--beta", beta, "signal share of the type variance (gaussian only)");
  app.add_option("--gamma-d", gamma_d, "dealer inventory cost");
  app.add_option("--k", k, "number of dealers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return config_failure(e.what());
  }

  dealer::RunConfig cfg;
  try {
    cfg = dealer::load_config(config_path);
    cfg.mode = dealer::parse_mode(mode);
  } catch (const dealer::ConfigError& e) {
    return config_failure(e.what());
  }
  if (out_dir) cfg.out_dir = *out_dir;
  if (seed) cfg.seed = *seed;
  if (beta) cfg.beta = *beta;
  if (gamma_d) cfg.gamma_d = *gamma_d;
  if (k) cfg.K = *k;

  const auto result = dealer::run(cfg, std::cerr);
  for (const auto& path : result.artifacts) std::cout << path << '\n';
  return result.exit_code;
}
