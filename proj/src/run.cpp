#include "dealer/run.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "dealer/client.hpp"
#include "dealer/monopoly.hpp"
#include "dealer/numerics.hpp"
#include "dealer/oracle.hpp"

namespace dealer {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"market", {"gamma_c", "gamma_d", "K"}},
      {"distribution", {"family", "mu_S", "sigma_S", "mu_M", "sigma_M", "beta"}},
      {"solver",
       {"n_minus", "n_plus", "abs_tol", "rel_tol", "grid_points", "containment_tol",
        "use_competitive_bound"}},
      {"output", {"out_dir", "schedule_csv", "summary_json", "sample_points", "sample_reach"}},
      {"verify", {"seed", "deviations", "mc_samples"}},
      {"sweep", {"parameter", "from", "to", "points"}},
  };
  return keys;
}

template <typename T>
T read_value(const boost::property_tree::ptree& node, const std::string& where) {
  try {
    return node.get_value<T>();
  } catch (const std::exception&) {
    throw ConfigError("cannot parse value '" + node.data() + "' of " + where);
  }
}

bool read_bool(const boost::property_tree::ptree& node, const std::string& where) {
  std::string v = node.data();
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("cannot parse boolean '" + node.data() + "' of " + where);
}

Json config_json(const RunConfig& cfg) {
  const auto dist = effective_distribution(cfg);
  Json j;
  j["mode"] = mode_name(cfg.mode);
  j["gamma_c"] = cfg.gamma_c;
  j["gamma_d"] = cfg.gamma_d;
  j["K"] = cfg.K;
  j["distribution"] = {{"family", family_name(dist.family)}, {"mu_S", dist.mu_S},
                       {"sigma_S", dist.sigma_S},           {"mu_M", dist.mu_M},
                       {"sigma_M", dist.sigma_M},           {"beta", optional_json(cfg.beta)}};
  j["solver"] = {{"n_minus", number(cfg.solver.n_minus)},
                 {"n_plus", number(cfg.solver.n_plus)},
                 {"abs_tol", cfg.solver.abs_tol},
                 {"rel_tol", cfg.solver.rel_tol},
                 {"grid_points", cfg.solver.grid_points},
                 {"use_competitive_bound", cfg.solver.use_competitive_bound}};
  j["seed"] = cfg.seed;
  return j;
}

class Artifacts {
 public:
  explicit Artifacts(const RunConfig& cfg) : dir_(cfg.out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError("output directory is not writable: " + dir_.string());
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& columns) {
    const auto path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_number(columns[c][r]);
      out << '\n';
    }
    written_.push_back(path.string());
  }

  void json(const std::string& name, const Json& value) {
    const auto path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << value.dump(2) << '\n';
    written_.push_back(path.string());
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

std::string csv_name(const RunConfig& cfg) {
  return cfg.schedule_csv.empty() ? mode_name(cfg.mode) + "_schedule.csv" : cfg.schedule_csv;
}
std::string json_name(const RunConfig& cfg) {
  return cfg.summary_json.empty() ? mode_name(cfg.mode) + "_summary.json" : cfg.summary_json;
}

std::vector<double> sample_grid(const RunConfig& cfg) {
  auto grid = num::linspace(-cfg.sample_reach, cfg.sample_reach, static_cast<std::size_t>(cfg.sample_points));
  grid.erase(std::remove(grid.begin(), grid.end(), 0.0), grid.end());
  return grid;
}

TypeLawPtr law_for(const RunConfig& cfg) { return build_typelaw(effective_distribution(cfg), cfg.gamma_c); }

// Sandwich sides concatenated in increasing n; n = 0 appears twice, first with
// the bid-side values, then with the ask-side values.
std::vector<std::vector<double>> sandwich_columns(const SandwichSolution& sol) {
  std::vector<std::vector<double>> cols(8);
  auto add = [&](const SandwichSide& s, bool reverse) {
    const std::size_t m = s.n.size();
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = reverse ? m - 1 - k : k;
      cols[0].push_back(s.n[i]);
      cols[1].push_back(s.lower[i]);
      cols[2].push_back(s.upper[i]);
      cols[3].push_back(s.midpoint[i]);
      cols[4].push_back(s.v[i]);
      cols[5].push_back(s.w[i]);
      cols[6].push_back(s.v_eps[i]);
      cols[7].push_back(s.w_eps[i]);
    }
  };
  add(sol.negative, false);
  add(sol.positive, true);
  return cols;
}

const std::vector<std::string> kSandwichHeader = {"n", "lower", "upper", "midpoint", "v", "w", "v_eps", "w_eps"};

Json f_oli_json(const FOliReport& r) {
  return {{"pass", r.pass},
          {"bound", r.bound},
          {"sup_minus", number(r.sup_minus)},
          {"sup_plus", number(r.sup_plus)},
          {"margin", number(r.margin)}};
}

Json threshold_json(const std::optional<ThresholdResult>& t) {
  if (!t) return nullptr;
  return {{"z", number(t->z)}, {"passes", t->passes}};
}

Json oligopoly_json(const SandwichSolution& sol, const EquilibriumCertificate& cert) {
  Json j;
  j["bid"] = sol.bid;
  j["ask"] = sol.ask;
  j["spread"] = sol.ask - sol.bid;
  j["gap_at_zero"] = sol.gap_at_zero;
  j["gap_at_zero_bid"] = sol.negative.gap_at_zero;
  j["gap_at_zero_ask"] = sol.positive.gap_at_zero;
  j["eps_v"] = sol.eps.eps_v;
  j["eps_w"] = sol.eps.eps_w;
  j["delta"] = sol.delta;
  j["C_g"] = sol.C_g;
  j["C_f"] = sol.C_f;
  j["n_minus"] = sol.n_minus;
  j["n_plus"] = sol.n_plus;
  j["containment_ok"] = sol.containment_ok;
  j["worst_containment"] = sol.worst_containment;
  j["accepted_steps"] = sol.accepted_steps;
  j["rejected_steps"] = sol.rejected_steps;
  j["f_oli"] = f_oli_json(cert.f_oli);
  j["gaussian_beta_bound"] = threshold_json(cert.gaussian_beta_bound);
  j["warnings"] = sol.warnings;
  return j;
}

RunResult run_monopoly(const RunConfig& cfg) {
  const auto law = law_for(cfg);
  const auto res = monopoly_schedule(law, cfg.gamma_c, cfg.gamma_d, sample_grid(cfg));
  const auto conv = monopoly_convexity_check(*law, cfg.gamma_c, cfg.gamma_d, res.y_minus, res.y_plus);
  Artifacts out(cfg);
  out.csv(csv_name(cfg), {"n", "marginal_price", "price"}, {res.n_grid, res.marginal, res.price});
  Json j;
  j["config"] = config_json(cfg);
  j["bid"] = res.schedule.bid();
  j["ask"] = res.schedule.ask();
  j["spread"] = res.schedule.spread();
  j["y_minus"] = res.y_minus;
  j["y_plus"] = res.y_plus;
  j["convex"] = conv.convex;
  j["convexity"] = {{"bound", conv.bound},
                    {"sup_minus", number(conv.sup_minus)},
                    {"sup_plus", number(conv.sup_plus)},
                    {"margin", number(conv.margin)}};
  j["z_mon"] = optional_json(res.z_mon);
  j["z_mon_passes"] = optional_json(res.z_mon_passes);
  j["profit"] = monopoly_profit(*law, res.schedule, cfg.gamma_c, cfg.gamma_d);
  out.json(json_name(cfg), j);
  return {kExitOk, out.written()};
}

RunResult run_oligopoly(const RunConfig& cfg) {
  const auto law = law_for(cfg);
  const auto sol = solve_equilibrium_ode(law, cfg.K, cfg.gamma_c, cfg.gamma_d, cfg.solver);
  const auto cert = certify_equilibrium(*law, cfg.K, cfg.gamma_c, cfg.gamma_d, sol);
  Artifacts out(cfg);
  out.csv(csv_name(cfg), kSandwichHeader, sandwich_columns(sol));
  Json j;
  j["config"] = config_json(cfg);
  const Json body = oligopoly_json(sol, cert);
  for (const auto& [k, v] : body.items()) j[k] = v;
  out.json(json_name(cfg), j);
  return {kExitOk, out.written()};
}

Json check(const std::string& name, bool pass, Json details) {
  Json j;
  j["name"] = name;
  j["pass"] = pass;
  j["details"] = std::move(details);
  return j;
}

RunResult run_verify(const RunConfig& cfg) {
  const auto law = law_for(cfg);
  const TypeLaw& tl = *law;
  Json checks = Json::array();

  const auto efron = efron_check(tl, num::linspace(tl.mean() - 4.0 * tl.scale(), tl.mean() + 4.0 * tl.scale(), 201));
  checks.push_back(check("efron_slope", efron.pass,
                         {{"min_slope", efron.min_slope}, {"max_slope", efron.max_slope}}));

  const auto mono = monopoly_schedule(law, cfg.gamma_c, cfg.gamma_d);
  const auto conv = monopoly_convexity_check(tl, cfg.gamma_c, cfg.gamma_d, mono.y_minus, mono.y_plus);
  const auto mono_adm = check_admissible(mono.schedule, 1, cfg.gamma_c);
  checks.push_back(check("monopoly_admissible", mono_adm.admissible, {{"diagnostics", mono_adm.diagnostics}}));
  checks.push_back(check("monopoly_convexity", conv.convex,
                         {{"bound", conv.bound}, {"margin", number(conv.margin)}}));

  const auto sol = solve_equilibrium_ode(law, cfg.K, cfg.gamma_c, cfg.gamma_d, cfg.solver);
  const auto cert = certify_equilibrium(tl, cfg.K, cfg.gamma_c, cfg.gamma_d, sol);
  const auto& p = sol.p_star;
  checks.push_back(check("sandwich_convergence", sol.containment_ok && sol.gap_at_zero < 1e-4,
                         {{"gap_at_zero", sol.gap_at_zero},
                          {"containment_ok", sol.containment_ok},
                          {"worst_containment", sol.worst_containment}}));
  const auto adm = check_admissible(p, cfg.K, cfg.gamma_c);
  checks.push_back(check("equilibrium_admissible", adm.admissible, {{"diagnostics", adm.diagnostics}}));
  const auto compat = check_compatible({p, p});
  checks.push_back(check("equilibrium_compatible", compat.compatible,
                         {{"ell_bar", number(compat.ell_bar)}, {"r_bar", number(compat.r_bar)}}));
  checks.push_back(check("f_oli", cert.f_oli.pass, f_oli_json(cert.f_oli)));
  if (cert.gaussian_beta_bound)
    checks.push_back(check("gaussian_beta_bound", cert.gaussian_beta_bound->passes,
                           threshold_json(cert.gaussian_beta_bound)));

  const auto n_grid = num::linspace(0.95 * sol.n_minus, 0.95 * sol.n_plus, 21);
  const auto x_grid = num::linspace(sol.n_minus, sol.n_plus, 41);
  const auto pw = pointwise_optimality_check(tl, cfg.K, cfg.gamma_c, cfg.gamma_d, p, n_grid, x_grid);
  checks.push_back(check("pointwise_optimality", pw.pass,
                         {{"worst_excess", pw.worst_excess},
                          {"worst_n", pw.worst_n},
                          {"worst_x", pw.worst_x},
                          {"worst_z", pw.worst_z},
                          {"case_beyond", pw.case_beyond},
                          {"case_between", pw.case_between},
                          {"case_zero", pw.case_zero},
                          {"case_opposite", pw.case_opposite}}));

  const auto devs = random_deviations(p, cfg.deviations, cfg.seed, cfg.gamma_c);
  double worst_gain = -PriceSchedule::kInf;
  double J_base = 0.0;
  Json trials = Json::array();
  for (const auto& d : devs) {
    const auto o = dealer_profit_deviation(tl, cfg.K, cfg.gamma_c, cfg.gamma_d, p, d);
    J_base = o.J_base;
    worst_gain = std::max(worst_gain, o.J_dev - o.J_base);
    trials.push_back({{"kind", perturbation_name(d.kind)},
                      {"amount", d.amount},
                      {"center", d.center},
                      {"width", d.width},
                      {"J_dev", o.J_dev}});
  }
  if (devs.empty()) J_base = deviation_profit(tl, cfg.K, cfg.gamma_c, cfg.gamma_d, p, p);
  checks.push_back(check("nash_deviations", devs.empty() || worst_gain <= 1e-6,
                         {{"J_base", J_base}, {"worst_gain", number(worst_gain)}, {"trials", trials}}));

  const auto mc = monte_carlo_profit(tl, p, cfg.K, cfg.gamma_c, cfg.gamma_d, cfg.mc_samples, cfg.seed);
  checks.push_back(check("monte_carlo_profit", std::abs(mc.mean - J_base) <= 3.0 * mc.std_error,
                         {{"J_base", J_base}, {"mc_mean", mc.mean}, {"std_error", mc.std_error},
                          {"samples", mc.samples}}));

  const double reach = std::max(std::abs(sol.n_minus), sol.n_plus);
  const ClientGridOracle grid(std::vector<PriceSchedule>(std::min(cfg.K, 2), p), cfg.gamma_c, reach, 1e-3);
  const ClientResponse response(p, cfg.K, cfg.gamma_c);
  double worst_diff = 0.0;
  bool boundary = false;
  const double y_edge = cfg.gamma_c * cfg.K * 0.5 * reach;
  for (double y : num::linspace(tl.mean() - y_edge, tl.mean() + y_edge, 41)) {
    const auto g = grid.argmax(y);
    boundary = boundary || g.on_boundary;
    const double n = response.n_of_y(y);
    for (double t : g.trades) worst_diff = std::max(worst_diff, std::abs(t - n));
  }
  checks.push_back(check("client_grid_oracle", !boundary && worst_diff <= 1e-3,
                         {{"worst_difference", worst_diff}, {"on_boundary", boundary}}));

  bool all = true;
  for (const auto& c : checks) all = all && c["pass"].get<bool>();
  Json j;
  j["config"] = config_json(cfg);
  j["pass"] = all;
  j["checks"] = checks;
  Artifacts out(cfg);
  out.json(json_name(cfg), j);
  return {all ? kExitOk : kExitVerification, out.written()};
}

RunConfig with_beta(RunConfig cfg, double beta) {
  cfg.beta = beta;
  return cfg;
}

RunResult run_figures(const RunConfig& cfg) {
  if (cfg.distribution.family != Family::gaussian)
    throw ConfigError("figures mode needs the gaussian family");
  const auto grid = sample_grid(cfg);
  Artifacts out(cfg);
  Json j;
  j["config"] = config_json(cfg);

  auto mono_marginal = [&](const RunConfig& c, double gamma_d) {
    const auto r = monopoly_schedule(law_for(c), c.gamma_c, gamma_d, grid);
    return std::make_pair(r.marginal, r);
  };

  {
    const auto [a, ra] = mono_marginal(with_beta(cfg, 0.25), 0.0);
    const auto [b, rb] = mono_marginal(with_beta(cfg, 0.4), 0.0);
    out.csv("fig1_monopoly_beta.csv", {"n", "beta_0.25", "beta_0.4"}, {grid, a, b});
    j["fig1_monopoly_beta"] = {{"beta_0.25", {{"spread", ra.schedule.spread()}, {"convex", ra.convex}}},
                               {"beta_0.4", {{"spread", rb.schedule.spread()}, {"convex", rb.convex}}}};
  }
  {
    const auto [a, ra] = mono_marginal(cfg, 0.0);
    const auto [b, rb] = mono_marginal(cfg, 0.5);
    out.csv("fig1_monopoly_gamma_d.csv", {"n", "gamma_d_0", "gamma_d_0.5"}, {grid, a, b});
    j["fig1_monopoly_gamma_d"] = {{"gamma_d_0", {{"spread", ra.schedule.spread()}}},
                                  {"gamma_d_0.5", {{"spread", rb.schedule.spread()}}}};
  }
  RunConfig duo = cfg;
  duo.K = 2;
  const auto law = law_for(duo);
  const auto sol0 = solve_equilibrium_ode(law, 2, duo.gamma_c, 0.0, duo.solver);
  {
    out.csv("fig2_sandwich.csv", kSandwichHeader, sandwich_columns(sol0));
    j["fig2_sandwich"] = {{"gap_at_zero", sol0.gap_at_zero},
                          {"eps_v", sol0.eps.eps_v},
                          {"eps_w", sol0.eps.eps_w},
                          {"n_minus", sol0.n_minus},
                          {"n_plus", sol0.n_plus}};
  }
  auto sample = [&](const PriceSchedule& s) {
    std::vector<double> v;
    for (double n : grid) v.push_back(s.marginal(n));
    return v;
  };
  {
    const auto sol4 = solve_equilibrium_ode(law, 2, duo.gamma_c, 0.4, duo.solver);
    out.csv("fig3_duopoly_gamma_d.csv", {"n", "gamma_d_0", "gamma_d_0.4"},
            {grid, sample(sol0.p_star), sample(sol4.p_star)});
    j["fig3_duopoly_gamma_d"] = {{"gamma_d_0", {{"spread", sol0.ask - sol0.bid}}},
                                 {"gamma_d_0.4", {{"spread", sol4.ask - sol4.bid}}}};
  }
  {
    // duopoly at the same aggregate quantity: each dealer takes n/2
    const auto mono = monopoly_schedule(law, duo.gamma_c, 0.0, grid);
    std::vector<double> per_dealer;
    for (double n : mono.n_grid) per_dealer.push_back(sol0.p_star.marginal(0.5 * n));
    out.csv("fig3_monopoly_vs_duopoly.csv", {"n", "monopoly", "duopoly"},
            {mono.n_grid, mono.marginal, per_dealer});
    j["fig3_monopoly_vs_duopoly"] = {{"monopoly_spread", mono.schedule.spread()},
                                     {"duopoly_spread", sol0.ask - sol0.bid}};
  }
  out.json(json_name(cfg), j);
  return {kExitOk, out.written()};
}

struct SweepPoint {
  double value = 0.0;
  double mono_bid = NAN, mono_ask = NAN;
  double oli_bid = NAN, oli_ask = NAN;
  double f_oli_margin = NAN;
  double f_oli_pass = NAN;
  double gaussian_pass = NAN;
  std::string error;
};

RunConfig sweep_config(RunConfig cfg, const std::string& parameter, double value) {
  if (parameter == "beta")
    cfg.beta = value;
  else if (parameter == "gamma_d")
    cfg.gamma_d = value;
  else
    cfg.K = static_cast<int>(std::lround(value));
  return cfg;
}

SweepPoint sweep_point(const RunConfig& base, double value) {
  const auto cfg = sweep_config(base, base.sweep_parameter, value);
  SweepPoint pt;
  pt.value = value;
  try {
    const auto law = law_for(cfg);
    const auto roots = monopoly_spread_roots(*law);
    pt.mono_bid = roots.first;
    pt.mono_ask = roots.second;
    if (cfg.K >= 2) {
      const auto sol = solve_equilibrium_ode(law, cfg.K, cfg.gamma_c, cfg.gamma_d, cfg.solver);
      const auto cert = certify_equilibrium(*law, cfg.K, cfg.gamma_c, cfg.gamma_d, sol);
      pt.oli_bid = sol.bid;
      pt.oli_ask = sol.ask;
      pt.f_oli_margin = cert.f_oli.margin;
      pt.f_oli_pass = cert.f_oli.pass ? 1.0 : 0.0;
      if (cert.gaussian_beta_bound) pt.gaussian_pass = cert.gaussian_beta_bound->passes ? 1.0 : 0.0;
    }
  } catch (const std::exception& e) {
    pt.error = e.what();
  }
  return pt;
}

RunResult run_sweep(const RunConfig& cfg) {
  std::vector<double> values = num::linspace(cfg.sweep_from, cfg.sweep_to, static_cast<std::size_t>(cfg.sweep_points));
  if (cfg.sweep_parameter == "K") {
    for (double& v : values) v = std::round(v);
    values.erase(std::unique(values.begin(), values.end()), values.end());
  }
  std::vector<SweepPoint> points;
  for (double v : values) points.push_back(sweep_point(cfg, v));

  std::vector<std::vector<double>> cols(10);
  Json failures = Json::array();
  for (const auto& pt : points) {
    cols[0].push_back(pt.value);
    cols[1].push_back(pt.mono_bid);
    cols[2].push_back(pt.mono_ask);
    cols[3].push_back(pt.mono_ask - pt.mono_bid);
    cols[4].push_back(pt.oli_bid);
    cols[5].push_back(pt.oli_ask);
    cols[6].push_back(pt.oli_ask - pt.oli_bid);
    cols[7].push_back(pt.f_oli_pass);
    cols[8].push_back(pt.f_oli_margin);
    cols[9].push_back(pt.gaussian_pass);
    if (!pt.error.empty()) failures.push_back({{"value", pt.value}, {"error", pt.error}});
  }

  Json flips = Json::array();
  if (cfg.sweep_parameter == "beta" && cfg.K >= 2) {
    for (std::size_t i = 1; i < points.size(); ++i) {
      const auto& a = points[i - 1];
      const auto& b = points[i];
      if (!std::isfinite(a.f_oli_margin) || !std::isfinite(b.f_oli_margin)) continue;
      if ((a.f_oli_margin >= 0.0) == (b.f_oli_margin >= 0.0)) continue;
      double lo = a.value;
      double hi = b.value;
      const bool lo_pass = a.f_oli_margin >= 0.0;
      for (int it = 0; it < 30 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto pt = sweep_point(cfg, mid);
        if (!std::isfinite(pt.f_oli_margin)) break;
        ((pt.f_oli_margin >= 0.0) == lo_pass ? lo : hi) = mid;
      }
      flips.push_back(0.5 * (lo + hi));
    }
  }

  Artifacts out(cfg);
  const std::string name = cfg.schedule_csv.empty() ? "sweep_table.csv" : cfg.schedule_csv;
  out.csv(name,
          {cfg.sweep_parameter, "monopoly_bid", "monopoly_ask", "monopoly_spread", "oligopoly_bid",
           "oligopoly_ask", "oligopoly_spread", "f_oli_pass", "f_oli_margin", "gaussian_bound_pass"},
          cols);
  Json j;
  j["config"] = config_json(cfg);
  j["parameter"] = cfg.sweep_parameter;
  j["points"] = points.size();
  j["f_oli_flips"] = flips;
  j["failures"] = failures;
  out.json(json_name(cfg), j);
  return {kExitOk, out.written()};
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  Json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << '\n';
}

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "monopoly") return Mode::monopoly;
  if (name == "oligopoly") return Mode::oligopoly;
  if (name == "verify") return Mode::verify;
  if (name == "figures") return Mode::figures;
  if (name == "sweep") return Mode::sweep;
  throw ConfigError("unknown mode: " + name);
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::monopoly:
      return "monopoly";
    case Mode::oligopoly:
      return "oligopoly";
    case Mode::verify:
      return "verify";
    case Mode::figures:
      return "figures";
    case Mode::sweep:
      return "sweep";
  }
  return "unknown";
}

RunConfig load_config(const std::string& path, RunConfig cfg) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, node] : body) {
      if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      const std::string where = section + "." + key;
      auto real = [&] { return read_value<double>(node, where); };
      auto integer = [&] { return read_value<long long>(node, where); };
      if (section == "market") {
        if (key == "gamma_c") cfg.gamma_c = real();
        if (key == "gamma_d") cfg.gamma_d = real();
        if (key == "K") cfg.K = static_cast<int>(integer());
      } else if (section == "distribution") {
        if (key == "family") {
          try {
            cfg.distribution.family = parse_family(node.data());
          } catch (const std::exception& e) {
            throw ConfigError(e.what());
          }
        }
        if (key == "mu_S") cfg.distribution.mu_S = real();
        if (key == "sigma_S") cfg.distribution.sigma_S = real();
        if (key == "mu_M") cfg.distribution.mu_M = real();
        if (key == "sigma_M") cfg.distribution.sigma_M = real();
        if (key == "beta") cfg.beta = real();
      } else if (section == "solver") {
        if (key == "n_minus") cfg.solver.n_minus = real();
        if (key == "n_plus") cfg.solver.n_plus = real();
        if (key == "abs_tol") cfg.solver.abs_tol = real();
        if (key == "rel_tol") cfg.solver.rel_tol = real();
        if (key == "grid_points") cfg.solver.grid_points = static_cast<int>(integer());
        if (key == "containment_tol") cfg.solver.containment_tol = real();
        if (key == "use_competitive_bound") cfg.solver.use_competitive_bound = read_bool(node, where);
      } else if (section == "output") {
        if (key == "out_dir") cfg.out_dir = node.data();
        if (key == "schedule_csv") cfg.schedule_csv = node.data();
        if (key == "summary_json") cfg.summary_json = node.data();
        if (key == "sample_points") cfg.sample_points = static_cast<int>(integer());
        if (key == "sample_reach") cfg.sample_reach = real();
      } else if (section == "verify") {
        if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
        if (key == "deviations") cfg.deviations = static_cast<int>(integer());
        if (key == "mc_samples") cfg.mc_samples = static_cast<std::size_t>(integer());
      } else if (section == "sweep") {
        if (key == "parameter") cfg.sweep_parameter = node.data();
        if (key == "from") cfg.sweep_from = real();
        if (key == "to") cfg.sweep_to = real();
        if (key == "points") cfg.sweep_points = static_cast<int>(integer());
      }
    }
  }
  return cfg;
}

DistributionSpec effective_distribution(const RunConfig& cfg) {
  DistributionSpec d = cfg.distribution;
  if (!cfg.beta) return d;
  if (d.family != Family::gaussian) throw ConfigError("beta override needs the gaussian family");
  const double var_Y = d.sigma_S * d.sigma_S + cfg.gamma_c * cfg.gamma_c * d.sigma_M * d.sigma_M;
  try {
    return gaussian_with_beta(*cfg.beta, cfg.gamma_c, var_Y, d.mu_S, d.mu_M);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.gamma_c > 0.0)) throw ConfigError("gamma_c must be positive");
  if (!(cfg.gamma_d >= 0.0)) throw ConfigError("gamma_d must be nonnegative");
  if (cfg.K < 1) throw ConfigError("K must be at least 1");
  if ((cfg.mode == Mode::oligopoly || cfg.mode == Mode::verify) && cfg.K < 2)
    throw ConfigError(mode_name(cfg.mode) + " mode needs K >= 2");
  if (cfg.distribution.family == Family::custom_logconcave)
    throw ConfigError("custom_logconcave laws need programmatic log-densities; use the library API");
  if (!(cfg.distribution.sigma_S > 0.0) || !(cfg.distribution.sigma_M > 0.0))
    throw ConfigError("sigma_S and sigma_M must be positive");
  if (cfg.beta && !(*cfg.beta > 0.0 && *cfg.beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  effective_distribution(cfg);
  if (cfg.solver.grid_points < 3) throw ConfigError("solver grid_points must be at least 3");
  if (!(cfg.solver.abs_tol > 0.0) || !(cfg.solver.rel_tol > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (!(cfg.solver.containment_tol >= 0.0)) throw ConfigError("containment_tol must be nonnegative");
  if (cfg.solver.grid_points > 1000000) throw ConfigError("solver grid_points must be at most 1000000");
  if (!std::isnan(cfg.solver.n_minus) && !(cfg.solver.n_minus < 0.0)) throw ConfigError("n_minus must be negative");
  if (!std::isnan(cfg.solver.n_plus) && !(cfg.solver.n_plus > 0.0)) throw ConfigError("n_plus must be positive");
  if (cfg.sample_points < 2 || !(cfg.sample_reach > 0.0)) throw ConfigError("bad output sampling");
  if (cfg.deviations < 0 || cfg.mc_samples < 2) throw ConfigError("bad verify settings");
  if (cfg.mode == Mode::sweep) {
    if (cfg.sweep_parameter != "beta" && cfg.sweep_parameter != "gamma_d" && cfg.sweep_parameter != "K")
      throw ConfigError("sweep parameter must be beta, gamma_d or K");
    if (cfg.sweep_points < 1) throw ConfigError("sweep needs at least one point");
    if (cfg.sweep_parameter == "beta" && cfg.distribution.family != Family::gaussian)
      throw ConfigError("beta sweep needs the gaussian family");
  }
}

RunResult run(const RunConfig& cfg, std::ostream& err) {
  try {
    validate_config(cfg);
    switch (cfg.mode) {
      case Mode::monopoly:
        return run_monopoly(cfg);
      case Mode::oligopoly:
        return run_oligopoly(cfg);
      case Mode::verify: {
        auto r = run_verify(cfg);
        if (r.exit_code == kExitVerification)
          report_error(err, "verification_failure", "one or more checks failed; see the summary JSON",
                       kExitVerification);
        return r;
      }
      case Mode::figures:
        return run_figures(cfg);
      case Mode::sweep:
        return run_sweep(cfg);
    }
  } catch (const ConfigError& e) {
    report_error(err, "config_error", e.what(), kExitConfig);
    return {kExitConfig, {}};
  } catch (const DomainError& e) {
    report_error(err, "config_error", e.what(), kExitConfig);
    return {kExitConfig, {}};
  } catch (const SolverError& e) {
    report_error(err, "solver_failure", e.what(), kExitSolver);
    return {kExitSolver, {}};
  } catch (const std::exception& e) {
    report_error(err, "solver_failure", e.what(), kExitSolver);
    return {kExitSolver, {}};
  }
  return {kExitConfig, {}};
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0.0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace dealer
