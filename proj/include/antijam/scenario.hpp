#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "antijam/channel.hpp"
#include "antijam/common.hpp"
#include "antijam/ofdm.hpp"

namespace antijam {

inline constexpr double kLightSpeed = 3.0e8;  // m/s

/// Full Monte Carlo experiment description, parsed from a flat key=value
/// scenario file (SI units; dB ratios where marked).
struct ScenarioConfig {
  std::string name = "scenario";

  // OFDM / front end
  int m = 16;
  int l_cp = 4;
  double sample_rate_hz = 625e3;
  double f0_hz = 27e9;
  double noise_power_w = dbm_to_watt(-113.0);
  std::string pulse = "hat";
  std::string channel_model = "sampled";  // sampled | spectral

  // Channel geometry and mobility
  int k_u = 2;
  int k_j = 2;
  double delay_spread_s = 0.0;  // default 3 T_c, set in finalize()
  double delay_slope_s = 0.0;   // default 2 T_c
  double dist_u_m = 100.0;
  double dist_j_m = 100.0;
  double speed_u_mps = 10.0;
  double speed_j_mps = 20.0;

  // Sweeps
  std::vector<double> snr_db = {25.0};
  std::vector<double> sjr_db = {0.0};

  // Monte Carlo shape
  int n_blocks = 1 << 14;
  int aber_blocks = 0;  // 0 = score every block
  int runs = 200;
  std::uint64_t seed = 1;
  int threads = 1;

  // Receiver variants
  std::vector<std::string> detectors = {"sic", "sic_ju", "mmse"};
  std::vector<std::string> csi = {"exact"};
  int n_probe = 64;
  int n_calib = 16;
  int scan_grid_log2 = 14;
  int scan_refine_top = 0;  // 0 = 4 * expected L_a

  double t_c() const { return 1.0 / sample_rate_hz; }
  double t_block() const { return (m + l_cp) * t_c(); }
  double doppler_u_hz() const { return speed_u_mps / kLightSpeed * f0_hz; }
  double doppler_j_hz() const { return speed_j_mps / kLightSpeed * f0_hz; }
  double max_throughput_bps() const {
    return sample_rate_hz * static_cast<double>(m) / (m + l_cp);
  }
  int expected_l_a() const { return k_u * (k_u + 1) / 2 + k_j * (k_j + 1) / 2; }

  /// sigma_U^2 = E|g_{U,k}|^2 at a given SNR (sigma_U^2 / sigma_w^2).
  double sigma2_u(double snr_db_pt) const {
    return noise_power_w * from_db10(snr_db_pt);
  }
  double sigma2_j(double snr_db_pt, double sjr_db_pt) const {
    return sigma2_u(snr_db_pt) / from_db10(sjr_db_pt);
  }
  /// Transmit power implied by sigma_TX^2 = 2 P_TX (lambda0 / 4 pi d)^2.
  double power_u_w(double snr_db_pt) const {
    const double lambda0 = kLightSpeed / f0_hz;
    const double path = lambda0 / (4.0 * kPi * dist_u_m);
    return sigma2_u(snr_db_pt) / (2.0 * path * path);
  }

  void finalize() {
    if (delay_spread_s <= 0.0) delay_spread_s = 3.0 * t_c();
    if (delay_slope_s <= 0.0) delay_slope_s = 2.0 * t_c();
    if (scan_refine_top <= 0) scan_refine_top = 4 * expected_l_a();
    if (aber_blocks <= 0 || aber_blocks > n_blocks) aber_blocks = n_blocks;
  }

  OfdmConfig ofdm() const {
    OfdmConfig cfg;
    cfg.m = m;
    cfg.l_cp = l_cp;
    cfg.t_c = t_c();
    cfg.f0 = f0_hz;
    cfg.sigma_w2 = noise_power_w;
    cfg.pulse = make_pulse(pulse, cfg.t_c);
    return cfg;
  }

  TapModel tap_model() const {
    if (channel_model == "sampled") return TapModel::Sampled;
    if (channel_model == "spectral") return TapModel::Spectral;
    throw ConfigError("channel_model must be sampled or spectral");
  }

  LinkProfile profile_u(double snr_db_pt) const {
    return {k_u, sigma2_u(snr_db_pt), delay_spread_s, delay_slope_s, doppler_u_hz()};
  }
  LinkProfile profile_j(double snr_db_pt, double sjr_db_pt) const {
    return {k_j, sigma2_j(snr_db_pt, sjr_db_pt), delay_spread_s, delay_slope_s,
            doppler_j_hz()};
  }

  /// Static feasibility checks; per-draw A7 rejection happens at draw time.
  void validate() const {
    const OfdmConfig cfg = ofdm();
    cfg.validate();
    if (channel_model == "sampled")
      cfg.validate_cp_budget(delay_spread_s);
    if (k_u < 1 || k_j < 1) throw ConfigError("path counts must be >= 1");
    if (runs < 1 || n_blocks < 3) throw ConfigError("runs/n_blocks too small");
    const double nu_max_u = doppler_u_hz() * t_block();
    const double nu_max_j = doppler_j_hz() * t_block();
    if (nu_max_u >= 0.25 || nu_max_j >= 0.25)
      throw ConfigError("normalized Doppler too large: |nu| must stay below 1/4 "
                        "so pair sums avoid the mod-1 wrap");
    for (const std::string& d : detectors)
      if (d != "sic" && d != "sic_ju" && d != "mmse")
        throw ConfigError("unknown detector: " + d);
    for (const std::string& c : csi)
      if (c != "exact" && c != "estimated")
        throw ConfigError("unknown csi mode: " + c);
    (void)tap_model();
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) out.push_back(std::stod(item));
  return out;
}

}  // namespace detail

/// Parse the flat key = value scenario format.  '#' starts a comment;
/// unknown keys are rejected.
inline ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("scenario line " + std::to_string(lineno) +
                          ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("scenario line " + std::to_string(lineno) + ": empty key or value");

    if (key == "name") cfg.name = val;
    else if (key == "m") cfg.m = std::stoi(val);
    else if (key == "l_cp") cfg.l_cp = std::stoi(val);
    else if (key == "sample_rate_hz") cfg.sample_rate_hz = std::stod(val);
    else if (key == "f0_hz") cfg.f0_hz = std::stod(val);
    else if (key == "noise_power_w") cfg.noise_power_w = std::stod(val);
    else if (key == "pulse") cfg.pulse = val;
    else if (key == "channel_model") cfg.channel_model = val;
    else if (key == "k_u") cfg.k_u = std::stoi(val);
    else if (key == "k_j") cfg.k_j = std::stoi(val);
    else if (key == "delay_spread_s") cfg.delay_spread_s = std::stod(val);
    else if (key == "delay_slope_s") cfg.delay_slope_s = std::stod(val);
    else if (key == "dist_u_m") cfg.dist_u_m = std::stod(val);
    else if (key == "dist_j_m") cfg.dist_j_m = std::stod(val);
    else if (key == "speed_u_mps") cfg.speed_u_mps = std::stod(val);
    else if (key == "speed_j_mps") cfg.speed_j_mps = std::stod(val);
    else if (key == "snr_db") cfg.snr_db = detail::parse_double_list(val);
    else if (key == "sjr_db") cfg.sjr_db = detail::parse_double_list(val);
    else if (key == "n_blocks") cfg.n_blocks = std::stoi(val);
    else if (key == "aber_blocks") cfg.aber_blocks = std::stoi(val);
    else if (key == "runs") cfg.runs = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "threads") cfg.threads = std::stoi(val);
    else if (key == "detectors") cfg.detectors = detail::split_list(val);
    else if (key == "csi") cfg.csi = detail::split_list(val);
    else if (key == "n_probe") cfg.n_probe = std::stoi(val);
    else if (key == "n_calib") cfg.n_calib = std::stoi(val);
    else if (key == "scan_grid_log2") cfg.scan_grid_log2 = std::stoi(val);
    else if (key == "scan_refine_top") cfg.scan_refine_top = std::stoi(val);
    else throw ConfigError("scenario line " + std::to_string(lineno) +
                           ": unknown key '" + key + "'");
  }
  cfg.finalize();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file: " + path);
  return parse_scenario(f);
}

}  // namespace antijam
