#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "antijam/channel.hpp"
#include "antijam/common.hpp"
#include "antijam/detector.hpp"
#include "antijam/metrics.hpp"
#include "antijam/ofdm.hpp"
#include "antijam/pipeline.hpp"
#include "antijam/scenario.hpp"

namespace antijam {

enum class CsiMode { Exact, Estimated };

inline DetectorMode detector_from_name(const std::string& name) {
  if (name == "sic") return DetectorMode::Sic;
  if (name == "sic_ju") return DetectorMode::SicJu;
  if (name == "mmse") return DetectorMode::MmseOnly;
  throw ConfigError("unknown detector: " + name);
}

struct VariantResult {
  std::string detector;
  std::string csi;
  ErrorCounts counts;
  bool valid = false;
};

struct RunOutcome {
  int run = 0;
  bool estimation_attempted = false;
  bool estimation_ok = false;
  LinkMse mse_u, mse_j;
  std::vector<VariantResult> variants;
};

struct AggRow {
  std::string scenario;
  double sjr_db = 0.0;
  double snr_db = 0.0;
  std::string detector;
  std::string csi;
  int runs = 0;
  int runs_scored = 0;
  double fail_rate = 0.0;
  double aber = 0.0;
  double bler = 0.0;
  double throughput_bps = 0.0;
  LinkMse mse_u, mse_j;  // linear; NaN when estimation never ran
};

struct RunRow {
  std::string scenario;
  double sjr_db = 0.0;
  double snr_db = 0.0;
  int run = 0;
  std::string detector;
  std::string csi;
  double aber = 0.0;
  double bler = 0.0;
  bool est_ok = true;
};

struct ResultSet {
  std::vector<AggRow> agg;
  std::vector<RunRow> per_run;
};

namespace detail {

struct SweepPoint {
  double sjr_db;
  double snr_db;
};

inline RunOutcome single_run(const ScenarioConfig& sc, const OfdmConfig& cfg,
                             const OfdmMatrices& mats, const SweepPoint& pt,
                             int run) {
  RunOutcome out;
  out.run = run;

  const LinkProfile prof_u = sc.profile_u(pt.snr_db);
  const LinkProfile prof_j = sc.profile_j(pt.snr_db, pt.sjr_db);
  auto draw_rng = make_stream(sc.seed, run, StreamTag::ChannelDraw);
  const ChannelDraw draw = draw_channels(draw_rng, prof_u, prof_j, cfg);
  const TapModel model = sc.tap_model();

  const GenerationSeeds seeds{sc.seed, static_cast<std::uint64_t>(run)};
  const GeneratedData gen =
      generate_received(draw.uav, draw.jam, cfg, mats, sc.n_blocks, seeds, model);

  const LinkChannel truth_u = make_link_channel(draw.uav, cfg, mats, model);
  const LinkChannel truth_j = make_link_channel(draw.jam, cfg, mats, model);

  bool want_estimated = false;
  for (const std::string& c : sc.csi) want_estimated |= (c == "estimated");

  std::optional<EstimationReport> report;
  std::optional<ReconstructedChannel> recon;
  if (want_estimated) {
    out.estimation_attempted = true;
    EstimatorOptions opts;
    opts.k_u = sc.k_u;
    opts.nu_u1 = draw.uav.paths.front().nu;
    opts.scan.grid_log2 = sc.scan_grid_log2;
    opts.scan.refine_top = sc.scan_refine_top;
    opts.delta_max = sc.delay_spread_s;
    opts.n_probe = sc.n_probe;
    try {
      report = estimate_channel(gen.blocks, cfg, mats, opts);
      recon = reconstruct_channel(report->estimate, cfg, mats);
      out.estimation_ok = true;
      out.mse_u = link_mse(report->estimate.uav, draw.uav, sc.doppler_u_hz(),
                           sc.delay_spread_s, prof_u.sigma2, cfg.t_block());
      out.mse_j = link_mse(report->estimate.jam, draw.jam, sc.doppler_j_hz(),
                           sc.delay_spread_s, prof_j.sigma2, cfg.t_block());
    } catch (const EstimationError&) {
      out.estimation_ok = false;
    }
  }

  const int n_det = sc.aber_blocks;
  for (const std::string& csi_name : sc.csi) {
    const CsiMode csi = csi_name == "exact" ? CsiMode::Exact : CsiMode::Estimated;
    for (const std::string& det_name : sc.detectors) {
      VariantResult vr;
      vr.detector = det_name;
      vr.csi = csi_name;
      if (csi == CsiMode::Estimated && !out.estimation_ok) {
        out.variants.push_back(vr);
        continue;
      }
      const DetectorMode mode = detector_from_name(det_name);
      std::vector<VectorXd> detected(n_det);
      for (int n = 0; n < n_det; ++n) {
        MatrixXcd h_u, h_j;
        if (csi == CsiMode::Exact) {
          h_u = mats.r_cp * truth_u.hbar(n, 0);
          h_j = mats.r_cp * truth_j.hbar(n, 0);
        } else {
          std::tie(h_u, h_j) = recon->at(n);
        }
        detected[n] = detect_block(gen.blocks.y.col(n), h_u, h_j,
                                   cfg.sigma_w2, mode).s_u;
      }
      const double polarity =
          csi == CsiMode::Exact ? 1.0
                                : calibrate_polarity(detected, gen.s_u, sc.n_calib);
      for (int n = 0; n < n_det; ++n)
        count_block_errors(detected[n], gen.s_u.col(n), polarity, vr.counts);
      vr.valid = true;
      out.variants.push_back(vr);
    }
  }
  return out;
}

}  // namespace detail

/// Full Monte Carlo sweep: every (SJR, SNR) point runs `runs` independent
/// channel/symbol/noise draws through the configured detector and CSI
/// variants.  Identical (config, seed) inputs give identical results;
/// parallel execution folds per-run results in run order.
inline ResultSet run_scenario(const ScenarioConfig& sc, std::ostream* progress = nullptr) {
  sc.validate();
  const OfdmConfig cfg_base = sc.ofdm();
  const OfdmMatrices mats = build_matrices(cfg_base);

  ResultSet rs;
  for (double sjr : sc.sjr_db) {
    for (double snr : sc.snr_db) {
      const detail::SweepPoint pt{sjr, snr};
      if (progress)
        (*progress) << "[" << sc.name << "] sjr=" << sjr << " dB snr=" << snr
                    << " dB, " << sc.runs << " runs" << std::endl;

      std::vector<RunOutcome> outcomes(sc.runs);
      if (sc.threads <= 1) {
        for (int run = 0; run < sc.runs; ++run)
          outcomes[run] = detail::single_run(sc, cfg_base, mats, pt, run);
      } else {
        for (int base = 0; base < sc.runs; base += sc.threads) {
          const int batch = std::min(sc.threads, sc.runs - base);
          std::vector<std::future<RunOutcome>> futs;
          for (int i = 0; i < batch; ++i)
            futs.push_back(std::async(std::launch::async, [&, run = base + i] {
              return detail::single_run(sc, cfg_base, mats, pt, run);
            }));
          for (int i = 0; i < batch; ++i) outcomes[base + i] = futs[i].get();
        }
      }

      int est_attempted = 0, est_failed = 0;
      KahanSum mse_acc[6];
      int mse_runs = 0;
      for (const RunOutcome& oc : outcomes) {
        if (oc.estimation_attempted) {
          ++est_attempted;
          if (!oc.estimation_ok) ++est_failed;
          const bool mse_finite =
              std::isfinite(oc.mse_u.gain) && std::isfinite(oc.mse_u.doppler) &&
              std::isfinite(oc.mse_u.delay) && std::isfinite(oc.mse_j.gain) &&
              std::isfinite(oc.mse_j.doppler) && std::isfinite(oc.mse_j.delay);
          if (oc.estimation_ok && mse_finite) {
            mse_acc[0].add(oc.mse_u.gain);
            mse_acc[1].add(oc.mse_u.doppler);
            mse_acc[2].add(oc.mse_u.delay);
            mse_acc[3].add(oc.mse_j.gain);
            mse_acc[4].add(oc.mse_j.doppler);
            mse_acc[5].add(oc.mse_j.delay);
            ++mse_runs;
          }
        }
      }
      LinkMse mse_u, mse_j;
      if (mse_runs > 0) {
        mse_u.gain = mse_acc[0].value() / mse_runs;
        mse_u.doppler = mse_acc[1].value() / mse_runs;
        mse_u.delay = mse_acc[2].value() / mse_runs;
        mse_j.gain = mse_acc[3].value() / mse_runs;
        mse_j.doppler = mse_acc[4].value() / mse_runs;
        mse_j.delay = mse_acc[5].value() / mse_runs;
      }
      const double fail_rate =
          est_attempted > 0 ? static_cast<double>(est_failed) / est_attempted : 0.0;

      for (const std::string& csi_name : sc.csi) {
        for (const std::string& det_name : sc.detectors) {
          AggRow row;
          row.scenario = sc.name;
          row.sjr_db = sjr;
          row.snr_db = snr;
          row.detector = det_name;
          row.csi = csi_name;
          row.runs = sc.runs;
          row.fail_rate = fail_rate;
          row.mse_u = mse_u;
          row.mse_j = mse_j;
          ErrorCounts total;
          for (const RunOutcome& oc : outcomes) {
            for (const VariantResult& vr : oc.variants) {
              if (vr.detector != det_name || vr.csi != csi_name || !vr.valid)
                continue;
              total.bit_errors += vr.counts.bit_errors;
              total.bits += vr.counts.bits;
              total.block_errors += vr.counts.block_errors;
              total.blocks += vr.counts.blocks;
              ++row.runs_scored;
              rs.per_run.push_back({sc.name, sjr, snr, oc.run, det_name, csi_name,
                                    vr.counts.aber(), vr.counts.bler(),
                                    oc.estimation_ok || !oc.estimation_attempted});
            }
          }
          if (total.bits > 0) {
            row.aber = total.aber();
            row.bler = total.bler();
            row.throughput_bps = throughput_from_aber(total.bler(), cfg_base);
          } else {
            row.aber = std::numeric_limits<double>::quiet_NaN();
            row.bler = std::numeric_limits<double>::quiet_NaN();
            row.throughput_bps = std::numeric_limits<double>::quiet_NaN();
          }
          rs.agg.push_back(row);
        }
      }
    }
  }
  return rs;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  if (std::isnan(v)) {
    os << "nan";
  } else {
    os << std::setprecision(12) << v;
  }
  return os.str();
}

inline std::string db_or_nan(double linear) {
  if (!std::isfinite(linear) || linear <= 0.0) return "nan";
  return fmt(db10(linear));
}

}  // namespace detail

/// Write metrics.csv, per_run.csv and one (x, y) plot-data file per
/// (sjr, detector, csi) curve into `out_dir`.
inline void emit_results(const ResultSet& rs, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream f(fs::path(out_dir) / "metrics.csv");
    if (!f) throw std::runtime_error("emit_results: cannot write metrics.csv");
    f << "# antijam-results v1\n";
    f << "scenario,sjr_db,snr_db,detector,csi,runs,runs_scored,fail_rate,"
         "aber,bler,throughput_bps,"
         "mse_gain_u_db,mse_doppler_u_db,mse_delay_u_db,"
         "mse_gain_j_db,mse_doppler_j_db,mse_delay_j_db\n";
    for (const AggRow& r : rs.agg) {
      f << r.scenario << ',' << detail::fmt(r.sjr_db) << ',' << detail::fmt(r.snr_db)
        << ',' << r.detector << ',' << r.csi << ',' << r.runs << ',' << r.runs_scored
        << ',' << detail::fmt(r.fail_rate) << ',' << detail::fmt(r.aber) << ','
        << detail::fmt(r.bler) << ',' << detail::fmt(r.throughput_bps) << ','
        << detail::db_or_nan(r.mse_u.gain) << ',' << detail::db_or_nan(r.mse_u.doppler)
        << ',' << detail::db_or_nan(r.mse_u.delay) << ','
        << detail::db_or_nan(r.mse_j.gain) << ',' << detail::db_or_nan(r.mse_j.doppler)
        << ',' << detail::db_or_nan(r.mse_j.delay) << '\n';
    }
  }
  {
    std::ofstream f(fs::path(out_dir) / "per_run.csv");
    if (!f) throw std::runtime_error("emit_results: cannot write per_run.csv");
    f << "# antijam-perrun v1\n";
    f << "scenario,sjr_db,snr_db,run,detector,csi,aber,bler,est_ok\n";
    for (const RunRow& r : rs.per_run) {
      f << r.scenario << ',' << detail::fmt(r.sjr_db) << ',' << detail::fmt(r.snr_db)
        << ',' << r.run << ',' << r.detector << ',' << r.csi << ','
        << detail::fmt(r.aber) << ',' << detail::fmt(r.bler) << ','
        << (r.est_ok ? 1 : 0) << '\n';
    }
  }

  // Plot data: ABER and throughput versus SNR per (sjr, detector, csi).
  struct CurveKey {
    std::string scenario;
    double sjr;
    std::string det;
    std::string csi;
  };
  std::vector<CurveKey> keys;
  for (const AggRow& r : rs.agg) {
    bool seen = false;
    for (const CurveKey& k : keys)
      seen |= (k.scenario == r.scenario && k.sjr == r.sjr_db && k.det == r.detector &&
               k.csi == r.csi);
    if (!seen) keys.push_back({r.scenario, r.sjr_db, r.detector, r.csi});
  }
  for (const CurveKey& k : keys) {
    std::ostringstream tag;
    tag << k.scenario << "_sjr" << k.sjr << "_" << k.det << "_" << k.csi;
    std::ofstream fa(fs::path(out_dir) / ("aber_vs_snr_" + tag.str() + ".csv"));
    std::ofstream ft(fs::path(out_dir) / ("throughput_vs_snr_" + tag.str() + ".csv"));
    fa << "snr_db,aber\n";
    ft << "snr_db,throughput_bps\n";
    for (const AggRow& r : rs.agg) {
      if (r.scenario != k.scenario || r.sjr_db != k.sjr || r.detector != k.det ||
          r.csi != k.csi)
        continue;
      fa << detail::fmt(r.snr_db) << ',' << detail::fmt(r.aber) << '\n';
      ft << detail::fmt(r.snr_db) << ',' << detail::fmt(r.throughput_bps) << '\n';
    }
  }
}

}  // namespace antijam
