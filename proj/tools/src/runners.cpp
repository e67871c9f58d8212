#include "runners.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "mfac/analysis.hpp"
#include "mfac/csv.hpp"
#include "mfac/errors.hpp"
#include "mfac/kinematics.hpp"
#include "mfac/pathgen.hpp"
#include "mfac/plant.hpp"
#include "mfac/tracking.hpp"
#include "svg.hpp"

namespace mfac::cli {

namespace fs = std::filesystem;

namespace {

fs::path prepare(const ExperimentConfig& cfg, const char* name) {
  const fs::path dir = cfg.output_root / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream(dir / "config.ini") << describe(cfg);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::vector<std::string> numbered(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<double> lambda_grid(const LoopConfig& loop) {
  std::vector<double> grid;
  for (int i = 0; i < loop.points; ++i) {
    grid.push_back(loop.points == 1 ? loop.lambda_min
                                    : loop.lambda_min + (loop.lambda_max - loop.lambda_min) * i /
                                                            (loop.points - 1));
  }
  return grid;
}

Matrix output_block(const LoopConfig& loop) {
  const auto n = loop.phi_u.rows();
  return loop.phi_y.size() ? loop.phi_y : Matrix(Matrix::Zero(n, n));
}

double spectral_radius(const StabilityReport& r) {
  double m = 0.0;
  for (const auto& z : r.characteristic_roots) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

int run_example1(const ExperimentConfig& cfg, std::ostream& report) {
  const auto& c = cfg.example1;
  const fs::path dir = prepare(cfg, "example1");
  const Example1Plant plant;
  SimulationOptions options;
  options.box = example1_box();

  std::vector<std::string> header{"variant", "rmse1", "rmse2", "max_err1", "max_err2",
                                  "smooth_max_err1", "smooth_max_err2", "box_violations", "rows",
                                  "diverged", "divergence_row"};
  auto summary_file = open_out(dir / "summary.csv");
  CsvWriter summary(summary_file, "example1-summary", header);
  std::ofstream legend = open_out(dir / "summary.txt");
  legend << "variant ids: 0 = first_order, 1 = quartic, 2 = constrained\n";

  int status = kSuccess;
  for (const auto v : c.variants) {
    const std::string name = to_string(v);
    const SimLog log = simulate(plant, v, Example1Reference(), c.steps, example1_initial_window(),
                                Weighting::uniform(2, c.lambda), options);
    const fs::path csv = dir / ("log_" + name + ".csv");
    {
      auto out = open_out(csv);
      log.write_csv(out);
    }
    plot_csv(csv, dir / ("outputs_" + name + ".svg"),
             {"Example 1 outputs (" + name + ")", "k", {"yref1", "y1", "yref2", "y2"}, "y"});
    plot_csv(csv, dir / ("inputs_" + name + ".svg"),
             {"Example 1 inputs (" + name + ")", "k", {"u1", "u2"}, "u"});
    plot_csv(csv, dir / ("pjm_" + name + ".svg"),
             {"Example 1 PJM, u(k) block (" + name + ")", "k",
              {"Phi2[0,0]", "Phi2[0,1]", "Phi2[1,0]", "Phi2[1,1]"}, "value"});

    const long last_k = log.records.back().k;
    const long end = log.diverged ? last_k - 1 : last_k;
    const double nan = std::nan("");
    TrackingMetrics all{Vector::Constant(2, nan), Vector::Constant(2, nan), 0, 0};
    if (end > c.transient_cutoff) all = metrics(log, c.transient_cutoff, options.box, end);
    Vector smooth = Vector::Constant(2, nan);
    const long smooth_end = std::min(end, c.smooth_end);
    if (smooth_end > c.transient_cutoff) {
      smooth = metrics(log, c.transient_cutoff, std::nullopt, smooth_end).max_abs_error;
    }
    const long violations = end >= 1 ? metrics(log, 0, options.box, end).constraint_violations : 0;
    const auto divergence_row =
        log.diverged ? static_cast<double>(log.records.size() - 1) : -1.0;
    summary.row({static_cast<double>(v), all.rmse[0], all.rmse[1], all.max_abs_error[0],
                 all.max_abs_error[1], smooth[0], smooth[1], static_cast<double>(violations),
                 static_cast<double>(log.records.size()), log.diverged ? 1.0 : 0.0,
                 divergence_row});

    std::string line = name + ": rows " + std::to_string(log.records.size()) + ", max |e| after k=" +
                       std::to_string(c.transient_cutoff) + " (" + fixed(all.max_abs_error[0]) +
                       ", " + fixed(all.max_abs_error[1]) + "), smooth segment (" +
                       fixed(smooth[0]) + ", " + fixed(smooth[1]) + "), box violations " +
                       std::to_string(violations);
    if (log.diverged) {
      line += ", DIVERGED at row index " + std::to_string(log.records.size() - 1) + " (k = " +
              std::to_string(log.divergence_step) + ")";
      status = kDivergence;
    }
    legend << line << '\n';
    report << line << '\n';
  }
  report << "example1: wrote " << dir.string() << '\n';
  return status;
}

int run_example2(const ExperimentConfig& cfg, std::ostream& report) {
  const auto& c = cfg.example2;
  KinematicChain chain = KinematicChain::table_one();
  if (c.chain) {
    try {
      chain = KinematicChain::load(*c.chain);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (c.start_q.size() != chain.joint_count()) {
    throw ConfigError("example2: chain has " + std::to_string(chain.joint_count()) +
                      " joints, start_q_deg has " + std::to_string(c.start_q.size()));
  }
  const fs::path dir = prepare(cfg, "example2");
  {
    auto out = open_out(dir / "chain.dh");
    chain.write(out);
  }

  PathSpec spec;
  spec.start = TaskVector::from_pose(forward_kinematics(chain, c.start_q));
  spec.goal = TaskVector::from_pose(forward_kinematics(chain, c.goal_q));
  spec.tf = c.tf;
  spec.T0 = c.T0;
  const CartesianPath path = generate_path(spec);
  {
    auto out = open_out(dir / "path.csv");
    path.write_csv(out);
  }

  TrackingLog log;
  try {
    log = track_path(chain, path, c.start_q, c.cap);
  } catch (const NumericError& e) {
    report << "example2: IK diverged: " << e.what() << '\n';
    return kDivergence;
  }
  const fs::path csv = dir / "tracking.csv";
  {
    auto out = open_out(csv);
    log.write_csv(out);
  }
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    if (!log.samples[i].q.allFinite()) {
      report << "example2: joint vector non-finite at row index " << i << '\n';
      return kDivergence;
    }
  }

  const auto intervals = ill_conditioned_intervals(log, c.cond_threshold);
  {
    auto out = open_out(dir / "ill_conditioned.csv");
    CsvWriter w(out, "intervals", {"t_start", "t_end"});
    for (const auto& [a, b] : intervals) w.row({a, b});
  }
  long unconverged = 0;
  for (const auto& s : log.samples) unconverged += !s.converged;
  {
    auto out = open_out(dir / "summary.csv");
    CsvWriter w(out, "example2-summary",
                {"max_pos_err_mm", "max_ori_err_rad", "max_iters", "samples", "unconverged",
                 "ill_conditioned_intervals"});
    w.row({log.max_position_error(), log.max_orientation_error(),
           static_cast<double>(log.max_iterations()), static_cast<double>(log.samples.size()),
           static_cast<double>(unconverged), static_cast<double>(intervals.size())});
  }

  const int n = chain.joint_count();
  plot_csv(csv, dir / "position.svg",
           {"Example 2 position", "t", {"ref_x", "x", "ref_y", "y", "ref_z", "z"}, "mm"});
  plot_csv(csv, dir / "orientation.svg",
           {"Example 2 Euler angles", "t",
            {"ref_alpha", "alpha", "ref_beta", "beta", "ref_gamma", "gamma"}, "rad"});
  plot_csv(csv, dir / "errors.svg",
           {"Example 2 tracking error", "t", {"pos_err", "ori_err"}, "error", true});
  plot_csv(csv, dir / "joints.svg", {"Example 2 joint angles", "t", numbered("q", n), "rad"});
  std::vector<std::string> jac;
  for (int r = 1; r <= 6; ++r) jac.push_back("J" + std::to_string(r) + "_1");
  plot_csv(csv, dir / "jacobian.svg", {"Example 2 Jacobian, column 1", "t", jac, "value"});
  plot_csv(csv, dir / "cond.svg", {"Example 2 condition number", "t", {"cond"}, "cond", true});
  plot_csv(csv, dir / "lambda.svg", {"Example 2 damping", "t", {"lambda"}, "lambda"});
  plot_csv(csv, dir / "iters.svg", {"Example 2 iterations", "t", {"iters"}, "count"});

  std::string line = "example2: " + std::to_string(log.samples.size()) + " samples, max position error " +
                     fixed(log.max_position_error()) + " mm, max orientation error " +
                     fixed(log.max_orientation_error()) + " rad, max iterations " +
                     std::to_string(log.max_iterations()) + ", unconverged samples " +
                     std::to_string(unconverged) + ", cond > " + fixed(c.cond_threshold) + " in";
  for (const auto& [a, b] : intervals) line += " [" + fixed(a, 5) + ", " + fixed(b, 5) + "]";
  std::ofstream(dir / "summary.txt") << line << '\n';
  report << line << "\nexample2: wrote " << dir.string() << '\n';
  return kSuccess;
}

int run_sweep(const ExperimentConfig& cfg, std::ostream& report) {
  const LoopConfig& loop = cfg.sweep;
  const fs::path dir = prepare(cfg, "sweep");
  const int my = static_cast<int>(loop.phi_u.rows());
  const Matrix a = output_block(loop);
  const LinearModel plant({a}, {loop.phi_u});
  const PseudoJacobian pjm({a}, {loop.phi_u});

  std::vector<std::string> header{"lambda", "stable", "max_root"};
  for (const auto& h : numbered("ess_sim", my)) header.push_back(h);
  for (const auto& h : numbered("ess_analytic", my)) header.push_back(h);
  header.push_back("max_rel_diff");
  const fs::path csv = dir / "sweep.csv";
  {
    auto out = open_out(csv);
    CsvWriter w(out, "sweep", header);
    const double nan = std::nan("");
    for (double lam : lambda_grid(loop)) {
      const Weighting weight = Weighting::uniform(static_cast<int>(loop.phi_u.cols()), lam);
      const StabilityReport r = stability_check(closed_loop_matrix(pjm, weight));
      Vector analytic = Vector::Constant(my, nan);
      if (r.stable) {
        try {
          analytic = ramp_static_error(pjm, weight, loop.sample_period);
        } catch (const SingularityError&) {
        }
      }
      SimulationOptions opt;
      opt.divergence_limit = loop.divergence_limit;
      const SimLog log =
          simulate(plant, ControllerVariant::first_order, RampReference(my, loop.sample_period),
                   loop.steps, RegressorWindow::zeros(plant.dims(), 2), weight, opt);
      Vector sim = Vector::Constant(my, nan);
      if (!log.diverged) sim = log.records.back().reference - log.records.back().y;
      double rel = 0.0;
      for (int i = 0; i < my; ++i) {
        const double diff = std::abs(sim[i] - analytic[i]);
        rel = std::max(rel, analytic[i] == 0.0 ? diff : diff / std::abs(analytic[i]));
      }
      std::vector<double> row{lam, r.stable ? 1.0 : 0.0, spectral_radius(r)};
      row.insert(row.end(), sim.data(), sim.data() + my);
      row.insert(row.end(), analytic.data(), analytic.data() + my);
      row.push_back(r.stable ? rel : nan);
      w.row(row);
    }
  }
  std::vector<std::string> series;
  for (int i = 1; i <= my; ++i) {
    series.push_back("ess_sim" + std::to_string(i));
    series.push_back("ess_analytic" + std::to_string(i));
  }
  plot_csv(csv, dir / "sweep.svg", {"Ramp static error vs lambda", "lambda", series, "e_ss"});
  report << "sweep: " << loop.points << " lambda values, wrote " << dir.string() << '\n';
  return kSuccess;
}

int run_stability(const ExperimentConfig& cfg, std::ostream& report) {
  const LoopConfig& loop = cfg.stability;
  const fs::path dir = prepare(cfg, "stability");
  const int my = static_cast<int>(loop.phi_u.rows());
  const Matrix a = output_block(loop);
  const LinearModel plant({a}, {loop.phi_u});
  const PseudoJacobian pjm({a}, {loop.phi_u});

  int agree = 0, total = 0;
  const fs::path csv = dir / "stability.csv";
  {
    auto out = open_out(csv);
    CsvWriter w(out, "stability",
                {"lambda", "stable", "max_root", "margin", "sim_diverged", "agree"});
    for (double lam : lambda_grid(loop)) {
      const Weighting weight = Weighting::uniform(static_cast<int>(loop.phi_u.cols()), lam);
      const StabilityReport r = stability_check(closed_loop_matrix(pjm, weight));
      RegressorWindow init = RegressorWindow::zeros(plant.dims(), 2);
      init = init.advanced(Vector::Ones(my), Vector::Zero(loop.phi_u.cols()));
      SimulationOptions opt;
      opt.divergence_limit = loop.divergence_limit;
      const SimLog log = simulate(plant, ControllerVariant::first_order,
                                  StepReference(Vector::Zero(my)), loop.steps, init, weight, opt);
      const bool same = r.stable == !log.diverged;
      agree += same;
      ++total;
      w.row({lam, r.stable ? 1.0 : 0.0, spectral_radius(r), r.margin, log.diverged ? 1.0 : 0.0,
             same ? 1.0 : 0.0});
    }
  }
  plot_csv(csv, dir / "stability.svg",
           {"Largest characteristic root vs lambda", "lambda", {"max_root"}, "|z|"});
  report << "stability: " << agree << "/" << total
         << " analytic verdicts match simulation, wrote " << dir.string() << '\n';
  return kSuccess;
}

}  // namespace mfac::cli
