#include "mfac/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mfac/csv.hpp"
#include "mfac/errors.hpp"

namespace mfac {

Example1Plant::Example1Plant() : dims_(Dimensions::preferred(2, 2, 0, 1)) {}

Vector Example1Plant::evaluate(const Vector& x) const {
  if (x.size() != argument_size()) throw ShapeError("Example1Plant expects 6 arguments");
  const double y1 = x[0];
  const double y2 = x[1];
  const double u1 = x[2];
  const double u2 = x[3];
  const double u1p = x[4];
  const double u2p = x[5];
  Vector out(2);
  out[0] = -0.1 * y1 * y1 * y1 + 0.2 * y2 * y2 + u1 + u2 * u2 + u1p * u1p * u1p +
           2.0 * u1p * u1p * u1p * u1p;
  out[1] = -0.1 * y1 * y1 + 0.2 * y2 * y2 * y2 + u1 * u1 + 0.8 * u2 + u1p * u1p * u1p +
           u2p * u2p * u2p;
  return out;
}

namespace {

Dimensions linear_dims(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.empty() || b.empty()) throw ShapeError("linear model needs at least one A and one B");
  const auto my = a.front().rows();
  const auto mu = b.front().cols();
  for (const auto& m : a) {
    if (m.rows() != my || m.cols() != my) throw ShapeError("A coefficients must be My x My");
  }
  for (const auto& m : b) {
    if (m.rows() != my || m.cols() != mu) throw ShapeError("B coefficients must be My x Mu");
  }
  return Dimensions::preferred(static_cast<int>(my), static_cast<int>(mu),
                               static_cast<int>(a.size()) - 1, static_cast<int>(b.size()) - 1);
}

}  // namespace

LinearModel::LinearModel(std::vector<Matrix> output_coefficients,
                         std::vector<Matrix> input_coefficients)
    : a_(std::move(output_coefficients)),
      b_(std::move(input_coefficients)),
      dims_(linear_dims(a_, b_)) {}

LinearModel LinearModel::incremental(const PseudoJacobian& pjm) {
  const int my = pjm.output_dim();
  const int ly = pjm.output_order();
  const int lu = pjm.input_order();
  const auto& phi_y = pjm.output_blocks();
  const auto& phi_u = pjm.input_blocks();

  // y(k+1) = y(k) + Σ Φ_i (y(k-i+1) - y(k-i)) + Σ Φ_{Ly+j} (u(k-j+1) - u(k-j))
  std::vector<Matrix> a(static_cast<std::size_t>(ly + 1), Matrix::Zero(my, my));
  a[0] = Matrix::Identity(my, my);
  for (int i = 0; i < ly; ++i) {
    a[static_cast<std::size_t>(i)] += phi_y[static_cast<std::size_t>(i)];
    a[static_cast<std::size_t>(i + 1)] -= phi_y[static_cast<std::size_t>(i)];
  }
  std::vector<Matrix> b(static_cast<std::size_t>(lu + 1), Matrix::Zero(my, pjm.input_dim()));
  for (int j = 0; j < lu; ++j) {
    b[static_cast<std::size_t>(j)] += phi_u[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(j + 1)] -= phi_u[static_cast<std::size_t>(j)];
  }
  return LinearModel(std::move(a), std::move(b));
}

Vector LinearModel::evaluate(const Vector& x) const {
  if (x.size() != argument_size()) throw ShapeError("linear model argument size mismatch");
  const auto my = dims_.output_dim();
  const auto mu = dims_.input_dim();
  Vector out = Vector::Zero(my);
  Eigen::Index offset = 0;
  for (const auto& m : a_) {
    out += m * x.segment(offset, my);
    offset += my;
  }
  for (const auto& m : b_) {
    out += m * x.segment(offset, mu);
    offset += mu;
  }
  return out;
}

Vector example1_reference(long k) {
  if (k < 1 || k > 800) throw RangeError("example reference defined for 1 <= k <= 800");
  const double t = static_cast<double>(k);
  Vector r(2);
  if (k <= 400) {
    r[0] = 0.3 * std::sin(t / 40.0) - 0.2 * std::cos(t / 20.0);
    r[1] = 0.2 * std::sin(t / 10.0) + 0.3 * std::sin(t / 30.0);
  } else {
    const long n = std::lround(t / 50.0);
    const double level = (n % 2 == 0) ? 0.2 : -0.2;
    r[0] = level;
    r[1] = -level;
  }
  return r;
}

Vector StepReference::sample(long k) const {
  return k >= 1 ? value_ : Vector::Zero(value_.size());
}

Vector RampReference::sample(long k) const {
  return Vector::Constant(dim_, slope_ * static_cast<double>(k) * period_);
}

Vector PowerReference::sample(long k) const {
  return Vector::Constant(dim_, std::pow(static_cast<double>(k) * period_, power_));
}

const char* to_string(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::first_order:
      return "first_order";
    case ControllerVariant::quartic:
      return "quartic";
    case ControllerVariant::constrained:
      return "constrained";
  }
  return "unknown";
}

ControllerVariant parse_variant(const std::string& name) {
  if (name == "first_order") return ControllerVariant::first_order;
  if (name == "quartic") return ControllerVariant::quartic;
  if (name == "constrained") return ControllerVariant::constrained;
  throw RangeError("unknown controller variant '" + name + "'");
}

std::vector<std::string> SimLog::header() const {
  std::vector<std::string> h{"k"};
  for (int i = 1; i <= output_dim; ++i) h.push_back("y" + std::to_string(i));
  for (int i = 1; i <= output_dim; ++i) h.push_back("yref" + std::to_string(i));
  for (int i = 1; i <= input_dim; ++i) h.push_back("u" + std::to_string(i));
  for (int i = 1; i <= input_dim; ++i) h.push_back("du" + std::to_string(i));
  h.emplace_back("cost");
  h.emplace_back("iters");
  h.insert(h.end(), pjm_columns.begin(), pjm_columns.end());
  h.emplace_back("cond");
  return h;
}

void SimLog::write_csv(std::ostream& out) const {
  CsvWriter writer(out, "simlog", header());
  std::vector<double> row;
  for (const auto& r : records) {
    row.clear();
    row.push_back(static_cast<double>(r.k));
    row.insert(row.end(), r.y.data(), r.y.data() + r.y.size());
    row.insert(row.end(), r.reference.data(), r.reference.data() + r.reference.size());
    row.insert(row.end(), r.u.data(), r.u.data() + r.u.size());
    row.insert(row.end(), r.delta_u.data(), r.delta_u.data() + r.delta_u.size());
    row.push_back(r.cost);
    row.push_back(static_cast<double>(r.iterations));
    row.insert(row.end(), r.pjm.begin(), r.pjm.end());
    row.push_back(r.condition_number);
    writer.row(row);
  }
}

BoxConstraints example1_box() {
  BoxConstraints box;
  box.lower = Vector(2);
  box.upper = Vector(2);
  box.lower << -0.3, -0.5;
  box.upper << 0.1, 0.5;
  return box;
}

RegressorWindow example1_initial_window() {
  return RegressorWindow::zeros(Example1Plant().dims(), 2);
}

namespace {

Vector reference_at(const ReferenceSignal& reference, long k) {
  const auto last = reference.last_step();
  if (last && k > *last) k = *last;
  return reference.sample(k);
}

bool diverged(const Vector& y, double limit) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || std::abs(y[i]) > limit) return true;
  }
  return false;
}

}  // namespace

SimLog simulate(const DifferentiableModel& plant, ControllerVariant variant,
                const ReferenceSignal& reference, long steps, const RegressorWindow& init,
                const Weighting& weighting, const SimulationOptions& options) {
  const Dimensions& pd = plant.dims();
  if (!pd.output_lag() || !pd.input_lag()) throw ShapeError("plant dimensions must carry lags");
  if (init.dims().output_dim() != pd.output_dim() || init.dims().input_dim() != pd.input_dim()) {
    throw ShapeError("initial window does not match plant signal sizes");
  }
  if (init.output_depth() < *pd.output_lag() + 2 || init.input_depth() < *pd.input_lag() + 2) {
    throw ShapeError("initial window too shallow for the plant lags");
  }
  if (reference.dim() != pd.output_dim()) throw ShapeError("reference size mismatch");
  if (weighting.size() != pd.input_dim()) throw ShapeError("weighting size mismatch");
  if (variant == ControllerVariant::constrained && !options.box) {
    throw ConstraintError("constrained variant requires box constraints");
  }

  const int my = pd.output_dim();
  const int mu = pd.input_dim();
  const Dimensions pjm_dims = Dimensions::preferred(my, mu, *pd.output_lag(), *pd.input_lag());
  const PseudoJacobian seed = PseudoJacobian::constant(pjm_dims, options.seed_pjm_value);

  SimLog log;
  log.output_dim = my;
  log.input_dim = mu;
  log.pjm_columns = seed.column_names();

  // Warm-up rows already held in the initial window.
  const long t0 = init.timestamp();
  const double seed_cond = condition_number(seed.leading_input_block());
  for (long k = std::max(1L, t0 - init.output_depth() + 1); k <= t0; ++k) {
    const int lag = static_cast<int>(t0 - k);
    SimRecord rec;
    rec.k = k;
    rec.y = init.output(lag);
    rec.reference = reference_at(reference, k);
    rec.u = lag < init.input_depth() ? init.input(lag) : Vector::Zero(mu);
    rec.delta_u = lag + 1 < init.input_depth() ? Vector(rec.u - init.input(lag + 1)) : rec.u;
    rec.pjm = seed.row_major();
    rec.condition_number = seed_cond;
    log.records.push_back(std::move(rec));
  }

  RegressorWindow window = init;
  for (long k = t0 + 1; k <= steps; ++k) {
    const Vector y = plant.evaluate(model_arguments(pd, window));
    if (diverged(y, options.divergence_limit)) {
      SimRecord rec;
      rec.k = k;
      rec.y = y;
      rec.reference = reference_at(reference, k);
      rec.u = window.input(0);
      rec.delta_u = Vector::Zero(mu);
      rec.pjm = std::vector<double>(log.pjm_columns.size(),
                                    std::numeric_limits<double>::quiet_NaN());
      rec.cost = std::numeric_limits<double>::quiet_NaN();
      rec.condition_number = std::numeric_limits<double>::quiet_NaN();
      log.records.push_back(std::move(rec));
      log.diverged = true;
      log.divergence_step = k;
      break;
    }

    const Vector target = reference_at(reference, k + 1);
    ControlDecision d;
    switch (variant) {
      case ControllerVariant::first_order: {
        const PseudoJacobian pjm = pjm_first_order(plant, window);
        d = mfac_step(pjm, window, y, target, weighting);
        d.pjm = pjm;
        break;
      }
      case ControllerVariant::quartic:
        d = mfac_quartic_step(plant, window, y, target, weighting);
        break;
      case ControllerVariant::constrained: {
        const PseudoJacobian pjm = pjm_first_order(plant, window);
        d = mfac_constrained_step(pjm, window, y, target, weighting, *options.box);
        d.pjm = pjm;
        break;
      }
    }

    SimRecord rec;
    rec.k = k;
    rec.y = y;
    rec.reference = reference_at(reference, k);
    rec.u = d.u;
    rec.delta_u = d.delta_u;
    rec.pjm = d.pjm ? d.pjm->row_major() : seed.row_major();
    rec.cost = d.cost;
    rec.iterations = d.iterations;
    rec.condition_number = d.condition_number;
    log.records.push_back(std::move(rec));

    window = window.advanced(y, d.u);
  }
  return log;
}

TrackingMetrics metrics(const SimLog& log, long transient_cutoff,
                        const std::optional<BoxConstraints>& box, std::optional<long> last) {
  if (log.records.empty() || transient_cutoff >= log.records.back().k) {
    throw RangeError("metrics window is empty");
  }
  TrackingMetrics m;
  m.rmse = Vector::Zero(log.output_dim);
  m.max_abs_error = Vector::Zero(log.output_dim);
  for (const auto& r : log.records) {
    if (r.k <= transient_cutoff || (last && r.k > *last)) continue;
    const Vector e = (r.reference - r.y).cwiseAbs();
    m.rmse += e.cwiseProduct(e);
    m.max_abs_error = m.max_abs_error.cwiseMax(e);
    if (box && !box->contains(r.u)) ++m.constraint_violations;
    ++m.samples;
  }
  if (m.samples == 0) throw RangeError("metrics window is empty");
  m.rmse = (m.rmse / static_cast<double>(m.samples)).cwiseSqrt();
  return m;
}

}  // namespace mfac
