#include "mfac/edlm.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mfac/errors.hpp"

namespace mfac {
namespace {

constexpr double kHessianStep = 1e-4;

double jacobian_step(double x) { return std::max(1e-6, 1e-6 * std::abs(x)); }

void require(bool condition, const std::string& message) {
  if (!condition) throw ShapeError(message);
}

Vector checked_eval(const DifferentiableModel& model, const Vector& args, long index) {
  Vector out = model.evaluate(args);
  if (out.size() != model.dims().output_dim()) {
    throw ShapeError("model returned " + std::to_string(out.size()) + " outputs, expected " +
                     std::to_string(model.dims().output_dim()));
  }
  if (!out.allFinite()) throw NumericError("model evaluation is not finite", index);
  return out;
}

struct ArgumentBlock {
  int offset;
  int size;
};

// Argument blocks in model order: y(k) … y(k-ny), u(k) … u(k-nu).
std::vector<ArgumentBlock> argument_blocks(const Dimensions& d) {
  std::vector<ArgumentBlock> blocks;
  int offset = 0;
  for (int i = 0; i <= *d.output_lag(); ++i) {
    blocks.push_back({offset, d.output_dim()});
    offset += d.output_dim();
  }
  for (int j = 0; j <= *d.input_lag(); ++j) {
    blocks.push_back({offset, d.input_dim()});
    offset += d.input_dim();
  }
  return blocks;
}

const Dimensions& model_dims_checked(const DifferentiableModel& model) {
  const Dimensions& d = model.dims();
  if (!d.output_lag() || !d.input_lag()) {
    throw ShapeError("model dimensions must carry both output and input lags");
  }
  return d;
}

PseudoJacobian split_jacobian(const Dimensions& d, const Matrix& jac) {
  const auto blocks = argument_blocks(d);
  const int ny1 = *d.output_lag() + 1;
  std::vector<Matrix> out_blocks;
  std::vector<Matrix> in_blocks;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Matrix m = jac.middleCols(blocks[b].offset, blocks[b].size);
    if (static_cast<int>(b) < ny1) {
      out_blocks.push_back(std::move(m));
    } else {
      in_blocks.push_back(std::move(m));
    }
  }
  return PseudoJacobian(std::move(out_blocks), std::move(in_blocks));
}

// Hessians of every output row with respect to one argument block.
std::vector<Matrix> block_hessians(const DifferentiableModel& model, const Vector& x,
                                   const ArgumentBlock& block) {
  const int rows = model.dims().output_dim();
  const int n = block.size;
  const double h = kHessianStep;
  std::vector<Matrix> hess(static_cast<std::size_t>(rows), Matrix::Zero(n, n));
  const Vector f0 = checked_eval(model, x, -1);

  for (int p = 0; p < n; ++p) {
    const int ip = block.offset + p;
    Vector xp = x;
    Vector xm = x;
    xp(ip) += h;
    xm(ip) -= h;
    const Vector second = (checked_eval(model, xp, ip) - 2.0 * f0 + checked_eval(model, xm, ip)) /
                          (h * h);
    for (int r = 0; r < rows; ++r) hess[r](p, p) = second(r);

    for (int q = p + 1; q < n; ++q) {
      const int iq = block.offset + q;
      Vector xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(ip) += h;
      xpp(iq) += h;
      xpm(ip) += h;
      xpm(iq) -= h;
      xmp(ip) -= h;
      xmp(iq) += h;
      xmm(ip) -= h;
      xmm(iq) -= h;
      const Vector mixed = (checked_eval(model, xpp, ip) - checked_eval(model, xpm, ip) -
                            checked_eval(model, xmp, ip) + checked_eval(model, xmm, ip)) /
                           (4.0 * h * h);
      for (int r = 0; r < rows; ++r) {
        hess[r](p, q) = mixed(r);
        hess[r](q, p) = mixed(r);
      }
    }
  }
  return hess;
}

}  // namespace

// --- Dimensions -----------------------------------------------------------

Dimensions::Dimensions(int output_dim, int input_dim, int output_order, int input_order,
                       std::optional<int> output_lag, std::optional<int> input_lag)
    : output_dim_(output_dim),
      input_dim_(input_dim),
      output_order_(output_order),
      input_order_(input_order),
      output_lag_(output_lag),
      input_lag_(input_lag) {
  require(output_dim >= 1 && input_dim >= 1, "signal dimensions must be positive");
  require(output_order >= 0, "output pseudo order must be >= 0");
  require(input_order >= 1, "input pseudo order must be >= 1");
  require(!output_lag || *output_lag >= 0, "output lag must be >= 0");
  require(!input_lag || *input_lag >= 0, "input lag must be >= 0");
}

Dimensions Dimensions::preferred(int output_dim, int input_dim, int output_lag, int input_lag) {
  return Dimensions(output_dim, input_dim, output_lag + 1, input_lag + 1, output_lag, input_lag);
}

bool Dimensions::same_layout(const Dimensions& other) const noexcept {
  return output_dim_ == other.output_dim_ && input_dim_ == other.input_dim_ &&
         output_order_ == other.output_order_ && input_order_ == other.input_order_;
}

// --- RegressorWindow ------------------------------------------------------

RegressorWindow::RegressorWindow(Dimensions dims, std::vector<Vector> outputs,
                                 std::vector<Vector> inputs, long timestamp)
    : dims_(std::move(dims)),
      outputs_(std::move(outputs)),
      inputs_(std::move(inputs)),
      timestamp_(timestamp) {
  require(static_cast<int>(outputs_.size()) >= dims_.output_order() + 1,
          "window needs at least Ly+1 outputs");
  require(static_cast<int>(inputs_.size()) >= dims_.input_order() + 1,
          "window needs at least Lu+1 inputs");
  for (const auto& y : outputs_) {
    require(y.size() == dims_.output_dim(), "output vector length differs from output_dim");
  }
  for (const auto& u : inputs_) {
    require(u.size() == dims_.input_dim(), "input vector length differs from input_dim");
  }
}

RegressorWindow RegressorWindow::zeros(const Dimensions& dims, long timestamp) {
  const int ny = std::max(dims.output_order() + 1, dims.output_lag().value_or(0) + 2);
  const int nu = std::max(dims.input_order() + 1, dims.input_lag().value_or(0) + 2);
  return RegressorWindow(dims,
                         std::vector<Vector>(static_cast<std::size_t>(ny),
                                             Vector::Zero(dims.output_dim())),
                         std::vector<Vector>(static_cast<std::size_t>(nu),
                                             Vector::Zero(dims.input_dim())),
                         timestamp);
}

const Vector& RegressorWindow::output(int lag) const {
  if (lag < 0 || lag >= output_depth()) throw RangeError("output lag outside window");
  return outputs_[static_cast<std::size_t>(lag)];
}

const Vector& RegressorWindow::input(int lag) const {
  if (lag < 0 || lag >= input_depth()) throw RangeError("input lag outside window");
  return inputs_[static_cast<std::size_t>(lag)];
}

Vector RegressorWindow::stacked() const {
  const int my = dims_.output_dim();
  const int mu = dims_.input_dim();
  Vector h(dims_.regressor_size());
  int offset = 0;
  for (int i = 0; i < dims_.output_order(); ++i, offset += my) h.segment(offset, my) = output(i);
  for (int j = 0; j < dims_.input_order(); ++j, offset += mu) h.segment(offset, mu) = input(j);
  return h;
}

Vector RegressorWindow::delta() const {
  const int my = dims_.output_dim();
  const int mu = dims_.input_dim();
  Vector dh(dims_.regressor_size());
  int offset = 0;
  for (int i = 0; i < dims_.output_order(); ++i, offset += my) {
    dh.segment(offset, my) = output(i) - output(i + 1);
  }
  for (int j = 0; j < dims_.input_order(); ++j, offset += mu) {
    dh.segment(offset, mu) = input(j) - input(j + 1);
  }
  return dh;
}

RegressorWindow RegressorWindow::advanced(const Vector& next_output,
                                          const Vector& next_input) const {
  std::vector<Vector> ys;
  ys.reserve(outputs_.size());
  ys.push_back(next_output);
  ys.insert(ys.end(), outputs_.begin(), outputs_.end() - 1);
  std::vector<Vector> us;
  us.reserve(inputs_.size());
  us.push_back(next_input);
  us.insert(us.end(), inputs_.begin(), inputs_.end() - 1);
  return RegressorWindow(dims_, std::move(ys), std::move(us), timestamp_ + 1);
}

Vector build_delta_regressor(const RegressorWindow& now, const RegressorWindow& prev) {
  if (!now.dims().same_layout(prev.dims())) {
    throw ShapeError("windows have different dimensions");
  }
  return now.stacked() - prev.stacked();
}

// --- PseudoJacobian -------------------------------------------------------

PseudoJacobian::PseudoJacobian(std::vector<Matrix> output_blocks, std::vector<Matrix> input_blocks)
    : output_blocks_(std::move(output_blocks)), input_blocks_(std::move(input_blocks)) {
  require(!input_blocks_.empty(), "pseudo Jacobian needs at least one input block");
  output_dim_ = static_cast<int>(input_blocks_.front().rows());
  input_dim_ = static_cast<int>(input_blocks_.front().cols());
  require(output_dim_ >= 1 && input_dim_ >= 1, "empty input block");
  for (const auto& b : output_blocks_) {
    require(b.rows() == output_dim_ && b.cols() == output_dim_, "output block must be My x My");
    if (!b.allFinite()) throw NumericError("non-finite pseudo Jacobian entry");
  }
  for (const auto& b : input_blocks_) {
    require(b.rows() == output_dim_ && b.cols() == input_dim_, "input block must be My x Mu");
    if (!b.allFinite()) throw NumericError("non-finite pseudo Jacobian entry");
  }
}

PseudoJacobian PseudoJacobian::constant(const Dimensions& dims, double value) {
  return from_flattened(dims,
                        Matrix::Constant(dims.output_dim(), dims.regressor_size(), value));
}

PseudoJacobian PseudoJacobian::from_flattened(const Dimensions& dims, const Matrix& flat) {
  require(flat.rows() == dims.output_dim() && flat.cols() == dims.regressor_size(),
          "flattened pseudo Jacobian has the wrong shape");
  const int my = dims.output_dim();
  const int mu = dims.input_dim();
  std::vector<Matrix> out_blocks;
  std::vector<Matrix> in_blocks;
  int offset = 0;
  for (int i = 0; i < dims.output_order(); ++i, offset += my) {
    out_blocks.emplace_back(flat.middleCols(offset, my));
  }
  for (int j = 0; j < dims.input_order(); ++j, offset += mu) {
    in_blocks.emplace_back(flat.middleCols(offset, mu));
  }
  return PseudoJacobian(std::move(out_blocks), std::move(in_blocks));
}

Dimensions PseudoJacobian::dims() const {
  return Dimensions(output_dim_, input_dim_, output_order(), input_order());
}

Matrix PseudoJacobian::flattened() const {
  Matrix flat(output_dim_, output_order() * output_dim_ + input_order() * input_dim_);
  int offset = 0;
  for (const auto& b : output_blocks_) {
    flat.middleCols(offset, b.cols()) = b;
    offset += static_cast<int>(b.cols());
  }
  for (const auto& b : input_blocks_) {
    flat.middleCols(offset, b.cols()) = b;
    offset += static_cast<int>(b.cols());
  }
  return flat;
}

std::vector<double> PseudoJacobian::row_major() const {
  const Matrix flat = flattened();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(flat.size()));
  for (Eigen::Index r = 0; r < flat.rows(); ++r) {
    for (Eigen::Index c = 0; c < flat.cols(); ++c) values.push_back(flat(r, c));
  }
  return values;
}

std::vector<std::string> PseudoJacobian::column_names() const {
  std::vector<std::string> names;
  const int blocks = output_order() + input_order();
  for (int r = 0; r < output_dim_; ++r) {
    for (int b = 0; b < blocks; ++b) {
      const int cols = b < output_order() ? output_dim_ : input_dim_;
      for (int c = 0; c < cols; ++c) {
        names.push_back("Phi" + std::to_string(b + 1) + "[" + std::to_string(r) + "," +
                        std::to_string(c) + "]");
      }
    }
  }
  return names;
}

Vector predict_delta_output(const PseudoJacobian& pjm, const Vector& delta_regressor) {
  const Matrix flat = pjm.flattened();
  if (flat.cols() != delta_regressor.size()) {
    throw ShapeError("regressor length " + std::to_string(delta_regressor.size()) +
                     " does not match pseudo Jacobian width " + std::to_string(flat.cols()));
  }
  return flat * delta_regressor;
}

// --- models ---------------------------------------------------------------

int DifferentiableModel::argument_size() const {
  const Dimensions& d = dims();
  return (d.output_lag().value_or(0) + 1) * d.output_dim() +
         (d.input_lag().value_or(0) + 1) * d.input_dim();
}

Vector model_arguments(const Dimensions& model_dims, const RegressorWindow& window) {
  if (!model_dims.output_lag() || !model_dims.input_lag()) {
    throw ShapeError("model dimensions must carry both output and input lags");
  }
  if (window.dims().output_dim() != model_dims.output_dim() ||
      window.dims().input_dim() != model_dims.input_dim()) {
    throw ShapeError("window signal sizes differ from the model");
  }
  const int ny1 = *model_dims.output_lag() + 1;
  const int nu1 = *model_dims.input_lag() + 1;
  if (window.output_depth() < ny1 || window.input_depth() < nu1) {
    throw ShapeError("window is shallower than the model lags");
  }
  const int my = model_dims.output_dim();
  const int mu = model_dims.input_dim();
  Vector args(ny1 * my + nu1 * mu);
  int offset = 0;
  for (int i = 0; i < ny1; ++i, offset += my) args.segment(offset, my) = window.output(i);
  for (int j = 0; j < nu1; ++j, offset += mu) args.segment(offset, mu) = window.input(j);
  return args;
}

Increments increments_from(const Dimensions& model_dims, const RegressorWindow& history,
                           const Vector& current_output, const Vector& current_delta_input) {
  const int ny = model_dims.output_lag().value_or(0);
  const int nu = model_dims.input_lag().value_or(0);
  if (history.output_depth() < ny + 1 || history.input_depth() < nu + 1) {
    throw ShapeError("history too shallow for the model increments");
  }
  if (current_output.size() != model_dims.output_dim() ||
      current_delta_input.size() != model_dims.input_dim()) {
    throw ShapeError("current output/input increment has the wrong length");
  }
  Increments inc;
  inc.outputs.push_back(current_output - history.output(0));
  for (int i = 1; i <= ny; ++i) inc.outputs.push_back(history.output(i - 1) - history.output(i));
  inc.inputs.push_back(current_delta_input);
  for (int j = 1; j <= nu; ++j) inc.inputs.push_back(history.input(j - 1) - history.input(j));
  return inc;
}

Matrix model_jacobian(const DifferentiableModel& model, const Vector& arguments) {
  if (arguments.size() != model.argument_size()) {
    throw ShapeError("argument vector has the wrong length");
  }
  const int rows = model.dims().output_dim();
  Matrix jac(rows, arguments.size());
  for (Eigen::Index c = 0; c < arguments.size(); ++c) {
    const double h = jacobian_step(arguments(c));
    Vector xp = arguments;
    Vector xm = arguments;
    xp(c) += h;
    xm(c) -= h;
    // The realized step differs from h by rounding of x +- h.
    const double span = xp(c) - xm(c);
    jac.col(c) = (checked_eval(model, xp, c) - checked_eval(model, xm, c)) / span;
  }
  return jac;
}

PseudoJacobian pjm_first_order(const DifferentiableModel& model,
                               const RegressorWindow& operating_point) {
  const Dimensions& d = model_dims_checked(model);
  return split_jacobian(d, model_jacobian(model, model_arguments(d, operating_point)));
}

PseudoJacobian pjm_first_order(const DifferentiableModel& model,
                               const RegressorWindow& operating_point, const Dimensions& target) {
  const Dimensions& d = model_dims_checked(model);
  if (target.output_dim() != d.output_dim() || target.input_dim() != d.input_dim()) {
    throw ShapeError("target dimensions differ from the model");
  }
  if (target.output_order() < *d.output_lag() + 1 || target.input_order() < *d.input_lag() + 1) {
    throw ShapeError("pseudo orders below the model orders need residual absorption, unsupported");
  }
  PseudoJacobian base = pjm_first_order(model, operating_point);
  std::vector<Matrix> out_blocks = base.output_blocks();
  std::vector<Matrix> in_blocks = base.input_blocks();
  while (static_cast<int>(out_blocks.size()) < target.output_order()) {
    out_blocks.push_back(Matrix::Zero(d.output_dim(), d.output_dim()));
  }
  while (static_cast<int>(in_blocks.size()) < target.input_order()) {
    in_blocks.push_back(Matrix::Zero(d.output_dim(), d.input_dim()));
  }
  return PseudoJacobian(std::move(out_blocks), std::move(in_blocks));
}

PseudoJacobian pjm_second_order(const DifferentiableModel& model,
                                const RegressorWindow& operating_point,
                                const Increments& deltas) {
  const Dimensions& d = model_dims_checked(model);
  const int ny1 = *d.output_lag() + 1;
  const int nu1 = *d.input_lag() + 1;
  if (static_cast<int>(deltas.outputs.size()) != ny1 ||
      static_cast<int>(deltas.inputs.size()) != nu1) {
    throw ShapeError("increments must cover every model argument block");
  }
  const Vector x = model_arguments(d, operating_point);
  PseudoJacobian first = split_jacobian(d, model_jacobian(model, x));
  std::vector<Matrix> out_blocks = first.output_blocks();
  std::vector<Matrix> in_blocks = first.input_blocks();
  const auto blocks = argument_blocks(d);

  auto correct = [&](Matrix& target, const Vector& delta, const ArgumentBlock& block) {
    if (delta.size() != block.size) throw ShapeError("increment has the wrong length");
    if (delta.isZero(0.0)) return;
    const auto hess = block_hessians(model, x, block);
    for (int r = 0; r < d.output_dim(); ++r) {
      target.row(r) += 0.5 * (hess[static_cast<std::size_t>(r)] * delta).transpose();
    }
  };

  for (int i = 0; i < ny1; ++i) {
    correct(out_blocks[static_cast<std::size_t>(i)], deltas.outputs[static_cast<std::size_t>(i)],
            blocks[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < nu1; ++j) {
    correct(in_blocks[static_cast<std::size_t>(j)], deltas.inputs[static_cast<std::size_t>(j)],
            blocks[static_cast<std::size_t>(ny1 + j)]);
  }
  return PseudoJacobian(std::move(out_blocks), std::move(in_blocks));
}

}  // namespace mfac
