#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>


namespace mfac::cli {

namespace {

constexpr double kWidth = 800, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
constexpr std::size_t kMaxPoints = 2000;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

/// 1-2-5 step giving about `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) lo -= 0.5, hi += 0.5;
  }
};

}  // namespace

std::string render_svg(const CsvTable& table, const PlotSpec& spec) {
  const std::vector<double> x = table.values(spec.x_column);
  std::vector<std::vector<double>> ys;
  for (const auto& c : spec.y_columns) {
    ys.push_back(table.values(c));
    if (spec.log_y) {
      for (double& v : ys.back()) v = v > 0.0 ? std::log10(v) : std::nan("");
    }
  }

  Range rx, ry;
  for (double v : x) rx.add(v);
  for (const auto& y : ys) {
    for (double v : y) ry.add(v);
  }
  rx.settle();
  ry.settle();
  const double pad = 0.05 * (ry.hi - ry.lo);
  ry.lo -= pad;
  ry.hi += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto sy = [&](double v) { return kTop + (ry.hi - v) / (ry.hi - ry.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(spec.title) << "</text>\n";

  const double xstep = nice_step(rx.hi - rx.lo, 8);
  for (double t = std::ceil(rx.lo / xstep) * xstep; t <= rx.hi + 1e-9 * xstep; t += xstep) {
    os << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << kTop << "\" x2=\"" << num(sx(t))
       << "\" y2=\"" << kTop + ph << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(sx(t)) << "\" y=\"" << kTop + ph + 16
       << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  const double ystep = nice_step(ry.hi - ry.lo, 6);
  for (double t = std::ceil(ry.lo / ystep) * ystep; t <= ry.hi + 1e-9 * ystep; t += ystep) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << kLeft + pw
       << "\" y2=\"" << num(sy(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(sy(t) + 4) << "\" text-anchor=\"end\">"
       << (spec.log_y ? "1e" + tick_label(t) : tick_label(t)) << "</text>\n";
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\">" << escape(spec.x_column) << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.log_y ? "log10 " + spec.y_label : spec.y_label) << "</text>\n";

  const std::size_t stride = std::max<std::size_t>(1, x.size() / kMaxPoints);
  for (std::size_t s = 0; s < ys.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    std::string points;
    auto flush = [&] {
      if (points.empty()) return;
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\" points=\""
         << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < x.size(); i += stride) {
      const std::size_t j = std::min(i, x.size() - 1);
      if (!std::isfinite(x[j]) || !std::isfinite(ys[s][j])) {
        flush();
        continue;
      }
      points += num(sx(x[j])) + "," + num(sy(ys[s][j])) + " ";
    }
    if (x.size() > 1 && (x.size() - 1) % stride != 0 && std::isfinite(ys[s].back())) {
      points += num(sx(x.back())) + "," + num(sy(ys[s].back())) + " ";
    }
    flush();
    const double ly = kTop + 10 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 36
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + pw + 42 << "\" y=\"" << ly + 4 << "\">"
       << escape(spec.y_columns[s]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void plot_csv(const std::filesystem::path& csv, const std::filesystem::path& svg,
              const PlotSpec& spec) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read " + csv.string());
  const CsvTable table = read_csv(in);
  std::ofstream out(svg);
  if (!out) throw std::runtime_error("cannot write " + svg.string());
  out << render_svg(table, spec);
}

}  // namespace mfac::cli
