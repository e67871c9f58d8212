#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mfac/csv.hpp"

namespace mfac::cli {

namespace {

namespace pt = boost::property_tree;

constexpr double kDeg = std::numbers::pi / 180.0;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"output", {"root"}},
      {"example1", {"lambda", "steps", "transient_cutoff", "smooth_end", "variants"}},
      {"example2", {"tf", "T0", "cap", "chain", "start_q_deg", "goal_q_deg", "cond_threshold"}},
      {"sweep",
       {"phi_y", "phi_u", "lambda_min", "lambda_max", "points", "steps", "sample_period",
        "divergence_limit"}},
      {"stability",
       {"phi_y", "phi_u", "lambda_min", "lambda_max", "points", "steps", "sample_period",
        "divergence_limit"}},
  };
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<long>(d);
}

Vector to_vector(const std::string& key, const std::string& v, double scale) {
  std::istringstream ss(v);
  std::vector<double> values;
  for (std::string tok; ss >> tok;) values.push_back(to_double(key, tok) * scale);
  Vector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[i];
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void apply_loop(LoopConfig& loop, const std::string& section, const pt::ptree& tree) {
  for (const auto& [key, node] : tree) {
    const std::string v = node.get_value<std::string>();
    const std::string name = section + "." + key;
    if (key == "phi_y") loop.phi_y = parse_matrix(v);
    else if (key == "phi_u") loop.phi_u = parse_matrix(v);
    else if (key == "lambda_min") loop.lambda_min = to_double(name, v);
    else if (key == "lambda_max") loop.lambda_max = to_double(name, v);
    else if (key == "points") loop.points = static_cast<int>(to_long(name, v));
    else if (key == "steps") loop.steps = to_long(name, v);
    else if (key == "sample_period") loop.sample_period = to_double(name, v);
    else if (key == "divergence_limit") loop.divergence_limit = to_double(name, v);
  }
}

void validate(const ExperimentConfig& c) {
  const auto& e1 = c.example1;
  require(e1.lambda >= 0.0, "example1.lambda must be >= 0");
  require(e1.steps >= 3, "example1.steps must be >= 3");
  require(e1.transient_cutoff >= 0, "example1.transient_cutoff must be >= 0");
  require(!e1.variants.empty(), "example1.variants is empty");
  const auto& e2 = c.example2;
  require(e2.tf > 0.0 && e2.T0 > 0.0 && e2.T0 <= e2.tf, "example2 needs 0 < T0 <= tf");
  require(e2.cap >= 1, "example2.cap must be >= 1");
  require(e2.start_q.size() == e2.goal_q.size(), "example2 start and goal joint counts differ");
  for (const auto* loop : {&c.sweep, &c.stability}) {
    require(loop->phi_u.size() > 0, "phi_u must not be empty");
    require(loop->phi_u.rows() == loop->phi_u.cols(), "phi_u must be square");
    require(loop->phi_y.size() == 0 || (loop->phi_y.rows() == loop->phi_u.rows() &&
                                        loop->phi_y.cols() == loop->phi_u.rows()),
            "phi_y must match phi_u's output size");
    require(loop->points >= 1, "points must be >= 1");
    require(loop->lambda_min >= 0.0 && loop->lambda_max >= loop->lambda_min,
            "need 0 <= lambda_min <= lambda_max");
    require(loop->steps >= 3, "steps must be >= 3");
    require(loop->sample_period > 0.0, "sample_period must be > 0");
    require(loop->divergence_limit > 0.0, "divergence_limit must be > 0");
  }
}

}  // namespace

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream all(text);
  for (std::string row; std::getline(all, row, ';');) {
    std::istringstream ss(row);
    std::vector<double> values;
    for (std::string tok; ss >> tok;) values.push_back(to_double("matrix entry", tok));
    if (!values.empty()) rows.push_back(std::move(values));
  }
  if (rows.empty()) return Matrix(0, 0);
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ConfigError("ragged matrix '" + text + "'");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  const char* env = std::getenv("MFAC_OUT");
  c.output_root = env && *env ? env : "mfac-out";
  c.example2.start_q = Vector(6);
  c.example2.start_q << -90, 0, 0, 0, -90, 0;
  c.example2.start_q *= kDeg;
  c.example2.goal_q = Vector(6);
  c.example2.goal_q << 90, 0, 0, 0, 90, 0;
  c.example2.goal_q *= kDeg;

  c.sweep.phi_u = Matrix::Ones(1, 1);

  c.stability.phi_y = Matrix::Constant(1, 1, 2.0);
  c.stability.phi_u = Matrix::Ones(1, 1);
  c.stability.lambda_min = 0.01;
  c.stability.lambda_max = 3.0;
  c.stability.points = 30;
  c.stability.sample_period = 1.0;
  return c;
}

ExperimentConfig load_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig c = default_config();
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      throw ConfigError(body.empty() ? "key outside any section: " + section
                                     : "unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
    }
    if (section == "output") {
      c.output_root = body.get<std::string>("root", c.output_root.string());
    } else if (section == "example1") {
      for (const auto& [key, node] : body) {
        const std::string v = node.get_value<std::string>();
        const std::string name = "example1." + key;
        if (key == "lambda") c.example1.lambda = to_double(name, v);
        else if (key == "steps") c.example1.steps = to_long(name, v);
        else if (key == "transient_cutoff") c.example1.transient_cutoff = to_long(name, v);
        else if (key == "smooth_end") c.example1.smooth_end = to_long(name, v);
        else if (key == "variants") {
          c.example1.variants.clear();
          std::string list = v;
          for (char& ch : list) ch = ch == ',' ? ' ' : ch;
          std::istringstream ss(list);
          for (std::string tok; ss >> tok;) {
            try {
              c.example1.variants.push_back(parse_variant(tok));
            } catch (const std::exception& e) {
              throw ConfigError(name + ": " + e.what());
            }
          }
        }
      }
    } else if (section == "example2") {
      for (const auto& [key, node] : body) {
        const std::string v = node.get_value<std::string>();
        const std::string name = "example2." + key;
        if (key == "tf") c.example2.tf = to_double(name, v);
        else if (key == "T0") c.example2.T0 = to_double(name, v);
        else if (key == "cap") c.example2.cap = static_cast<int>(to_long(name, v));
        else if (key == "chain") c.example2.chain = v;
        else if (key == "start_q_deg") c.example2.start_q = to_vector(name, v, kDeg);
        else if (key == "goal_q_deg") c.example2.goal_q = to_vector(name, v, kDeg);
        else if (key == "cond_threshold") c.example2.cond_threshold = to_double(name, v);
      }
    } else {
      apply_loop(section == "sweep" ? c.sweep : c.stability, section, body);
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return load_config(in);
}

namespace {

std::string matrix_text(const Matrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += "; ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ' ';
      out += format_number(m(r, c));
    }
  }
  return out;
}

std::string vector_deg(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_number(std::round(v[i] / kDeg * 1e9) / 1e9);
  }
  return out;
}

void describe_loop(std::ostringstream& os, const char* name, const LoopConfig& l) {
  os << "\n[" << name << "]\n"
     << "phi_y = " << matrix_text(l.phi_y) << "\n"
     << "phi_u = " << matrix_text(l.phi_u) << "\n"
     << "lambda_min = " << format_number(l.lambda_min) << "\n"
     << "lambda_max = " << format_number(l.lambda_max) << "\n"
     << "points = " << l.points << "\n"
     << "steps = " << l.steps << "\n"
     << "sample_period = " << format_number(l.sample_period) << "\n"
     << "divergence_limit = " << format_number(l.divergence_limit) << "\n";
}

}  // namespace

std::string describe(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "# effective configuration\n[output]\nroot = " << c.output_root.string() << "\n";
  os << "\n[example1]\nlambda = " << format_number(c.example1.lambda)
     << "\nsteps = " << c.example1.steps
     << "\ntransient_cutoff = " << c.example1.transient_cutoff
     << "\nsmooth_end = " << c.example1.smooth_end << "\nvariants =";
  for (auto v : c.example1.variants) os << ' ' << to_string(v);
  os << "\n\n[example2]\ntf = " << format_number(c.example2.tf)
     << "\nT0 = " << format_number(c.example2.T0) << "\ncap = " << c.example2.cap << "\n";
  if (c.example2.chain) os << "chain = " << c.example2.chain->string() << "\n";
  os << "start_q_deg = " << vector_deg(c.example2.start_q)
     << "\ngoal_q_deg = " << vector_deg(c.example2.goal_q)
     << "\ncond_threshold = " << format_number(c.example2.cond_threshold) << "\n";
  describe_loop(os, "sweep", c.sweep);
  describe_loop(os, "stability", c.stability);
  return os.str();
}

}  // namespace mfac::cli
