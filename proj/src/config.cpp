#include "owell/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace owell {

namespace {

struct Cursor {
  std::string file;
  int line = 0;
  int col = 0;
  std::string at() const {
    return file + ":" + std::to_string(line) + ":" + std::to_string(col);
  }
};

[[noreturn]] void fail(const Cursor& c, const std::string& msg) {
  throw InvalidInput("config " + c.at() + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const Cursor& c) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') fail(c, "expected a number, got '" + v + "'");
  return x;
}

int parse_int(const std::string& v, const Cursor& c) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    fail(c, "expected an integer, got '" + v + "'");
  return int(x);
}

bool parse_bool(const std::string& v, const Cursor& c) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(c, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

} // namespace

RunConfig RunConfig::parse_string(const std::string& text, const std::string& name) {
  RunConfig cfg;
  Cursor cur{name, 0, 1};
  std::string section;
  std::istringstream in(text);
  std::string raw;

  while (std::getline(in, raw)) {
    ++cur.line;
    cur.col = 1;
    std::string line = raw;
    std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(cur, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"grid",    "potential", "obstacle",
                                    "nonlinearity", "problem", "solver",
                                    "sweep",   "output"};
      bool ok = false;
      for (const char* s : known) ok = ok || section == s;
      if (!ok) fail(cur, "unknown section [" + section + "]");
      continue;
    }

    std::size_t eq = raw.find('=');
    if (eq == std::string::npos) fail(cur, "expected key = value");
    std::string key = trim(raw.substr(0, eq));
    std::string val = raw.substr(eq + 1);
    std::size_t vcomment = val.find_first_of("#;");
    if (vcomment != std::string::npos) val = val.substr(0, vcomment);
    val = trim(val);
    cur.col = int(raw.find_first_not_of(" \t")) + 1;
    if (key.empty()) fail(cur, "empty key");
    if (section.empty()) fail(cur, "key '" + key + "' outside any section");

    auto unknown = [&]() {
      fail(cur, "unknown key '" + key + "' in section [" + section + "]");
    };

    if (section == "grid") {
      if (key == "dimension") cfg.dimension = parse_int(val, cur);
      else if (key == "nodes_per_axis") cfg.nodes_per_axis = parse_int(val, cur);
      else if (key == "half_extent") cfg.half_extent = parse_double(val, cur);
      else unknown();
    } else if (section == "potential") {
      if (key == "well_radius") cfg.well_radius = parse_double(val, cur);
      else if (key == "scale") cfg.scale = parse_double(val, cur);
      else if (key == "tilde_radius") cfg.tilde_radius = parse_double(val, cur);
      else unknown();
    } else if (section == "obstacle") {
      if (key == "center") {
        auto items = split_list(val);
        if (items.size() < 2 || items.size() > 3)
          fail(cur, "center needs 2 or 3 comma-separated coordinates");
        cfg.center = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < items.size(); ++i)
          cfg.center[i] = parse_double(items[i], cur);
      } else if (key == "radius") cfg.radius = parse_double(val, cur);
      else if (key == "height") cfg.height = parse_double(val, cur);
      else if (key == "outside_depth") cfg.outside_depth = parse_double(val, cur);
      else unknown();
    } else if (section == "nonlinearity") {
      if (key == "variant") {
        if (val != "power_critical" && val != "exp_critical")
          fail(cur, "variant must be power_critical or exp_critical");
        cfg.variant = val;
      } else if (key == "mu") cfg.mu = parse_double(val, cur);
      else if (key == "q") cfg.q = parse_double(val, cur);
      else if (key == "nu") cfg.nu = parse_double(val, cur);
      else if (key == "p") cfg.p = parse_double(val, cur);
      else if (key == "alpha0") cfg.alpha0 = parse_double(val, cur);
      else if (key == "theta") cfg.theta = parse_double(val, cur);
      else unknown();
    } else if (section == "problem") {
      if (key == "lambda") cfg.lambda = parse_double(val, cur);
      else if (key == "epsilon") cfg.epsilon = parse_double(val, cur);
      else unknown();
    } else if (section == "solver") {
      if (key == "path_points") cfg.solver.path_points = parse_int(val, cur);
      else if (key == "grad_tol") cfg.solver.grad_tol = parse_double(val, cur);
      else if (key == "max_outer") cfg.solver.max_outer = parse_int(val, cur);
      else if (key == "armijo_c") cfg.solver.armijo_c = parse_double(val, cur);
      else if (key == "armijo_backtrack")
        cfg.solver.armijo_backtrack = parse_double(val, cur);
      else if (key == "newton_tol") cfg.solver.newton_tol = parse_double(val, cur);
      else if (key == "newton_max") cfg.solver.newton_max = parse_int(val, cur);
      else if (key == "rng_seed")
        cfg.solver.rng_seed = std::uint64_t(std::strtoull(val.c_str(), nullptr, 10));
      else unknown();
    } else if (section == "sweep") {
      if (key == "eps0") cfg.eps0 = parse_double(val, cur);
      else if (key == "eps_steps") cfg.eps_steps = parse_int(val, cur);
      else if (key == "lambda_base") cfg.lambda_base = parse_double(val, cur);
      else if (key == "lambda_steps") cfg.lambda_steps = parse_int(val, cur);
      else unknown();
    } else if (section == "output") {
      if (key == "dir") cfg.dir = val;
      else if (key == "dump_fields") cfg.dump_fields = parse_bool(val, cur);
      else if (key == "formats") {
        cfg.formats = split_list(val);
        for (const auto& f : cfg.formats)
          if (f != "csv" && f != "json" && f != "raw")
            fail(cur, "unknown format '" + f + "' (csv, json, raw)");
      } else unknown();
    }
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

NonlinearitySpec RunConfig::build_nonlinearity() const {
  if (variant == "power_critical")
    return NonlinearitySpec::power_critical(dimension, mu, q);
  return NonlinearitySpec::exp_critical(dimension, nu, p, alpha0, theta);
}

ProblemSpec RunConfig::build_problem() const {
  auto grid = GridSpec::make(dimension, nodes_per_axis, half_extent);
  PotentialSpec pot{well_radius, scale, tilde_radius};
  ObstacleSpec obs{center, radius, height, outside_depth};
  return ProblemSpec::build(grid, pot, obs, build_nonlinearity(), lambda, epsilon);
}

std::vector<double> RunConfig::eps_schedule() const {
  if (eps_steps < 3)
    throw InvalidInput("sweep: eps_steps must be >= 3, got " +
                       std::to_string(eps_steps));
  if (!(eps0 > 0.0)) throw InvalidInput("sweep: eps0 must be > 0");
  std::vector<double> out;
  double e = eps0;
  for (int k = 0; k < eps_steps; ++k, e *= 0.5) out.push_back(e);
  return out;
}

std::vector<double> RunConfig::lambda_schedule() const {
  if (lambda_steps < 1)
    throw InvalidInput("sweep: lambda_steps must be >= 1 (degenerate sweep)");
  if (!(lambda_base > 1.0)) throw InvalidInput("sweep: lambda_base must exceed 1");
  std::vector<double> out;
  double l = 1.0;
  for (int k = 0; k < lambda_steps; ++k, l *= lambda_base) out.push_back(l);
  return out;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "grid.dimension=" << dimension << "\n"
     << "grid.nodes_per_axis=" << nodes_per_axis << "\n"
     << "grid.half_extent=" << half_extent << "\n"
     << "potential.well_radius=" << well_radius << "\n"
     << "potential.scale=" << scale << "\n"
     << "potential.tilde_radius=" << tilde_radius << "\n"
     << "obstacle.center=" << center[0] << "," << center[1] << "," << center[2]
     << "\n"
     << "obstacle.radius=" << radius << "\n"
     << "obstacle.height=" << height << "\n"
     << "obstacle.outside_depth=" << outside_depth << "\n"
     << "nonlinearity.variant=" << variant << "\n"
     << "nonlinearity.mu=" << mu << "\n"
     << "nonlinearity.q=" << q << "\n"
     << "nonlinearity.nu=" << nu << "\n"
     << "nonlinearity.p=" << p << "\n"
     << "nonlinearity.alpha0=" << alpha0 << "\n"
     << "nonlinearity.theta=" << theta << "\n"
     << "problem.lambda=" << lambda << "\n"
     << "problem.epsilon=" << epsilon << "\n"
     << "solver.path_points=" << solver.path_points << "\n"
     << "solver.grad_tol=" << solver.grad_tol << "\n"
     << "solver.max_outer=" << solver.max_outer << "\n"
     << "solver.armijo_c=" << solver.armijo_c << "\n"
     << "solver.armijo_backtrack=" << solver.armijo_backtrack << "\n"
     << "solver.newton_tol=" << solver.newton_tol << "\n"
     << "solver.newton_max=" << solver.newton_max << "\n"
     << "solver.rng_seed=" << solver.rng_seed << "\n"
     << "sweep.eps0=" << eps0 << "\n"
     << "sweep.eps_steps=" << eps_steps << "\n"
     << "sweep.lambda_base=" << lambda_base << "\n"
     << "sweep.lambda_steps=" << lambda_steps << "\n"
     << "output.dir=" << dir << "\n"
     << "output.dump_fields=" << (dump_fields ? "true" : "false") << "\n";
  os << "output.formats=";
  for (std::size_t i = 0; i < formats.size(); ++i)
    os << (i ? "," : "") << formats[i];
  os << "\n";
  return os.str();
}

int env_thread_cap() {
  const char* v = std::getenv("OBSTACLE_WELL_THREADS");
  if (!v) {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
  }
  char* end = nullptr;
  long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1)
    throw InvalidInput("OBSTACLE_WELL_THREADS must be a positive integer");
  return int(n);
}

} // namespace owell
