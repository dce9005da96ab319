#include "owell/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace owell {

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("io: cannot write '" + path + "'");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("io: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double swap_if_big(double x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    v = __builtin_bswap64(v);
    std::memcpy(&x, &v, 8);
  }
  return x;
}

} // namespace

void dump_field_csv(const Field& u, const std::string& path) {
  const GridSpec& g = u.grid();
  std::ostringstream os;
  os.precision(17);
  for (int d = 0; d < g.dim; ++d) os << "x" << (d + 1) << ",";
  os << "value\n";
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    auto c = g.unpack(i);
    for (int d = 0; d < g.dim; ++d) os << g.coord1d[std::size_t(c[d])] << ",";
    os << u[i] << "\n";
  }
  write_file(path, os.str());
}

void dump_field_raw(const Field& u, const std::string& bin_path,
                    const std::string& sidecar_path) {
  const GridSpec& g = u.grid();
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw InvalidInput("io: cannot write '" + bin_path + "'");
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    double v = swap_if_big(u[i]);
    out.write(reinterpret_cast<const char*>(&v), 8);
  }
  json side = {{"n", g.n}, {"N", g.dim}, {"L", g.half_extent}};
  write_file(sidecar_path, side.dump(2) + "\n");
}

Field load_field_raw(const std::string& bin_path, const std::string& sidecar_path) {
  json side = json::parse(read_file(sidecar_path));
  auto grid = GridSpec::make(side.at("N").get<int>(), side.at("n").get<int>(),
                             side.at("L").get<double>());
  Field u(grid);
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw InvalidInput("io: cannot read '" + bin_path + "'");
  for (std::size_t i = 0; i < grid->num_nodes; ++i) {
    double v = 0.0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw InvalidInput("io: raw dump shorter than the grid");
    u[i] = swap_if_big(v);
  }
  u.check_finite("load_field_raw");
  return u;
}

std::string energy_to_json(const EnergyBreakdown& e) {
  json j = {{"quadratic", e.quadratic},
            {"penalty", e.penalty},
            {"nonlinear", e.nonlinear},
            {"total", e.total}};
  return j.dump(2) + "\n";
}

EnergyBreakdown energy_from_json(const std::string& text) {
  json j = json::parse(text);
  EnergyBreakdown e;
  e.quadratic = j.at("quadratic").get<double>();
  e.penalty = j.at("penalty").get<double>();
  e.nonlinear = j.at("nonlinear").get<double>();
  e.total = j.at("total").get<double>();
  return e;
}

std::string mountain_pass_to_json(const MountainPassResult& r) {
  json j = {{"level", r.level},
            {"residual_norm", r.residual_norm},
            {"refined", r.refined},
            {"iterations", r.outer_iterations},
            {"path_max_history", r.path_max_history}};
  return j.dump(2) + "\n";
}

namespace {

json step_to_json(const SweepStep& s) {
  return json{{"param_value", s.param_value},
              {"level", s.level},
              {"penalty_violation", s.penalty_violation},
              {"constraint_gap", s.constraint_gap},
              {"outside_mass", s.outside_mass},
              {"lamVu2", s.lamVu2},
              {"sup_outside_tilde", s.sup_outside_tilde},
              {"a_threshold", s.a_threshold},
              {"refined", s.refined},
              {"warm", s.warm},
              {"outer_iterations", s.outer_iterations}};
}

} // namespace

std::string sweep_to_json(const SweepReport& r, const std::string& param_name) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(step_to_json(s));
  json j = {{"parameter", param_name},
            {"completed", r.completed},
            {"abort_reason", r.abort_reason},
            {"steps", steps}};
  return j.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "param_value,level,penalty_violation,constraint_gap,outside_mass,"
        "lamVu2,sup_outside_tilde,a_threshold,refined,warm,outer_iterations\n";
  for (const auto& s : r.steps) {
    os << s.param_value << "," << s.level << "," << s.penalty_violation << ","
       << s.constraint_gap << "," << s.outside_mass << "," << s.lamVu2 << ","
       << s.sup_outside_tilde << "," << s.a_threshold << "," << (s.refined ? 1 : 0)
       << "," << (s.warm ? 1 : 0) << "," << s.outer_iterations << "\n";
  }
  return os.str();
}

std::vector<SweepStep> sweep_steps_from_csv(const std::string& text) {
  std::vector<SweepStep> steps;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("sweep csv: empty file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::vector<std::string> cols;
    while (std::getline(ss, item, ',')) cols.push_back(item);
    if (cols.size() != 11) throw InvalidInput("sweep csv: bad column count");
    SweepStep s;
    s.param_value = std::stod(cols[0]);
    s.level = std::stod(cols[1]);
    s.penalty_violation = std::stod(cols[2]);
    s.constraint_gap = std::stod(cols[3]);
    s.outside_mass = std::stod(cols[4]);
    s.lamVu2 = std::stod(cols[5]);
    s.sup_outside_tilde = std::stod(cols[6]);
    s.a_threshold = std::stod(cols[7]);
    s.refined = cols[8] == "1";
    s.warm = cols[9] == "1";
    s.outer_iterations = std::stoi(cols[10]);
    steps.push_back(s);
  }
  return steps;
}

std::string geometry_to_json(const GeometryReport& r) {
  json j = {{"r", r.r},
            {"rho", r.rho},
            {"min_I_on_sphere", r.min_I_on_sphere},
            {"C1", r.C1},
            {"C2", r.C2},
            {"C_nu", r.C_nu},
            {"I_phi_plus", r.I_phi_plus},
            {"ok", r.ok}};
  return j.dump(2) + "\n";
}

std::string axioms_to_json(const PenaltyAxiomsReport& r) {
  json j = {{"p1_ok", r.p1_ok},
            {"p2_ok", r.p2_ok},
            {"p3_ok", r.p3_ok},
            {"p4_ok", r.p4_ok},
            {"p1_worst_jump_ratio", r.p1_worst_jump_ratio},
            {"p2_min_pairing", r.p2_min_pairing},
            {"p4_sup_norm", r.p4_sup_norm},
            {"all_ok", r.all_ok()},
            {"failure", r.failure}};
  return j.dump(2) + "\n";
}

std::string vi_report_to_json(const ViReport& r) {
  json j = {{"max_violation", r.max_violation},
            {"worst_normalized", r.worst_normalized},
            {"off_contact_normalized", r.off_contact_normalized},
            {"clip_distance_rel", r.clip_distance_rel},
            {"trials", r.trials}};
  return j.dump(2) + "\n";
}

void emit_heatmap(const Field& u, double r_omega, double r_tilde,
                  const std::string& pgm_path, const std::string& sidecar_path,
                  int slice) {
  const GridSpec& g = u.grid();
  const int n = g.n;
  std::size_t offset = 0;
  if (g.dim == 3) {
    if (slice < 0)
      throw InvalidInput("emit_heatmap: dimension 3 needs --slice k");
    if (slice >= n) throw InvalidInput("emit_heatmap: slice out of range");
    offset = std::size_t(slice) * std::size_t(n) * std::size_t(n);
  }

  double lo = u[offset], hi = u[offset];
  for (std::size_t i = 0; i < std::size_t(n) * std::size_t(n); ++i) {
    lo = std::min(lo, u[offset + i]);
    hi = std::max(hi, u[offset + i]);
  }
  double span = hi > lo ? hi - lo : 1.0;

  std::ostringstream os;
  os << "P5\n" << n << " " << n << "\n255\n";
  const double half_h = 0.5 * g.spacing;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      std::size_t idx = offset + std::size_t(a) * std::size_t(n) + std::size_t(b);
      double x = g.coord1d[std::size_t(a)];
      double y = g.coord1d[std::size_t(b)];
      double rad = std::sqrt(x * x + y * y);
      unsigned char px;
      if (std::fabs(rad - r_omega) <= half_h || std::fabs(rad - r_tilde) <= half_h)
        px = 255;
      else
        px = static_cast<unsigned char>(255.0 * (u[idx] - lo) / span);
      os.put(char(px));
    }
  }
  write_file(pgm_path, os.str());
  nlohmann::json side = {{"min", lo}, {"max", hi}, {"n", n}};
  if (g.dim == 3) side["slice"] = slice;
  write_file(sidecar_path, side.dump(2) + "\n");
}

std::uint64_t fnv1a_hash(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::string content = read_file(path);
  return fnv1a_hash(content.data(), content.size());
}

ArtifactWriter::ArtifactWriter(std::string out_dir, std::uint64_t config_hash,
                               std::uint64_t seed)
    : dir_(std::move(out_dir)), config_hash_(config_hash), seed_(seed) {
  std::filesystem::create_directories(dir_);
}

std::string ArtifactWriter::path(const std::string& name) const {
  return (std::filesystem::path(dir_) / name).string();
}

void ArtifactWriter::write_text(const std::string& name, const std::string& content) {
  write_file(path(name), content);
  artifacts_.push_back(name);
}

void ArtifactWriter::note_artifact(const std::string& name) {
  artifacts_.push_back(name);
}

void ArtifactWriter::write_manifest() {
  json arts = json::array();
  for (const auto& name : artifacts_)
    arts.push_back({{"name", name}, {"fnv1a", fnv1a_file(path(name))}});
  json j = {{"config_hash", config_hash_}, {"seed", seed_}, {"artifacts", arts}};
  write_file(path("manifest.json"), j.dump(2) + "\n");
}

} // namespace owell
