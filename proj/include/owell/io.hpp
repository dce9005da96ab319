#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "owell/continuation.hpp"
#include "owell/solver.hpp"

namespace owell {

// Field dumps ---------------------------------------------------------------

// CSV with header x1,...,xN,value, one row per node in storage order
void dump_field_csv(const Field& u, const std::string& path);

// raw little-endian float64 array plus a JSON sidecar {n, N, L}
void dump_field_raw(const Field& u, const std::string& bin_path,
                    const std::string& sidecar_path);
Field load_field_raw(const std::string& bin_path, const std::string& sidecar_path);

// Reports -------------------------------------------------------------------

std::string energy_to_json(const EnergyBreakdown& e);
EnergyBreakdown energy_from_json(const std::string& text);

std::string mountain_pass_to_json(const MountainPassResult& r);

std::string sweep_to_json(const SweepReport& r, const std::string& param_name);
std::string sweep_to_csv(const SweepReport& r);
std::vector<SweepStep> sweep_steps_from_csv(const std::string& text);

std::string geometry_to_json(const GeometryReport& r);
std::string axioms_to_json(const PenaltyAxiomsReport& r);
std::string vi_report_to_json(const ViReport& r);

// Heatmap -------------------------------------------------------------------

// Grayscale binary PGM with linear min/max scaling (recorded in a JSON
// sidecar); the Omega and OmegaTilde circles are overdrawn at max intensity.
// slice: node index along the first axis, required when dim == 3.
void emit_heatmap(const Field& u, double r_omega, double r_tilde,
                  const std::string& pgm_path, const std::string& sidecar_path,
                  int slice = -1);

// Manifest ------------------------------------------------------------------

std::uint64_t fnv1a_hash(const void* data, std::size_t len);
std::uint64_t fnv1a_file(const std::string& path);

// Records config hash, seed, and the artifact list; write() emits
// manifest.json in the output directory.
class ArtifactWriter {
public:
  ArtifactWriter(std::string out_dir, std::uint64_t config_hash,
                 std::uint64_t seed);

  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const;

  void write_text(const std::string& name, const std::string& content);
  void note_artifact(const std::string& name); // for files written directly
  void write_manifest();

private:
  std::string dir_;
  std::uint64_t config_hash_;
  std::uint64_t seed_;
  std::vector<std::string> artifacts_;
};

} // namespace owell
