#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prft/counting.hpp"
#include "prft/model.hpp"

namespace prft {

/// Formats a double deterministically (round-trip precision).
std::string format_number(double v);

/// FNV-1a hash of a canonical config string; stamped into CSV headers so
/// reruns are diffable.
std::string config_hash(const std::string& canonical);

/// CSV with a '#'-prefixed header block: schema version, config hash,
/// column names. Rows are written with fixed formatting so identical runs
/// produce byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns,
            const std::string& hash);
  void row(const std::vector<std::string>& cells);
  void row(std::initializer_list<double> values);

 private:
  std::ofstream out_;
  std::size_t n_columns_;
};

/// Parsed declarative system file: the driven system, the photonic state
/// and an optional matter initial state.
struct SystemFile {
  DrivenSystem system;
  GaussianPhotonState photons;
  std::optional<Vector> matter_state;
};

/// Flat sectioned key-value grammar ([model], [mode]..., [photons],
/// optional [matter]); unknown keys are errors carrying the line number.
SystemFile parse_system_file(const std::filesystem::path& path);
SystemFile parse_system_text(const std::string& text,
                             const std::string& origin = "<string>");

/// Writes the run manifest (inputs, tolerances, wall time) as JSON next to
/// the data files; the manifest is metadata and may carry timings.
void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries);

/// MGF table CSV: columns (t, chi_1..chi_N, Re M, Im M, variant).
void write_mgf_table(const std::filesystem::path& path,
                     const MgfTable& table, const std::string& hash);

}  // namespace prft
