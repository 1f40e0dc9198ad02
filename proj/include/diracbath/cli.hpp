// cli.hpp: run configuration, result tables and command dispatch for the diracbath tool
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "diracbath/lattice.hpp"
#include "diracbath/selfenergy.hpp"

namespace diracbath::cli {

inline constexpr const char* code_version = "diracbath 1.0.0";

enum class Command { dynamics, self_energy, poles, two_emitter, sweep, losses, preset };

std::string_view to_string(Command c) noexcept;
Command command_from_string(std::string_view s);

enum class Format { csv, json };

// Flat key/value view of a run; keys use the long flag names without dashes ("dt-record").
using Settings = std::map<std::string, std::string>;

struct RunConfig {
  Command command = Command::dynamics;
  int N = 64;
  double J = 1.0;
  double g = 0.1;
  double delta = 0.0;
  lattice::IVec2 n12{1, 1};
  selfenergy::Pair sublattices = selfenergy::Pair::AB;
  std::string initial = "first";  // first | symmetric | antisymmetric
  double t_max = 100.0;
  double dt_record = 1.0;
  double gamma_loss = 0.0;
  std::vector<double> snapshots;
  double scan_lo = -3.5, scan_hi = 3.5, scan_step = 0.01;
  std::string integrator = "chebyshev";
  std::string preset;
  std::string sweep_command = "dynamics";
  std::string sweep_param = "g";
  std::vector<double> sweep_values;
  int workers = 0;  // 0 selects the number of processors
  std::filesystem::path out = "out.csv";
  Format format = Format::csv;

  Settings settings;  // the validated settings the config was built from
};

// key = value lines, '#' comments; unknown keys are rejected.
Settings parse_config_text(const std::string& text);
Settings read_config_file(const std::filesystem::path& path);

// Builds and validates a configuration; throws ValidationError.
RunConfig make_config(const Settings& s);

using Cell = std::variant<double, std::string>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

std::string format_number(double v);
std::string to_csv(const ResultTable& t);
std::string to_json(const ResultTable& t);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct NamedTable {
  std::string suffix;  // appended to the output stem; empty for the main table
  ResultTable table;
};

// Computes the tables for one command without touching the filesystem.
std::vector<NamedTable> compute(const RunConfig& cfg);

// Computes and writes; returns the files written.
std::vector<std::filesystem::path> run(const RunConfig& cfg);

// Figure presets: fig1b, fig2a, fig3, fig4a, fig4bc, figA2b.
const std::vector<std::string>& preset_ids();
std::vector<NamedTable> compute_preset(const std::string& id, const RunConfig& base);

// Entry point for the command-line tool; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace diracbath::cli
