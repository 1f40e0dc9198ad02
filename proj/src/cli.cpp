// cli.cpp: configuration parsing, command dispatch, presets and table output
#include "diracbath/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "diracbath/collective.hpp"
#include "diracbath/dynamics.hpp"
#include "diracbath/resolvent.hpp"
#include "json.hpp"

namespace diracbath::cli {

namespace fs = std::filesystem;
using dynamics::Sublattice;
using selfenergy::Pair;

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::dynamics: return "dynamics";
    case Command::self_energy: return "self-energy";
    case Command::poles: return "poles";
    case Command::two_emitter: return "two-emitter";
    case Command::sweep: return "sweep";
    case Command::losses: return "losses";
    case Command::preset: return "preset";
  }
  return "?";
}

Command command_from_string(std::string_view s) {
  for (Command c : {Command::dynamics, Command::self_energy, Command::poles, Command::two_emitter, Command::sweep,
                    Command::losses, Command::preset})
    if (to_string(c) == s) return c;
  throw ValidationError("unknown command '" + std::string(s) + "'");
}

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "command", "N",        "J",          "g",        "delta",         "n12",         "sublattices",
      "initial", "tmax",     "dt-record",  "gamma-loss", "snapshots",   "scan",        "integrator",
      "preset",  "sweep-command", "sweep-param", "sweep-values", "workers", "out", "format"};
  return keys;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalise_key(std::string k) {
  k = trim(k);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  std::replace(k.begin(), k.end(), '_', '-');
  if (k == "t-max") k = "tmax";
  return k;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError(key + ": expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 2e9) throw ValidationError(key + ": expected an integer, got '" + v + "'");
  return int(d);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  return out;
}

double field(const Settings& s, const std::string& key, double def) {
  const auto it = s.find(key);
  return it == s.end() ? def : to_double(key, it->second);
}

std::string field(const Settings& s, const std::string& key, const std::string& def) {
  const auto it = s.find(key);
  return it == s.end() ? def : it->second;
}

}  // namespace

Settings parse_config_text(const std::string& text) {
  Settings s;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = normalise_key(line.substr(0, eq));
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    s[key] = trim(line.substr(eq + 1));
  }
  return s;
}

Settings read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

Settings echo(const RunConfig& c) {
  Settings s;
  s["command"] = std::string(to_string(c.command));
  s["N"] = std::to_string(c.N);
  s["J"] = format_number(c.J);
  s["g"] = format_number(c.g);
  s["delta"] = format_number(c.delta);
  s["n12"] = std::to_string(c.n12[0]) + "," + std::to_string(c.n12[1]);
  s["sublattices"] = std::string(selfenergy::to_string(c.sublattices));
  s["initial"] = c.initial;
  s["tmax"] = format_number(c.t_max);
  s["dt-record"] = format_number(c.dt_record);
  s["gamma-loss"] = format_number(c.gamma_loss);
  std::string snaps;
  for (double t : c.snapshots) snaps += (snaps.empty() ? "" : ",") + format_number(t);
  s["snapshots"] = snaps;
  s["scan"] = format_number(c.scan_lo) + ":" + format_number(c.scan_hi) + ":" + format_number(c.scan_step);
  s["integrator"] = c.integrator;
  s["preset"] = c.preset;
  s["sweep-command"] = c.sweep_command;
  s["sweep-param"] = c.sweep_param;
  std::string vals;
  for (double v : c.sweep_values) vals += (vals.empty() ? "" : ",") + format_number(v);
  s["sweep-values"] = vals;
  s["workers"] = std::to_string(c.workers);
  s["out"] = c.out.string();
  s["format"] = c.format == Format::csv ? "csv" : "json";
  return s;
}

}  // namespace

RunConfig make_config(const Settings& s) {
  for (const auto& [k, v] : s)
    if (std::find(known_keys().begin(), known_keys().end(), k) == known_keys().end())
      throw ValidationError("unknown setting '" + k + "'");
  RunConfig c;
  const auto cmd = s.find("command");
  if (cmd == s.end()) {
    if (s.count("preset")) c.command = Command::preset;
    else throw ValidationError("no command given");
  } else {
    c.command = command_from_string(cmd->second);
  }
  if (s.count("N")) c.N = to_int("N", s.at("N"));
  c.J = field(s, "J", c.J);
  c.g = field(s, "g", c.g);
  c.delta = field(s, "delta", c.delta);
  if (s.count("n12")) {
    const auto v = to_list("n12", s.at("n12"));
    if (v.size() != 2 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
      throw ValidationError("n12: expected two integers 'a,b'");
    c.n12 = {int(v[0]), int(v[1])};
  }
  if (s.count("sublattices")) c.sublattices = selfenergy::pair_from_string(s.at("sublattices"));
  c.initial = field(s, "initial", c.initial);
  c.t_max = field(s, "tmax", c.t_max);
  c.dt_record = field(s, "dt-record", c.dt_record);
  c.gamma_loss = field(s, "gamma-loss", c.gamma_loss);
  if (s.count("snapshots")) c.snapshots = to_list("snapshots", s.at("snapshots"));
  if (s.count("scan")) {
    const auto p = split(s.at("scan"), ':');
    if (p.size() != 3) throw ValidationError("scan: expected lo:hi:step");
    c.scan_lo = to_double("scan", p[0]);
    c.scan_hi = to_double("scan", p[1]);
    c.scan_step = to_double("scan", p[2]);
  }
  c.integrator = field(s, "integrator", c.integrator);
  c.preset = field(s, "preset", c.preset);
  c.sweep_command = field(s, "sweep-command", c.sweep_command);
  c.sweep_param = normalise_key(field(s, "sweep-param", c.sweep_param));
  if (s.count("sweep-values")) c.sweep_values = to_list("sweep-values", s.at("sweep-values"));
  if (s.count("workers")) c.workers = to_int("workers", s.at("workers"));
  c.out = field(s, "out", c.out.string());
  const std::string fmt = field(s, "format", std::string("csv"));
  if (fmt == "csv") c.format = Format::csv;
  else if (fmt == "json") c.format = Format::json;
  else throw ValidationError("format must be csv or json");

  if (c.N < 2) throw ValidationError("N must be >= 2");
  if (!(c.J > 0.0) || !std::isfinite(c.J)) throw ValidationError("J must be positive");
  if (!(c.g >= 0.0) || !std::isfinite(c.g)) throw ValidationError("g must be >= 0");
  if (!std::isfinite(c.delta)) throw ValidationError("delta must be finite");
  if (!(c.t_max >= 0.0) || !std::isfinite(c.t_max)) throw ValidationError("tmax must be >= 0");
  if (!(c.dt_record > 0.0)) throw ValidationError("dt-record must be positive");
  if (c.t_max / c.dt_record > 1e7) throw ValidationError("tmax / dt-record exceeds 1e7 records");
  if (!(c.gamma_loss >= 0.0)) throw ValidationError("gamma-loss must be >= 0");
  if (!(c.scan_step > 0.0) || !(c.scan_hi >= c.scan_lo)) throw ValidationError("scan: need step > 0 and hi >= lo");
  if ((c.scan_hi - c.scan_lo) / c.scan_step > 1e7) throw ValidationError("scan: more than 1e7 points");
  for (double t : c.snapshots)
    if (!(t >= 0.0)) throw ValidationError("snapshots must be >= 0");
  if (c.initial != "first" && c.initial != "symmetric" && c.initial != "antisymmetric")
    throw ValidationError("initial must be first, symmetric or antisymmetric");
  if (c.integrator != "chebyshev" && c.integrator != "rk4") throw ValidationError("integrator must be chebyshev or rk4");
  if (c.workers < 0) throw ValidationError("workers must be >= 0");
  if (c.command == Command::preset) {
    if (std::find(preset_ids().begin(), preset_ids().end(), c.preset) == preset_ids().end())
      throw ValidationError("unknown preset '" + c.preset + "'");
  }
  if (c.command == Command::sweep) {
    const Command inner = command_from_string(c.sweep_command);
    if (inner == Command::sweep || inner == Command::preset) throw ValidationError("sweep-command must be a single run");
    static const std::vector<std::string> params = {"g", "delta", "N", "J", "tmax", "gamma-loss"};
    if (std::find(params.begin(), params.end(), c.sweep_param) == params.end())
      throw ValidationError("sweep-param must be one of g, delta, N, J, tmax, gamma-loss");
    if (c.sweep_values.empty()) throw ValidationError("sweep-values must list at least one value");
  }
  if (c.command == Command::two_emitter || c.command == Command::losses) {
    if (c.n12 == lattice::IVec2{0, 0} && (c.sublattices == Pair::AA || c.sublattices == Pair::BB))
      throw ValidationError("n12 = (0,0) puts both emitters on the same site");
  }
  c.settings = echo(c);
  return c;
}

// ---------------------------------------------------------------------------------------------
// tables

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw ValidationError("table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("no column '" + name + "'");
  return std::size_t(it - columns.begin());
}

double ResultTable::number(std::size_t row, const std::string& name) const {
  return std::get<double>(rows.at(row).at(column(name)));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const ResultTable& t) {
  std::string out;
  for (const auto& [k, v] : t.metadata) out += "# " + k + " = " + v + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      if (const double* d = std::get_if<double>(&row[i])) out += format_number(*d);
      else out += std::get<std::string>(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string to_json(const ResultTable& t) {
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.metadata) j["metadata"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      if (const double* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) r.push_back(*d);
        else r.push_back(format_number(*d));
      } else {
        r.push_back(std::get<std::string>(c));
      }
    }
    j["rows"].push_back(std::move(r));
  }
  return j.dump(1) + "\n";
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ValidationError("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------------------------
// commands

namespace {

ResultTable base_table(const RunConfig& c) {
  ResultTable t;
  t.metadata.emplace_back("code_version", code_version);
  for (const auto& [k, v] : c.settings) t.metadata.emplace_back(k, v);
  return t;
}

std::vector<double> time_grid(double t_max, double dt) {
  std::vector<double> t;
  const long n = long(std::floor(t_max / dt + 1e-9));
  for (long i = 0; i <= n; ++i) t.push_back(double(i) * dt);
  return t;
}

std::vector<double> scaled(const std::vector<double>& v, double s) {
  std::vector<double> out(v);
  for (double& x : out) x *= s;
  return out;
}

ResultTable map_table(const RunConfig& c, const dynamics::PopulationMap& m, double t) {
  ResultTable tab = base_table(c);
  tab.metadata.emplace_back("snapshot_t", format_number(t));
  tab.columns = {"n1", "n2", "pop_A", "pop_B"};
  for (int n1 = 0; n1 < m.N; ++n1)
    for (int n2 = 0; n2 < m.N; ++n2) {
      const std::size_t i = std::size_t(n1) * m.N + n2;
      tab.add_row({double(n1), double(n2), m.A[i], m.B[i]});
    }
  return tab;
}

std::vector<NamedTable> run_dynamics(const RunConfig& c) {
  const lattice::BathModel model(c.N, c.J);
  const auto e = dynamics::centred_emitter(model, c.delta / c.J, c.g / c.J);
  const auto t = time_grid(c.t_max, c.dt_record);
  const auto tj = scaled(t, c.J);
  std::vector<cplx> ce;
  std::vector<NamedTable> out;
  ResultTable main = base_table(c);
  main.metadata.emplace_back("emitter_site", std::to_string(e.site[0]) + "," + std::to_string(e.site[1]));
  if (c.snapshots.empty() && c.integrator == "chebyshev") {
    ce = dynamics::single_emitter_ce(model, e, tj);
    main.metadata.emplace_back("method", "chebyshev moment series");
  } else {
    std::vector<double> rec = tj;
    for (double s : c.snapshots) rec.push_back(s * c.J);
    std::sort(rec.begin(), rec.end());
    rec.erase(std::unique(rec.begin(), rec.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, a); }),
              rec.end());
    const dynamics::HamiltonianAction h(model, {e});
    auto state = dynamics::initial_state(model, {1.0});
    dynamics::EvolveOptions opts;
    opts.integrator = c.integrator == "rk4" ? dynamics::Integrator::rk4 : dynamics::Integrator::chebyshev;
    opts.snapshot_times = scaled(c.snapshots, c.J);
    const auto tr = dynamics::evolve(state, h, rec, opts);
    for (double x : tj) {
      const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), x - 1e-12 * std::max(1.0, x));
      ce.push_back(tr.amps[std::size_t(it - tr.t.begin())][0]);
    }
    main.metadata.emplace_back("method", std::string(c.integrator) + " propagation");
    main.metadata.emplace_back("max_norm_drift", format_number(tr.max_norm_drift));
    for (const auto& s : tr.snapshots)
      out.push_back({"_snap_t" + format_number(s.time / c.J), map_table(c, s.map, s.time / c.J)});
  }
  main.columns = {"t", "re_Ce", "im_Ce", "pop_e"};
  for (std::size_t i = 0; i < t.size(); ++i) main.add_row({t[i], ce[i].real(), ce[i].imag(), std::norm(ce[i])});
  out.insert(out.begin(), {"", std::move(main)});
  return out;
}

std::vector<NamedTable> run_self_energy(const RunConfig& c) {
  ResultTable tab = base_table(c);
  tab.metadata.emplace_back("boundary_eta", "1e-8 min(1, distance to nearest singular energy)");
  tab.columns = {"E", "lamb_shift", "gamma_e", "re_sigma", "im_sigma"};
  const long n = long(std::floor((c.scan_hi - c.scan_lo) / c.scan_step + 1e-9));
  const double gj = c.g / c.J;
  for (long i = 0; i <= n; ++i) {
    const double E = c.scan_lo + double(i) * c.scan_step;
    cplx s;
    try {
      s = selfenergy::sigma_e_upper(E / c.J, gj) * c.J;
    } catch (const DomainError&) {
      s = cplx(std::nan(""), std::nan(""));
    }
    tab.add_row({E, s.real(), -2.0 * s.imag(), s.real(), s.imag()});
  }
  return {{"", std::move(tab)}};
}

std::vector<NamedTable> run_poles(const RunConfig& c) {
  const auto dec = resolvent::find_poles(c.delta / c.J, c.g / c.J);
  ResultTable tab = base_table(c);
  tab.columns = {"kind", "sheet", "re_z", "im_z", "re_residue", "im_residue", "abs_weight"};
  cplx total = 0.0;
  for (const auto& p : dec.poles) {
    tab.add_row({std::string(resolvent::to_string(p.kind)), std::string(specfun::to_string(p.sheet)), p.z.real() * c.J,
                 p.z.imag() * c.J, p.residue.real(), p.residue.imag(), std::abs(p.residue)});
    total += p.residue;
  }
  for (const auto& b : dec.branch_cuts) {
    const auto v = resolvent::branch_cut_contribution(b.anchor, 0.0, dec.delta, dec.g);
    tab.add_row({std::string("branch_cut"),
                 std::string(specfun::to_string(b.left)) + "|" + std::string(specfun::to_string(b.right)),
                 b.anchor * c.J, 0.0, v.value.real(), v.value.imag(), std::abs(v.value)});
    total += v.value;
  }
  tab.metadata.emplace_back("sum_rule_error", format_number(std::abs(total - 1.0)));
  for (const auto& n : dec.notes) tab.metadata.emplace_back("note", n);
  return {{"", std::move(tab)}};
}

struct TwoRun {
  std::vector<double> t;
  dynamics::TwoEmitterSeries s;
};

TwoRun two_emitter_series(const RunConfig& c, ResultTable& meta) {
  const lattice::BathModel model(c.N, c.J);
  const int h = c.N / 2;
  auto wrap = [&](int v) { return ((v % c.N) + c.N) % c.N; };
  const bool first_a = c.sublattices == Pair::AA || c.sublattices == Pair::AB;
  const bool second_a = c.sublattices == Pair::AA || c.sublattices == Pair::BA;
  const dynamics::EmitterSpec e1{{wrap(h + c.n12[0]), wrap(h + c.n12[1])}, first_a ? Sublattice::A : Sublattice::B,
                                 c.delta / c.J, c.g / c.J};
  const dynamics::EmitterSpec e2{{h, h}, second_a ? Sublattice::A : Sublattice::B, c.delta / c.J, c.g / c.J};
  cplx a1 = 1.0, a2 = 0.0;
  if (c.initial != "first") {
    a1 = 1.0 / std::sqrt(2.0);
    a2 = c.initial == "symmetric" ? a1 : -a1;
  }
  TwoRun r;
  r.t = time_grid(c.t_max, c.dt_record);
  r.s = dynamics::evolve_two_emitters(model, e1, e2, scaled(r.t, c.J), a1, a2);
  if (!model.contains_dirac_point() && c.delta == 0.0 && c.g > 0.0) {
    try {
      const auto p = collective::solve_collective_pole(model, c.n12, c.sublattices, c.g / c.J);
      meta.metadata.emplace_back("z_plus", format_number(p.z_plus.real() * c.J));
      meta.metadata.emplace_back("z_minus", format_number(p.z_minus.real() * c.J));
      meta.metadata.emplace_back("r_plus", format_number(p.r_plus.real()));
      meta.metadata.emplace_back("r_minus", format_number(p.r_minus.real()));
    } catch (const NumericalFailure& e) {
      meta.metadata.emplace_back("pole_note", e.what());
    }
  }
  return r;
}

std::vector<NamedTable> run_two_emitter(const RunConfig& c) {
  ResultTable tab = base_table(c);
  const auto r = two_emitter_series(c, tab);
  tab.columns = {"t", "re_C1", "im_C1", "re_C2", "im_C2", "pop_1", "pop_2"};
  for (std::size_t i = 0; i < r.t.size(); ++i)
    tab.add_row({r.t[i], r.s.c1[i].real(), r.s.c1[i].imag(), r.s.c2[i].real(), r.s.c2[i].imag(), std::norm(r.s.c1[i]),
                 std::norm(r.s.c2[i])});
  return {{"", std::move(tab)}};
}

std::vector<NamedTable> run_losses(const RunConfig& c) {
  ResultTable tab = base_table(c);
  const auto r = two_emitter_series(c, tab);
  std::vector<std::vector<cplx>> amps;
  for (std::size_t i = 0; i < r.t.size(); ++i) amps.push_back({r.s.c1[i], r.s.c2[i]});
  const auto w = dynamics::apply_losses(scaled(r.t, c.J), amps, c.gamma_loss / c.J);
  tab.columns = {"t", "pop_1", "pop_2", "w_1", "w_2", "w_bath", "w_ground", "trace"};
  for (std::size_t i = 0; i < r.t.size(); ++i)
    tab.add_row({r.t[i], std::norm(r.s.c1[i]), std::norm(r.s.c2[i]), w.emitter[0][i], w.emitter[1][i], w.bath[i],
                 w.ground[i], w.trace(i)});
  return {{"", std::move(tab)}};
}

fs::path with_suffix(const fs::path& out, const std::string& suffix, Format f) {
  const std::string ext = f == Format::csv ? ".csv" : ".json";
  fs::path stem = out;
  if (stem.has_extension()) stem.replace_extension();
  fs::path p = stem;
  p += suffix + ext;
  return p;
}

std::vector<fs::path> write_tables(const std::vector<NamedTable>& tables, const fs::path& out, Format f) {
  std::vector<fs::path> files;
  for (const auto& t : tables) {
    const fs::path p = with_suffix(out, t.suffix, f);
    write_atomic(p, f == Format::csv ? to_csv(t.table) : to_json(t.table));
    files.push_back(p);
  }
  return files;
}

std::vector<fs::path> run_sweep(const RunConfig& c) {
  const std::size_t n = c.sweep_values.size();
  const std::string ext = c.format == Format::csv ? ".csv" : ".json";
  struct Outcome {
    std::string file, status = "ok", message;
  };
  std::vector<Outcome> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      Settings s = c.settings;
      s["command"] = c.sweep_command;
      s[c.sweep_param] = format_number(c.sweep_values[i]);
      const fs::path file = c.out / ("run_" + std::to_string(i) + ext);
      s["out"] = file.string();
      for (const char* k : {"sweep-command", "sweep-param", "sweep-values", "workers", "preset"}) s.erase(k);
      results[i].file = file.filename().string();
      try {
        run(make_config(s));
      } catch (const ValidationError& e) {
        results[i].status = "validation_error";
        results[i].message = e.what();
      } catch (const DomainError& e) {
        results[i].status = "validation_error";
        results[i].message = e.what();
      } catch (const std::exception& e) {
        results[i].status = "numerical_failure";
        results[i].message = e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nw = std::min<std::size_t>(n, c.workers > 0 ? std::size_t(c.workers) : hw);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ResultTable manifest;
  manifest.metadata.emplace_back("code_version", code_version);
  for (const auto& [k, v] : c.settings)
    if (k != "workers") manifest.metadata.emplace_back(k, v);
  manifest.columns = {"index", c.sweep_param, "file", "status", "message"};
  std::vector<fs::path> files;
  bool failed = false;
  for (std::size_t i = 0; i < n; ++i) {
    std::string msg = results[i].message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    manifest.add_row({double(i), c.sweep_values[i], results[i].file, results[i].status, msg});
    if (results[i].status == "ok") files.push_back(c.out / results[i].file);
    else failed = true;
  }
  const fs::path mf = c.out / "manifest.csv";
  write_atomic(mf, to_csv(manifest));
  files.push_back(mf);
  if (failed) throw NumericalFailure("sweep: one or more runs failed; see " + mf.string());
  return files;
}

}  // namespace

std::vector<NamedTable> compute(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::dynamics: return run_dynamics(cfg);
    case Command::self_energy: return run_self_energy(cfg);
    case Command::poles: return run_poles(cfg);
    case Command::two_emitter: return run_two_emitter(cfg);
    case Command::losses: return run_losses(cfg);
    case Command::preset: return compute_preset(cfg.preset, cfg);
    case Command::sweep: break;
  }
  throw ValidationError("sweep writes one file per run; use run()");
}

std::vector<fs::path> run(const RunConfig& cfg) {
  if (cfg.command == Command::sweep) return run_sweep(cfg);
  const auto tables = compute(cfg);
  if (cfg.command == Command::preset) return write_tables(tables, cfg.out / cfg.preset, cfg.format);
  return write_tables(tables, cfg.out, cfg.format);
}

// ---------------------------------------------------------------------------------------------
// presets

const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids = {"fig1b", "fig2a", "fig3", "fig4a", "fig4bc", "figA2b"};
  return ids;
}

namespace {

struct Residuals {
  ResultTable table;
  explicit Residuals(const ResultTable& base) : table(base) {
    table.columns = {"quantity", "value", "expected", "residual", "tolerance", "within"};
  }
  void add(const std::string& q, double value, double expected, double tol, bool relative = false) {
    const double res = relative ? (value - expected) / expected : value - expected;
    table.add_row({q, value, expected, res, tol, std::string(std::abs(res) <= tol ? "yes" : "no")});
  }
};

ResultTable preset_base(const RunConfig& c, const std::string& id) {
  ResultTable t;
  t.metadata.emplace_back("code_version", code_version);
  t.metadata.emplace_back("preset", id);
  t.metadata.emplace_back("format", c.format == Format::csv ? "csv" : "json");
  return t;
}

std::vector<NamedTable> preset_fig1b(const RunConfig& c) {
  const double g = 1.0;
  ResultTable tab = preset_base(c, "fig1b");
  tab.metadata.emplace_back("g", "1");
  tab.metadata.emplace_back("scan", "-3.5:3.5:0.001");
  tab.columns = {"E", "lamb_shift", "gamma_e"};
  for (long i = 0; i <= 7000; ++i) {
    const double E = -3.5 + double(i) * 1e-3;
    double dw = std::nan(""), ge = std::nan("");
    try {
      const cplx s = selfenergy::sigma_e_upper(E, g);
      dw = s.real();
      ge = -2.0 * s.imag();
    } catch (const DomainError&) {
    }
    tab.add_row({E, dw, ge});
  }
  Residuals r(preset_base(c, "fig1b"));
  for (double E : {1e-3, 1e-2, 5e-2}) {
    const cplx exact = selfenergy::sigma_e_upper(E, g);
    const cplx approx = selfenergy::sigma_e_near_zero(cplx(E, 0.0), g).value;
    r.add("near_dirac_rel_error_E" + format_number(E), std::abs(exact - approx) / std::abs(approx), 0.0, 0.05);
  }
  return {{"", std::move(tab)}, {"_residuals", std::move(r.table)}};
}

std::vector<NamedTable> preset_fig2a(const RunConfig& c) {
  const int N = 512;
  const double g = 0.1;
  const std::vector<double> deltas = {0.0, 1.0, 2.5};
  const lattice::BathModel model(N);
  const auto t = time_grid(200.0, 0.5);
  ResultTable tab = preset_base(c, "fig2a");
  tab.metadata.emplace_back("N", "512");
  tab.metadata.emplace_back("g", "0.1");
  tab.columns = {"t"};
  std::vector<std::vector<cplx>> ce;
  std::vector<NamedTable> out;
  Residuals r(preset_base(c, "fig2a"));
  for (double d : deltas) {
    tab.columns.push_back("pop_delta" + format_number(d));
    const auto e = dynamics::centred_emitter(model, d, g);
    ce.push_back(dynamics::single_emitter_ce(model, e, t));
    const dynamics::HamiltonianAction h(model, {e});
    auto state = dynamics::initial_state(model, {1.0});
    dynamics::evolve(state, h, {200.0});
    const auto map = dynamics::bath_population_map(state, model);
    ResultTable snap = preset_base(c, "fig2a");
    snap.metadata.emplace_back("delta", format_number(d));
    snap.metadata.emplace_back("snapshot_t", "200");
    snap.columns = {"n1", "n2", "pop_A", "pop_B"};
    for (int n1 = 0; n1 < N; ++n1)
      for (int n2 = 0; n2 < N; ++n2) {
        const std::size_t i = std::size_t(n1) * N + n2;
        snap.add_row({double(n1), double(n2), map.A[i], map.B[i]});
      }
    out.push_back({"_snap_delta" + format_number(d), std::move(snap)});
    if (d == 0.0) {
      const auto near = dynamics::population_near(map, e.site, 10.0);
      r.add("B_minus_A_population_r10_delta0", near.B - near.A, 0.0, 1e300);
    }
    if (d == 1.0) r.add("anisotropy_ratio_delta1", dynamics::anisotropy_ratio(map, e.site, 30.0, 250.0, 36), 3.0, 1e300);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<Cell> row{t[i]};
    for (const auto& s : ce) row.push_back(std::norm(s[i]));
    tab.add_row(std::move(row));
  }
  const auto mp = selfenergy::markov_pole(2.5, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size() && t[i] <= 100.0; ++i)
    worst = std::max(worst, std::abs(std::norm(ce[2][i]) - std::exp(-mp.gamma() * t[i])));
  r.add("max_markov_deviation_delta2.5", worst, 0.0, 0.03);
  out.insert(out.begin(), {"", std::move(tab)});
  out.push_back({"_residuals", std::move(r.table)});
  return out;
}

std::vector<NamedTable> preset_fig3(const RunConfig& c) {
  const int N = 512;
  const lattice::BathModel model(N);
  const auto t = time_grid(2000.0, 1.0);
  ResultTable tab = preset_base(c, "fig3");
  tab.metadata.emplace_back("N", "512");
  tab.metadata.emplace_back("delta", "0");
  tab.columns = {"t"};
  ResultTable res0 = preset_base(c, "fig3");
  res0.columns = {"g", "R0", "R0_squared"};
  Residuals r(preset_base(c, "fig3"));
  std::vector<std::vector<cplx>> ce;
  for (int i = 0; i <= 4; ++i) {
    const double g = 0.05 * std::pow(10.0, i / 4.0);
    tab.columns.push_back("pop_g" + format_number(g));
    ce.push_back(dynamics::single_emitter_ce(model, dynamics::centred_emitter(model, 0.0, g), t));
    const double r0 = selfenergy::residue_r0(g, model);
    res0.add_row({g, r0, r0 * r0});
    double avg = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] >= 1500.0) {
        avg += std::norm(ce.back()[k]);
        ++n;
      }
    r.add("late_average_g" + format_number(g), avg / n, r0 * r0, 0.02);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<Cell> row{t[i]};
    for (const auto& s : ce) row.push_back(std::norm(s[i]));
    tab.add_row(std::move(row));
  }
  return {{"", std::move(tab)}, {"_residues", std::move(res0)}, {"_residuals", std::move(r.table)}};
}

// Half-period of |C_1|^2: first local minimum below 1/2, refined by a parabola.
double first_minimum(const std::vector<double>& t, const std::vector<cplx>& c1) {
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const double a = std::norm(c1[i - 1]), b = std::norm(c1[i]), d = std::norm(c1[i + 1]);
    if (b < a && b <= d && b < 0.5) {
      const double den = a - 2.0 * b + d;
      const double shift = den > 0 ? 0.5 * (a - d) / den : 0.0;
      return t[i] + shift * (t[i + 1] - t[i]);
    }
  }
  return std::nan("");
}

std::vector<NamedTable> preset_fig4a(const RunConfig& c) {
  const double g = 0.1;
  const lattice::IVec2 n12{1, 1};
  const auto t = time_grid(1500.0, 1.0);
  ResultTable tab = preset_base(c, "fig4a");
  tab.metadata.emplace_back("g", "0.1");
  tab.metadata.emplace_back("n12", "1,1");
  tab.columns = {"t"};
  Residuals r(preset_base(c, "fig4a"));
  std::vector<dynamics::TwoEmitterSeries> runs;
  std::vector<double> jab;
  for (int N : {64, 1024}) {
    const lattice::BathModel model(N);
    tab.columns.push_back("pop1_N" + std::to_string(N));
    tab.columns.push_back("pop2_N" + std::to_string(N));
    const int h = N / 2;
    const dynamics::EmitterSpec e1{{h + 1, h + 1}, Sublattice::A, 0.0, g}, e2{{h, h}, Sublattice::B, 0.0, g};
    runs.push_back(dynamics::evolve_two_emitters(model, e1, e2, t));
    const auto p = collective::solve_collective_pole(model, n12, Pair::AB, g);
    jab.push_back(p.z_plus.real());
    const double half = first_minimum(t, runs.back().c1);
    r.add("frequency_over_2JAB_N" + std::to_string(N), pi / half, 2.0 * jab.back(), 0.05, true);
  }
  const double pred = (1.0 + g * g * selfenergy::g_of_n_approx(64)) / (1.0 + g * g * selfenergy::g_of_n_approx(1024));
  r.add("JAB_ratio_1024_over_64", jab[1] / jab[0], pred, 0.05, true);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<Cell> row{t[i]};
    for (const auto& s : runs) {
      row.push_back(std::norm(s.c1[i]));
      row.push_back(std::norm(s.c2[i]));
    }
    tab.add_row(std::move(row));
  }
  return {{"", std::move(tab)}, {"_residuals", std::move(r.table)}};
}

std::vector<NamedTable> preset_fig4bc(const RunConfig& c) {
  const double g = 0.01;
  ResultTable tab = preset_base(c, "fig4bc");
  tab.metadata.emplace_back("g", "0.01");
  tab.columns = {"N", "n", "J_AB", "R_plus", "J_AB_markov_N", "J_AB_markov_asymptotic", "R0"};
  Residuals r(preset_base(c, "fig4bc"));
  for (int N : {100, 1000, 10000}) {
    const lattice::BathModel model(N);
    const double r0 = selfenergy::residue_r0(g, model);
    for (int n = 1; n <= 20; ++n) {
      const lattice::IVec2 n12{n, n};
      const auto p = collective::solve_collective_pole(model, n12, Pair::AB, g, true);
      const double jm = selfenergy::collective_sums(0.0, g, model, {Pair::AB, n12}).sigma_12;
      const double ja = selfenergy::jab_markov_asymptotic(n12, g);
      tab.add_row({double(N), double(n), p.z_plus.real(), p.r_plus.real(), jm, ja, r0});
      r.add("JAB_over_asymptotic_N" + std::to_string(N) + "_n" + std::to_string(n), p.z_plus.real() / ja, r0, 0.1, true);
    }
  }
  return {{"", std::move(tab)}, {"_residuals", std::move(r.table)}};
}

std::vector<NamedTable> preset_figA2b(const RunConfig& c) {
  ResultTable tab = preset_base(c, "figA2b");
  tab.columns = {"N", "g_exact", "g_approx"};
  Residuals r(preset_base(c, "figA2b"));
  for (int N : {16, 32, 64, 128, 256, 512, 1024, 2048}) {
    const double ge = selfenergy::g_of_n(lattice::BathModel(N)), ga = selfenergy::g_of_n_approx(N);
    tab.add_row({double(N), ge, ga});
    if (N >= 128 && N <= 1024) r.add("g_exact_minus_approx_N" + std::to_string(N), ge, ga, 0.05);
  }
  return {{"", std::move(tab)}, {"_residuals", std::move(r.table)}};
}

}  // namespace

std::vector<NamedTable> compute_preset(const std::string& id, const RunConfig& base) {
  if (id == "fig1b") return preset_fig1b(base);
  if (id == "fig2a") return preset_fig2a(base);
  if (id == "fig3") return preset_fig3(base);
  if (id == "fig4a") return preset_fig4a(base);
  if (id == "fig4bc") return preset_fig4bc(base);
  if (id == "figA2b") return preset_figA2b(base);
  throw ValidationError("unknown preset '" + id + "'");
}

// ---------------------------------------------------------------------------------------------
// entry point

int main_entry(int argc, char** argv) {
  CLI::App app{"Single-excitation dynamics of emitters coupled to a honeycomb Dirac bath"};
  app.set_version_flag("--version", code_version);
  std::string command, config;
  Settings flags;
  app.add_option("command", command, "dynamics | self-energy | poles | two-emitter | sweep | losses");
  app.add_option("--config", config, "key = value configuration file; flags override it");
  struct Flag {
    const char* name;
    const char* help;
  };
  const Flag spec[] = {
      {"N", "unit cells per side"},
      {"J", "hopping (default 1)"},
      {"g", "emitter-bath coupling"},
      {"delta", "emitter detuning"},
      {"n12", "separation a,b (emitter 1 minus emitter 2)"},
      {"sublattices", "AA | AB | BB | BA"},
      {"initial", "first | symmetric | antisymmetric"},
      {"tmax", "final time"},
      {"dt-record", "record spacing"},
      {"gamma-loss", "loss rate"},
      {"snapshots", "comma-separated snapshot times"},
      {"scan", "energy scan lo:hi:step"},
      {"integrator", "chebyshev | rk4"},
      {"preset", "fig1b | fig2a | fig3 | fig4a | fig4bc | figA2b"},
      {"sweep-command", "command run by sweep"},
      {"sweep-param", "parameter varied by sweep"},
      {"sweep-values", "comma-separated sweep values"},
      {"workers", "sweep worker threads (default: processors)"},
      {"out", "output file, or directory for presets and sweeps"},
      {"format", "csv | json"},
  };
  for (const auto& f : spec) {
    app.add_option_function<std::string>(
        std::string("--") + f.name, [&flags, name = std::string(f.name)](const std::string& v) { flags[name] = v; },
        f.help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    Settings s;
    if (!config.empty()) s = read_config_file(config);
    for (const auto& [k, v] : flags) s[k] = v;
    if (!command.empty()) s["command"] = command;
    if (s.count("preset") && !s.count("command")) s["command"] = "preset";
    if (s.count("command") && s["command"] == "preset" && !s.count("out")) s["out"] = ".";
    if (s.count("command") && s["command"] == "sweep" && !s.count("out")) s["out"] = "sweep";
    const RunConfig cfg = make_config(s);
    for (const auto& p : run(cfg)) std::cout << p.string() << "\n";
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace diracbath::cli
