#include "prft/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace prft {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns,
                     const std::string& hash)
    : out_(path), n_columns_(columns.size()) {
  if (!out_) throw SpecError("CsvWriter: cannot open " + path.string());
  out_ << "# prft-csv 1\n";
  out_ << "# config " << hash << "\n";
  out_ << "# columns";
  for (const auto& c : columns) out_ << " " << c;
  out_ << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_)
    throw SpecError("CsvWriter: wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row(std::initializer_list<double> values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  row(cells);
}

namespace {

struct Line {
  int number;
  std::string key;
  std::string value;
};

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& message) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << message;
  throw SpecError(os.str());
}

std::vector<double> parse_doubles(const std::string& origin, int line,
                                  const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) parse_fail(origin, line, "malformed number list");
  return out;
}

Matrix parse_complex_matrix(const std::string& origin, int line,
                            const std::string& text, int dim) {
  const auto vals = parse_doubles(origin, line, text);
  if (static_cast<int>(vals.size()) != 2 * dim * dim)
    parse_fail(origin, line,
               "expected " + std::to_string(2 * dim * dim) +
                   " numbers (row-major re/im pairs)");
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      m(r, c) = Complex(vals[2 * (r * dim + c)], vals[2 * (r * dim + c) + 1]);
  return m;
}

}  // namespace

SystemFile parse_system_text(const std::string& text,
                             const std::string& origin) {
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  std::string section;
  // collected values
  int dim = -1;
  Matrix hm;
  std::optional<double> period;
  struct RawMode {
    std::map<std::string, std::pair<int, std::string>> kv;
  };
  std::vector<RawMode> raw_modes;
  std::map<std::string, std::pair<int, std::string>> photons_kv, matter_kv;
  int model_line = 0;

  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos)
      line.erase(pos);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(origin, line_no, "unclosed section");
      section = line.substr(1, line.size() - 2);
      if (section == "mode")
        raw_modes.emplace_back();
      else if (section == "model")
        model_line = line_no;
      else if (section != "photons" && section != "matter")
        parse_fail(origin, line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      parse_fail(origin, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section == "model") {
      if (key == "dim") {
        dim = std::stoi(value);
        if (dim < 1 || dim > 64)
          parse_fail(origin, line_no, "dim out of range [1, 64]");
      } else if (key == "hamiltonian") {
        if (dim < 0)
          parse_fail(origin, line_no, "dim must come before hamiltonian");
        hm = parse_complex_matrix(origin, line_no, value, dim);
      } else if (key == "period") {
        period = std::stod(value);
      } else {
        parse_fail(origin, line_no, "unknown key '" + key + "' in [model]");
      }
    } else if (section == "mode") {
      auto& kv = raw_modes.back().kv;
      if (key != "frequency" && key != "amplitude" && key != "phase" &&
          key != "kind" && key != "coupling")
        parse_fail(origin, line_no, "unknown key '" + key + "' in [mode]");
      kv[key] = {line_no, value};
    } else if (section == "photons") {
      if (key != "mean" && key != "sigma" && key != "phases")
        parse_fail(origin, line_no, "unknown key '" + key + "' in [photons]");
      photons_kv[key] = {line_no, value};
    } else if (section == "matter") {
      if (key != "state")
        parse_fail(origin, line_no, "unknown key '" + key + "' in [matter]");
      matter_kv[key] = {line_no, value};
    } else {
      parse_fail(origin, line_no, "key outside any section");
    }
  }

  if (dim < 0 || hm.size() == 0)
    parse_fail(origin, model_line ? model_line : 1,
               "[model] must define dim and hamiltonian");
  if (raw_modes.empty()) parse_fail(origin, 1, "at least one [mode] needed");

  std::vector<DriveMode> modes;
  for (const auto& rm : raw_modes) {
    DriveMode m;
    for (const auto& [key, lv] : rm.kv) {
      const auto& [ln, value] = lv;
      if (key == "frequency") m.frequency = std::stod(value);
      else if (key == "amplitude") m.amplitude = std::stod(value);
      else if (key == "phase") m.phase = std::stod(value);
      else if (key == "kind") {
        if (value == "cosine") m.kind = DriveKind::Cosine;
        else if (value == "rotating") m.kind = DriveKind::Rotating;
        else parse_fail(origin, ln, "kind must be cosine or rotating");
      } else if (key == "coupling") {
        m.coupling = parse_complex_matrix(origin, ln, value, dim);
      }
    }
    if (m.coupling.size() == 0)
      parse_fail(origin, 1, "[mode] missing coupling");
    modes.push_back(std::move(m));
  }

  const int nm = static_cast<int>(modes.size());
  auto need = [&](const char* key) -> std::pair<int, std::string> {
    auto it = photons_kv.find(key);
    if (it == photons_kv.end())
      parse_fail(origin, 1, std::string("[photons] missing '") + key + "'");
    return it->second;
  };
  const auto [ml, mv] = need("mean");
  const auto mean = parse_doubles(origin, ml, mv);
  const auto [sl, sv] = need("sigma");
  const auto sig = parse_doubles(origin, sl, sv);
  const auto [pl, pv] = need("phases");
  const auto ph = parse_doubles(origin, pl, pv);
  if (static_cast<int>(mean.size()) != nm)
    parse_fail(origin, ml, "mean length != number of modes");
  if (static_cast<int>(sig.size()) != nm * nm)
    parse_fail(origin, sl, "sigma must be a full N x N matrix");
  if (static_cast<int>(ph.size()) != nm)
    parse_fail(origin, pl, "phases length != number of modes");
  RealVector nbar(nm), phases(nm);
  RealMatrix sigma(nm, nm);
  for (int k = 0; k < nm; ++k) {
    nbar[k] = mean[k];
    phases[k] = ph[k];
    for (int j = 0; j < nm; ++j) sigma(k, j) = sig[k * nm + j];
  }

  SystemFile out{DrivenSystem(hm, std::move(modes), period),
                 GaussianPhotonState(nbar, sigma, phases), std::nullopt};
  if (auto it = matter_kv.find("state"); it != matter_kv.end()) {
    const auto vals = parse_doubles(origin, it->second.first,
                                    it->second.second);
    if (static_cast<int>(vals.size()) != 2 * dim)
      parse_fail(origin, it->second.first,
                 "matter state needs dim re/im pairs");
    Vector state(dim);
    for (int i = 0; i < dim; ++i)
      state[i] = Complex(vals[2 * i], vals[2 * i + 1]);
    state /= state.norm();
    out.matter_state = state;
  }
  return out;
}

SystemFile parse_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open system file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system_text(buf.str(), path.string());
}

void write_mgf_table(const std::filesystem::path& path, const MgfTable& table,
                     const std::string& hash) {
  std::vector<std::string> columns = {"t"};
  for (int k = 0; k < table.grid.n_modes(); ++k)
    columns.push_back("chi_" + std::to_string(k + 1));
  columns.push_back("re_m");
  columns.push_back("im_m");
  columns.push_back("variant");
  CsvWriter csv(path, columns, hash);
  const std::string name = variant_name(table.variant);
  for (Eigen::Index i = 0; i < table.times.size(); ++i)
    for (long flat = 0; flat < table.grid.total(); ++flat) {
      const RealVector chi = table.grid.chi(flat);
      std::vector<std::string> cells = {format_number(table.times[i])};
      for (int k = 0; k < table.grid.n_modes(); ++k)
        cells.push_back(format_number(chi[k]));
      cells.push_back(format_number(table.values(i, flat).real()));
      cells.push_back(format_number(table.values(i, flat).imag()));
      cells.push_back(name);
      csv.row(cells);
    }
}

void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries) {
  nlohmann::json j;
  for (const auto& [k, v] : entries) j[k] = v;
  std::ofstream out(path);
  if (!out) throw SpecError("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace prft
