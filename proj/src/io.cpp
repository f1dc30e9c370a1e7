#include "selfosc/io.hpp"

#include <charconv>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "selfosc/errors.hpp"

namespace selfosc {

namespace {

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out + '\n';
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_number(v);
    first = false;
  }
  out += '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<std::string> trajectory_columns(std::size_t channels) {
  if (channels == 1) return {"t", "n1", "dn1_dt"};
  if (channels == 2) return {"t", "n1", "n2", "dn1_dt", "dn2_dt"};
  throw DomainError("trajectory must have 1 or 2 channels");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "': " + ec.message());
}

std::string coefficients_csv(const CoefficientSeries& c) {
  std::string out = join(kCoefficientColumns);
  for (std::size_t i = 0; i < c.size(); ++i)
    append_row(out, {c.time[i], c.lambda[i], c.diffusion[i], c.partial_diffusion[0][i],
                     c.partial_diffusion[1][i], c.bath_integrals[0][i], c.bath_integrals[1][i],
                     c.ratio[i]});
  return out;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out = join(trajectory_columns(t.channels()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.channels() == 1)
      append_row(out, {t.time[i], t.n[0][i], t.dn_dt[0][i]});
    else
      append_row(out, {t.time[i], t.n[0][i], t.n[1][i], t.dn_dt[0][i], t.dn_dt[1][i]});
  }
  return out;
}

std::string observables_csv(const std::vector<Observable>& rows) {
  std::string out = join(kObservableColumns);
  for (const auto& r : rows) {
    out += r.name + ',' + format_number(r.value) + ',' + format_number(r.window_lo) + ',' +
           format_number(r.window_hi) + ',' + format_number(r.tolerance) + ',' + r.status + '\n';
  }
  return out;
}

std::string energy_csv(const DeltaDissipation& d) {
  std::string out = join(kEnergyColumns);
  for (std::size_t i = 0; i < d.time.size(); ++i)
    append_row(out, {d.time[i], d.energy[0][i], d.energy[1][i], d.reference[0][i],
                     d.reference[1][i], d.delta[0][i], d.delta[1][i], d.rate[0][i], d.rate[1][i]});
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw DomainError("no column '" + name + "'");
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
  const std::size_t j = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(j < r.size() ? std::strtod(r[j].c_str(), nullptr) : NAN);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      t.columns = split(line);
      header = false;
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace selfosc
