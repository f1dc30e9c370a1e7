#include "selfosc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "selfosc/errors.hpp"
#include "selfosc/scenarios.hpp"

namespace selfosc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that starts with '#' or ';' outside quotes.
std::string strip_comment(const std::string& s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#' || c == ';') {
      return s.substr(0, i);
    }
  }
  return s;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  return v;
}

double to_double(const std::string& v) {
  const std::string s = trim(v);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("expected a number, got '" + s + "'");
  return x;
}

long to_integer(const std::string& v) {
  const std::string s = trim(v);
  long x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("expected an integer, got '" + s + "'");
  return x;
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    if (trim(item).empty()) {
      if (out.empty() && trim(v).empty()) break;
      throw ConfigError("empty entry in value list");
    }
    out.push_back(to_double(item));
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool is_physical_section(const std::string& s) {
  return s == "oscillator" || s == "bath.1" || s == "bath.2" || s == "oscillator2" ||
         s == "bath2.1" || s == "bath2.2" || s == "coupling";
}

const std::set<std::string> kSections{"",        "oscillator", "bath.1",  "bath.2",
                                      "oscillator2", "bath2.1", "bath2.2", "coupling",
                                      "run",     "initial",    "quadrature", "kernel",
                                      "oracle",  "sweep"};

SecondOrderForm form_from_string(const std::string& v) {
  if (v == "first_integral") return SecondOrderForm::FirstIntegral;
  if (v == "explicit") return SecondOrderForm::Explicit;
  throw ConfigError("unknown form '" + v + "' (expected first_integral|explicit)");
}

unsigned to_unsigned(const std::string& v) {
  const long x = to_integer(v);
  if (x < 1) throw ConfigError("must be a positive integer");
  return static_cast<unsigned>(x);
}

void apply_bath(BathSpec& b, const std::string& key, const std::string& value) {
  if (key == "statistics") {
    try {
      b.statistics = statistics_from_string(value);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "alpha") {
    b.alpha = to_double(value);
  } else if (key == "gamma_over_Omega") {
    b.gamma = to_double(value);
  } else if (key == "kT_over_hOmega") {
    b.temperature = to_double(value);
  } else {
    throw ConfigError("unknown key");
  }
}

struct Entry {
  std::string section, key, value;
  int line = 0;
  std::string path() const { return section.empty() ? key : section + "." + key; }
};

void apply(RunConfig& c, const Entry& e) {
  const auto& s = e.section;
  const auto& k = e.key;
  const std::string v = unquote(e.value);
  auto osc2 = [&]() -> OscillatorConfig& {
    if (!c.oscillator2) c.oscillator2.emplace();
    return *c.oscillator2;
  };
  if (s.empty()) {
    if (k != "scenario") throw ConfigError("unknown key");
  } else if (s == "oscillator" || s == "oscillator2") {
    if (k != "Omega") throw ConfigError("unknown key");
    (s == "oscillator" ? c.oscillator : osc2()).Omega = to_double(v);
  } else if (s == "bath.1" || s == "bath.2") {
    apply_bath(c.oscillator.baths[s == "bath.1" ? 0 : 1], k, v);
  } else if (s == "bath2.1" || s == "bath2.2") {
    apply_bath(osc2().baths[s == "bath2.1" ? 0 : 1], k, v);
  } else if (s == "coupling") {
    if (k != "beta") throw ConfigError("unknown key");
    c.beta = to_double(v);
  } else if (s == "run") {
    if (k == "scenario") {
    } else if (k == "t_max") {
      c.t_max = to_double(v);
    } else if (k == "dt") {
      c.dt = to_double(v);
    } else if (k == "form") {
      c.form = form_from_string(v);
    } else if (k == "substeps") {
      c.substeps = to_unsigned(v);
    } else if (k == "workers") {
      c.workers = to_unsigned(v);
    } else if (k == "output") {
      c.output_dir = v;
    } else {
      throw ConfigError("unknown key");
    }
  } else if (s == "initial") {
    if (k == "n1") c.initial.n1 = to_double(v);
    else if (k == "n2") c.initial.n2 = to_double(v);
    else if (k == "dn1_dt") c.initial.dn1_dt = to_double(v);
    else if (k == "dn2_dt") c.initial.dn2_dt = to_double(v);
    else throw ConfigError("unknown key");
  } else if (s == "quadrature") {
    if (k == "rtol") c.rtol = to_double(v);
    else if (k == "w_max_factor") c.w_max_factor = to_double(v);
    else throw ConfigError("unknown key");
  } else if (s == "kernel") {
    if (k != "abs_A_power") throw ConfigError("unknown key");
    c.abs_A_power = static_cast<int>(to_integer(v));
  } else if (s == "oracle") {
    if (k == "modes") c.oracle.modes = to_unsigned(v);
    else if (k == "w_max_over_gamma") c.oracle.w_max_over_gamma = to_double(v);
    else if (k == "t_max") c.oracle.t_max = to_double(v);
    else if (k == "tolerance") c.oracle.tolerance = to_double(v);
    else throw ConfigError("unknown key");
  } else if (s == "sweep") {
    c.axes.push_back({k, to_list(v)});
  }
}

struct Violation {
  std::string key;
  std::string message;
};

std::optional<Violation> bath_violation(const BathSpec& b, const std::string& prefix) {
  if (!std::isfinite(b.alpha) || b.alpha < 0.0) return Violation{prefix + ".alpha", "must be >= 0"};
  if (!std::isfinite(b.gamma) || b.gamma <= 0.0)
    return Violation{prefix + ".gamma_over_Omega", "must be > 0"};
  if (!std::isfinite(b.temperature) || b.temperature < 0.0)
    return Violation{prefix + ".kT_over_hOmega", "must be >= 0"};
  return std::nullopt;
}

std::optional<Violation> find_violation(const RunConfig& c) {
  if (!c.scenario.empty() && !is_scenario(c.scenario))
    return Violation{"scenario", "unknown scenario '" + c.scenario + "' (expected fig1..fig8)"};
  if (!std::isfinite(c.oscillator.Omega) || c.oscillator.Omega <= 0.0)
    return Violation{"oscillator.Omega", "must be > 0"};
  for (int i = 0; i < 2; ++i)
    if (auto v = bath_violation(c.oscillator.baths[i], "bath." + std::to_string(i + 1))) return v;
  if (c.oscillator2) {
    if (!std::isfinite(c.oscillator2->Omega) || c.oscillator2->Omega <= 0.0)
      return Violation{"oscillator2.Omega", "must be > 0"};
    for (int i = 0; i < 2; ++i)
      if (auto v = bath_violation(c.oscillator2->baths[i], "bath2." + std::to_string(i + 1)))
        return v;
  }
  if (!std::isfinite(c.beta) || c.beta < 0.0) return Violation{"coupling.beta", "must be >= 0"};
  if (c.beta != 0.0 && !c.oscillator2)
    return Violation{"coupling.beta", "requires a second oscillator"};
  if (!std::isfinite(c.t_max) || c.t_max <= 0.0) return Violation{"run.t_max", "must be > 0"};
  if (!std::isfinite(c.dt) || c.dt <= 0.0) return Violation{"run.dt", "must be > 0"};
  if (c.dt > 0.5 * c.t_max) return Violation{"run.dt", "must be at most t_max / 2"};
  if (c.t_max / c.dt > 1e7) return Violation{"run.dt", "more than 1e7 grid points"};
  if (c.substeps < 1) return Violation{"run.substeps", "must be >= 1"};
  if (c.workers < 1) return Violation{"run.workers", "must be >= 1"};
  for (auto [key, x] : {std::pair{"initial.n1", c.initial.n1}, {"initial.n2", c.initial.n2}})
    if (!std::isfinite(x) || x < 0.0) return Violation{key, "must be >= 0"};
  for (auto [key, x] :
       {std::pair{"initial.dn1_dt", c.initial.dn1_dt}, {"initial.dn2_dt", c.initial.dn2_dt}})
    if (!std::isfinite(x)) return Violation{key, "must be finite"};
  if (!std::isfinite(c.rtol) || c.rtol <= 0.0 || c.rtol >= 0.1)
    return Violation{"quadrature.rtol", "must be in (0, 0.1)"};
  if (!std::isfinite(c.w_max_factor) || c.w_max_factor < 2.0)
    return Violation{"quadrature.w_max_factor", "must be >= 2"};
  if (c.abs_A_power != 1 && c.abs_A_power != 2)
    return Violation{"kernel.abs_A_power", "must be 1 or 2"};
  if (c.oracle.modes < 50) return Violation{"oracle.modes", "must be >= 50"};
  if (!std::isfinite(c.oracle.w_max_over_gamma) || c.oracle.w_max_over_gamma < 10.0)
    return Violation{"oracle.w_max_over_gamma", "must be >= 10"};
  if (!std::isfinite(c.oracle.t_max) || c.oracle.t_max <= 0.0)
    return Violation{"oracle.t_max", "must be > 0"};
  if (!std::isfinite(c.oracle.tolerance) || c.oracle.tolerance <= 0.0)
    return Violation{"oracle.tolerance", "must be > 0"};
  const auto paths = parameter_paths(c);
  std::set<std::string> seen;
  for (const auto& axis : c.axes) {
    const std::string key = "sweep." + axis.path;
    if (std::find(paths.begin(), paths.end(), axis.path) == paths.end())
      return Violation{key, "unknown parameter path"};
    if (!seen.insert(axis.path).second) return Violation{key, "duplicate axis"};
    for (double x : axis.values)
      if (!std::isfinite(x)) return Violation{key, "non-finite value"};
  }
  return std::nullopt;
}

double* parameter_slot(RunConfig& c, const std::string& path, bool& physical) {
  physical = true;
  auto bath_slot = [&](OscillatorConfig& o, const std::string& rest) -> double* {
    if (rest.size() < 3 || (rest[0] != '1' && rest[0] != '2') || rest[1] != '.') return nullptr;
    BathSpec& b = o.baths[rest[0] == '1' ? 0 : 1];
    const std::string key = rest.substr(2);
    if (key == "alpha") return &b.alpha;
    if (key == "gamma_over_Omega") return &b.gamma;
    if (key == "kT_over_hOmega") return &b.temperature;
    return nullptr;
  };
  if (path == "oscillator.Omega") return &c.oscillator.Omega;
  if (path.rfind("bath.", 0) == 0) return bath_slot(c.oscillator, path.substr(5));
  if (c.oscillator2) {
    if (path == "oscillator2.Omega") return &c.oscillator2->Omega;
    if (path.rfind("bath2.", 0) == 0) return bath_slot(*c.oscillator2, path.substr(6));
    if (path == "coupling.beta") return &c.beta;
  }
  physical = false;
  if (path == "run.t_max") return &c.t_max;
  if (path == "run.dt") return &c.dt;
  if (path == "initial.n1") return &c.initial.n1;
  if (path == "initial.dn1_dt") return &c.initial.dn1_dt;
  if (c.oscillator2) {
    if (path == "initial.n2") return &c.initial.n2;
    if (path == "initial.dn2_dt") return &c.initial.dn2_dt;
  }
  if (path == "quadrature.rtol") return &c.rtol;
  if (path == "quadrature.w_max_factor") return &c.w_max_factor;
  if (path == "oracle.t_max") return &c.oracle.t_max;
  if (path == "oracle.tolerance") return &c.oracle.tolerance;
  if (path == "oracle.w_max_over_gamma") return &c.oracle.w_max_over_gamma;
  return nullptr;
}

void write_bath(std::ostringstream& os, const std::string& section, const BathSpec& b) {
  os << "\n[" << section << "]\n"
     << "statistics = " << to_string(b.statistics) << "\n"
     << "alpha = " << format_double(b.alpha) << "\n"
     << "gamma_over_Omega = " << format_double(b.gamma) << "\n"
     << "kT_over_hOmega = " << format_double(b.temperature) << "\n";
}

}  // namespace

SystemSpec OscillatorConfig::system() const { return make_system(Omega, baths[0], baths[1]); }

SystemSpec RunConfig::system(std::size_t which) const {
  if (which == 0) return oscillator.system();
  if (which == 1 && oscillator2) return oscillator2->system();
  throw DomainError("no oscillator " + std::to_string(which + 1) + " in this configuration");
}

CoupledSpec RunConfig::coupled_spec() const {
  if (!oscillator2) throw DomainError("configuration has no second oscillator");
  CoupledSpec spec;
  spec.systems = {oscillator.system(), oscillator2->system()};
  spec.beta = beta;
  return spec;
}

TransportOptions RunConfig::transport() const {
  TransportOptions opt;
  opt.quadrature_rtol = rtol;
  opt.w_max_factor = w_max_factor;
  opt.abs_A_power = abs_A_power;
  opt.workers = workers;
  return opt;
}

EvolveOptions RunConfig::evolve_options() const {
  EvolveOptions opt;
  opt.substeps = substeps;
  return opt;
}

CoupledInit RunConfig::coupled_init() const {
  CoupledInit init;
  init.n = {initial.n1, initial.n2};
  init.dn = {initial.dn1_dt, initial.dn2_dt};
  return init;
}

void RunConfig::validate() const {
  if (auto v = find_violation(*this)) throw ConfigError(v->key + ": " + v->message);
}

std::string to_string(SecondOrderForm form) {
  return form == SecondOrderForm::FirstIntegral ? "first_integral" : "explicit";
}

RunConfig parse_config_text(const std::string& text) {
  std::vector<Entry> entries;
  std::map<std::string, int> lines;
  std::map<std::string, int> section_lines;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!kSections.count(section) || section.empty())
        throw ConfigError("unknown section [" + section + "]", line);
      section_lines.emplace(section, line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    Entry e{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (e.key.empty()) throw ConfigError("missing key", line);
    if (!lines.emplace(e.path(), line).second)
      throw ConfigError("duplicate key '" + e.path() + "'", line);
    entries.push_back(e);
  }

  RunConfig cfg;
  const Entry* scenario = nullptr;
  for (const auto& e : entries) {
    if (e.key == "scenario" && (e.section.empty() || e.section == "run")) {
      if (scenario) throw ConfigError("scenario given twice", e.line);
      scenario = &e;
    }
  }
  if (scenario) {
    const std::string name = unquote(scenario->value);
    if (!is_scenario(name))
      throw ConfigError("unknown scenario '" + name + "' (expected fig1..fig8)", scenario->line);
    cfg = make_scenario(name).config;
    for (const auto& [sec, l] : section_lines)
      if (is_physical_section(sec))
        throw ConfigError("[" + sec + "] cannot be combined with a scenario preset", l);
  }
  for (const auto& e : entries) {
    try {
      apply(cfg, e);
    } catch (const ConfigError& err) {
      throw ConfigError(e.path() + ": " + err.what(), e.line);
    }
  }
  if (!scenario && section_lines.count("coupling") && !section_lines.count("oscillator2") &&
      !section_lines.count("bath2.1") && !section_lines.count("bath2.2"))
    throw ConfigError("[coupling] requires [oscillator2]", section_lines.at("coupling"));

  if (auto v = find_violation(cfg)) {
    auto it = lines.find(v->key);
    throw ConfigError(v->key + ": " + v->message, it == lines.end() ? 0 : it->second);
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  if (!c.scenario.empty()) {
    os << "scenario = " << c.scenario << "\n";
  } else {
    os << "[oscillator]\nOmega = " << format_double(c.oscillator.Omega) << "\n";
    write_bath(os, "bath.1", c.oscillator.baths[0]);
    write_bath(os, "bath.2", c.oscillator.baths[1]);
    if (c.oscillator2) {
      os << "\n[oscillator2]\nOmega = " << format_double(c.oscillator2->Omega) << "\n";
      write_bath(os, "bath2.1", c.oscillator2->baths[0]);
      write_bath(os, "bath2.2", c.oscillator2->baths[1]);
      os << "\n[coupling]\nbeta = " << format_double(c.beta) << "\n";
    }
  }
  os << "\n[run]\n"
     << "t_max = " << format_double(c.t_max) << "\n"
     << "dt = " << format_double(c.dt) << "\n"
     << "form = " << to_string(c.form) << "\n"
     << "substeps = " << c.substeps << "\n"
     << "workers = " << c.workers << "\n"
     << "output = \"" << c.output_dir << "\"\n";
  os << "\n[initial]\n"
     << "n1 = " << format_double(c.initial.n1) << "\n"
     << "dn1_dt = " << format_double(c.initial.dn1_dt) << "\n";
  if (c.oscillator2)
    os << "n2 = " << format_double(c.initial.n2) << "\n"
       << "dn2_dt = " << format_double(c.initial.dn2_dt) << "\n";
  os << "\n[quadrature]\n"
     << "rtol = " << format_double(c.rtol) << "\n"
     << "w_max_factor = " << format_double(c.w_max_factor) << "\n";
  os << "\n[kernel]\nabs_A_power = " << c.abs_A_power << "\n";
  os << "\n[oracle]\n"
     << "modes = " << c.oracle.modes << "\n"
     << "w_max_over_gamma = " << format_double(c.oracle.w_max_over_gamma) << "\n"
     << "t_max = " << format_double(c.oracle.t_max) << "\n"
     << "tolerance = " << format_double(c.oracle.tolerance) << "\n";
  if (!c.axes.empty()) {
    os << "\n[sweep]\n";
    for (const auto& axis : c.axes) {
      os << axis.path << " =";
      for (std::size_t i = 0; i < axis.values.size(); ++i)
        os << (i ? ", " : " ") << format_double(axis.values[i]);
      os << "\n";
    }
  }
  return os.str();
}

std::vector<std::string> parameter_paths(const RunConfig& config) {
  std::vector<std::string> out{"oscillator.Omega"};
  const char* bath_keys[] = {"alpha", "gamma_over_Omega", "kT_over_hOmega"};
  for (const char* b : {"bath.1.", "bath.2."})
    for (const char* k : bath_keys) out.push_back(std::string(b) + k);
  if (config.oscillator2) {
    out.push_back("oscillator2.Omega");
    for (const char* b : {"bath2.1.", "bath2.2."})
      for (const char* k : bath_keys) out.push_back(std::string(b) + k);
    out.push_back("coupling.beta");
  }
  for (const char* p : {"run.t_max", "run.dt", "initial.n1", "initial.dn1_dt"}) out.push_back(p);
  if (config.oscillator2)
    for (const char* p : {"initial.n2", "initial.dn2_dt"}) out.push_back(p);
  for (const char* p : {"quadrature.rtol", "quadrature.w_max_factor", "oracle.t_max",
                        "oracle.tolerance", "oracle.w_max_over_gamma"})
    out.push_back(p);
  return out;
}

void set_parameter(RunConfig& config, const std::string& path, double value) {
  bool physical = false;
  double* slot = parameter_slot(config, path, physical);
  if (!slot) throw ConfigError("unknown parameter path '" + path + "'");
  *slot = value;
  if (physical) config.scenario.clear();
}

double get_parameter(const RunConfig& config, const std::string& path) {
  bool physical = false;
  double* slot = parameter_slot(const_cast<RunConfig&>(config), path, physical);
  if (!slot) throw ConfigError("unknown parameter path '" + path + "'");
  return *slot;
}

}  // namespace selfosc
