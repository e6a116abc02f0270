#include "harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "harness/csv.hpp"

namespace harness {

using bgsdc::Method;
using bgsdc::MethodConfig;
using bgsdc::Vec3;

// ---------------------------------------------------------------------------
// Document parsing

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find_first_of("#;");
  return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

Document parse_document(std::istream& in, std::string source) {
  Document doc;
  doc.source = std::move(source);
  doc.sections.push_back({"", 0, {}});
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(doc.source + ":" + std::to_string(line_no) + ": unterminated section header");
      }
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(doc.source + ":" + std::to_string(line_no) + ": empty section name");
      doc.sections.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(doc.source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no};
    if (e.key.empty()) throw ConfigError(doc.source + ":" + std::to_string(line_no) + ": missing key");
    doc.sections.back().entries.push_back(std::move(e));
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_document(in, path);
}

Document parse_string(std::string_view text, std::string source) {
  std::istringstream in{std::string(text)};
  return parse_document(in, std::move(source));
}

// ---------------------------------------------------------------------------
// Names

namespace {

struct CommandName {
  Command command;
  std::string_view name;
};

constexpr CommandName kCommands[] = {
    {Command::GyroValidate, "gyro-validate"},       {Command::MirrorConvergence, "mirror-convergence"},
    {Command::MirrorReflections, "mirror-reflections"}, {Command::MirrorEnergy, "mirror-energy"},
    {Command::SolovevAccuracy, "solovev-accuracy"}, {Command::SolovevEnergy, "solovev-energy"},
    {Command::WorkTable, "work-table"},             {Command::Trajectory, "trajectory"},
};

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  return std::nullopt;
}

std::vector<std::string_view> command_names() {
  std::vector<std::string_view> out;
  for (const auto& c : kCommands) out.push_back(c.name);
  return out;
}

std::string_view to_string(FieldType t) {
  switch (t) {
    case FieldType::Uniform: return "uniform";
    case FieldType::Mirror: return "mirror";
    case FieldType::Solovev: return "solovev";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Field

double FieldConfig::alpha() const {
  switch (type) {
    case FieldType::Uniform: return uniform_alpha;
    case FieldType::Mirror: return mirror.alpha;
    case FieldType::Solovev: return solovev.alpha;
  }
  return 1.0;
}

double FieldConfig::omega() const {
  switch (type) {
    case FieldType::Uniform: return uniform_alpha * bgsdc::norm(B_uniform);
    case FieldType::Mirror: return mirror.omega_B;
    case FieldType::Solovev:
      return std::abs(solovev.alpha) * bgsdc::norm(bgsdc::solovev_B({solovev.R0, 0.0, solovev.Z0}, solovev));
  }
  return 1.0;
}

std::unique_ptr<bgsdc::FieldModel> FieldConfig::make() const {
  switch (type) {
    case FieldType::Uniform: return std::make_unique<bgsdc::UniformField>(B_uniform, E_uniform);
    case FieldType::Mirror: return std::make_unique<bgsdc::MirrorField>(mirror);
    case FieldType::Solovev: return std::make_unique<bgsdc::SolovevField>(solovev);
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Defaults

namespace {

MethodConfig boris(Method m) { return {m, 2, 0, 0, 1, bgsdc::UpdateKind::Quadrature}; }
MethodConfig bgsdc_cfg(int M, int kg, int kp) { return {Method::Bgsdc, M, kg, kp, 1, bgsdc::UpdateKind::Quadrature}; }
MethodConfig boris_sdc(int M, int k) { return {Method::BorisSdc, M, 0, 0, k, bgsdc::UpdateKind::Quadrature}; }

FieldConfig mirror_field(double z0, double omega_B) {
  FieldConfig f;
  f.type = FieldType::Mirror;
  f.mirror.z0 = z0;
  f.mirror.omega_B = omega_B;
  f.mirror.alpha = 1.0;
  return f;
}

FieldConfig solovev_field() {
  FieldConfig f;
  f.type = FieldType::Solovev;
  return f;
}

const ParticleConfig kPassing{"passing", {2.1889641172761, 0.0, 0.8635434778595},
                              {2269604.3143406, 292264.06108651, -338526.06660893}};
const ParticleConfig kTrapped{"trapped", {3.0852639552352, 0.0, -0.0732997600262},
                              {814158.31065935, 931354.18390575, 1793580.5493877}};

std::vector<double> scaled(std::initializer_list<double> values, double scale) {
  std::vector<double> out;
  for (double v : values) out.push_back(v * scale);
  return out;
}

std::vector<double> halving(double start, int count, double scale) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(start * std::pow(0.5, i) * scale);
  return out;
}

}  // namespace

ExperimentConfig default_config(Command command, bool paper_scale) {
  ExperimentConfig c;
  c.command = command;
  c.reference.method = bgsdc_cfg(5, 2, 4);
  switch (command) {
    case Command::GyroValidate: {
      c.field.type = FieldType::Uniform;
      c.particles = {{"gyro", {0.0, 0.0, 0.0}, {1.0, 0.0, 0.3}}};
      c.methods = {boris(Method::NonstaggeredBoris), boris(Method::StaggeredBoris), bgsdc_cfg(3, 2, 3),
                   bgsdc_cfg(5, 2, 3)};
      const double period = 2.0 * std::numbers::pi;
      c.t_end = 2.0 * period;
      for (int n : {10, 14, 20, 28, 40, 56, 80, 112, 160}) c.dt_ladder.push_back(period / n);
      break;
    }
    case Command::MirrorConvergence:
      c.field = mirror_field(16.0, 400.0);
      c.particles = {{"scenario2", {1.0, 0.0, 0.0}, {100.0, 0.0, 50.0}}};
      c.methods = {boris(Method::NonstaggeredBoris), boris(Method::StaggeredBoris), bgsdc_cfg(3, 2, 3),
                   bgsdc_cfg(5, 1, 3), bgsdc_cfg(5, 2, 3)};
      c.t_end = paper_scale ? 16.0 : 1.0;
      c.dt_ladder = halving(0.4, 9, 1.0 / 400.0);
      break;
    case Command::MirrorReflections:
      c.field = mirror_field(200.0, 2000.0);
      c.particles = {{"scenario1", {1.0, 0.5, 0.0}, {100.0, 0.0, 50.0}}};
      c.methods = {boris(Method::StaggeredBoris), boris(Method::NonstaggeredBoris), bgsdc_cfg(3, 2, 3),
                   bgsdc_cfg(5, 2, 3)};
      c.t_end = paper_scale ? 50.0 : 20.0;
      c.dt_ladder = halving(1.6, 5, 1.0 / 2000.0);
      c.reference = {boris_sdc(5, 6), 0.005 / 2000.0};
      break;
    case Command::MirrorEnergy:
      c.field = mirror_field(16.0, 400.0);
      c.particles = {{"scenario2", {1.0, 0.0, 0.0}, {100.0, 0.0, 50.0}}};
      c.methods = {boris(Method::NonstaggeredBoris), boris(Method::StaggeredBoris), boris_sdc(3, 2),
                   boris_sdc(3, 4), bgsdc_cfg(3, 1, 2), bgsdc_cfg(3, 2, 3), bgsdc_cfg(5, 2, 3)};
      c.dt = 0.5 / 400.0;
      c.n_steps = paper_scale ? 3840000 : 100000;
      break;
    case Command::SolovevAccuracy:
      c.field = solovev_field();
      c.particles = {kPassing, kTrapped};
      c.methods = {boris(Method::StaggeredBoris), bgsdc_cfg(3, 1, 3), bgsdc_cfg(3, 2, 6), bgsdc_cfg(5, 1, 4),
                   bgsdc_cfg(5, 2, 6)};
      c.t_end = paper_scale ? 1e-2 : 5e-5;
      c.dt_ladder = scaled({4.0, 2.0, 1.0, 0.5}, 1e-9);
      c.reference = {bgsdc_cfg(5, 2, 4), 0.1e-9};
      break;
    case Command::SolovevEnergy:
      c.field = solovev_field();
      c.particles = {kPassing, kTrapped};
      c.methods = {bgsdc_cfg(3, 2, 6)};
      c.dt = 1e-9;
      c.n_steps = paper_scale ? 10000000 : 100000;
      break;
    case Command::WorkTable:
      c.field = mirror_field(16.0, 400.0);
      c.particles = {{"scenario2", {1.0, 0.0, 0.0}, {100.0, 0.0, 50.0}}};
      c.methods = {bgsdc_cfg(5, 2, 6), bgsdc_cfg(3, 2, 6), bgsdc_cfg(3, 1, 3), bgsdc_cfg(2, 0, 0),
                   boris_sdc(3, 4), boris(Method::NonstaggeredBoris), boris(Method::StaggeredBoris)};
      c.dt = 0.1 / 400.0;
      c.n_steps_ladder = {1, 100};
      break;
    case Command::Trajectory:
      c.field = mirror_field(8.0, 200.0);
      c.particles = {{"visualization", {5.25, 5.25, 0.0}, {100.0, 0.0, 50.0}}};
      c.methods = {boris(Method::NonstaggeredBoris)};
      c.t_end = 0.485;
      c.n_steps = 1000;
      break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Resolution

namespace {

class Reader {
 public:
  Reader(const Document& doc, const Section& sec) : doc_(doc), sec_(sec) {}

  [[noreturn]] void fail(const Entry& e, const std::string& msg) const {
    throw ConfigError(doc_.source + ":" + std::to_string(e.line) + ": [" + sec_.name + "] " + e.key + ": " + msg);
  }

  double number(const Entry& e) const {
    const std::string& s = e.value;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) fail(e, "expected a number, got '" + s + "'");
    return v;
  }

  double positive(const Entry& e) const {
    const double v = number(e);
    if (!(v > 0.0)) fail(e, "must be positive");
    return v;
  }

  std::int64_t integer(const Entry& e, std::int64_t min_value = 0) const {
    const std::string& s = e.value;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) {
      // Allow 1e5-style literals as long as they are integral.
      const double d = number(e);
      if (d != std::floor(d) || std::abs(d) > 9e15) fail(e, "expected an integer, got '" + s + "'");
      if (d < static_cast<double>(min_value)) fail(e, "must be at least " + std::to_string(min_value));
      return static_cast<std::int64_t>(d);
    }
    if (v < min_value) fail(e, "must be at least " + std::to_string(min_value));
    return v;
  }

  bool boolean(const Entry& e) const {
    std::string s = e.value;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    fail(e, "expected true or false, got '" + e.value + "'");
  }

  std::vector<double> list(const Entry& e) const {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Entry sub = e;
      sub.value = trim(item);
      out.push_back(number(sub));
    }
    if (out.empty()) fail(e, "expected a comma separated list");
    return out;
  }

  Vec3 vec3(const Entry& e) const {
    const std::vector<double> v = list(e);
    if (v.size() != 3) fail(e, "expected three comma separated components");
    return {v[0], v[1], v[2]};
  }

  std::vector<double> ladder(const Entry& e) const {
    std::vector<double> v = list(e);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0)) fail(e, "step sizes must be positive");
      if (i > 0 && !(v[i] < v[i - 1])) fail(e, "step sizes must decrease strictly");
    }
    return v;
  }

 private:
  const Document& doc_;
  const Section& sec_;
};

void apply_field(const Document& doc, const Section& sec, FieldConfig& f, Command command) {
  const Reader r(doc, sec);
  // The type has to be known before the parameters are interpreted.
  for (const Entry& e : sec.entries) {
    if (e.key != "type") continue;
    FieldConfig fresh;
    if (e.value == "uniform") {
      fresh.type = FieldType::Uniform;
    } else if (e.value == "mirror") {
      fresh = mirror_field(16.0, 400.0);
    } else if (e.value == "solovev") {
      fresh = solovev_field();
    } else {
      r.fail(e, "unknown field type '" + e.value + "' (uniform, mirror, solovev)");
    }
    if (fresh.type != f.type) f = fresh;
  }
  (void)command;
  for (const Entry& e : sec.entries) {
    const std::string& k = e.key;
    if (k == "type") continue;
    if (k == "alpha") {
      const double a = r.number(e);
      if (a == 0.0) r.fail(e, "must be non-zero");
      f.uniform_alpha = f.mirror.alpha = f.solovev.alpha = a;
      continue;
    }
    switch (f.type) {
      case FieldType::Uniform:
        if (k == "B") f.B_uniform = r.vec3(e);
        else if (k == "E") f.E_uniform = r.vec3(e);
        else r.fail(e, "unknown key for a uniform field");
        break;
      case FieldType::Mirror:
        if (k == "z0") f.mirror.z0 = r.positive(e);
        else if (k == "omega_B") f.mirror.omega_B = r.number(e);
        else r.fail(e, "unknown key for a mirror field");
        break;
      case FieldType::Solovev: {
        static const std::map<std::string, double bgsdc::SolovevParams::*> keys = {
            {"sigma", &bgsdc::SolovevParams::sigma}, {"epsilon", &bgsdc::SolovevParams::epsilon},
            {"kappa", &bgsdc::SolovevParams::kappa}, {"psi", &bgsdc::SolovevParams::psi},
            {"r_ma", &bgsdc::SolovevParams::r_ma},   {"r_mi", &bgsdc::SolovevParams::r_mi},
            {"z_m", &bgsdc::SolovevParams::z_m},     {"z0", &bgsdc::SolovevParams::z0_len},
            {"Bphi0", &bgsdc::SolovevParams::Bphi0}, {"E0", &bgsdc::SolovevParams::E0},
            {"r_a", &bgsdc::SolovevParams::r_a},     {"R0", &bgsdc::SolovevParams::R0},
            {"Z0", &bgsdc::SolovevParams::Z0},
        };
        const auto it = keys.find(k);
        if (it == keys.end()) r.fail(e, "unknown key for a solovev field");
        f.solovev.*(it->second) = r.number(e);
        break;
      }
    }
  }
  try {
    if (f.type == FieldType::Mirror) f.mirror.validate();
    if (f.type == FieldType::Solovev) f.solovev.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(doc.source + ":" + std::to_string(sec.line) + ": [field] " + ex.what());
  }
}

void apply_method_key(const Reader& r, const Entry& e, MethodConfig& m) {
  try {
    if (e.key == "method") m.method = bgsdc::parse_method(e.value);
    else if (e.key == "M") m.M = static_cast<int>(r.integer(e, bgsdc::kMinNodes));
    else if (e.key == "K_gmres") m.K_gmres = static_cast<int>(r.integer(e));
    else if (e.key == "K_picard") m.K_picard = static_cast<int>(r.integer(e));
    else if (e.key == "K_sweeps") m.K_sweeps = static_cast<int>(r.integer(e, 1));
    else if (e.key == "update") m.update = bgsdc::parse_update(e.value);
    else r.fail(e, "unknown key");
  } catch (const std::invalid_argument& ex) {
    r.fail(e, ex.what());
  }
}

/// Boris schemes ignore the collocation keys; pin them so that configs
/// written with or without them resolve identically.
void normalize(MethodConfig& m) {
  if (m.is_collocation()) return;
  m = boris(m.method);
}

bool is_method_key(const std::string& k) {
  return k == "method" || k == "M" || k == "K_gmres" || k == "K_picard" || k == "K_sweeps" || k == "update";
}

MethodConfig read_method(const Document& doc, const Section& sec) {
  const Reader r(doc, sec);
  MethodConfig m;
  bool has_method = false;
  for (const Entry& e : sec.entries) {
    apply_method_key(r, e, m);
    has_method |= e.key == "method";
  }
  if (!has_method) throw ConfigError(doc.source + ":" + std::to_string(sec.line) + ": [method] needs a 'method' key");
  normalize(m);
  try {
    m.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(doc.source + ":" + std::to_string(sec.line) + ": [method] " + ex.what());
  }
  return m;
}

ParticleConfig read_particle(const Document& doc, const Section& sec, std::size_t index) {
  const Reader r(doc, sec);
  ParticleConfig p{"particle" + std::to_string(index + 1), {}, {}};
  bool has_x = false, has_v = false;
  for (const Entry& e : sec.entries) {
    if (e.key == "name") {
      if (e.value.empty() || e.value.find_first_of(", \t") != std::string::npos) r.fail(e, "invalid name");
      p.name = e.value;
    } else if (e.key == "x") {
      p.x = r.vec3(e);
      has_x = true;
    } else if (e.key == "v") {
      p.v = r.vec3(e);
      has_v = true;
    } else {
      r.fail(e, "unknown key");
    }
  }
  if (!has_x || !has_v) {
    throw ConfigError(doc.source + ":" + std::to_string(sec.line) + ": [particle] needs both 'x' and 'v'");
  }
  return p;
}

}  // namespace

std::int64_t steps_for(double t_end, double dt) {
  if (!(t_end > 0.0) || !(dt > 0.0)) throw ConfigError("t_end and dt must be positive");
  const double n = std::round(t_end / dt);
  if (n < 1.0 || std::abs(n * dt - t_end) > 1e-9 * t_end) {
    throw ConfigError("step size " + format_number(dt) + " does not divide t_end = " + format_number(t_end));
  }
  return static_cast<std::int64_t>(n);
}

ExperimentConfig resolve(const Document& doc, Command command, bool paper_scale) {
  ExperimentConfig c = default_config(command, paper_scale);

  // Field first: dt_omega keys depend on it.
  for (const Section& sec : doc.sections) {
    if (sec.name == "field") apply_field(doc, sec, c.field, command);
  }

  std::vector<MethodConfig> methods;
  std::vector<ParticleConfig> particles;
  std::optional<std::vector<double>> dt_ladder, dt_omega_ladder;
  std::optional<double> dt, dt_omega, ref_dt, ref_dt_omega;
  std::optional<const Entry*> t_end_entry, n_steps_entry;

  for (const Section& sec : doc.sections) {
    const Reader r(doc, sec);
    if (sec.name.empty()) {
      for (const Entry& e : sec.entries) {
        if (e.key == "experiment") {
          if (e.value != to_string(command)) {
            r.fail(e, "config is for '" + e.value + "' but the command is '" + std::string(to_string(command)) + "'");
          }
        } else {
          r.fail(e, "unknown top-level key (put run settings under [run])");
        }
      }
    } else if (sec.name == "field") {
      continue;
    } else if (sec.name == "method") {
      methods.push_back(read_method(doc, sec));
    } else if (sec.name == "particle") {
      particles.push_back(read_particle(doc, sec, particles.size()));
    } else if (sec.name == "run") {
      for (const Entry& e : sec.entries) {
        const std::string& k = e.key;
        if (k == "t_end") {
          c.t_end = r.positive(e);
          t_end_entry = &e;
        } else if (k == "dt_ladder") {
          dt_ladder = r.ladder(e);
        } else if (k == "dt_omega_ladder") {
          dt_omega_ladder = r.ladder(e);
        } else if (k == "dt") {
          dt = r.positive(e);
        } else if (k == "dt_omega") {
          dt_omega = r.positive(e);
        } else if (k == "n_steps") {
          c.n_steps = r.integer(e, 1);
          n_steps_entry = &e;
        } else if (k == "n_steps_ladder") {
          c.n_steps_ladder.clear();
          for (double v : r.list(e)) {
            if (v < 1.0 || v != std::floor(v)) r.fail(e, "entries must be positive integers");
            c.n_steps_ladder.push_back(static_cast<std::int64_t>(v));
          }
        } else if (k == "samples") {
          c.samples = static_cast<int>(r.integer(e, 2));
        } else if (k == "retain_nodes") {
          c.retain_nodes = r.boolean(e);
        } else if (k == "threads") {
          c.threads = static_cast<int>(r.integer(e, 0));
        } else if (k == "b_reference") {
          if (e.value == "adiabatic") c.b_reference = BReference::Adiabatic;
          else if (e.value == "reference-run") c.b_reference = BReference::ReferenceRun;
          else r.fail(e, "expected 'adiabatic' or 'reference-run'");
        } else if (k == "tau_overhead") {
          c.tau_overhead = r.number(e);
          if (c.tau_overhead < 0.0) r.fail(e, "must be non-negative");
        } else {
          r.fail(e, "unknown key");
        }
      }
    } else if (sec.name == "reference") {
      for (const Entry& e : sec.entries) {
        if (is_method_key(e.key)) apply_method_key(r, e, c.reference.method);
        else if (e.key == "dt") ref_dt = r.positive(e);
        else if (e.key == "dt_omega") ref_dt_omega = r.positive(e);
        else r.fail(e, "unknown key");
      }
      normalize(c.reference.method);
      try {
        c.reference.method.validate();
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(doc.source + ":" + std::to_string(sec.line) + ": [reference] " + ex.what());
      }
    } else {
      throw ConfigError(doc.source + ":" + std::to_string(sec.line) + ": unknown section [" + sec.name + "]");
    }
  }

  if (!methods.empty()) c.methods = std::move(methods);
  if (!particles.empty()) c.particles = std::move(particles);
  if (dt_ladder && dt_omega_ladder) throw ConfigError(doc.source + ": give either dt_ladder or dt_omega_ladder");
  if (dt && dt_omega) throw ConfigError(doc.source + ": give either dt or dt_omega");
  if (ref_dt && ref_dt_omega) throw ConfigError(doc.source + ": [reference] give either dt or dt_omega");

  const double omega = c.field.omega();
  if ((dt_omega_ladder || dt_omega || ref_dt_omega) && !(omega > 0.0)) {
    throw ConfigError(doc.source + ": dt_omega keys need a field with a non-zero reference frequency");
  }
  if (dt_ladder) c.dt_ladder = *dt_ladder;
  if (dt_omega_ladder) {
    c.dt_ladder.clear();
    for (double v : *dt_omega_ladder) c.dt_ladder.push_back(v / omega);
  }
  if (dt) c.dt = *dt;
  if (dt_omega) c.dt = *dt_omega / omega;
  if (ref_dt) c.reference.dt = *ref_dt;
  if (ref_dt_omega) c.reference.dt = *ref_dt_omega / omega;

  if (paper_scale) {
    const ExperimentConfig full = default_config(command, true);
    c.t_end = full.t_end;
    c.n_steps = full.n_steps;
  }

  if (c.methods.empty()) throw ConfigError(doc.source + ": no methods configured");
  if (c.particles.empty()) throw ConfigError(doc.source + ": no particles configured");

  // Grid consistency per command.
  const bool uses_ladder = command == Command::GyroValidate || command == Command::MirrorConvergence ||
                           command == Command::MirrorReflections || command == Command::SolovevAccuracy;
  if (uses_ladder) {
    if (c.dt_ladder.empty()) throw ConfigError(doc.source + ": dt_ladder is empty");
    for (double h : c.dt_ladder) steps_for(c.t_end, h);
  }
  if (command == Command::SolovevAccuracy) {
    if (!(c.reference.dt > 0.0)) throw ConfigError(doc.source + ": [reference] dt must be positive");
    steps_for(c.t_end, c.reference.dt);
    for (double h : c.dt_ladder) {
      const double ratio = h / c.reference.dt;
      if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
        throw ConfigError(doc.source + ": step " + format_number(h) +
                          " is not a multiple of the reference step; run grids must be subsets of the reference grid");
      }
    }
  }
  if (command == Command::MirrorReflections && c.b_reference == BReference::ReferenceRun) {
    if (!(c.reference.dt > 0.0)) throw ConfigError(doc.source + ": [reference] dt must be positive");
    steps_for(c.t_end, c.reference.dt);
  }
  const bool single_dt = command == Command::MirrorEnergy || command == Command::SolovevEnergy ||
                         command == Command::WorkTable;
  if (single_dt && !(c.dt > 0.0)) throw ConfigError(doc.source + ": dt must be positive");
  if ((command == Command::MirrorEnergy || command == Command::SolovevEnergy || command == Command::Trajectory) &&
      c.n_steps < 1) {
    throw ConfigError(doc.source + ": n_steps must be positive");
  }
  if (command == Command::WorkTable && c.n_steps_ladder.empty()) {
    throw ConfigError(doc.source + ": n_steps_ladder is empty");
  }
  (void)t_end_entry;
  (void)n_steps_entry;
  return c;
}

// ---------------------------------------------------------------------------
// Sidecar

namespace {

std::string vec_text(const Vec3& v) {
  return format_number(v.x) + ", " + format_number(v.y) + ", " + format_number(v.z);
}

template <class T>
std::string list_text(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += format_number(xs[i]);
    else out += std::to_string(xs[i]);
  }
  return out;
}

void write_method(std::ostream& out, const MethodConfig& m) {
  out << "method = " << bgsdc::to_string(m.method) << '\n';
  if (m.is_collocation()) {
    out << "M = " << m.M << '\n';
    out << "K_gmres = " << m.K_gmres << '\n';
    out << "K_picard = " << m.K_picard << '\n';
    out << "K_sweeps = " << m.K_sweeps << '\n';
    out << "update = " << bgsdc::to_string(m.update) << '\n';
  }
}

}  // namespace

void write_resolved(std::ostream& out, const ExperimentConfig& c) {
  out << "experiment = " << to_string(c.command) << "\n\n[field]\n";
  const FieldConfig& f = c.field;
  out << "type = " << to_string(f.type) << '\n';
  out << "alpha = " << format_number(f.alpha()) << '\n';
  switch (f.type) {
    case FieldType::Uniform:
      out << "B = " << vec_text(f.B_uniform) << '\n';
      out << "E = " << vec_text(f.E_uniform) << '\n';
      break;
    case FieldType::Mirror:
      out << "z0 = " << format_number(f.mirror.z0) << '\n';
      out << "omega_B = " << format_number(f.mirror.omega_B) << '\n';
      break;
    case FieldType::Solovev: {
      const bgsdc::SolovevParams& p = f.solovev;
      const std::pair<const char*, double> keys[] = {
          {"sigma", p.sigma}, {"epsilon", p.epsilon}, {"kappa", p.kappa}, {"psi", p.psi},
          {"r_ma", p.r_ma},   {"r_mi", p.r_mi},       {"z_m", p.z_m},     {"z0", p.z0_len},
          {"Bphi0", p.Bphi0}, {"E0", p.E0},           {"r_a", p.r_a},     {"R0", p.R0},
          {"Z0", p.Z0},
      };
      for (const auto& [k, v] : keys) out << k << " = " << format_number(v) << '\n';
      break;
    }
  }
  for (const ParticleConfig& p : c.particles) {
    out << "\n[particle]\nname = " << p.name << "\nx = " << vec_text(p.x) << "\nv = " << vec_text(p.v) << '\n';
  }
  for (const MethodConfig& m : c.methods) {
    out << "\n[method]\n";
    write_method(out, m);
  }
  out << "\n[run]\n";
  out << "t_end = " << format_number(c.t_end) << '\n';
  if (!c.dt_ladder.empty()) out << "dt_ladder = " << list_text(c.dt_ladder) << '\n';
  if (c.dt > 0.0) out << "dt = " << format_number(c.dt) << '\n';
  if (c.n_steps > 0) out << "n_steps = " << c.n_steps << '\n';
  if (!c.n_steps_ladder.empty()) out << "n_steps_ladder = " << list_text(c.n_steps_ladder) << '\n';
  out << "samples = " << c.samples << '\n';
  out << "retain_nodes = " << (c.retain_nodes ? "true" : "false") << '\n';
  out << "threads = " << c.threads << '\n';
  out << "b_reference = " << (c.b_reference == BReference::Adiabatic ? "adiabatic" : "reference-run") << '\n';
  out << "tau_overhead = " << format_number(c.tau_overhead) << '\n';
  out << "\n[reference]\n";
  write_method(out, c.reference.method);
  if (c.reference.dt > 0.0) out << "dt = " << format_number(c.reference.dt) << '\n';
}

}  // namespace harness
