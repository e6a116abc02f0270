#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <bgsdc/fields.hpp>
#include <bgsdc/stepper.hpp>

namespace harness {

/// Malformed or inconsistent configuration. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Raw document: `key = value` lines grouped under `[section]` headers.
// `#` and `;` start comments. Sections may repeat.

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;  // "" for keys before the first header
  int line = 0;
  std::vector<Entry> entries;
};

struct Document {
  std::string source;
  std::vector<Section> sections;
};

Document parse_document(std::istream& in, std::string source = "<input>");
Document parse_file(const std::string& path);
Document parse_string(std::string_view text, std::string source = "<string>");

// ---------------------------------------------------------------------------
// Resolved experiment

enum class Command {
  GyroValidate,
  MirrorConvergence,
  MirrorReflections,
  MirrorEnergy,
  SolovevAccuracy,
  SolovevEnergy,
  WorkTable,
  Trajectory,
};

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view name);
std::vector<std::string_view> command_names();

enum class FieldType { Uniform, Mirror, Solovev };
std::string_view to_string(FieldType t);

struct FieldConfig {
  FieldType type = FieldType::Mirror;
  bgsdc::Vec3 B_uniform{0.0, 0.0, 1.0};
  bgsdc::Vec3 E_uniform{};
  double uniform_alpha = 1.0;
  bgsdc::MirrorParams mirror;
  bgsdc::SolovevParams solovev;

  double alpha() const;
  /// Reference angular frequency for dt_omega keys: omega_B (mirror),
  /// alpha |B| (uniform) and alpha |B(R0, 0, Z0)| (Solov'ev).
  double omega() const;
  std::unique_ptr<bgsdc::FieldModel> make() const;
};

struct ParticleConfig {
  std::string name;
  bgsdc::Vec3 x;
  bgsdc::Vec3 v;
};

enum class BReference { Adiabatic, ReferenceRun };

struct ReferenceConfig {
  bgsdc::MethodConfig method;
  double dt = 0.0;
};

struct ExperimentConfig {
  Command command = Command::GyroValidate;
  FieldConfig field;
  std::vector<ParticleConfig> particles;
  std::vector<bgsdc::MethodConfig> methods;

  double t_end = 1.0;
  std::vector<double> dt_ladder;  // strictly decreasing
  double dt = 0.0;                // single-resolution commands
  std::int64_t n_steps = 0;
  std::vector<std::int64_t> n_steps_ladder;
  int samples = 200;
  bool retain_nodes = false;
  int threads = 0;  // 0: hardware concurrency
  BReference b_reference = BReference::Adiabatic;
  double tau_overhead = 0.0;
  ReferenceConfig reference;
};

/// Built-in desk-scale settings for a command; with paper_scale the run
/// lengths of the original study are used instead.
ExperimentConfig default_config(Command command, bool paper_scale = false);

/// Applies a document on top of default_config. With paper_scale, the run
/// length keys (t_end, n_steps) take their long-running values even when the
/// document sets them. Throws ConfigError naming the offending line and key.
ExperimentConfig resolve(const Document& doc, Command command, bool paper_scale = false);

/// Writes every resolved value in the document format; feeding the output
/// back to resolve reproduces the configuration.
void write_resolved(std::ostream& out, const ExperimentConfig& cfg);

/// round(t_end / dt), rejecting step sizes that do not divide t_end.
std::int64_t steps_for(double t_end, double dt);

}  // namespace harness
