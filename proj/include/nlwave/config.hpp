#pragma once

#include "nlwave/errors.hpp"
#include "nlwave/experiments.hpp"
#include "nlwave/integrator.hpp"
#include "nlwave/model.hpp"
#include "nlwave/steady_state.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nlwave {

/// Config error with the offending key path and, when known, its line and column
/// (1-based) in the source text.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& message, std::string key, int line = 0, int column = 0);
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string key_;
  int line_;
  int column_;
};

/// A coefficient on one mode; `mode` has one 1-based index per axis.
struct ModalTerm {
  std::vector<int> mode;
  double value = 0.0;
};

struct DomainConfig {
  int dim = 1;
  int modes = 32;
  double padding_factor = 3.0;
  bool allow_aliasing = false;
};

struct DampingConfig {
  std::string kind = "shifted_power";
  double gamma = 1.0;    // constant
  double a = 1.0;        // hyperbolic, logistic
  double b = 2.0;        // hyperbolic, logistic
  double epsilon = 0.1;  // shifted_power
  double p = 2.0;        // shifted_power, pure_power
};

struct NonlinearityConfig {
  std::string kind = "odd_power";
  int q = 5;
  double a = 1.0;                    // bistable
  std::vector<double> coefficients;  // custom_odd_polynomial
  StructuralConstants constants;     // custom_odd_polynomial
};

struct ForcingConfig {
  std::string kind = "zero";  ///< zero | modal | random_smooth
  std::vector<ModalTerm> terms;
  std::uint64_t seed = 1;
  double decay = 1.0;
  double amplitude = 1.0;
  int band = 0;
};

struct ModelConfig {
  DampingConfig damping;
  NonlinearityConfig nonlinearity;
  ForcingConfig forcing;
};

/// Initial data of simulate and convergence runs.
struct InitialConfig {
  std::string kind = "random";  ///< random | zero | modal
  double norm = 1.0;
  double decay = 1.0;
  int band = 4;
  std::uint64_t seed = 1;
  std::vector<ModalTerm> u;
  std::vector<ModalTerm> v;
};

struct ExperimentConfig {
  std::string kind = "simulate";
  // Only the fields of `kind` are read and written.
  double horizon = 1.0;
  InitialConfig initial;
  EnsembleSpec ensemble;
  MultistartOptions multistart;
  NewtonOptions newton;
  double s_max = 1e3;
  int samples = 2000;
  double ball_margin = 0.1;
  double slope_tol = 1e-4;
  double separation = 1e-6;
  double tol = 0.01;
  bool halving = true;
  double eta = 0.5;
  std::optional<double> gamma0;
  int batches = 2;
  double batch_ratio = 2.0;
  std::optional<double> burn_in;
  double tail_fraction = 0.1;
  double velocity_tol = 1e-3;
  double distance_tol = 1e-3;
  double e1_factor = 10.0;
  std::optional<double> seed_delta;
  std::vector<int> modes{8, 16, 32, 64};
};

struct OutputConfig {
  std::string directory = "nlwave_run";
  int stride = 10;
  std::string format = "csv";  ///< csv | binary
};

struct RunConfig {
  DomainConfig domain;
  ModelConfig model;
  IntegratorConfig integrator;
  ExperimentConfig experiment;
  OutputConfig output;
  /// Equal canonical forms.
  bool operator==(const RunConfig& o) const;
};

const std::vector<std::string>& experiment_kinds();

/// Parses YAML (JSON is accepted as a subset).  `overrides` are applied first,
/// each of the form "section.key=value" with a YAML scalar or flow value.
/// With `kind` set, experiment.kind defaults to it and any other explicit kind is
/// rejected.  Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       const std::optional<std::string>& kind = std::nullopt);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {},
                      const std::optional<std::string>& kind = std::nullopt);

/// Block YAML with sorted keys, every default of the selected kinds explicit and
/// shortest round-trip floats.  parse_config(canonical(c)) == c.
std::string canonical(const RunConfig& config);

/// Builds the validated objects described by a config.
SpectralDomain make_domain(const DomainConfig& config);
DampingLaw make_damping(const DampingConfig& config);
Nonlinearity make_nonlinearity(const NonlinearityConfig& config);
Model make_model(const RunConfig& config);
ModalState make_initial(const SpectralDomain& domain, const InitialConfig& config);
Field modal_field(const SpectralDomain& domain, const std::vector<ModalTerm>& terms);

}  // namespace nlwave
