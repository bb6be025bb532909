#pragma once

#include "nlwave/config.hpp"
#include "nlwave/experiments.hpp"

#include <map>
#include <string>
#include <vector>

namespace nlwave {

std::string version();
/// Operating system, architecture, compiler and library versions.
std::map<std::string, std::string> platform_fingerprint();

struct PhaseRecord {
  std::string name;
  std::string status;  ///< ok | failed
  double wall_seconds = 0.0;
  std::string message;
};

enum class RunStatus { passed, failed, error };
std::string status_name(RunStatus s);

struct RunManifest {
  std::string config;  ///< canonical form
  std::string tool_version;
  std::map<std::string, std::string> platform;
  std::string started_utc;
  double wall_seconds = 0.0;
  std::vector<PhaseRecord> phases;
  std::map<std::string, std::string> digests;  ///< relative path -> SHA-256
  RunStatus status = RunStatus::error;
  std::string error;
  ProbeReport report;
  std::string directory;

  std::string to_json() const;
};

/// 0 passed, 1 verdict failure, 2 error.
int exit_code(const RunManifest& m);

/// Runs the configured experiment and writes into config.output.directory:
/// summary.json, traces/<name>.{csv,bin}, equilibria/ for runs that compute
/// equilibria, and finally manifest.json.  Every file goes through a temporary
/// file and rename.  Library errors are recorded in the manifest (status error)
/// rather than thrown; failure to write the output directory throws.
RunManifest run(const RunConfig& config);

/// The experiment alone, without files: the report a run would summarize, with
/// the series of traces/ and equilibria/ attached under their file stems.
/// Errors propagate.
ProbeReport evaluate(const RunConfig& config);

}  // namespace nlwave
