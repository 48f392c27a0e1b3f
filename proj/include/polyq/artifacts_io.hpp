#pragma once

// ============================================================================
// On-disk schemas for the analysis artifacts: certificates, gain files,
// verdicts, and simulation reports. Same philosophy as the base formats:
// strict small schemas, loud FormatError on anything unexpected, doubles
// round-tripping bit-exactly.
//
//   certificate: {"kind": "detect" | "stab_vertex" | "stab_slack",
//                 "P_bar" | "S_bar" (+"X" for slack): [N matrices],
//                 "margin": number, "diagnostics": {...}}
//   gains:       {"kind": "observer", "L": [N matrices]}
//              | {"kind": "controller", "S_bar": [...], "P_bar": [...]}
//                (the controller file stores the certificate blocks; the gain
//                 K(xi_now, xi_next) is recomputed at runtime from them)
//   verdict:     {"property", "status", "note", "attempts": [{which, diagnostics}]}
//   sim report:  {"trajectories", "steps", "aborted", "worst_ratio",
//                 "max_terminal_norm", "a3_estimate", "violations": [...]}
// ============================================================================

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/io.hpp"
#include "polyq/synthesis.hpp"
#include "polyq/verify.hpp"

namespace polyq {

// --- solver diagnostics --------------------------------------------------------

inline json diagnostics_to_json(const SolveDiagnostics& d) {
  json j;
  j["status"] = d.status;
  j["achieved_margin"] = d.achieved_margin;
  j["normalized_margin"] = d.normalized_margin ? json(*d.normalized_margin) : json(nullptr);
  j["iterations"] = d.iterations;
  j["restarts"] = d.restarts;
  j["target_margin"] = d.target_margin;
  j["max_iters"] = d.max_iters;
  j["max_restarts"] = d.max_restarts;
  j["seed"] = d.seed;
  return j;
}

inline SolveDiagnostics diagnostics_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("diagnostics: expected a JSON object");
  SolveDiagnostics d;
  if (j.contains("status")) d.status = j["status"].get<std::string>();
  if (j.contains("achieved_margin")) d.achieved_margin = j["achieved_margin"].get<double>();
  if (j.contains("normalized_margin") && j["normalized_margin"].is_number()) {
    d.normalized_margin = j["normalized_margin"].get<double>();
  }
  if (j.contains("iterations")) d.iterations = j["iterations"].get<std::size_t>();
  if (j.contains("restarts")) d.restarts = j["restarts"].get<std::size_t>();
  if (j.contains("target_margin")) d.target_margin = j["target_margin"].get<double>();
  if (j.contains("max_iters")) d.max_iters = j["max_iters"].get<std::size_t>();
  if (j.contains("max_restarts")) d.max_restarts = j["max_restarts"].get<std::size_t>();
  if (j.contains("seed")) d.seed = j["seed"].get<std::uint64_t>();
  return d;
}

// --- certificates ----------------------------------------------------------------

inline json certificate_to_json(const DetectCertificate& cert) {
  json j;
  j["kind"] = "detect";
  j["P_bar"] = ioimpl::matrix_list_to_json(cert.P_bar);
  j["margin"] = cert.margin;
  j["diagnostics"] = diagnostics_to_json(cert.provenance);
  return j;
}

inline json certificate_to_json(const StabCertificate& cert) {
  json j;
  j["kind"] = cert.kind == StabKind::Slack ? "stab_slack" : "stab_vertex";
  j["S_bar"] = ioimpl::matrix_list_to_json(cert.S_bar);
  if (cert.kind == StabKind::Slack) j["X"] = ioimpl::matrix_list_to_json(cert.X);
  j["margin"] = cert.margin;
  j["diagnostics"] = diagnostics_to_json(cert.provenance);
  return j;
}

/// A parsed certificate file: exactly one of the two members is set. Blocks
/// are shape-checked only — positivity is the verifier's judgement call, so
/// tampered certificates load fine and then fail verification.
struct CertificateFile {
  std::optional<DetectCertificate> detect;
  std::optional<StabCertificate> stab;

  const char* kind_name() const {
    if (detect) return "detect";
    return stab->kind == StabKind::Slack ? "stab_slack" : "stab_vertex";
  }
};

inline CertificateFile certificate_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw FormatError("certificate: expected an object with a \"kind\" string");
  }
  const std::string kind = j["kind"].get<std::string>();
  CertificateFile file;
  if (kind == "detect") {
    if (!j.contains("P_bar")) throw FormatError("certificate: missing \"P_bar\"");
    DetectCertificate cert;
    cert.P_bar = ioimpl::json_to_matrix_list(j["P_bar"], "certificate.P_bar");
    if (j.contains("margin")) cert.margin = j["margin"].get<double>();
    if (j.contains("diagnostics")) cert.provenance = diagnostics_from_json(j["diagnostics"]);
    file.detect = std::move(cert);
  } else if (kind == "stab_vertex" || kind == "stab_slack") {
    if (!j.contains("S_bar")) throw FormatError("certificate: missing \"S_bar\"");
    StabCertificate cert;
    cert.kind = kind == "stab_slack" ? StabKind::Slack : StabKind::Vertex;
    cert.S_bar = ioimpl::json_to_matrix_list(j["S_bar"], "certificate.S_bar");
    if (cert.kind == StabKind::Slack) {
      if (!j.contains("X")) throw FormatError("certificate: slack kind requires \"X\"");
      cert.X = ioimpl::json_to_matrix_list(j["X"], "certificate.X");
    }
    if (j.contains("margin")) cert.margin = j["margin"].get<double>();
    if (j.contains("diagnostics")) cert.provenance = diagnostics_from_json(j["diagnostics"]);
    file.stab = std::move(cert);
  } else {
    throw FormatError("certificate: unknown kind \"" + kind + "\"");
  }
  return file;
}

inline CertificateFile load_certificate(const std::string& path) {
  return certificate_from_json(ioimpl::load_json_file(path));
}

inline void save_certificate(const std::string& path, const DetectCertificate& cert) {
  ioimpl::save_json_file(path, certificate_to_json(cert));
}

inline void save_certificate(const std::string& path, const StabCertificate& cert) {
  ioimpl::save_json_file(path, certificate_to_json(cert));
}

// --- gain files --------------------------------------------------------------------

inline json gains_to_json(const ObserverGains& gains) {
  json j;
  j["kind"] = "observer";
  j["L"] = ioimpl::matrix_list_to_json(gains.L);
  return j;
}

/// Controller gain file: stores the certificate blocks (plus their inverses
/// for readers that want the Lyapunov metric directly); K is recomputed at
/// runtime from parameter pairs.
inline json controller_gains_to_json(const StabCertificate& cert) {
  json j;
  j["kind"] = "controller";
  j["S_bar"] = ioimpl::matrix_list_to_json(cert.S_bar);
  j["P_bar"] = ioimpl::matrix_list_to_json(inverted_blocks(cert));
  return j;
}

/// A parsed gains file: observer vertex gains, or controller blocks.
struct GainsFile {
  std::optional<ObserverGains> observer;
  std::optional<std::vector<Matrix>> controller_S_bar;
  std::optional<std::vector<Matrix>> controller_P_bar;
};

inline GainsFile gains_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw FormatError("gains: expected an object with a \"kind\" string");
  }
  const std::string kind = j["kind"].get<std::string>();
  GainsFile file;
  if (kind == "observer") {
    if (!j.contains("L")) throw FormatError("gains: missing \"L\"");
    ObserverGains g;
    g.L = ioimpl::json_to_matrix_list(j["L"], "gains.L");
    file.observer = std::move(g);
  } else if (kind == "controller") {
    if (!j.contains("S_bar")) throw FormatError("gains: missing \"S_bar\"");
    file.controller_S_bar = ioimpl::json_to_matrix_list(j["S_bar"], "gains.S_bar");
    if (j.contains("P_bar")) {
      file.controller_P_bar = ioimpl::json_to_matrix_list(j["P_bar"], "gains.P_bar");
    }
  } else {
    throw FormatError("gains: unknown kind \"" + kind + "\"");
  }
  return file;
}

inline GainsFile load_gains(const std::string& path) {
  return gains_from_json(ioimpl::load_json_file(path));
}

inline void save_gains(const std::string& path, const ObserverGains& gains) {
  ioimpl::save_json_file(path, gains_to_json(gains));
}

inline void save_controller_gains(const std::string& path, const StabCertificate& cert) {
  ioimpl::save_json_file(path, controller_gains_to_json(cert));
}

// --- verdicts ------------------------------------------------------------------------

inline json verdict_to_json(const Verdict& v) {
  json attempts = json::array();
  for (const SolveAttempt& a : v.attempts) {
    json entry;
    entry["which"] = a.which;
    entry["diagnostics"] = diagnostics_to_json(a.diag);
    attempts.push_back(std::move(entry));
  }
  json j;
  j["property"] = v.property;
  j["status"] = to_string(v.status);
  j["note"] = v.note;
  j["attempts"] = std::move(attempts);
  return j;
}

inline void save_verdict(const std::string& path, const Verdict& v) {
  ioimpl::save_json_file(path, verdict_to_json(v));
}

// --- simulation reports -----------------------------------------------------------------

inline json sim_report_to_json(const SimReport& r) {
  json violations = json::array();
  for (const DescentViolation& v : r.violations) {
    json entry;
    entry["trajectory"] = v.trajectory;
    entry["step"] = v.step;
    entry["V_before"] = v.V_before;
    entry["V_after"] = v.V_after;
    violations.push_back(std::move(entry));
  }
  json j;
  j["trajectories"] = r.trajectories;
  j["steps"] = r.steps;
  j["aborted"] = r.aborted;
  j["worst_ratio"] = r.worst_ratio;
  j["max_terminal_norm"] = r.max_terminal_norm;
  j["a3_estimate"] = std::isnan(r.a3_estimate) ? json(nullptr) : json(r.a3_estimate);
  j["violations"] = std::move(violations);
  return j;
}

inline void save_sim_report(const std::string& path, const SimReport& r) {
  ioimpl::save_json_file(path, sim_report_to_json(r));
}

}  // namespace polyq
