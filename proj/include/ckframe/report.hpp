#pragma once

// Command execution and report serialization.
//
// Canonical JSON: two-space indentation, keys sorted, floating-point values
// printed with %.12e (negative zero folded to zero, non-finite values as
// strings). Two runs over the same spec produce identical bytes apart from
// the wall_time entry.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <string>

#include "ckframe/douglas.hpp"
#include "ckframe/problem.hpp"

namespace ckframe {

enum class ReportStatus { Ok, Failed, Degenerate };

inline const char* status_name(ReportStatus s) {
  switch (s) {
    case ReportStatus::Ok: return "ok";
    case ReportStatus::Failed: return "failed";
    case ReportStatus::Degenerate: return "degenerate";
  }
  return "failed";
}

struct RunReport {
  std::string command;
  std::string inputs_digest;
  Json results = Json::object();
  ReportStatus status = ReportStatus::Ok;
  double wall_time = 0.0;

  Json to_json(bool with_timing = true) const {
    Json j{{"command", command},
           {"inputs_digest", inputs_digest},
           {"results", results},
           {"status", status_name(status)}};
    if (with_timing) j["wall_time"] = wall_time;
    return j;
  }
};

struct RunOptions {
  std::uint64_t seed = 0;
  Index monte_carlo_samples = 1000;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands{"bounds", "atoms", "dual", "verify-pair", "douglas", "sandwich"};
  return commands;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

namespace detail {

inline Json multiplier_json(const Multiplier& m) {
  if (m.is_unbounded()) return "unbounded";
  return m.value();
}

inline Json optional_json(const std::optional<double>& v) {
  if (!v) return "not-applicable";
  return *v;
}

inline Json residuals_json(const DualPairReport& r) {
  Json j;
  for (std::size_t i = 0; i < r.residuals.size(); ++i) j["c" + std::to_string(i + 1)] = r.residuals[i];
  return j;
}

inline Json run_bounds(const ProblemSpec& spec, const RunOptions& opt, ReportStatus& status) {
  const SampleField f = spec.f();
  const CkFrameReport rep = ckframe_check(f, spec.operator_k, spec.tolerances);
  const FrameBounds cb = cframe_bounds(f, spec.tolerances);
  Json j;
  j["lower"] = multiplier_json(rep.bounds.lower);
  j["upper"] = rep.bounds.upper;
  j["kind"] = bound_kind_name(rep.bounds.kind);
  j["range_included"] = rep.range_included;
  j["is_ck_frame"] = rep.is_ck_frame;
  j["degenerate"] = rep.degenerate;
  for (const auto& [name, value] : rep.residuals) j["residuals"][name] = value;
  j["cframe"] = {{"lower", multiplier_json(cb.lower)}, {"upper", cb.upper}, {"kind", bound_kind_name(cb.kind)}};

  // Rayleigh quotients <S_f h, h> / ||k^* h||^2 at random unit h; never below
  // the optimal lower bound.
  std::mt19937_64 rng(opt.seed);
  const OperatorMatrix s = frame_operator(f);
  const OperatorMatrix kstar = spec.operator_k.adjoint();
  double min_quotient = std::numeric_limits<double>::infinity();
  Index used = 0;
  for (Index t = 0; t < opt.monte_carlo_samples; ++t) {
    Vector h = random_complex(rng, f.dim(), 1).col(0);
    h.normalize();
    const double denom = (kstar * h).squaredNorm();
    if (denom <= 1e-300) continue;
    min_quotient = std::min(min_quotient, h.dot(s * h).real() / denom);
    ++used;
  }
  j["monte_carlo"] = {{"samples", used}, {"min_quotient", min_quotient}};

  status = rep.degenerate ? ReportStatus::Degenerate : rep.is_ck_frame ? ReportStatus::Ok : ReportStatus::Failed;
  return j;
}

inline Json run_atoms(const ProblemSpec& spec, ReportStatus& status) {
  const SampleField f = spec.f();
  const CoefficientMap m = atom_coefficient_map(f, spec.operator_k, spec.tolerances);
  const double residual = verify_atomic_decomposition(f, spec.operator_k, m, spec.tolerances);
  Json j;
  j["coefficients"] = matrix_json(m.matrix);
  j["bound"] = m.bound;
  j["residual"] = residual;
  status = residual <= spec.tolerances.check ? ReportStatus::Ok : ReportStatus::Failed;
  return j;
}

inline Json run_dual(const ProblemSpec& spec, ReportStatus& status) {
  const CanonicalDual cd = canonical_dual(spec.f(), spec.operator_k, spec.tolerances);
  Json j;
  j["projected_frame"] = field_json(cd.projected_frame.samples());
  j["dual_field"] = field_json(cd.dual_field.samples());
  j["lower_bound"] = cd.lower_bound;
  j["upper_bound"] = cd.upper_bound;
  j["dual_lower"] = cd.dual_lower;
  j["dual_upper"] = cd.dual_upper;
  j["bounds_hold"] = cd.bounds_hold;
  j["residuals"] = residuals_json(cd.verification);
  j["holds"] = cd.verification.holds;
  status = cd.bounds_hold ? ReportStatus::Ok : ReportStatus::Failed;
  return j;
}

inline Json run_verify_pair(const ProblemSpec& spec, ReportStatus& status) {
  const SampleField f = spec.f();
  const SampleField g = spec.g();
  const DualPairReport r = verify_dual_pair(f, g, spec.operator_k, spec.tolerances);
  Json j;
  j["residuals"] = residuals_json(r);
  j["holds"] = r.holds;
  j["onto_k_residual"] = optional_json(r.onto_k_residual);
  j["onto_kstar_residual"] = optional_json(r.onto_kstar_residual);
  j["lower_bound_cert"] = r.lower_bound_cert;
  j["notes"] = r.notes;
  if (r.holds) {
    const auto [margin_f, margin_g] = dual_frame_bounds_check(f, g, spec.operator_k, spec.tolerances);
    j["margin_f"] = margin_f;
    j["margin_g"] = margin_g;
  }
  status = r.holds ? ReportStatus::Ok : ReportStatus::Failed;
  return j;
}

inline Json run_douglas(const ProblemSpec& spec, ReportStatus& status) {
  // L1 = k against L2 = T_f in an orthonormal basis of L^2(X), so L2 L2^* = S_f.
  const OperatorMatrix l2 = whitened_synthesis(spec.f());
  const OperatorMatrix& l1 = spec.operator_k;
  const DouglasResult d = douglas_factor(l1, l2, spec.tolerances);
  Json j;
  j["range_included"] = range_included(l1, l2, spec.tolerances);
  j["included"] = d.included;
  j["residual"] = d.residual;
  j["marginal"] = d.marginal;
  j["lambda_min"] = d.lambda_min ? Json(*d.lambda_min) : Json("absent");
  if (d.factor) j["factor"] = matrix_json(*d.factor);
  status = d.included ? ReportStatus::Ok : d.marginal ? ReportStatus::Degenerate : ReportStatus::Failed;
  return j;
}

inline Json run_sandwich(const ProblemSpec& spec, ReportStatus& status) {
  const SampleField f = spec.f();
  const SandwichReport s = sandwich_details(f, spec.operator_k, spec.tolerances);
  const CorollaryReport c = corollary_details(f, spec.operator_k, spec.tolerances);
  Json j;
  j["sandwich"] = {{"lower_bound", s.lower_bound}, {"upper_bound", s.upper_bound}, {"min_form", s.min_form},
                   {"max_form", s.max_form},       {"slack", s.slack()}};
  j["corollary"] = {{"lower_bound", c.lower_bound}, {"upper_bound", c.upper_bound}, {"slack", c.slack()}};
  const double worst = std::min(s.slack(), c.slack());
  status = worst >= -spec.tolerances.check ? ReportStatus::Ok : ReportStatus::Failed;
  return j;
}

}  // namespace detail

/// Runs one pipeline. Module errors become status "failed" with the error
/// name in results.error; input errors (ValidationError, UnknownCommand)
/// propagate.
inline RunReport run_command(const ProblemSpec& spec, const std::string& command, const RunOptions& opt = {}) {
  if (std::find(known_commands().begin(), known_commands().end(), command) == known_commands().end()) {
    throw Error(ErrorCode::UnknownCommand, "unknown command '" + command + "'");
  }
  if (command == "verify-pair" && !spec.field_g) {
    throw Error(ErrorCode::ValidationError, "field_g: required by verify-pair");
  }
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.command = command;
  report.inputs_digest = fnv1a_hex(to_json(spec).dump() + "\n" + command + "\n" + std::to_string(opt.seed));
  try {
    if (command == "bounds") report.results = detail::run_bounds(spec, opt, report.status);
    else if (command == "atoms") report.results = detail::run_atoms(spec, report.status);
    else if (command == "dual") report.results = detail::run_dual(spec, report.status);
    else if (command == "verify-pair") report.results = detail::run_verify_pair(spec, report.status);
    else if (command == "douglas") report.results = detail::run_douglas(spec, report.status);
    else report.results = detail::run_sandwich(spec, report.status);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    report.status = ReportStatus::Failed;
    report.results = Json{{"error", std::string(e.name())}, {"message", e.what()}};
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"unbounded\"" : "\"-unbounded\"";
  if (v == 0.0) v = 0.0;  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline bool is_flat_numeric_array(const Json& j) {
  if (!j.is_array()) return false;
  for (const Json& e : j)
    if (!e.is_number()) return false;
  return true;
}

inline void write_canonical(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  const std::string inner(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        write_canonical(it.value(), out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (is_flat_numeric_array(j)) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write_canonical(j[i], out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write_canonical(j[i], out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
    return;
  }
  std::string value;
  write_canonical(j, value, 0);
  if (j.is_array() && !is_flat_numeric_array(j)) {
    // keep nested matrices on one line in text output
    std::string compact;
    for (char c : value) {
      if (c == '\n') continue;
      if (c == ' ' && !compact.empty() && (compact.back() == ' ' || compact.back() == '[')) continue;
      compact += c;
    }
    value = compact;
  }
  rows.emplace_back(prefix, value);
}

}  // namespace detail

enum class ReportFormat { Json, Text };

inline std::string canonical_json(const Json& j) {
  std::string out;
  detail::write_canonical(j, out, 0);
  out += "\n";
  return out;
}

inline std::string emit_report(const RunReport& report, ReportFormat format, bool with_timing = true) {
  const Json j = report.to_json(with_timing);
  if (format == ReportFormat::Json) return canonical_json(j);

  std::string out;
  out += "command: " + report.command + "\n";
  out += "status: " + std::string(status_name(report.status)) + "\n";
  out += "inputs_digest: " + report.inputs_digest + "\n";
  if (report.command == "verify-pair" && report.results.contains("residuals")) {
    out += "\ncondition  residual\n";
    const Json& res = report.results.at("residuals");
    for (auto it = res.begin(); it != res.end(); ++it) {
      char line[64];
      std::snprintf(line, sizeof line, "%-10s %s\n", it.key().c_str(), detail::format_double(it.value().get<double>()).c_str());
      out += line;
    }
    out += "\n";
  }
  std::vector<std::pair<std::string, std::string>> rows;
  detail::flatten(report.results, "results", rows);
  for (const auto& [key, value] : rows) out += key + ": " + value + "\n";
  if (with_timing) out += "wall_time: " + detail::format_double(report.wall_time) + "\n";
  return out;
}

}  // namespace ckframe
