// ckframe command-line front end.
//
//   ckframe <command> <spec.json|-> [--out report.json] [--format json|text] [--tol T] [--seed N]
//   ckframe gen --kind K [--params '{...}'] [--seed N] [--out spec.json]
//
// Exit codes: 0 ok, 1 checks failed, 2 input error, 3 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ckframe/ckframe.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

bool is_input_error(ckframe::ErrorCode code) {
  using ckframe::ErrorCode;
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::UnknownKind:
    case ErrorCode::BadParams:
    case ErrorCode::UnknownCommand:
    case ErrorCode::EmptySpace:
    case ErrorCode::LengthMismatch:
    case ErrorCode::NonPositiveWeight:
    case ErrorCode::NonFinite:
      return true;
    default:
      return false;
  }
}

// Writes to a sibling temporary and renames it into place.
void write_output(const std::optional<std::string>& path, const std::string& bytes) {
  if (!path || *path == "-") {
    std::cout << bytes;
    std::cout.flush();
    return;
  }
  const std::filesystem::path target(*path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << bytes;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

ckframe::Tolerances default_tolerances() {
  ckframe::Tolerances tol;
  if (const char* env = std::getenv("CKFRAME_TOL")) {
    try {
      const double v = std::stod(env);
      if (v > 0.0) tol.check = v;
    } catch (const std::exception&) {
      std::cerr << "ckframe: ignoring malformed CKFRAME_TOL='" << env << "'\n";
    }
  }
  return tol;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous k-frames on finite weighted measure spaces"};
  app.require_subcommand(1);

  std::string kind;
  std::string params = "{}";
  std::uint64_t seed = 0;
  std::optional<std::string> out_path;
  std::string spec_path;
  std::string format = "json";
  std::optional<double> tol;

  auto* gen = app.add_subcommand("gen", "Generate an example problem spec");
  gen->add_option("--kind", kind, "onb | scaled_onb | random_ckframe | random_bessel_pair | interval_fourier")
      ->required();
  gen->add_option("--params", params, "Generator parameters as a JSON object");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", out_path, "Output path (default stdout)");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"bounds", "Optimal c-frame and ck-frame bounds"},
      {"atoms", "Atomic-decomposition coefficient map"},
      {"dual", "Canonical ck-dual"},
      {"verify-pair", "Check the five dual-pair conditions for field_g"},
      {"douglas", "Douglas factorization of k through T_f"},
      {"sandwich", "Inverse-on-range sandwich and restricted frame bounds"},
  };
  std::vector<CLI::App*> command_apps;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("spec", spec_path, "Problem spec JSON ('-' for stdin)")->required();
    sub->add_option("--out", out_path, "Report path (default stdout)");
    sub->add_option("--format", format, "json | text")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--tol", tol, "Residual tolerance (overrides the spec)");
    sub->add_option("--seed", seed, "Seed for Monte-Carlo diagnostics");
    command_apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (gen->parsed()) {
      ckframe::Json p;
      try {
        p = ckframe::Json::parse(params);
      } catch (const ckframe::Json::parse_error& e) {
        throw ckframe::Error(ckframe::ErrorCode::BadParams, e.what());
      }
      const ckframe::ProblemSpec spec = ckframe::generate_example(kind, p, seed);
      write_output(out_path, ckframe::to_json(spec).dump(2) + "\n");
      return kExitOk;
    }

    for (auto* sub : command_apps) {
      if (!sub->parsed()) continue;
      ckframe::ProblemSpec spec = ckframe::parse_problem(spec_path, default_tolerances());
      if (tol) {
        if (!(*tol > 0.0)) throw ckframe::Error(ckframe::ErrorCode::ValidationError, "--tol must be positive");
        spec.tolerances.check = *tol;
      }
      const ckframe::RunReport report = ckframe::run_command(spec, sub->get_name(), {.seed = seed});
      const auto fmt = format == "text" ? ckframe::ReportFormat::Text : ckframe::ReportFormat::Json;
      write_output(out_path, ckframe::emit_report(report, fmt));
      return report.status == ckframe::ReportStatus::Failed ? kExitFailed : kExitOk;
    }
  } catch (const ckframe::Error& e) {
    std::cerr << "ckframe: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "ckframe: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
