#pragma once

// Problem specifications: the JSON input format and the example generators.
//
// Schema (complex scalars are [re, im]; matrices are row-major nested arrays):
//
//   {
//     "space":      {"labels": [..], "weights": [..]},
//     "dim_H":      n,
//     "dim_H0":     n0,
//     "field_f":    [atom][n][2],
//     "operator_k": [n][n0][2],
//     "field_g":    [atom][n0][2],                       (optional)
//     "tolerances": {"rank_tol": .., "check_tol": ..},    (optional)
//     "options":    {..}                                  (optional)
//   }

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ckframe/atoms_duals.hpp"

namespace ckframe {

using Json = nlohmann::json;

struct ProblemSpec {
  SpaceRef space;
  Index dim_h = 0;
  Index dim_h0 = 0;
  OperatorMatrix field_f;     // dim_h x atoms
  OperatorMatrix operator_k;  // dim_h x dim_h0
  std::optional<OperatorMatrix> field_g;  // dim_h0 x atoms
  Tolerances tolerances;
  Json options = Json::object();

  SampleField f() const { return SampleField(space, field_f); }
  SampleField g() const {
    if (!field_g) throw Error(ErrorCode::ValidationError, "field_g: required by this command");
    return SampleField(space, *field_g);
  }

  friend bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
    return same_space(a.space, b.space) && a.dim_h == b.dim_h && a.dim_h0 == b.dim_h0 && a.field_f == b.field_f &&
           a.operator_k == b.operator_k && a.field_g.has_value() == b.field_g.has_value() &&
           (!a.field_g || *a.field_g == *b.field_g) && a.tolerances.rank == b.tolerances.rank &&
           a.tolerances.check == b.tolerances.check && a.options == b.options;
  }
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ValidationError, path + ": " + what);
}

inline const Json& member(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) invalid(path.empty() ? key : path + "." + key, "missing");
  return obj.at(key);
}

inline double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(path, "not finite");
  return v;
}

inline Index positive_int_at(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) invalid(path, "expected a positive integer");
  return static_cast<Index>(j.get<long long>());
}

inline Complex complex_at(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) invalid(path, "expected [re, im]");
  return {number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]")};
}

// [atom][dim][2] -> dim x atoms
inline OperatorMatrix field_at(const Json& j, const std::string& path, Index dim, Index atoms) {
  if (!j.is_array()) invalid(path, "expected an array of samples");
  if (static_cast<Index>(j.size()) != atoms) {
    invalid(path, "has " + std::to_string(j.size()) + " samples for " + std::to_string(atoms) + " atoms");
  }
  OperatorMatrix m(dim, atoms);
  for (Index a = 0; a < atoms; ++a) {
    const std::string p = path + "[" + std::to_string(a) + "]";
    const Json& s = j[static_cast<std::size_t>(a)];
    if (!s.is_array() || static_cast<Index>(s.size()) != dim) {
      invalid(p, "sample length differs from dimension " + std::to_string(dim));
    }
    for (Index i = 0; i < dim; ++i) m(i, a) = complex_at(s[static_cast<std::size_t>(i)], p + "[" + std::to_string(i) + "]");
  }
  return m;
}

inline OperatorMatrix matrix_at(const Json& j, const std::string& path, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    invalid(path, "expected " + std::to_string(rows) + " rows");
  }
  OperatorMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const std::string p = path + "[" + std::to_string(r) + "]";
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      invalid(p, "expected " + std::to_string(cols) + " columns");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_at(row[static_cast<std::size_t>(c)], p + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline Json complex_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

}  // namespace detail

inline Json field_json(const OperatorMatrix& samples) {
  Json out = Json::array();
  for (Index a = 0; a < samples.cols(); ++a) {
    Json s = Json::array();
    for (Index i = 0; i < samples.rows(); ++i) s.push_back(detail::complex_json(samples(i, a)));
    out.push_back(std::move(s));
  }
  return out;
}

inline Json matrix_json(const OperatorMatrix& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(detail::complex_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

inline Json to_json(const ProblemSpec& spec) {
  Json j;
  j["space"]["labels"] = spec.space->labels();
  j["space"]["weights"] = std::vector<double>(spec.space->weights().data(),
                                              spec.space->weights().data() + spec.space->weights().size());
  j["dim_H"] = spec.dim_h;
  j["dim_H0"] = spec.dim_h0;
  j["field_f"] = field_json(spec.field_f);
  j["operator_k"] = matrix_json(spec.operator_k);
  if (spec.field_g) j["field_g"] = field_json(*spec.field_g);
  j["tolerances"] = {{"rank_tol", spec.tolerances.rank}, {"check_tol", spec.tolerances.check}};
  j["options"] = spec.options;
  return j;
}

/// Validates a parsed document. `defaults` supplies tolerances the document omits.
inline ProblemSpec parse_problem_json(const Json& j, const Tolerances& defaults = {}) {
  using detail::invalid;
  if (!j.is_object()) invalid("$", "expected a JSON object");
  ProblemSpec spec;

  const Json& space = detail::member(j, "space", "");
  const Json& labels = detail::member(space, "labels", "space");
  const Json& weights = detail::member(space, "weights", "space");
  if (!labels.is_array()) invalid("space.labels", "expected an array");
  if (!weights.is_array()) invalid("space.weights", "expected an array");
  if (labels.empty()) invalid("space.labels", "measure space needs at least one atom");
  if (labels.size() != weights.size()) invalid("space.weights", "length differs from space.labels");
  std::vector<std::string> label_values;
  std::vector<double> weight_values;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i].is_string()) invalid("space.labels[" + std::to_string(i) + "]", "expected a string");
    label_values.push_back(labels[i].get<std::string>());
    const std::string p = "space.weights[" + std::to_string(i) + "]";
    const double w = detail::number_at(weights[i], p);
    if (!(w > 0.0)) invalid(p, "weight must be strictly positive");
    weight_values.push_back(w);
  }
  spec.space = make_measure_space(std::move(label_values), std::move(weight_values));
  const Index atoms = spec.space->size();

  spec.dim_h = detail::positive_int_at(detail::member(j, "dim_H", ""), "dim_H");
  spec.dim_h0 = detail::positive_int_at(detail::member(j, "dim_H0", ""), "dim_H0");
  spec.field_f = detail::field_at(detail::member(j, "field_f", ""), "field_f", spec.dim_h, atoms);
  spec.operator_k = detail::matrix_at(detail::member(j, "operator_k", ""), "operator_k", spec.dim_h, spec.dim_h0);
  if (j.contains("field_g") && !j.at("field_g").is_null()) {
    spec.field_g = detail::field_at(j.at("field_g"), "field_g", spec.dim_h0, atoms);
  }

  spec.tolerances = defaults;
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    if (!t.is_object()) invalid("tolerances", "expected an object");
    if (t.contains("rank_tol")) spec.tolerances.rank = detail::number_at(t.at("rank_tol"), "tolerances.rank_tol");
    if (t.contains("check_tol")) spec.tolerances.check = detail::number_at(t.at("check_tol"), "tolerances.check_tol");
    if (!(spec.tolerances.rank > 0.0)) invalid("tolerances.rank_tol", "must be positive");
    if (!(spec.tolerances.check > 0.0)) invalid("tolerances.check_tol", "must be positive");
  }
  if (j.contains("options")) {
    if (!j.at("options").is_object()) invalid("options", "expected an object");
    spec.options = j.at("options");
  }
  return spec;
}

inline ProblemSpec parse_problem_text(const std::string& text, const Tolerances& defaults = {}) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return parse_problem_json(j, defaults);
}

/// Reads a problem file; "-" reads standard input.
inline ProblemSpec parse_problem(const std::string& path, const Tolerances& defaults = {}) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return parse_problem_text(text, defaults);
}

// ---------------------------------------------------------------------------
// Generators

namespace detail {

inline Index param_int(const Json& params, const char* key, Index fallback) {
  if (!params.contains(key)) return fallback;
  const Json& v = params.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw Error(ErrorCode::BadParams, std::string(key) + " must be a positive integer");
  }
  return static_cast<Index>(v.get<long long>());
}

inline bool param_bool(const Json& params, const char* key, bool fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_boolean()) throw Error(ErrorCode::BadParams, std::string(key) + " must be a boolean");
  return params.at(key).get<bool>();
}

inline OperatorMatrix random_complex(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  OperatorMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = Complex(normal(rng), normal(rng)) / std::sqrt(2.0);
  return m;
}

inline SpaceRef random_space(std::mt19937_64& rng, Index atoms) {
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  std::vector<double> w;
  for (Index i = 0; i < atoms; ++i) w.push_back(unif(rng));
  return weighted_space(w);
}

}  // namespace detail

/// Deterministic example problems.
///
///   onb               {n}                  counting measure, f = standard basis, k = I
///   scaled_onb        {scales = [1, 2]}    f = {s_i e_i}, k = I
///   random_ckframe    {n, n0, atoms}       k = T_f M for random M
///   random_bessel_pair{n, n0, atoms, dual} random f, g, k; with dual = true the
///                                          pair is (P_{R(k)} f, canonical dual)
///   interval_fourier  {n, atoms}           X = [0,1) with atoms uniform nodes of
///                                          mass 1/atoms, f(t) = (e^{2 pi i m t})_m, k = I
inline ProblemSpec generate_example(const std::string& kind, const Json& params, std::uint64_t seed) {
  if (!params.is_object()) throw Error(ErrorCode::BadParams, "params must be a JSON object");
  std::mt19937_64 rng(seed);
  ProblemSpec spec;

  if (kind == "onb") {
    const Index n = detail::param_int(params, "n", 2);
    spec.space = counting_measure(n);
    spec.dim_h = spec.dim_h0 = n;
    spec.field_f = identity(n);
    spec.operator_k = identity(n);
  } else if (kind == "scaled_onb") {
    const Json scales = params.contains("scales") ? params.at("scales") : Json::array({1.0, 2.0});
    if (!scales.is_array() || scales.empty()) throw Error(ErrorCode::BadParams, "scales must be a nonempty array");
    const Index n = static_cast<Index>(scales.size());
    spec.space = counting_measure(n);
    spec.dim_h = spec.dim_h0 = n;
    spec.field_f = OperatorMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      const Json& s = scales[static_cast<std::size_t>(i)];
      if (!s.is_number() || !std::isfinite(s.get<double>())) throw Error(ErrorCode::BadParams, "scales must be numbers");
      spec.field_f(i, i) = s.get<double>();
    }
    spec.operator_k = identity(n);
  } else if (kind == "random_ckframe") {
    const Index n = detail::param_int(params, "n", 4);
    const Index n0 = detail::param_int(params, "n0", 2);
    const Index atoms = detail::param_int(params, "atoms", 16);
    spec.space = detail::random_space(rng, atoms);
    spec.dim_h = n;
    spec.dim_h0 = n0;
    spec.field_f = detail::random_complex(rng, n, atoms);
    const OperatorMatrix coeffs = detail::random_complex(rng, atoms, n0);
    spec.operator_k = synthesis_matrix(spec.f()) * coeffs;
    if (!ckframe_check(spec.f(), spec.operator_k, spec.tolerances).is_ck_frame) {
      throw Error(ErrorCode::BadParams, "generated instance failed the ck-frame check");
    }
  } else if (kind == "random_bessel_pair") {
    const Index n = detail::param_int(params, "n", 3);
    const Index n0 = detail::param_int(params, "n0", 2);
    const Index atoms = detail::param_int(params, "atoms", 12);
    const bool dual = detail::param_bool(params, "dual", false);
    spec.space = detail::random_space(rng, atoms);
    spec.dim_h = n;
    spec.dim_h0 = n0;
    spec.field_f = detail::random_complex(rng, n, atoms);
    if (dual) {
      const OperatorMatrix coeffs = detail::random_complex(rng, atoms, n0);
      spec.operator_k = synthesis_matrix(spec.f()) * coeffs;
      const CanonicalDual cd = canonical_dual(spec.f(), spec.operator_k, spec.tolerances);
      spec.field_f = cd.projected_frame.samples();
      spec.field_g = cd.dual_field.samples();
    } else {
      spec.operator_k = detail::random_complex(rng, n, n0);
      spec.field_g = detail::random_complex(rng, n0, atoms);
    }
  } else if (kind == "interval_fourier") {
    const Index n = detail::param_int(params, "n", 4);
    const Index atoms = detail::param_int(params, "atoms", 32);
    if (atoms < n) throw Error(ErrorCode::BadParams, "interval_fourier needs atoms >= n");
    std::vector<std::string> labels;
    std::vector<double> weights(static_cast<std::size_t>(atoms), 1.0 / static_cast<double>(atoms));
    spec.field_f = OperatorMatrix(n, atoms);
    for (Index j = 0; j < atoms; ++j) {
      labels.push_back("t" + std::to_string(j));
      const double t = static_cast<double>(j) / static_cast<double>(atoms);
      for (Index m = 0; m < n; ++m) spec.field_f(m, j) = std::polar(1.0, 2.0 * std::numbers::pi * m * t);
    }
    spec.space = make_measure_space(std::move(labels), std::move(weights));
    spec.dim_h = spec.dim_h0 = n;
    spec.operator_k = identity(n);
  } else {
    throw Error(ErrorCode::UnknownKind, "unknown generator kind '" + kind + "'");
  }
  return spec;
}

}  // namespace ckframe
