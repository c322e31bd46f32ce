#include "fixture_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace oblique::io {

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ParseError, path.empty() ? msg : path + ": " + msg);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path, std::string("missing field \"") + key + "\"");
  return *it;
}

void only_fields(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) parse_fail(path, "unknown field \"" + key + "\"");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) parse_fail(path, "number is not finite");
  return x;
}

Index positive_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) parse_fail(path, "expected a positive integer");
  return static_cast<Index>(j.get<long long>());
}

Vector parse_vector(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// List of equal-length vectors; returned as rows (rows_major) or columns.
Matrix parse_vector_list(const json& j, const std::string& path, Index expected_len, bool as_columns) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array of vectors");
  const Index count = static_cast<Index>(j.size());
  Matrix m = as_columns ? Matrix(expected_len, count) : Matrix(count, expected_len);
  for (Index i = 0; i < count; ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    const Vector v = parse_vector(j[static_cast<std::size_t>(i)], at);
    if (v.size() != expected_len) {
      parse_fail(at, "expected " + std::to_string(expected_len) + " entries, got " + std::to_string(v.size()));
    }
    if (as_columns) {
      m.col(i) = v;
    } else {
      m.row(i) = v.transpose();
    }
  }
  return m;
}

Subspace parse_subspace_basis(const json& j, Index n, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected an n x d array of rows");
  const Index d = j[0].is_array() ? static_cast<Index>(j[0].size()) : 0;
  if (static_cast<Index>(j.size()) != n) {
    parse_fail(path, "expected " + std::to_string(n) + " rows (ambient dimension)");
  }
  Matrix b = parse_vector_list(j, path, d, false);
  try {
    return Subspace::from_orthonormal(std::move(b));
  } catch (const Error& e) {
    parse_fail(path, e.what());
  }
}

Subspace parse_subspace(const json& j, const std::string& path) {
  only_fields(j, {"ambient_dim", "basis"}, path);
  const Index n = positive_int(field(j, "ambient_dim", path), path + ".ambient_dim");
  return parse_subspace_basis(field(j, "basis", path), n, path + ".basis");
}

FiniteFrame parse_frame(const json& j, const std::string& path, const Tolerance& tol) {
  only_fields(j, {"ambient_dim", "subspace_basis", "vectors"}, path);
  const Index n = positive_int(field(j, "ambient_dim", path), path + ".ambient_dim");
  Subspace s = parse_subspace_basis(field(j, "subspace_basis", path), n, path + ".subspace_basis");
  Matrix vecs = parse_vector_list(field(j, "vectors", path), path + ".vectors", n, true);
  try {
    return FiniteFrame(std::move(vecs), std::move(s), tol);
  } catch (const Error& e) {
    parse_fail(path, e.what());
  }
}

DiscreteMeasure parse_measure(const json& j, const std::string& path) {
  only_fields(j, {"ambient_dim", "points", "weights"}, path);
  const Index n = positive_int(field(j, "ambient_dim", path), path + ".ambient_dim");
  Matrix pts = parse_vector_list(field(j, "points", path), path + ".points", n, true);
  Vector w = parse_vector(field(j, "weights", path), path + ".weights");
  if (w.size() != pts.cols()) {
    parse_fail(path + ".weights", std::to_string(w.size()) + " weights for " +
                                      std::to_string(pts.cols()) + " points");
  }
  if ((w.array() < 0.0).any()) parse_fail(path + ".weights", "weights must be nonnegative");
  const double total = w.sum();
  if (std::abs(total - 1.0) > kWeightSumTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total
        << "; a probability measure's weights must sum to 1 (normalization invariant)";
    parse_fail(path + ".weights", msg.str());
  }
  try {
    return DiscreteMeasure(std::move(pts), std::move(w));
  } catch (const Error& e) {
    parse_fail(path, e.what());
  }
}

CouplingPairs parse_pairs(const json& j, const std::string& path) {
  only_fields(j, {"pairs"}, path);
  const json& pairs = field(j, "pairs", path);
  if (!pairs.is_array() || pairs.empty()) parse_fail(path + ".pairs", "expected a non-empty array");
  CouplingPairs out;
  const auto count = static_cast<Index>(pairs.size());
  for (Index k = 0; k < count; ++k) {
    const std::string at = path + ".pairs[" + std::to_string(k) + "]";
    const json& p = pairs[static_cast<std::size_t>(k)];
    if (!p.is_array() || p.size() != 3) parse_fail(at, "expected [x, y, weight]");
    const Vector x = parse_vector(p[0], at + "[0]");
    const Vector y = parse_vector(p[1], at + "[1]");
    const double w = number(p[2], at + "[2]");
    if (k == 0) {
      out.x.resize(x.size(), count);
      out.y.resize(y.size(), count);
      out.w.resize(count);
    }
    if (x.size() != out.x.rows() || y.size() != out.y.rows()) parse_fail(at, "inconsistent point lengths");
    if (w < 0.0) parse_fail(at, "weight must be nonnegative");
    out.x.col(k) = x;
    out.y.col(k) = y;
    out.w(k) = w;
  }
  if (std::abs(out.w.sum() - 1.0) > kWeightSumTol) {
    parse_fail(path + ".pairs", "weights sum to " + std::to_string(out.w.sum()) +
                                    "; a coupling's weights must sum to 1 (normalization invariant)");
  }
  return out;
}

std::string format_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "cannot serialize a non-finite number");
  if (x == 0.0) return "0";  // folds -0 as well
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool inline_array(const json& j) {
  bool has_scalar = false;
  for (const json& e : j) {
    if (e.is_number() || e.is_boolean() || e.is_string() || e.is_null()) {
      has_scalar = true;
    } else if (e.is_array()) {
      for (const json& x : e) {
        if (!x.is_number()) return false;
      }
    } else {
      return false;
    }
  }
  return has_scalar || j.empty();
}

void dump_to(std::string& out, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + "  " + json(key).dump() + ": ";
        dump_to(out, value, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (inline_array(j)) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_to(out, j[i], 0);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad + "  ";
        dump_to(out, j[i], indent + 2);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

Fixture parse_fixture(const std::string& text, const Tolerance& tol) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_of(text, e.byte)) + ": malformed JSON (" + e.what() + ")");
  }
  only_fields(root,
              {"name", "W", "V", "K", "frame", "dual", "mu", "nu", "eta", "coupling",
               "perturbation_coupling", "h", "probes", "f"},
              "");
  Fixture fx;
  if (root.contains("name")) {
    if (!root["name"].is_string()) parse_fail("name", "expected a string");
    fx.name = root["name"].get<std::string>();
  }
  if (root.contains("W")) fx.w = parse_subspace(root["W"], "W");
  if (root.contains("V")) fx.v = parse_subspace(root["V"], "V");
  if (root.contains("K")) fx.k = parse_subspace(root["K"], "K");
  if (root.contains("frame")) fx.frame = parse_frame(root["frame"], "frame", tol);
  if (root.contains("dual")) fx.dual = parse_frame(root["dual"], "dual", tol);
  if (root.contains("mu")) fx.mu = parse_measure(root["mu"], "mu");
  if (root.contains("nu")) fx.nu = parse_measure(root["nu"], "nu");
  if (root.contains("eta")) fx.eta = parse_measure(root["eta"], "eta");
  if (root.contains("coupling")) fx.coupling = parse_pairs(root["coupling"], "coupling");
  if (root.contains("perturbation_coupling")) {
    fx.perturbation_coupling = parse_pairs(root["perturbation_coupling"], "perturbation_coupling");
  }
  if (root.contains("h")) {
    const json& h = root["h"];
    const Index n = h.is_array() && !h.empty() && h[0].is_array() ? static_cast<Index>(h[0].size()) : 0;
    fx.h = parse_vector_list(h, "h", n, true);
  }
  if (root.contains("probes")) {
    const json& p = root["probes"];
    const Index n = p.is_array() && !p.empty() && p[0].is_array() ? static_cast<Index>(p[0].size()) : 0;
    const Matrix cols = parse_vector_list(p, "probes", n, true);
    fx.probes.emplace();
    for (Index i = 0; i < cols.cols(); ++i) fx.probes->push_back(cols.col(i));
  }
  if (root.contains("f")) fx.signal = parse_vector(root["f"], "f");
  return fx;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Fixture load_fixture(const std::string& path, const Tolerance& tol) {
  return parse_fixture(read_file(path), tol);
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::InvalidArgument, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto " + path + ": " + ec.message());
  }
}

std::string canonical_dump(const json& j) {
  std::string out;
  dump_to(out, j, 0);
  out += "\n";
  return out;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json rows_to_json(const Matrix& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
  return a;
}

json columns_to_json(const Matrix& m) {
  json a = json::array();
  for (Index j = 0; j < m.cols(); ++j) a.push_back(to_json(Vector(m.col(j))));
  return a;
}

json to_json(const Subspace& s) {
  return {{"ambient_dim", s.ambient_dim()}, {"basis", rows_to_json(s.basis())}};
}

json to_json(const FiniteFrame& f) {
  return {{"ambient_dim", f.ambient_dim()},
          {"subspace_basis", rows_to_json(f.subspace().basis())},
          {"vectors", columns_to_json(f.vectors())}};
}

json to_json(const DiscreteMeasure& m) {
  return {{"ambient_dim", m.ambient_dim()},
          {"points", columns_to_json(m.points())},
          {"weights", to_json(m.weights())}};
}

json to_json(const CouplingPairs& c) {
  json pairs = json::array();
  for (Index k = 0; k < c.w.size(); ++k) {
    pairs.push_back(json::array({to_json(Vector(c.x.col(k))), to_json(Vector(c.y.col(k))), c.w(k)}));
  }
  return {{"pairs", pairs}};
}

CouplingPairs pairs_of(const Coupling& c) { return {c.x(), c.y(), c.weights()}; }

json to_json(const Coupling& c) { return to_json(pairs_of(c)); }

json to_json(const ObliqueDualPair& p) {
  return {{"synthesis", to_json(p.synthesis)}, {"analysis", to_json(p.analysis)}, {"residual", p.residual}};
}

json to_json(const PotentialReport& r) {
  json j = {{"p", r.p}, {"value", r.value}, {"saturated", r.saturated}, {"saturation_tol", r.saturation_tol}};
  if (r.lower_bound) j["lower_bound"] = *r.lower_bound;
  if (r.gap) j["gap"] = *r.gap;
  if (r.constant_diagonal_bound) j["constant_diagonal_bound"] = *r.constant_diagonal_bound;
  return j;
}

json to_json(const TransportCertificate& c) {
  return {{"cost", c.cost}, {"dual_gap", c.dual_gap}, {"iterations", c.iterations}};
}

json to_json(const Fixture& f) {
  json j = json::object();
  if (f.name) j["name"] = *f.name;
  if (f.w) j["W"] = to_json(*f.w);
  if (f.v) j["V"] = to_json(*f.v);
  if (f.k) j["K"] = to_json(*f.k);
  if (f.frame) j["frame"] = to_json(*f.frame);
  if (f.dual) j["dual"] = to_json(*f.dual);
  if (f.mu) j["mu"] = to_json(*f.mu);
  if (f.nu) j["nu"] = to_json(*f.nu);
  if (f.eta) j["eta"] = to_json(*f.eta);
  if (f.coupling) j["coupling"] = to_json(*f.coupling);
  if (f.perturbation_coupling) j["perturbation_coupling"] = to_json(*f.perturbation_coupling);
  if (f.h) j["h"] = columns_to_json(*f.h);
  if (f.probes) {
    json a = json::array();
    for (const Vector& p : *f.probes) a.push_back(to_json(p));
    j["probes"] = a;
  }
  if (f.signal) j["f"] = to_json(*f.signal);
  return j;
}

}  // namespace oblique::io
