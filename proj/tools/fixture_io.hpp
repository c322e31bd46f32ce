#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oblique/oblique.hpp"

namespace oblique::io {

using json = nlohmann::json;

/// Raw coupling pairs as read from a fixture. Declared marginals are attached
/// later, once the command knows which measures the coupling relates.
struct CouplingPairs {
  Matrix x;
  Matrix y;
  Vector w;
};

/// Every section a fixture may carry. All are optional; commands ask for the
/// ones they need via the require_* helpers below.
struct Fixture {
  std::optional<std::string> name;
  std::optional<Subspace> w;
  std::optional<Subspace> v;
  std::optional<Subspace> k;
  std::optional<FiniteFrame> frame;
  std::optional<FiniteFrame> dual;
  std::optional<DiscreteMeasure> mu;
  std::optional<DiscreteMeasure> nu;
  std::optional<DiscreteMeasure> eta;
  std::optional<CouplingPairs> coupling;
  std::optional<CouplingPairs> perturbation_coupling;
  std::optional<Matrix> h;  // one column per h_i
  std::optional<std::vector<Vector>> probes;
  std::optional<Vector> signal;
};

/// Throws Error(ParseError) naming the offending field or input line.
Fixture parse_fixture(const std::string& text, const Tolerance& tol = {});
Fixture load_fixture(const std::string& path, const Tolerance& tol = {});

json to_json(const Fixture& f);

/// Sorted keys, two-space indent, 17 significant digits, numeric rows inline,
/// trailing newline.
std::string canonical_dump(const json& j);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// -- value encoders ----------------------------------------------------------

json to_json(const Vector& v);
json rows_to_json(const Matrix& m);     // row-major matrix
json columns_to_json(const Matrix& m);  // list of column vectors
json to_json(const Subspace& s);
json to_json(const FiniteFrame& f);
json to_json(const DiscreteMeasure& m);
json to_json(const CouplingPairs& c);
json to_json(const Coupling& c);
json to_json(const ObliqueDualPair& p);
json to_json(const PotentialReport& r);
json to_json(const TransportCertificate& c);

CouplingPairs pairs_of(const Coupling& c);

}  // namespace oblique::io
