#include "gdl/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace gdl {
namespace {

using nlohmann::json;

json flat(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

json flat(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.is_array()) fail(ErrorCode::ValidationError, std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& x : j) {
    if (!x.is_number()) fail(ErrorCode::ValidationError, std::string("field '") + key + "' holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

Matrix unflat(const json& j, const char* key, Eigen::Index rows, Eigen::Index cols) {
  const std::vector<double> v = numbers(j, key);
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    std::ostringstream os;
    os << "field '" << key << "' has " << v.size() << " entries, expected " << rows * cols;
    fail(key[0] == 'A' ? ErrorCode::FeatureShapeMismatch : ErrorCode::ShapeMismatch, os.str());
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = v[static_cast<std::size_t>(i * cols + j2)];
  return m;
}

Vector to_vector(const json& j, const char* key, Eigen::Index n) {
  const std::vector<double> v = numbers(j, key);
  if (static_cast<Eigen::Index>(v.size()) != n) fail(ErrorCode::LengthMismatch, std::string("field '") + key + "' has wrong length");
  return Eigen::Map<const Vector>(v.data(), n);
}

Eigen::Index positive_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    fail(ErrorCode::ValidationError, std::string("field '") + key + "' must be an integer");
  const auto n = j[key].get<long long>();
  if (n < 1) fail(ErrorCode::ValidationError, std::string("field '") + key + "' must be >= 1");
  return static_cast<Eigen::Index>(n);
}

GraphRepr graph_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ValidationError, "record is not a JSON object");
  const Eigen::Index n = positive_int(j, "n");
  if (!j.contains("C")) fail(ErrorCode::ValidationError, "record lacks 'C'");
  GraphRepr g;
  g.C = unflat(j["C"], "C", n, n);
  g.h = j.contains("h") ? Histogram::renormalized(to_vector(j["h"], "h", n)) : Histogram::uniform(n);
  if (j.contains("A")) {
    const Eigen::Index d = positive_int(j, "d");
    g.A = unflat(j["A"], "A", n, d);
  }
  if (j.contains("y")) {
    if (!j["y"].is_number_integer()) fail(ErrorCode::ValidationError, "field 'y' must be an integer");
    g.label = j["y"].get<int>();
  }
  validate_graph(g);
  return g;
}

json graph_to_json(const GraphRepr& g) {
  json j;
  j["n"] = g.order();
  j["C"] = flat(g.C);
  j["h"] = flat(g.h.values());
  if (g.A) {
    j["d"] = g.A->cols();
    j["A"] = flat(*g.A);
  }
  if (g.label) j["y"] = *g.label;
  return j;
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, where + ": " + e.what());
  }
}

}  // namespace

GraphRepr parse_graph_record(const std::string& line) { return graph_from_json(parse_json(line, "record")); }

std::string graph_record(const GraphRepr& g) { return graph_to_json(g).dump(); }

std::vector<GraphRepr> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<GraphRepr> graphs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const json j = parse_json(line, where);
    try {
      graphs.push_back(graph_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  }
  return graphs;
}

void write_dataset(const std::vector<GraphRepr>& graphs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  for (const GraphRepr& g : graphs) out << graph_record(g) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const json j = parse_json(buf.str(), path.string());
  if (!j.is_object()) fail(ErrorCode::ValidationError, "dictionary file is not a JSON object");

  const Eigen::Index S = positive_int(j, "S");
  const Eigen::Index N = positive_int(j, "N");
  auto list = [&](const char* key) {
    if (!j[key].is_array() || static_cast<Eigen::Index>(j[key].size()) != S)
      fail(ErrorCode::ValidationError, std::string("field '") + key + "' must hold S entries");
    return j[key];
  };
  Dictionary d;
  if (!j.contains("atoms")) fail(ErrorCode::ValidationError, "dictionary lacks 'atoms'");
  for (const json& a : list("atoms")) d.atoms.push_back(unflat(a, "atoms", N, N));
  if (j.contains("alpha")) d.alpha = j["alpha"].get<double>();
  if (j.contains("feature_atoms")) {
    const Eigen::Index dim = positive_int(j, "d");
    for (const json& a : list("feature_atoms")) d.feature_atoms.push_back(unflat(a, "A", N, dim));
  }
  if (j.contains("weight_atoms"))
    for (const json& a : list("weight_atoms"))
      d.weight_atoms.push_back(Histogram::renormalized(to_vector(a, "weight_atoms", N)));
  d.lambda = j.value("lambda", 0.0);
  d.mu = j.value("mu", 0.0);
  validate_dictionary(d);
  return d;
}

void save_dictionary(const Dictionary& d, const std::filesystem::path& path) {
  json j;
  j["S"] = d.size();
  j["N"] = d.order();
  j["atoms"] = json::array();
  for (const Matrix& a : d.atoms) j["atoms"].push_back(flat(a));
  j["alpha"] = d.alpha;
  if (d.has_features()) {
    j["d"] = d.feature_dim();
    j["feature_atoms"] = json::array();
    for (const Matrix& a : d.feature_atoms) j["feature_atoms"].push_back(flat(a));
  }
  if (d.has_weights()) {
    j["weight_atoms"] = json::array();
    for (const Histogram& h : d.weight_atoms) j["weight_atoms"].push_back(flat(h.values()));
  }
  j["lambda"] = d.lambda;
  j["mu"] = d.mu;
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace gdl
