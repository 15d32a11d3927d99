#include "pertkit/io.hpp"

#include "pertkit/errors.hpp"
#include "pertkit/least_action.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pertkit::io {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Reading

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

int as_int(const json& node, const char* what) {
  if (!node.is_number_integer()) throw ParseError(std::string(what) + " must be an integer");
  return node.get<int>();
}

double as_double(const json& node, const char* what) {
  if (!node.is_number()) throw ParseError(std::string(what) + " must be a number");
  return node.get<double>();
}

std::vector<int> as_int_list(const json& node, const char* what) {
  if (!node.is_array()) throw ParseError(std::string(what) + " must be a list of integers");
  std::vector<int> out;
  for (const auto& x : node) out.push_back(as_int(x, what));
  return out;
}

Matrix parse_matrix(const json& node, Eigen::Index dim) {
  if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != dim * dim) {
    throw ParseError("matrix must be a flat list of " + std::to_string(dim * dim) + " [re, im] pairs");
  }
  Matrix m(dim, dim);
  for (Eigen::Index k = 0; k < dim * dim; ++k) {
    const json& z = node[static_cast<std::size_t>(k)];
    if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
      throw ParseError("matrix entry " + std::to_string(k) + " is not an [re, im] pair");
    }
    m(k / dim, k % dim) = Complex(z[0].get<double>(), z[1].get<double>());
  }
  return m;
}

std::optional<double> parse_omega(const json& obj) {
  if (!obj.contains("omega_d") || obj.at("omega_d").is_null()) return std::nullopt;
  return as_double(obj.at("omega_d"), "omega_d");
}

Matrix apply_permutation(const Matrix& m, const std::vector<int>& perm) {
  const auto d = static_cast<Eigen::Index>(perm.size());
  Matrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = m(perm[i], perm[j]);
  }
  return out;
}

Mask parse_mask(const json& node, Eigen::Index dim, std::vector<int>& block_sizes) {
  if (!node.is_object()) throw ParseError("mask must be an object");
  const int forms = static_cast<int>(node.contains("matrix")) +
                    static_cast<int>(node.contains("block_sizes")) +
                    static_cast<int>(node.contains("entries"));
  if (forms != 1) throw ParseError("mask needs exactly one of 'matrix', 'block_sizes', 'entries'");
  if (node.contains("block_sizes")) {
    const auto sizes = as_int_list(node.at("block_sizes"), "mask.block_sizes");
    if (std::accumulate(sizes.begin(), sizes.end(), 0) != dim) {
      throw ParseError("mask block sizes do not sum to dim");
    }
    if (block_sizes.empty()) block_sizes = sizes;
    return Mask::block_off_diagonal(sizes);
  }
  if (node.contains("entries")) {
    std::vector<std::pair<int, int>> entries;
    for (const auto& e : node.at("entries")) {
      const auto ij = as_int_list(e, "mask entry");
      if (ij.size() != 2) throw ParseError("mask entries are [i, j] pairs");
      entries.emplace_back(ij[0], ij[1]);
    }
    return Mask::from_entries(dim, entries);
  }
  const json& rows = node.at("matrix");
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != dim) {
    throw ParseError("mask matrix must have dim rows");
  }
  Mask::BoolMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw ParseError("mask matrix row " + std::to_string(i) + " has the wrong length");
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      const json& x = row[static_cast<std::size_t>(j)];
      if (x.is_boolean()) {
        m(i, j) = x.get<bool>();
      } else if (x.is_number_integer() && (x.get<int>() == 0 || x.get<int>() == 1)) {
        m(i, j) = x.get<int>() == 1;
      } else {
        throw ParseError("mask matrix entries must be booleans or 0/1");
      }
    }
  }
  return Mask(std::move(m));
}

GradedOperator parse_order_map(const json& node, Eigen::Index dim, std::optional<double> omega_d) {
  GradedOperator op(dim, omega_d);
  if (!node.is_object()) throw ParseError("graded operator must be an object keyed by order");
  for (const auto& [order_key, inner] : node.items()) {
    if (!inner.is_object()) throw ParseError("order entry must map \"j,k\" keys to matrices");
    for (const auto& [key, matrix] : inner.items()) {
      int j = 0, k = 0;
      if (std::sscanf(key.c_str(), "%d,%d", &j, &k) != 2) {
        throw ParseError("bad grade key '" + key + "'");
      }
      if (std::to_string(j) != order_key) throw ParseError("grade key '" + key + "' under order " + order_key);
      op.set_term(j, k, parse_matrix(matrix, dim));
    }
  }
  return op;
}

// ---------------------------------------------------------------------------
// Writing

std::string number(double x) {
  if (!std::isfinite(x)) throw Error("cannot serialize a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quoted(const std::string& s) { return json(s).dump(); }

std::string matrix_json(const Matrix& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != 0 || j != 0) out += ", ";
      out += "[" + number(m(i, j).real()) + ", " + number(m(i, j).imag()) + "]";
    }
  }
  return out + "]";
}

std::string grade_key(const GradeKey& k) {
  return std::to_string(k.order) + "," + std::to_string(k.harmonic);
}

// {"j": {"j,k": matrix}} over the given orders; keys in ascending numeric order.
std::string order_map_json(const std::map<int, GradedOperator>& series, const std::string& indent) {
  if (series.empty()) return "{}";
  std::string out = "{";
  bool first_order = true;
  for (const auto& [order, op] : series) {
    out += first_order ? "\n" : ",\n";
    first_order = false;
    out += indent + "  " + quoted(std::to_string(order)) + ": {";
    bool first = true;
    for (const auto& [key, m] : op.terms()) {
      out += first ? "\n" : ",\n";
      first = false;
      out += indent + "    " + quoted(grade_key(key)) + ": " + matrix_json(m);
    }
    out += first ? "}" : "\n" + indent + "  }";
  }
  return out + "\n" + indent + "}";
}

std::map<int, GradedOperator> split_for_output(const GradedOperator& op) {
  std::map<int, GradedOperator> out;
  for (const auto& [key, m] : op.terms()) {
    auto [it, inserted] = out.try_emplace(key.order, op.dim(), op.omega_d());
    it->second.set_term(key.order, key.harmonic, m);
  }
  return out;
}

std::string optional_number(const std::optional<double>& x) { return x ? number(*x) : "null"; }

std::string int_list(const std::vector<int>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + std::to_string(xs[i]);
  return out + "]";
}

}  // namespace

// ---------------------------------------------------------------------------

std::string canonical_hash(const std::string& json_text) {
  const std::string canonical = parse_json(json_text).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProblemSpec parse_problem(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("problem document must be a JSON object");
  ProblemSpec spec;
  spec.hash = canonical_hash(text);
  try {
    spec.dim = as_int(require(doc, "dim"), "dim");
    if (spec.dim <= 0) throw ParseError("dim must be positive");
    if (doc.contains("hbar")) spec.hbar = as_double(doc.at("hbar"), "hbar");
    spec.omega_d = parse_omega(doc);
    if (doc.contains("method")) {
      if (!doc.at("method").is_string()) throw ParseError("method must be a string");
      spec.method = method_from_string(doc.at("method").get<std::string>());
    }
    if (doc.contains("max_order")) spec.max_order = as_int(doc.at("max_order"), "max_order");
    if (doc.contains("tolerances")) {
      const json& t = doc.at("tolerances");
      if (t.contains("degeneracy")) spec.tol.degeneracy = as_double(t.at("degeneracy"), "tolerances.degeneracy");
      if (t.contains("resonance")) spec.tol.resonance = as_double(t.at("resonance"), "tolerances.resonance");
    }

    std::vector<int> perm;
    if (doc.contains("permutation")) {
      perm = as_int_list(doc.at("permutation"), "permutation");
      std::vector<int> sorted = perm;
      std::sort(sorted.begin(), sorted.end());
      std::vector<int> expected(static_cast<std::size_t>(spec.dim));
      std::iota(expected.begin(), expected.end(), 0);
      if (sorted != expected) throw ParseError("permutation must reorder 0..dim-1");
    }

    spec.h = GradedOperator(spec.dim, spec.omega_d);
    spec.v = GradedOperator(spec.dim, spec.omega_d);
    const json& terms = require(doc, "terms");
    if (!terms.is_array()) throw ParseError("terms must be a list");
    for (const auto& t : terms) {
      const int order = as_int(require(t, "order"), "term order");
      if (order < 0) throw ParseError("term order must be nonnegative");
      const int harmonic = t.contains("harmonic") ? as_int(t.at("harmonic"), "term harmonic") : 0;
      std::string part = "H";
      if (t.contains("part")) {
        if (!t.at("part").is_string()) throw ParseError("term part must be \"H\" or \"V\"");
        part = t.at("part").get<std::string>();
      }
      if (part != "H" && part != "V") throw ParseError("term part must be \"H\" or \"V\"");
      Matrix m = parse_matrix(require(t, "matrix"), spec.dim);
      if (!perm.empty()) m = apply_permutation(m, perm);
      (part == "V" ? spec.v : spec.h).add_term(order, harmonic, m);
    }
    if (!spec.h.has_term(0, 0)) throw ParseError("problem has no order-0 term");

    if (doc.contains("block_sizes")) spec.block_sizes = as_int_list(doc.at("block_sizes"), "block_sizes");
    if (doc.contains("mask")) {
      const json& mnode = doc.at("mask");
      if (!perm.empty() && mnode.contains("matrix")) {
        throw ParseError("an explicit mask matrix cannot be combined with a permutation; give it in permuted order as entries");
      }
      spec.mask = parse_mask(mnode, spec.dim, spec.block_sizes);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema error: ") + e.what());
  }
  return spec;
}

TransformResult solve_problem(const ProblemSpec& spec) {
  TransformOptions opts;
  opts.hbar = spec.hbar;
  opts.tol = spec.tol;
  switch (spec.method) {
    case Method::swt:
      if (spec.block_sizes.empty()) throw PreconditionError("swt needs block_sizes");
      return run_swt(spec.h, spec.v, spec.block_sizes, spec.max_order, opts);
    case Method::fd:
      return run_fd(spec.h + spec.v, spec.max_order, opts);
    case Method::ace:
      if (!spec.mask) throw PreconditionError("ace needs a mask");
      return run_ace(spec.h + spec.v, *spec.mask, spec.max_order, opts);
    case Method::la:
      if (spec.block_sizes.empty()) throw PreconditionError("la needs block_sizes");
      return run_la(spec.h + spec.v, BlockStructure(spec.block_sizes), spec.max_order, opts);
  }
  throw PreconditionError("unknown method");
}

GradedOperator parse_operator(const std::string& text) {
  const json doc = parse_json(text);
  try {
    const int dim = as_int(require(doc, "dim"), "dim");
    if (dim <= 0) throw ParseError("dim must be positive");
    GradedOperator op(dim, parse_omega(doc));
    for (const auto& t : require(doc, "terms")) {
      const int order = as_int(require(t, "order"), "term order");
      const int harmonic = t.contains("harmonic") ? as_int(t.at("harmonic"), "term harmonic") : 0;
      op.add_term(order, harmonic, parse_matrix(require(t, "matrix"), dim));
    }
    return op;
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema error: ") + e.what());
  }
}

std::string write_result_document(const TransformResult& r, const std::string& spec_hash) {
  std::vector<std::pair<int, int>> masked;
  for (Eigen::Index i = 0; i < r.mask.dim(); ++i) {
    for (Eigen::Index j = i + 1; j < r.mask.dim(); ++j) {
      if (r.mask(i, j)) masked.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  double defect = 0.0;
  for (const auto& [n, c] : r.corrections) defect = std::max(defect, hermiticity_defect(c));

  std::string out = "{\n";
  out += "  \"format\": \"pertkit-result/1\",\n";
  out += "  \"spec_hash\": " + quoted(spec_hash) + ",\n";
  out += "  \"method\": " + quoted(to_string(r.method)) + ",\n";
  out += "  \"dim\": " + std::to_string(r.dim()) + ",\n";
  out += "  \"max_order\": " + std::to_string(r.max_order) + ",\n";
  out += "  \"hbar\": " + number(r.hbar) + ",\n";
  out += "  \"omega_d\": " + optional_number(r.omega_d) + ",\n";
  out += "  \"block_sizes\": " + int_list(r.block_sizes) + ",\n";
  out += "  \"mask_entries\": [";
  for (std::size_t k = 0; k < masked.size(); ++k) {
    out += (k ? ", [" : "[") + std::to_string(masked[k].first) + ", " + std::to_string(masked[k].second) + "]";
  }
  out += "],\n";
  out += "  \"frame\": {\"energies\": [";
  for (Eigen::Index i = 0; i < r.frame.energies.size(); ++i) {
    out += (i ? ", " : "") + number(r.frame.energies(i));
  }
  out += "]},\n";
  out += "  \"corrections\": " + order_map_json(r.corrections, "  ") + ",\n";
  out += "  \"generator\": " + order_map_json(r.generator.S, "  ") + ",\n";
  out += "  \"diagnostics\": {\n";
  out += "    \"cache\": {\"hits\": " + std::to_string(r.cache_stats.hits) +
         ", \"misses\": " + std::to_string(r.cache_stats.misses) +
         ", \"entries\": " + std::to_string(r.cache_stats.entries) + "},\n";
  out += "    \"hermiticity_defect\": " + number(defect) + "\n";
  out += "  }\n}\n";
  return out;
}

StoredResult read_result_document(const std::string& text) {
  const json doc = parse_json(text);
  StoredResult stored;
  try {
    TransformResult& r = stored.result;
    stored.spec_hash = require(doc, "spec_hash").get<std::string>();
    r.method = method_from_string(require(doc, "method").get<std::string>());
    const int dim = as_int(require(doc, "dim"), "dim");
    r.max_order = as_int(require(doc, "max_order"), "max_order");
    r.hbar = as_double(require(doc, "hbar"), "hbar");
    r.omega_d = parse_omega(doc);
    r.block_sizes = as_int_list(require(doc, "block_sizes"), "block_sizes");
    std::vector<std::pair<int, int>> entries;
    for (const auto& e : require(doc, "mask_entries")) {
      const auto ij = as_int_list(e, "mask entry");
      if (ij.size() != 2) throw ParseError("mask entries are [i, j] pairs");
      entries.emplace_back(ij[0], ij[1]);
    }
    r.mask = Mask::from_entries(dim, entries);
    const json& energies = require(require(doc, "frame"), "energies");
    if (static_cast<int>(energies.size()) != dim) throw ParseError("frame energies do not match dim");
    r.frame.energies.resize(dim);
    for (int i = 0; i < dim; ++i) r.frame.energies(i) = as_double(energies[static_cast<std::size_t>(i)], "energy");
    r.frame = EigenFrame::from_diagonal(Matrix(r.frame.energies.cast<Complex>().asDiagonal()));

    r.corrections = split_by_order(parse_order_map(require(doc, "corrections"), dim, r.omega_d));
    for (int n = 0; n <= r.max_order; ++n) r.corrections.try_emplace(n, dim, r.omega_d);
    r.generator.S = split_by_order(parse_order_map(require(doc, "generator"), dim, r.omega_d));
    for (int n = 1; n <= r.max_order; ++n) r.generator.S.try_emplace(n, dim, r.omega_d);
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema error: ") + e.what());
  }
  return stored;
}

std::string write_operator_document(const GradedOperator& op, const std::string& spec_hash, int order) {
  std::string out = "{\n";
  out += "  \"format\": \"pertkit-operator/1\",\n";
  out += "  \"spec_hash\": " + quoted(spec_hash) + ",\n";
  out += "  \"order\": " + std::to_string(order) + ",\n";
  out += "  \"dim\": " + std::to_string(op.dim()) + ",\n";
  out += "  \"omega_d\": " + optional_number(op.omega_d()) + ",\n";
  out += "  \"operator\": " + order_map_json(split_for_output(op), "  ") + "\n}\n";
  return out;
}

std::string write_oracle_document(const BlockDiagonalization& bd, const std::vector<int>& blocks,
                                  double lambda, const std::string& spec_hash) {
  std::string out = "{\n";
  out += "  \"format\": \"pertkit-oracle/1\",\n";
  out += "  \"spec_hash\": " + quoted(spec_hash) + ",\n";
  out += "  \"block_sizes\": " + int_list(blocks) + ",\n";
  out += "  \"lambda\": " + number(lambda) + ",\n";
  out += "  \"U\": " + matrix_json(bd.U) + ",\n";
  out += "  \"U_dagger\": " + matrix_json(bd.U_dagger) + ",\n";
  out += "  \"H_block\": " + matrix_json(bd.H_block) + "\n}\n";
  return out;
}

std::string write_matrix_document(const std::string& name, const Matrix& m) {
  std::string out = "{\n";
  out += "  \"name\": " + quoted(name) + ",\n";
  out += "  \"dim\": " + std::to_string(m.rows()) + ",\n";
  out += "  \"matrix\": " + matrix_json(m) + "\n}\n";
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  return parse_key_values(read_file(path));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PreconditionError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw PreconditionError("failed writing '" + path + "'");
}

}  // namespace pertkit::io
