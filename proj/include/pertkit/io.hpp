#pragma once

#include "pertkit/oracle.hpp"
#include "pertkit/transform.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pertkit::io {

/// A transformation problem as read from a JSON problem file.
struct ProblemSpec {
  Eigen::Index dim = 0;
  double hbar = 1.0;
  std::optional<double> omega_d;
  Method method = Method::swt;
  int max_order = 2;
  Tolerances tol;
  GradedOperator h;  // every term not tagged "V"
  GradedOperator v;  // terms tagged "V" (swt only)
  std::vector<int> block_sizes;
  std::optional<Mask> mask;
  std::string hash;  // FNV-1a of the canonical JSON dump, hex
};

/// Throws ParseError on malformed JSON or schema violations.
ProblemSpec parse_problem(const std::string& text);

/// 64-bit FNV-1a of the canonical (sorted-key, compact) dump of a JSON text, as 16 hex digits.
std::string canonical_hash(const std::string& json_text);

/// Runs the routine the problem names.
TransformResult solve_problem(const ProblemSpec& spec);

/// Standalone operator file: {"dim", "omega_d"?, "terms": [...]}.
GradedOperator parse_operator(const std::string& text);

std::string write_result_document(const TransformResult& result, const std::string& spec_hash);

struct StoredResult {
  TransformResult result;
  std::string spec_hash;
};
StoredResult read_result_document(const std::string& text);

std::string write_operator_document(const GradedOperator& op, const std::string& spec_hash, int order);
std::string write_oracle_document(const BlockDiagonalization& bd, const std::vector<int>& blocks,
                                  double lambda, const std::string& spec_hash);
/// Single real-valued matrix document (ACE demonstration panels).
std::string write_matrix_document(const std::string& name, const Matrix& m);

/// key = value lines; '#' starts a comment. Throws ParseError on malformed lines.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace pertkit::io
