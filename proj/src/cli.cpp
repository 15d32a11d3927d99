#include "pertkit/cli.hpp"

#include "pertkit/errors.hpp"
#include "pertkit/io.hpp"
#include "pertkit/models.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

namespace pertkit::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Options {
  std::string input, result, op, spec, out;
  std::optional<int> max_order;
  std::optional<std::string> method;
  std::optional<double> tol_degeneracy, tol_resonance;
  std::optional<std::uint64_t> seed;
  std::optional<int> instances;
  std::optional<double> lambda;
  std::string blocks;
  int order = 0;
  bool verbose = false;
};

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty() || o.out == "-") {
    out << text;
  } else {
    io::write_file(o.out, text);
  }
}

void timing(const Options& o, std::ostream& err, const char* what, Clock::time_point start) {
  if (!o.verbose) return;
  err << what << ": " << std::chrono::duration<double>(Clock::now() - start).count() << " s\n";
}

int experiment_threads() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("PERTKIT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw ParseError("PERTKIT_THREADS must be a positive integer");
    threads = static_cast<int>(std::min<long>(cap, threads));
  }
  return threads;
}

std::vector<int> parse_block_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("--blocks expects comma-separated integers, got '" + s + "'");
    }
  }
  return out;
}

int cmd_transform(const Options& o, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  io::ProblemSpec spec = io::parse_problem(io::read_file(o.input));
  if (o.max_order) spec.max_order = *o.max_order;
  if (o.method) spec.method = method_from_string(*o.method);
  if (o.tol_degeneracy) spec.tol.degeneracy = *o.tol_degeneracy;
  if (o.tol_resonance) spec.tol.resonance = *o.tol_resonance;
  const TransformResult r = io::solve_problem(spec);
  emit(o, out, io::write_result_document(r, spec.hash));
  timing(o, err, "transform", start);
  return ok;
}

int cmd_rotate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const std::string hash = io::canonical_hash(io::read_file(o.input));
  const io::StoredResult stored = io::read_result_document(io::read_file(o.result));
  if (stored.spec_hash != hash) {
    throw PreconditionError("result document was produced from a different problem (hash " +
                            stored.spec_hash + ", problem " + hash + ")");
  }
  const GradedOperator op = io::parse_operator(io::read_file(o.op));
  const GradedOperator rotated = rotate_operator(op, stored.result, o.order);
  emit(o, out, io::write_operator_document(rotated, hash, o.order));
  timing(o, err, "rotate", start);
  return ok;
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const io::ProblemSpec spec = io::parse_problem(io::read_file(o.input));
  std::vector<int> blocks = o.blocks.empty() ? spec.block_sizes : parse_block_list(o.blocks);
  if (blocks.empty()) throw PreconditionError("oracle needs block sizes (--blocks or block_sizes)");
  const double lambda = o.lambda.value_or(1.0);
  const GradedOperator h = spec.h + spec.v;
  if (!h.is_static()) throw PreconditionError("the oracle handles static Hamiltonians only");
  const BlockDiagonalization bd =
      exact_block_diagonalize(evaluate_at(h, lambda).matrix, BlockStructure(blocks));
  emit(o, out, io::write_oracle_document(bd, blocks, lambda, spec.hash));
  timing(o, err, "oracle", start);
  return ok;
}

template <typename T>
void read_opt(const json& doc, const char* key, T& target) {
  if (doc.contains(key)) target = doc.at(key).get<T>();
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  json doc = json::object();
  if (!o.spec.empty()) {
    try {
      doc = json::parse(io::read_file(o.spec));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed experiment spec: ") + e.what());
    }
  }
  std::string kind = "fig3";
  try {
    read_opt(doc, "kind", kind);
    if (kind == "fig3") {
      models::EnsembleSpec es;
      read_opt(doc, "count", es.count);
      read_opt(doc, "dim_min", es.dim_min);
      read_opt(doc, "dim_max", es.dim_max);
      read_opt(doc, "blocks_min", es.blocks_min);
      read_opt(doc, "blocks_max", es.blocks_max);
      read_opt(doc, "max_order", es.max_order);
      read_opt(doc, "seed", es.seed);
      read_opt(doc, "lambda", es.lambda);
      read_opt(doc, "spacing_lo", es.bd.spacing_lo);
      read_opt(doc, "spacing_hi", es.bd.spacing_hi);
      read_opt(doc, "gap_lo", es.bd.gap_lo);
      read_opt(doc, "gap_hi", es.bd.gap_hi);
      read_opt(doc, "in_block_coupling", es.bd.in_block_coupling);
      read_opt(doc, "cross_block_coupling", es.bd.cross_block_coupling);
      if (o.seed) es.seed = *o.seed;
      if (o.instances) es.count = *o.instances;
      if (o.max_order) es.max_order = *o.max_order;

      const models::Fig3Result res = models::run_fig3_experiment(es, experiment_threads());
      std::ostringstream csv;
      models::write_fig3_csv(csv, res);
      emit(o, out, csv.str());
      for (const auto& [inst, why] : res.skipped) err << "skipped instance " << inst << ": " << why << "\n";
      if (o.verbose) {
        for (const auto& q : res.summary) {
          err << "n=" << q.n << " median=" << q.median << " q25=" << q.q25 << " q75=" << q.q75 << "\n";
        }
      }
    } else if (kind == "ace_demo") {
      models::AceSpec as;
      std::uint64_t seed = 3;
      int max_order = 3;
      read_opt(doc, "dim", as.dim);
      read_opt(doc, "coupling", as.coupling);
      read_opt(doc, "spacing_lo", as.spacing_lo);
      read_opt(doc, "spacing_hi", as.spacing_hi);
      read_opt(doc, "seed", seed);
      read_opt(doc, "max_order", max_order);
      if (o.seed) seed = *o.seed;
      if (o.max_order) max_order = *o.max_order;
      std::optional<Mask> mask;
      if (doc.contains("mask_entries")) {
        std::vector<std::pair<int, int>> entries;
        for (const auto& e : doc.at("mask_entries")) entries.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        mask = Mask::from_entries(as.dim, entries);
      }
      if (o.out.empty() || o.out == "-") throw PreconditionError("ace_demo needs --out as a file prefix");
      const models::AceDemo demo = models::run_ace_demo(as, seed, max_order, mask ? &*mask : nullptr);
      io::write_file(o.out + "_before.json", io::write_matrix_document("before", demo.before));
      io::write_file(o.out + "_mask.json", io::write_matrix_document("mask", demo.mask));
      io::write_file(o.out + "_after.json", io::write_matrix_document("after", demo.after));
    } else {
      throw ParseError("unknown experiment kind '" + kind + "' (expected fig3 or ace_demo)");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("experiment spec: ") + e.what());
  }
  timing(o, err, "experiment", start);
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pertkit: perturbative effective Hamiltonians"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", o.out, "output path (default stdout)");
    sub->add_flag("--verbose,-v", o.verbose, "timings and summaries on stderr");
  };

  auto* transform = app.add_subcommand("transform", "derive corrections for a problem file");
  transform->add_option("input", o.input, "problem JSON")->required();
  transform->add_option("--max-order", o.max_order, "override max_order");
  transform->add_option("--method", o.method, "swt | fd | ace | la");
  transform->add_option("--tol-degeneracy", o.tol_degeneracy, "relative degeneracy tolerance");
  transform->add_option("--tol-resonance", o.tol_resonance, "relative resonance tolerance");
  common(transform);

  auto* rotate = app.add_subcommand("rotate", "rotate an operator into a solved frame");
  rotate->add_option("problem", o.input, "problem JSON the result was produced from")->required();
  rotate->add_option("result", o.result, "result JSON")->required();
  rotate->add_option("operator", o.op, "operator JSON")->required();
  rotate->add_option("--order", o.order, "total order of generator terms")->required();
  common(rotate);

  auto* oracle = app.add_subcommand("oracle", "exact least-action block diagonalization");
  oracle->add_option("problem", o.input, "problem JSON")->required();
  oracle->add_option("--blocks", o.blocks, "comma-separated block sizes");
  oracle->add_option("--lambda", o.lambda, "perturbation parameter (default 1)");
  common(oracle);

  auto* experiment = app.add_subcommand("experiment", "ensemble convergence run or ACE demonstration");
  experiment->add_option("spec", o.spec, "experiment JSON (default: fig3 ensemble)");
  experiment->add_option("--seed", o.seed, "base seed");
  experiment->add_option("--instances", o.instances, "ensemble size");
  experiment->add_option("--max-order", o.max_order, "highest order");
  common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  }

  try {
    if (*transform) return cmd_transform(o, out, err);
    if (*rotate) return cmd_rotate(o, out, err);
    if (*oracle) return cmd_oracle(o, out, err);
    if (*experiment) return cmd_experiment(o, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return parse_error;
  } catch (const DegenerateSpectrum& e) {
    err << "degenerate spectrum: " << e.what() << "\n";
    return resonance;
  } catch (const ResonantDenominator& e) {
    err << "resonance: " << e.what() << "\n";
    return resonance;
  } catch (const IllConditionedBlocks& e) {
    err << "ill-conditioned: " << e.what() << "\n";
    return ill_conditioned;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return precondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
  return failure;
}

}  // namespace pertkit::cli
