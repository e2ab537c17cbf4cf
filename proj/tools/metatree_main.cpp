// Command-line surface for the tree-population clustering pipeline.
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 numerical failure.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "metatree/cluster.hpp"
#include "metatree/experiment.hpp"
#include "metatree/forest.hpp"
#include "metatree/scnmf.hpp"
#include "metatree/seeding.hpp"
#include "metatree/simgen.hpp"

namespace {

using namespace metatree;

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> default_attr_names(int q) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(q));
  for (int j = 1; j <= q; ++j) names.push_back("attr" + std::to_string(j));
  return names;
}

MetaBasis factorize_checked(const ForestMatrix& forest, const FactorizationConfig& cfg) {
  MetaBasis basis = scnmf_factorize(forest, cfg);
  if (!std::isfinite(basis.objective_trace.back()))
    throw NumericalError("factorization objective is not finite");
  return basis;
}

int run_simulate(const std::string& config, std::uint64_t seed, const std::string& out) {
  const CaseRecipe recipe = parse_dataset_recipe(config);
  SupportTreeSpec support;
  const std::vector<Tree> trees = realize_dataset(recipe, seed, &support);
  const int q = trees.front().q();
  write_forest({support, default_attr_names(q), trees}, out);
  std::cout << "n=" << trees.size() << " p=" << support.p << " q=" << q << "\n";
  return 0;
}

int run_factorize(const std::string& in, const FactorizationConfig& cfg, bool normalize,
                  const std::string& out_w, const std::string& out_h, const std::string& trace) {
  const ForestFile file = read_forest(in);
  ForestMatrix forest = assemble_forest(file.trees, file.spec);
  if (normalize) normalize_attributes_max(forest);
  const MetaBasis basis = factorize_checked(forest, cfg);
  write_matrix_csv(basis.W_constrained, out_w);
  write_matrix_csv(basis.H, out_h);
  if (!trace.empty()) {
    Eigen::MatrixXd column(static_cast<Eigen::Index>(basis.objective_trace.size()), 1);
    for (std::size_t i = 0; i < basis.objective_trace.size(); ++i)
      column(static_cast<Eigen::Index>(i), 0) = basis.objective_trace[i];
    write_matrix_csv(column, trace);
  }
  std::cout << "objective=" << format_double(basis.objective_trace.back())
            << " sweeps=" << basis.objective_trace.size() - 1
            << " converged=" << (basis.converged ? 1 : 0) << "\n";
  return 0;
}

int run_cluster(const std::string& in, ClusterMethod method, Metric metric, int clusters,
                const FactorizationConfig& cfg, bool normalize, double sigma, bool sigma_set,
                int cluster_restarts, std::uint64_t seed, const std::string& out) {
  const ForestFile file = read_forest(in);
  if (file.trees.size() < 2) throw std::runtime_error("clustering needs at least two trees");
  ForestMatrix forest = assemble_forest(file.trees, file.spec);
  if (normalize) normalize_attributes_max(forest);
  FactorizationConfig fac = cfg;
  fac.seed = derive_seed(seed, 0);
  const MetaBasis basis = factorize_checked(forest, fac);
  const std::vector<Eigen::VectorXd> signatures = matrix_columns(basis.H);

  ClusterResult result;
  if (method == ClusterMethod::ncut) {
    const AffinityGraph graph =
        build_affinity(signatures, metric,
                       sigma_set ? std::optional<double>(sigma) : std::nullopt);
    result = ncut_cluster(graph, clusters, derive_seed(seed, 1));
  } else {
    result = kmeans_frechet(signatures, clusters, metric, cluster_restarts, derive_seed(seed, 1));
  }
  write_labels_csv(forest.ids, result.assignments, out);

  std::cout << "objective=" << format_double(basis.objective_trace.back())
            << (method == ClusterMethod::ncut ? " ncut=" : " inertia=")
            << format_double(result.inertia_or_ncut_value);
  if (!forest.labels.empty())
    std::cout << " accuracy=" << format_double(accuracy(result.assignments, forest.labels));
  std::cout << "\n";
  return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& truth_path) {
  const auto [pred_ids, pred_labels] = read_labels_csv(pred_path);
  const auto [truth_ids, truth_labels] = read_labels_csv(truth_path);
  if (pred_ids.empty()) throw std::runtime_error("prediction file has no rows");

  std::map<std::string, std::string> truth_by_id;
  for (std::size_t i = 0; i < truth_ids.size(); ++i)
    if (!truth_by_id.emplace(truth_ids[i], truth_labels[i]).second)
      throw std::runtime_error("duplicate id '" + truth_ids[i] + "' in truth file");

  std::vector<int> pred;
  std::vector<std::string> truth;
  std::map<std::string, int> pred_id_of;
  for (std::size_t i = 0; i < pred_ids.size(); ++i) {
    const auto it = truth_by_id.find(pred_ids[i]);
    if (it == truth_by_id.end())
      throw std::runtime_error("id '" + pred_ids[i] + "' missing from truth file");
    const auto at =
        pred_id_of.emplace(pred_labels[i], static_cast<int>(pred_id_of.size())).first;
    pred.push_back(at->second);
    truth.push_back(it->second);
  }
  std::cout << "accuracy=" << format_double(accuracy(pred, truth)) << "\n";
  return 0;
}

int run_experiment_cmd(const std::string& config, std::uint64_t seed, const std::string& outdir,
                       int jobs) {
  ExperimentConfig cfg = parse_experiment_config(config);
  cfg.master_seed = seed;
  const ExperimentResult result = run_experiment(cfg, jobs, &std::cout);
  std::filesystem::create_directories(outdir);
  emit_table(result.table, std::filesystem::path(outdir) / "accuracy.csv");
  emit_details(result.details, std::filesystem::path(outdir) / "details.csv");
  const bool all_failed = std::all_of(result.table.rows.begin(), result.table.rows.end(),
                                      [](const AccuracyRow& r) { return r.status != "ok"; });
  if (all_failed) throw std::runtime_error("every case failed; see " + outdir + "/accuracy.csv");
  std::cout << "wrote " << outdir << "/accuracy.csv (" << result.table.rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering of attributed tree populations: structure-constrained factorization "
               "of the forest matrix, cone-space metrics, spectral and K-means clustering."};
  app.require_subcommand(1);

  // -- simulate
  auto* sim = app.add_subcommand("simulate", "Generate a labeled synthetic forest file");
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "Dataset recipe file")->required();
  sim->add_option("--seed", sim_seed, "Generation seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Forest file to write")->required();

  // Shared factorization flags (factorize and cluster).
  FactorizationConfig fac_fx, fac_cl;
  const auto add_fac_flags = [](CLI::App* cmd, FactorizationConfig& cfg) {
    cmd->add_option("--rank", cfg.rank, "Number of meta-trees")->capture_default_str();
    cmd->add_option("--max-iters", cfg.max_iters, "Sweep cap per restart")->capture_default_str();
    cmd->add_option("--rel-tol", cfg.rel_tol, "Relative objective-change tolerance")->capture_default_str();
    cmd->add_option("--lambda", cfg.lambda, "Structure-correction magnitude")->capture_default_str();
    cmd->add_option("--epsilon", cfg.epsilon, "Update denominator guard")->capture_default_str();
    cmd->add_option("--pos-threshold", cfg.pos_threshold, "Entry positivity threshold")->capture_default_str();
    cmd->add_option("--restarts", cfg.restarts, "Factorization restarts")->capture_default_str();
  };

  // -- factorize
  auto* fx = app.add_subcommand("factorize", "Factorize a forest into meta-trees and signatures");
  std::string fx_in, fx_out_w, fx_out_h, fx_trace;
  std::uint64_t fx_seed = 0;
  bool fx_normalize = false;
  fx->add_option("--in", fx_in, "Forest file")->required();
  add_fac_flags(fx, fac_fx);
  fx->add_flag("--normalize", fx_normalize, "Max-normalize each attribute first");
  fx->add_option("--seed", fx_seed, "Factorization seed")->capture_default_str();
  fx->add_option("--out-w", fx_out_w, "CSV for the meta-tree matrix")->required();
  fx->add_option("--out-h", fx_out_h, "CSV for the signature matrix")->required();
  fx->add_option("--trace", fx_trace, "Optional CSV for the objective trace");

  // -- cluster
  auto* cl = app.add_subcommand("cluster", "Cluster the trees of a forest file");
  std::string cl_in, cl_out, cl_method = "ncut", cl_metric = "l1";
  int cl_clusters = 2, cl_restarts = 5;
  double cl_sigma = 0.0;
  bool cl_normalize = false;
  std::uint64_t cl_seed = 0;
  cl->add_option("--in", cl_in, "Forest file")->required();
  cl->add_option("--method", cl_method, "Clustering method")->capture_default_str()
      ->check(CLI::IsMember({"ncut", "kmeans"}));
  cl->add_option("--metric", cl_metric, "Signature-space metric")->capture_default_str()
      ->check(CLI::IsMember({"l1", "l2path", "euclid"}));
  cl->add_option("--clusters", cl_clusters, "Number of clusters")->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  add_fac_flags(cl, fac_cl);
  cl->add_flag("--normalize", cl_normalize, "Max-normalize each attribute first");
  auto* sigma_opt =
      cl->add_option("--sigma", cl_sigma, "Fixed affinity bandwidth (default: median distance)");
  cl->add_option("--cluster-restarts", cl_restarts, "K-means restarts")->capture_default_str();
  cl->add_option("--seed", cl_seed, "Clustering seed")->capture_default_str();
  cl->add_option("--out", cl_out, "CSV for the cluster assignments")->required();

  // -- evaluate
  auto* ev = app.add_subcommand("evaluate", "Score predicted clusters against ground truth");
  std::string ev_pred, ev_truth;
  ev->add_option("--pred", ev_pred, "Predicted labels CSV")->required();
  ev->add_option("--truth", ev_truth, "Ground-truth labels CSV")->required();

  // -- experiment
  auto* ex = app.add_subcommand("experiment", "Run a multi-case experiment config");
  std::string ex_config, ex_outdir;
  std::uint64_t ex_seed = 0;
  int ex_jobs = 1;
  ex->add_option("--config", ex_config, "Experiment config file")->required();
  ex->add_option("--seed", ex_seed, "Master seed")->capture_default_str();
  ex->add_option("--outdir", ex_outdir, "Directory for result CSVs")->required();
  ex->add_option("--jobs", ex_jobs, "Parallel workers per case")->capture_default_str()
      ->check(CLI::Range(1, 4096));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(sim)) return run_simulate(sim_config, sim_seed, sim_out);
    if (app.got_subcommand(fx)) {
      fac_fx.seed = fx_seed;
      return run_factorize(fx_in, fac_fx, fx_normalize, fx_out_w, fx_out_h, fx_trace);
    }
    if (app.got_subcommand(cl))
      return run_cluster(cl_in, method_from_string(cl_method), metric_from_string(cl_metric),
                         cl_clusters, fac_cl, cl_normalize, cl_sigma, sigma_opt->count() > 0,
                         cl_restarts, cl_seed, cl_out);
    if (app.got_subcommand(ev)) return run_evaluate(ev_pred, ev_truth);
    if (app.got_subcommand(ex)) return run_experiment_cmd(ex_config, ex_seed, ex_outdir, ex_jobs);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
