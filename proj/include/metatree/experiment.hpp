#ifndef METATREE_EXPERIMENT_HPP
#define METATREE_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "metatree/cluster.hpp"
#include "metatree/scnmf.hpp"
#include "metatree/simgen.hpp"

namespace metatree {

/// One experiment case: a two-set generation recipe plus optional noise
/// applied to every generated tree.
struct CaseRecipe {
  std::string id;
  TreeGenSpec set_a;
  TreeGenSpec set_b;
  std::optional<NoiseSpec> noise;
};

struct ExperimentConfig {
  std::vector<CaseRecipe> cases;
  int datasets_per_case = 20;
  FactorizationConfig factorization;
  std::vector<ClusterMethod> methods = {ClusterMethod::ncut, ClusterMethod::kmeans};
  Metric metric = Metric::l1;
  bool normalize = false;    ///< per-attribute max normalization before factorizing
  int cluster_restarts = 5;  ///< K-means restarts per dataset
  std::uint64_t master_seed = 0;
};

void validate_experiment_config(const ExperimentConfig& cfg);

/// Generation half of the per-dataset pipeline: clean labeled trees from
/// the recipe, the population-derived support frame (deep enough for the
/// deepest realized tree, no deeper), then any configured noise. The
/// frame is returned through support_out when given.
std::vector<Tree> realize_dataset(const CaseRecipe& recipe, std::uint64_t dataset_seed,
                                  SupportTreeSpec* support_out = nullptr);

/// Generate-factorize-cluster-score for every dataset of one case at
/// k_c = 2. Returns accuracies[method_index][dataset_index], aligned with
/// cfg.methods. Deterministic in (recipe, cfg, case_seed) regardless of
/// jobs; dataset failures are rethrown with the dataset index attached.
std::vector<std::vector<double>> run_case(const CaseRecipe& recipe, const ExperimentConfig& cfg,
                                          std::uint64_t case_seed, int jobs = 1);

/// Arithmetic mean and population standard deviation (divisor n).
std::pair<double, double> aggregate(const std::vector<double>& values);

struct AccuracyRow {
  std::string case_id;
  std::string method;
  double mean = 0.0;
  double sd = 0.0;
  int datasets = 0;
  std::string status;  ///< "ok", or "failed: <reason>"
};

struct AccuracyTable {
  std::vector<AccuracyRow> rows;
};

struct DetailRow {
  std::string case_id;
  std::string method;
  int dataset = 0;
  double accuracy = 0.0;
};

struct ExperimentResult {
  AccuracyTable table;
  std::vector<DetailRow> details;
};

/// Runs every case (case seeds derived from master_seed by case index).
/// A failing case becomes a "failed:" table row; other cases still run.
/// Progress lines go to `progress` when given.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                                std::ostream* progress = nullptr);

/// CSV writers with fixed headers and config-order rows; byte-identical
/// on re-emission.
void emit_table(const AccuracyTable& table, const std::filesystem::path& path);
void emit_details(const std::vector<DetailRow>& details, const std::filesystem::path& path);

/// Key-value experiment config file; see README for the schema. The
/// master seed is supplied by the caller, never by the file.
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);

/// Single-recipe config (the same keys as a [case] body, unsectioned),
/// used by the simulate command.
CaseRecipe parse_dataset_recipe(const std::filesystem::path& path);

}  // namespace metatree

#endif
