#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "metatree/cluster.hpp"
#include "metatree/experiment.hpp"
#include "metatree/forest.hpp"
#include "metatree/metaspace.hpp"
#include "metatree/scnmf.hpp"
#include "metatree/seeding.hpp"
#include "metatree/simgen.hpp"
#include "metatree/tree.hpp"

namespace py = pybind11;
using namespace metatree;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Clustering of attributed tree populations: structure-constrained factorization "
            "of the forest matrix plus cone-space metrics and clustering.";

  // ---- support frame and trees ----
  py::class_<SupportTreeSpec>(m, "SupportTreeSpec")
      .def_readonly("order", &SupportTreeSpec::order)
      .def_readonly("depth", &SupportTreeSpec::depth)
      .def_readonly("trunk", &SupportTreeSpec::trunk)
      .def_readonly("p", &SupportTreeSpec::p)
      .def("child_index", &SupportTreeSpec::child_index, py::arg("i"), py::arg("j"))
      .def("parent_index", &SupportTreeSpec::parent_index, py::arg("i"))
      .def("is_root_branch", &SupportTreeSpec::is_root_branch, py::arg("i"))
      .def("level", &SupportTreeSpec::level, py::arg("i"))
      .def("__eq__", [](const SupportTreeSpec& a, const SupportTreeSpec& b) { return a == b; })
      .def("__repr__", [](const SupportTreeSpec& s) {
        return "SupportTreeSpec(order=" + std::to_string(s.order) +
               ", depth=" + std::to_string(s.depth) + ", trunk=" + (s.trunk ? "True" : "False") +
               ", p=" + std::to_string(s.p) + ")";
      });
  m.def("build_support_spec", &build_support_spec, py::arg("order"), py::arg("depth"),
        py::arg("trunk") = true);

  py::class_<Tree>(m, "Tree")
      .def(py::init<>())
      .def(py::init([](std::string id, std::string label,
                       std::map<std::int64_t, std::vector<double>> branches) {
             Tree t;
             t.id = std::move(id);
             t.label = std::move(label);
             t.branches = std::move(branches);
             return t;
           }),
           py::arg("id"), py::arg("label") = "", py::arg("branches") =
               std::map<std::int64_t, std::vector<double>>{})
      .def_readwrite("id", &Tree::id)
      .def_readwrite("label", &Tree::label)
      .def_readwrite("branches", &Tree::branches)
      .def_property_readonly("q", &Tree::q)
      .def("__eq__", [](const Tree& a, const Tree& b) { return a == b; })
      .def("__repr__", [](const Tree& t) {
        return "Tree(id='" + t.id + "', label='" + t.label + "', branches=" +
               std::to_string(t.branches.size()) + ")";
      });

  m.def("validate_tree", &validate_tree, py::arg("tree"), py::arg("spec"));
  m.def("to_ta_matrix", &to_ta_matrix, py::arg("tree"), py::arg("spec"));
  m.def("positive_uniformity_ok", &positive_uniformity_ok, py::arg("ta"),
        py::arg("threshold") = 0.0);
  m.def("vectorize", &vectorize, py::arg("ta"));
  m.def("unvectorize", &unvectorize, py::arg("v"), py::arg("p"), py::arg("q"));

  // ---- forest assembly and I/O ----
  py::class_<ForestMatrix>(m, "ForestMatrix")
      .def_readonly("spec", &ForestMatrix::spec)
      .def_readonly("q", &ForestMatrix::q)
      .def_readonly("data", &ForestMatrix::data)
      .def_readonly("ids", &ForestMatrix::ids)
      .def_readonly("labels", &ForestMatrix::labels)
      .def_property_readonly("n", &ForestMatrix::n);
  m.def("assemble_forest", &assemble_forest, py::arg("trees"), py::arg("spec"));
  m.def("normalize_attributes_max", &normalize_attributes_max, py::arg("forest"));

  py::class_<ForestFile>(m, "ForestFile")
      .def(py::init([](SupportTreeSpec spec, std::vector<std::string> attr_names,
                       std::vector<Tree> trees) {
             return ForestFile{spec, std::move(attr_names), std::move(trees)};
           }),
           py::arg("spec"), py::arg("attr_names"), py::arg("trees"))
      .def_readwrite("spec", &ForestFile::spec)
      .def_readwrite("attr_names", &ForestFile::attr_names)
      .def_readwrite("trees", &ForestFile::trees);
  m.def("write_forest", &write_forest, py::arg("forest"), py::arg("path"));
  m.def("read_forest", &read_forest, py::arg("path"));
  m.def("write_matrix_csv", &write_matrix_csv, py::arg("matrix"), py::arg("path"));
  m.def("read_matrix_csv", &read_matrix_csv, py::arg("path"));

  // ---- factorization ----
  py::class_<FactorizationConfig>(m, "FactorizationConfig")
      .def(py::init<>())
      .def_readwrite("rank", &FactorizationConfig::rank)
      .def_readwrite("max_iters", &FactorizationConfig::max_iters)
      .def_readwrite("rel_tol", &FactorizationConfig::rel_tol)
      .def_readwrite("lambda_", &FactorizationConfig::lambda)
      .def_readwrite("epsilon", &FactorizationConfig::epsilon)
      .def_readwrite("pos_threshold", &FactorizationConfig::pos_threshold)
      .def_readwrite("restarts", &FactorizationConfig::restarts)
      .def_readwrite("seed", &FactorizationConfig::seed);

  py::class_<MetaBasis>(m, "MetaBasis")
      .def_readonly("W_constrained", &MetaBasis::W_constrained)
      .def_readonly("H", &MetaBasis::H)
      .def_readonly("objective_trace", &MetaBasis::objective_trace)
      .def_readonly("converged", &MetaBasis::converged);

  m.def("tau_column", &tau_column, py::arg("column"), py::arg("p"), py::arg("q"),
        py::arg("lambda_"), py::arg("pos_threshold"));
  m.def("apply_tau", &apply_tau, py::arg("W"), py::arg("p"), py::arg("q"), py::arg("lambda_"),
        py::arg("pos_threshold"));
  m.def("objective", &objective, py::arg("F"), py::arg("Wc"), py::arg("H"));
  m.def("scnmf_run", &scnmf_run, py::arg("F"), py::arg("p"), py::arg("q"), py::arg("cfg"),
        py::arg("W0"), py::arg("H0"));
  m.def("scnmf_factorize",
        py::overload_cast<const Eigen::MatrixXd&, Eigen::Index, Eigen::Index,
                          const FactorizationConfig&>(&scnmf_factorize),
        py::arg("F"), py::arg("p"), py::arg("q"), py::arg("cfg"));
  m.def("scnmf_factorize",
        py::overload_cast<const ForestMatrix&, const FactorizationConfig&>(&scnmf_factorize),
        py::arg("forest"), py::arg("cfg"));

  // ---- cone-space geometry ----
  py::class_<ConePath>(m, "ConePath")
      .def_readonly("waypoints", &ConePath::waypoints)
      .def_readonly("leg_lengths_l2", &ConePath::leg_lengths_l2)
      .def_readonly("leg_lengths_l1", &ConePath::leg_lengths_l1);
  m.def("dist_l1", &dist_l1, py::arg("h1"), py::arg("h2"));
  m.def("dist_euclid", &dist_euclid, py::arg("h1"), py::arg("h2"));
  m.def("cone_path", &cone_path, py::arg("h1"), py::arg("h2"));
  m.def("dist_l2_path",
        py::overload_cast<const Eigen::VectorXd&, const Eigen::VectorXd&>(&dist_l2_path),
        py::arg("h1"), py::arg("h2"));
  m.def("cone_ratio", &cone_ratio, py::arg("a1"), py::arg("b1"), py::arg("a2"), py::arg("b2"));
  m.def("frechet_mean", &frechet_mean, py::arg("points"));

  // ---- clustering ----
  py::enum_<Metric>(m, "Metric")
      .value("l1", Metric::l1)
      .value("l2_path", Metric::l2_path)
      .value("euclid", Metric::euclid);
  py::enum_<ClusterMethod>(m, "ClusterMethod")
      .value("ncut", ClusterMethod::ncut)
      .value("kmeans", ClusterMethod::kmeans);
  m.def("metric_from_string", &metric_from_string, py::arg("name"));
  m.def("method_from_string", &method_from_string, py::arg("name"));
  m.def("signature_distance", &signature_distance, py::arg("metric"), py::arg("h1"),
        py::arg("h2"));
  m.def("matrix_columns", &matrix_columns, py::arg("matrix"));

  py::class_<AffinityGraph>(m, "AffinityGraph")
      .def_readonly("weights", &AffinityGraph::weights)
      .def_readonly("sigma", &AffinityGraph::sigma)
      .def_readonly("sigma_fallback", &AffinityGraph::sigma_fallback)
      .def_readonly("metric", &AffinityGraph::metric);
  m.def("build_affinity", &build_affinity, py::arg("points"), py::arg("metric"),
        py::arg("fixed_sigma") = std::nullopt);

  py::class_<ClusterResult>(m, "ClusterResult")
      .def_readonly("assignments", &ClusterResult::assignments)
      .def_readonly("method", &ClusterResult::method)
      .def_readonly("metric", &ClusterResult::metric)
      .def_readonly("inertia_or_ncut_value", &ClusterResult::inertia_or_ncut_value)
      .def_readonly("seed", &ClusterResult::seed)
      .def_readonly("inertia_trace", &ClusterResult::inertia_trace);
  m.def("ncut_value", &ncut_value, py::arg("weights"), py::arg("assignments"), py::arg("k_c"));
  m.def("ncut_cluster", &ncut_cluster, py::arg("graph"), py::arg("k_c"), py::arg("seed") = 0);
  m.def("kmeans_frechet", &kmeans_frechet, py::arg("points"), py::arg("k_c"),
        py::arg("metric") = Metric::l1, py::arg("restarts") = 5, py::arg("seed") = 0);
  m.def("accuracy",
        py::overload_cast<const std::vector<int>&, const std::vector<std::string>&>(&accuracy),
        py::arg("pred"), py::arg("truth"));
  m.def("accuracy", py::overload_cast<const std::vector<int>&, const std::vector<int>&>(&accuracy),
        py::arg("pred"), py::arg("truth"));

  // ---- simulation ----
  py::class_<DepthSpec> depth_spec(m, "DepthSpec");
  py::enum_<DepthSpec::Kind>(depth_spec, "Kind")
      .value("fixed", DepthSpec::Kind::fixed)
      .value("binomial", DepthSpec::Kind::binomial);
  depth_spec.def(py::init<>())
      .def_static("fixed", &DepthSpec::fixed, py::arg("depth"))
      .def_static("binomial", &DepthSpec::binomial, py::arg("trials"), py::arg("prob"))
      .def_readwrite("kind", &DepthSpec::kind)
      .def_readwrite("value", &DepthSpec::value)
      .def_readwrite("prob", &DepthSpec::prob)
      .def_property_readonly("max_depth", &DepthSpec::max_depth);

  py::enum_<PatternMode>(m, "PatternMode")
      .value("same", PatternMode::same)
      .value("different", PatternMode::different)
      .value("random", PatternMode::random);

  py::class_<TreeGenSpec>(m, "TreeGenSpec")
      .def(py::init<>())
      .def_readwrite("order", &TreeGenSpec::order)
      .def_readwrite("depth", &TreeGenSpec::depth)
      .def_readwrite("pattern_mode", &TreeGenSpec::pattern_mode)
      .def_readwrite("attr_ranges", &TreeGenSpec::attr_ranges)
      .def_readwrite("count", &TreeGenSpec::count);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init<>())
      .def_readwrite("attr_edges", &NoiseSpec::attr_edges)
      .def_readwrite("attr_sd_frac", &NoiseSpec::attr_sd_frac)
      .def_readwrite("topo_candidates", &NoiseSpec::topo_candidates)
      .def_readwrite("topo_prob", &NoiseSpec::topo_prob)
      .def_readwrite("topo_attr_range", &NoiseSpec::topo_attr_range);

  m.def("support_for", &support_for, py::arg("set_a"), py::arg("set_b"));
  m.def("generate_dataset", &generate_dataset, py::arg("set_a"), py::arg("set_b"),
        py::arg("seed") = 0);
  m.def("add_attribute_noise", &add_attribute_noise, py::arg("tree"), py::arg("spec"),
        py::arg("seed") = 0);
  m.def("add_topology_noise", &add_topology_noise, py::arg("tree"), py::arg("spec"),
        py::arg("support"), py::arg("seed") = 0);

  // ---- experiments ----
  py::class_<CaseRecipe>(m, "CaseRecipe")
      .def(py::init<>())
      .def_readwrite("id", &CaseRecipe::id)
      .def_readwrite("set_a", &CaseRecipe::set_a)
      .def_readwrite("set_b", &CaseRecipe::set_b)
      .def_readwrite("noise", &CaseRecipe::noise);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("cases", &ExperimentConfig::cases)
      .def_readwrite("datasets_per_case", &ExperimentConfig::datasets_per_case)
      .def_readwrite("factorization", &ExperimentConfig::factorization)
      .def_readwrite("methods", &ExperimentConfig::methods)
      .def_readwrite("metric", &ExperimentConfig::metric)
      .def_readwrite("normalize", &ExperimentConfig::normalize)
      .def_readwrite("cluster_restarts", &ExperimentConfig::cluster_restarts)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed);

  py::class_<AccuracyRow>(m, "AccuracyRow")
      .def_readonly("case_id", &AccuracyRow::case_id)
      .def_readonly("method", &AccuracyRow::method)
      .def_readonly("mean", &AccuracyRow::mean)
      .def_readonly("sd", &AccuracyRow::sd)
      .def_readonly("datasets", &AccuracyRow::datasets)
      .def_readonly("status", &AccuracyRow::status);
  py::class_<AccuracyTable>(m, "AccuracyTable").def_readonly("rows", &AccuracyTable::rows);
  py::class_<DetailRow>(m, "DetailRow")
      .def_readonly("case_id", &DetailRow::case_id)
      .def_readonly("method", &DetailRow::method)
      .def_readonly("dataset", &DetailRow::dataset)
      .def_readonly("accuracy", &DetailRow::accuracy);
  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("table", &ExperimentResult::table)
      .def_readonly("details", &ExperimentResult::details);

  m.def("realize_dataset",
        [](const CaseRecipe& recipe, std::uint64_t seed) {
          SupportTreeSpec support;
          std::vector<Tree> trees = realize_dataset(recipe, seed, &support);
          return py::make_tuple(std::move(trees), support);
        },
        py::arg("recipe"), py::arg("seed") = 0);
  m.def("run_case", &run_case, py::arg("recipe"), py::arg("cfg"), py::arg("case_seed") = 0,
        py::arg("jobs") = 1);
  m.def("aggregate", &aggregate, py::arg("values"));
  m.def(
      "run_experiment",
      [](const ExperimentConfig& cfg, int jobs) { return run_experiment(cfg, jobs, nullptr); },
      py::arg("cfg"), py::arg("jobs") = 1);
  m.def("emit_table", &emit_table, py::arg("table"), py::arg("path"));
  m.def("emit_details", &emit_details, py::arg("details"), py::arg("path"));
  m.def("parse_experiment_config", &parse_experiment_config, py::arg("path"));
  m.def("parse_dataset_recipe", &parse_dataset_recipe, py::arg("path"));

  m.def("derive_seed", &derive_seed, py::arg("parent"), py::arg("index"));
}
