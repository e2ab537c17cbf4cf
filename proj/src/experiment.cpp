#include "metatree/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include "metatree/forest.hpp"
#include "metatree/seeding.hpp"

namespace metatree {
namespace {

int parse_int(const std::string& text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("not an integer: '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "0" || text == "false") return false;
  if (text == "1" || text == "true") return true;
  throw std::invalid_argument("not a boolean: '" + text + "' (expected 0/1/true/false)");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// ---- per-dataset pipeline -------------------------------------------------

std::vector<double> run_one_dataset(const CaseRecipe& recipe, const ExperimentConfig& cfg,
                                    std::uint64_t ds_seed) {
  SupportTreeSpec support;
  const std::vector<Tree> trees = realize_dataset(recipe, ds_seed, &support);
  ForestMatrix forest = assemble_forest(trees, support);
  if (cfg.normalize) normalize_attributes_max(forest);

  FactorizationConfig fac = cfg.factorization;
  fac.seed = derive_seed(ds_seed, 2);
  const MetaBasis basis = scnmf_factorize(forest, fac);
  const std::vector<Eigen::VectorXd> signatures = matrix_columns(basis.H);

  std::vector<double> per_method;
  per_method.reserve(cfg.methods.size());
  for (ClusterMethod method : cfg.methods) {
    ClusterResult res;
    if (method == ClusterMethod::ncut) {
      res = ncut_cluster(build_affinity(signatures, cfg.metric), 2, derive_seed(ds_seed, 3));
    } else {
      res = kmeans_frechet(signatures, 2, cfg.metric, cfg.cluster_restarts,
                           derive_seed(ds_seed, 4));
    }
    per_method.push_back(accuracy(res.assignments, forest.labels));
  }
  return per_method;
}

std::string csv_safe(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

}  // namespace

std::vector<Tree> realize_dataset(const CaseRecipe& recipe, std::uint64_t dataset_seed,
                                  SupportTreeSpec* support_out) {
  std::vector<Tree> trees =
      generate_dataset(recipe.set_a, recipe.set_b, derive_seed(dataset_seed, 0));

  // Population-derived frame: deep enough for the deepest realized tree,
  // no deeper. Branch indices do not depend on frame depth, so levels can
  // be read off the recipe-wide frame.
  const SupportTreeSpec frame = support_for(recipe.set_a, recipe.set_b);
  int max_level = 1;
  for (const Tree& tree : trees)
    for (const auto& [idx, attrs] : tree.branches)
      max_level = std::max(max_level, frame.level(idx));
  const SupportTreeSpec support = build_support_spec(frame.order, max_level, frame.trunk);

  if (recipe.noise) {
    const std::uint64_t noise_seed = derive_seed(dataset_seed, 1);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      if (recipe.noise->attr_edges > 0)
        trees[i] = add_attribute_noise(trees[i], *recipe.noise, derive_seed(noise_seed, 2 * i));
      if (recipe.noise->topo_candidates > 0)
        trees[i] = add_topology_noise(trees[i], *recipe.noise, support,
                                      derive_seed(noise_seed, 2 * i + 1));
    }
  }
  if (support_out) *support_out = support;
  return trees;
}

void validate_experiment_config(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw std::invalid_argument("at least one cluster method required");
  if (cfg.datasets_per_case < 1) throw std::invalid_argument("datasets_per_case must be >= 1");
  if (cfg.cluster_restarts < 1) throw std::invalid_argument("cluster_restarts must be >= 1");
  std::set<std::string> ids;
  for (const CaseRecipe& recipe : cfg.cases) {
    if (recipe.id.empty()) throw std::invalid_argument("case id must be nonempty");
    if (!ids.insert(recipe.id).second)
      throw std::invalid_argument("duplicate case id '" + recipe.id + "'");
    validate_gen_spec(recipe.set_a);
    validate_gen_spec(recipe.set_b);
    if (recipe.set_a.pattern_mode != recipe.set_b.pattern_mode)
      throw std::invalid_argument("case '" + recipe.id + "': sets disagree on pattern mode");
    if (recipe.set_a.attr_ranges.size() != recipe.set_b.attr_ranges.size())
      throw std::invalid_argument("case '" + recipe.id + "': sets disagree on attribute count");
    if (recipe.noise) validate_noise_spec(*recipe.noise);
  }
}

std::vector<std::vector<double>> run_case(const CaseRecipe& recipe, const ExperimentConfig& cfg,
                                          std::uint64_t case_seed, int jobs) {
  const int datasets = cfg.datasets_per_case;
  std::vector<std::vector<double>> results(cfg.methods.size(),
                                           std::vector<double>(static_cast<std::size_t>(datasets)));
  std::vector<std::string> failures(static_cast<std::size_t>(datasets));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < datasets;) {
      try {
        const std::vector<double> acc =
            run_one_dataset(recipe, cfg, derive_seed(case_seed, static_cast<std::uint64_t>(i)));
        for (std::size_t m = 0; m < results.size(); ++m)
          results[m][static_cast<std::size_t>(i)] = acc[m];
      } catch (const std::exception& e) {
        failures[static_cast<std::size_t>(i)] = e.what()[0] ? e.what() : "unknown error";
      }
    }
  };

  const int workers = std::clamp(jobs, 1, datasets);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (int i = 0; i < datasets; ++i)
    if (!failures[static_cast<std::size_t>(i)].empty())
      throw std::runtime_error("dataset " + std::to_string(i) + ": " +
                               failures[static_cast<std::size_t>(i)]);
  return results;
}

std::pair<double, double> aggregate(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("nothing to aggregate");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs, std::ostream* progress) {
  validate_experiment_config(cfg);
  ExperimentResult result;
  for (std::size_t c = 0; c < cfg.cases.size(); ++c) {
    const CaseRecipe& recipe = cfg.cases[c];
    const std::uint64_t case_seed = derive_seed(cfg.master_seed, c);
    try {
      const auto accuracies = run_case(recipe, cfg, case_seed, jobs);
      for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const auto [mean, sd] = aggregate(accuracies[m]);
        result.table.rows.push_back({recipe.id, method_name(cfg.methods[m]), mean, sd,
                                     cfg.datasets_per_case, "ok"});
        for (int d = 0; d < cfg.datasets_per_case; ++d)
          result.details.push_back({recipe.id, method_name(cfg.methods[m]), d,
                                    accuracies[m][static_cast<std::size_t>(d)]});
        if (progress)
          *progress << "case " << recipe.id << " " << method_name(cfg.methods[m]) << ": mean="
                    << mean << " sd=" << sd << " (" << cfg.datasets_per_case << " datasets)\n";
      }
    } catch (const std::exception& e) {
      for (ClusterMethod method : cfg.methods)
        result.table.rows.push_back(
            {recipe.id, method_name(method), 0.0, 0.0, 0, std::string("failed: ") + e.what()});
      if (progress) *progress << "case " << recipe.id << " failed: " << e.what() << "\n";
    }
  }
  return result;
}

void emit_table(const AccuracyTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "case,method,mean_accuracy,sd,datasets,status\n";
  for (const AccuracyRow& row : table.rows) {
    out << csv_safe(row.case_id) << ',' << row.method << ',';
    if (row.status == "ok") out << format_double(row.mean) << ',' << format_double(row.sd);
    else out << ',';
    out << ',' << row.datasets << ',' << csv_safe(row.status) << "\n";
  }
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void emit_details(const std::vector<DetailRow>& details, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "case,method,dataset,accuracy\n";
  for (const DetailRow& row : details)
    out << csv_safe(row.case_id) << ',' << row.method << ',' << row.dataset << ','
        << format_double(row.accuracy) << "\n";
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

// ---- config files ----------------------------------------------------------

namespace {

using Section = std::map<std::string, std::string>;

void read_config_sections(const std::filesystem::path& path, Section& global,
                          std::vector<std::pair<std::string, Section>>& cases) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  Section* current = &global;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner.rfind("case ", 0) != 0) fail("expected '[case <id>]'");
      const std::string id = trim(inner.substr(5));
      if (id.empty()) fail("case id must be nonempty");
      for (const auto& [existing, body] : cases)
        if (existing == id) fail("duplicate case id '" + id + "'");
      cases.emplace_back(id, Section{});
      current = &cases.back().second;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("expected 'key = value'");
    if (!current->emplace(key, value).second) fail("duplicate key '" + key + "'");
  }
}

std::optional<std::string> take(Section& section, const std::string& key) {
  auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  std::string value = it->second;
  section.erase(it);
  return value;
}

DepthSpec parse_depth(const std::string& text) {
  if (text.rfind("binomial:", 0) == 0) {
    const auto rest = text.substr(9);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("binomial depth must be 'binomial:<trials>:<prob>'");
    return DepthSpec::binomial(parse_int(rest.substr(0, colon)),
                               parse_double(rest.substr(colon + 1)));
  }
  return DepthSpec::fixed(parse_int(text));
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("range must be '<lo>:<hi>', got '" + text + "'");
  return {parse_double(text.substr(0, colon)), parse_double(text.substr(colon + 1))};
}

std::vector<std::pair<double, double>> parse_ranges(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto semi = text.find(';', start);
    const std::string piece =
        trim(text.substr(start, semi == std::string::npos ? semi : semi - start));
    if (!piece.empty()) out.push_back(parse_range(piece));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  if (out.empty()) throw std::invalid_argument("no ranges given");
  return out;
}

CaseRecipe recipe_from_section(const std::string& id, Section body) {
  CaseRecipe recipe;
  recipe.id = id;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("case '" + id + "': " + what);
  };
  try {
    const auto order = take(body, "order");
    recipe.set_a.order = parse_int(take(body, "order_a").value_or(order.value_or("2")));
    recipe.set_b.order = parse_int(take(body, "order_b").value_or(order.value_or("2")));

    const auto depth = take(body, "depth");
    recipe.set_a.depth = parse_depth(take(body, "depth_a").value_or(depth.value_or("3")));
    recipe.set_b.depth = parse_depth(take(body, "depth_b").value_or(depth.value_or("3")));

    const auto pattern = take(body, "pattern");
    if (!pattern) fail("'pattern' (same|different|random) is required");
    recipe.set_a.pattern_mode = recipe.set_b.pattern_mode = pattern_mode_from_string(*pattern);

    const auto ranges = take(body, "ranges");
    const auto ranges_a = take(body, "ranges_a"), ranges_b = take(body, "ranges_b");
    if (!(ranges_a || ranges) || !(ranges_b || ranges))
      fail("'ranges' (or 'ranges_a'/'ranges_b') is required");
    recipe.set_a.attr_ranges = parse_ranges(ranges_a.value_or(*ranges));
    recipe.set_b.attr_ranges = parse_ranges(ranges_b.value_or(*ranges));
    if (const auto attrs = take(body, "attrs")) {
      const auto q = static_cast<std::size_t>(parse_int(*attrs));
      if (q < 1) fail("'attrs' must be >= 1");
      for (auto* set : {&recipe.set_a, &recipe.set_b}) {
        if (set->attr_ranges.size() == 1) set->attr_ranges.resize(q, set->attr_ranges.front());
        if (set->attr_ranges.size() != q) fail("range list does not match 'attrs'");
      }
    }

    const auto count = take(body, "count");
    recipe.set_a.count = parse_int(take(body, "count_a").value_or(count.value_or("10")));
    recipe.set_b.count = parse_int(take(body, "count_b").value_or(count.value_or("10")));

    NoiseSpec noise;
    noise.attr_edges = parse_int(take(body, "attr_noise_edges").value_or("0"));
    noise.attr_sd_frac = parse_double(take(body, "attr_noise_sd").value_or("0.3"));
    noise.topo_candidates = parse_int(take(body, "topo_noise_candidates").value_or("0"));
    noise.topo_prob = parse_double(take(body, "topo_noise_prob").value_or("0.5"));
    noise.topo_attr_range = parse_range(take(body, "topo_noise_range").value_or("2:5"));
    if (noise.attr_edges > 0 || noise.topo_candidates > 0) recipe.noise = noise;
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (!body.empty()) fail("unknown key '" + body.begin()->first + "'");
  return recipe;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
  Section global;
  std::vector<std::pair<std::string, Section>> sections;
  read_config_sections(path, global, sections);

  ExperimentConfig cfg;
  try {
    cfg.datasets_per_case = parse_int(take(global, "datasets_per_case").value_or("20"));
    if (const auto methods = take(global, "methods")) {
      cfg.methods.clear();
      std::size_t start = 0;
      while (start <= methods->size()) {
        const auto comma = methods->find(',', start);
        const std::string piece =
            trim(methods->substr(start, comma == std::string::npos ? comma : comma - start));
        if (!piece.empty()) cfg.methods.push_back(method_from_string(piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    if (const auto metric = take(global, "metric")) cfg.metric = metric_from_string(*metric);
    cfg.normalize = parse_bool(take(global, "normalize").value_or("0"));
    cfg.cluster_restarts = parse_int(take(global, "cluster_restarts").value_or("5"));
    if (const auto v = take(global, "rank")) cfg.factorization.rank = parse_int(*v);
    if (const auto v = take(global, "max_iters")) cfg.factorization.max_iters = parse_int(*v);
    if (const auto v = take(global, "rel_tol")) cfg.factorization.rel_tol = parse_double(*v);
    if (const auto v = take(global, "lambda")) cfg.factorization.lambda = parse_double(*v);
    if (const auto v = take(global, "epsilon")) cfg.factorization.epsilon = parse_double(*v);
    if (const auto v = take(global, "pos_threshold"))
      cfg.factorization.pos_threshold = parse_double(*v);
    if (const auto v = take(global, "restarts")) cfg.factorization.restarts = parse_int(*v);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (!global.empty())
    throw std::runtime_error(path.string() + ": unknown key '" + global.begin()->first + "'");

  for (auto& [id, body] : sections) cfg.cases.push_back(recipe_from_section(id, std::move(body)));
  if (cfg.cases.empty())
    throw std::runtime_error(path.string() + ": config declares no [case] sections");
  validate_experiment_config(cfg);
  return cfg;
}

CaseRecipe parse_dataset_recipe(const std::filesystem::path& path) {
  Section global;
  std::vector<std::pair<std::string, Section>> sections;
  read_config_sections(path, global, sections);
  if (!sections.empty())
    throw std::runtime_error(path.string() + ": a dataset recipe has no [case] sections");
  CaseRecipe recipe = recipe_from_section("dataset", std::move(global));
  validate_gen_spec(recipe.set_a);
  validate_gen_spec(recipe.set_b);
  if (recipe.noise) validate_noise_spec(*recipe.noise);
  return recipe;
}

}  // namespace metatree
