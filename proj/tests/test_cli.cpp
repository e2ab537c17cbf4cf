// Black-box tests of the command-line tool. The binary path arrives as
// argv[1] (the remaining arguments go to the test framework).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "metatree/forest.hpp"
#include "metatree/tree.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "metatree_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path capture = work_dir() / ("capture" + std::to_string(counter++) + ".txt");
  const std::string cmd = "'" + g_cli + "' " + args + " >'" + capture.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.output = slurp(capture);
  return result;
}

// Pulls the number following "key=" out of a status line.
double output_value(const std::string& output, const std::string& key) {
  const auto at = output.find(key + "=");
  REQUIRE(at != std::string::npos);
  const auto start = at + key.size() + 1;
  auto end = start;
  while (end < output.size() && output[end] != ' ' && output[end] != '\n') ++end;
  return metatree::parse_double(output.substr(start, end - start));
}

fs::path dataset_recipe() {
  static const fs::path path = [] {
    const fs::path p = work_dir() / "recipe.cfg";
    write_text(p,
               "pattern = different\n"
               "order = 2\n"
               "depth = 3\n"
               "ranges = 2:5;1:9;2:5\n"
               "count = 5\n");
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("bad invocations exit with the usage code") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("simulate").exit_code == 1);             // missing required options
  CHECK(run_cli("simulate --bogus x").exit_code == 1);   // unknown flag
  CHECK(run_cli("teleport --in a").exit_code == 1);      // unknown subcommand
  CHECK(run_cli("evaluate --pred a.csv").exit_code == 1);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("cluster --help").exit_code == 0);
}

TEST_CASE("simulate writes a labeled forest and reports its shape") {
  const fs::path f1 = work_dir() / "f1.forest";
  const RunResult r = run_cli("simulate --config '" + dataset_recipe().string() + "' --seed 7 --out '" +
                              f1.string() + "'");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "n=10 p=15 q=3\n");

  const metatree::ForestFile file = metatree::read_forest(f1);
  REQUIRE(file.trees.size() == 10);
  CHECK(file.spec.p == 15);
  CHECK(file.trees[0].id == "a1");
  CHECK(file.trees[0].label == "A");
  CHECK(file.trees[9].id == "b5");
  CHECK(file.trees[9].label == "B");

  // same seed, same bytes; different seed, different forest
  const fs::path f2 = work_dir() / "f2.forest";
  CHECK(run_cli("simulate --config '" + dataset_recipe().string() + "' --seed 7 --out '" +
                f2.string() + "'")
            .exit_code == 0);
  CHECK(slurp(f1) == slurp(f2));
  const fs::path f3 = work_dir() / "f3.forest";
  CHECK(run_cli("simulate --config '" + dataset_recipe().string() + "' --seed 8 --out '" +
                f3.string() + "'")
            .exit_code == 0);
  CHECK(slurp(f1) != slurp(f3));

  CHECK(run_cli("simulate --config '" + dataset_recipe().string() + "'").exit_code == 1);
  CHECK(run_cli("simulate --config missing.cfg --out x.forest").exit_code == 2);
}

TEST_CASE("factorize writes structure-valid meta-trees and signatures") {
  const fs::path forest = work_dir() / "fx.forest";
  REQUIRE(run_cli("simulate --config '" + dataset_recipe().string() + "' --seed 7 --out '" +
                  forest.string() + "'")
              .exit_code == 0);

  const fs::path w = work_dir() / "w.csv", h = work_dir() / "h.csv",
                 trace = work_dir() / "trace.csv";
  const RunResult r = run_cli("factorize --in '" + forest.string() +
                              "' --rank 4 --restarts 2 --max-iters 150 --seed 3 --out-w '" +
                              w.string() + "' --out-h '" + h.string() + "' --trace '" +
                              trace.string() + "'");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("objective=") != std::string::npos);
  CHECK(r.output.find("converged=") != std::string::npos);

  const Eigen::MatrixXd W = metatree::read_matrix_csv(w);
  const Eigen::MatrixXd H = metatree::read_matrix_csv(h);
  const Eigen::MatrixXd T = metatree::read_matrix_csv(trace);
  CHECK(W.rows() == 45);  // pq = 15 * 3
  CHECK(W.cols() == 4);
  CHECK(H.rows() == 4);
  CHECK(H.cols() == 10);
  CHECK(T.cols() == 1);
  CHECK(T(T.rows() - 1, 0) == doctest::Approx(output_value(r.output, "objective")));
  for (Eigen::Index c = 0; c < W.cols(); ++c)
    CHECK(metatree::positive_uniformity_ok(metatree::unvectorize(W.col(c), 15, 3), 1e-9));
  CHECK((H.array() >= 0.0).all());

  // identical invocation reproduces identical factors
  const fs::path w2 = work_dir() / "w2.csv", h2 = work_dir() / "h2.csv";
  REQUIRE(run_cli("factorize --in '" + forest.string() +
                  "' --rank 4 --restarts 2 --max-iters 150 --seed 3 --out-w '" + w2.string() +
                  "' --out-h '" + h2.string() + "'")
              .exit_code == 0);
  CHECK(slurp(w) == slurp(w2));
  CHECK(slurp(h) == slurp(h2));

  // malformed forest file -> data error
  const fs::path bad = work_dir() / "bad.forest";
  write_text(bad, "FOREST v1\norder=2 depth=1 trunk=1 attrs=x\nTREE id=a label=-\n1 -3\nEND\n");
  CHECK(run_cli("factorize --in '" + bad.string() + "' --out-w '" + w.string() + "' --out-h '" +
                h.string() + "'")
            .exit_code == 2);
  // invalid hyperparameters -> data error
  CHECK(run_cli("factorize --in '" + forest.string() + "' --rank 0 --out-w '" + w.string() +
                "' --out-h '" + h.string() + "'")
            .exit_code == 2);
}

TEST_CASE("cluster labels a forest and scores it when ground truth is embedded") {
  const fs::path forest = work_dir() / "cl.forest";
  REQUIRE(run_cli("simulate --config '" + dataset_recipe().string() + "' --seed 11 --out '" +
                  forest.string() + "'")
              .exit_code == 0);

  const fs::path pred = work_dir() / "pred.csv";
  const RunResult ncut = run_cli("cluster --in '" + forest.string() +
                                 "' --method ncut --metric l1 --seed 5 --out '" + pred.string() +
                                 "'");
  CHECK(ncut.exit_code == 0);
  CHECK(ncut.output.find("ncut=") != std::string::npos);
  CHECK(output_value(ncut.output, "accuracy") >= 0.5);

  const auto [ids, labels] = metatree::read_labels_csv(pred);
  REQUIRE(ids.size() == 10);
  CHECK(ids[0] == "a1");
  for (const std::string& l : labels) CHECK((l == "0" || l == "1"));

  const RunResult km = run_cli("cluster --in '" + forest.string() +
                               "' --method kmeans --metric l2path --cluster-restarts 4 --seed 5 "
                               "--out '" +
                               pred.string() + "'");
  CHECK(km.exit_code == 0);
  CHECK(km.output.find("inertia=") != std::string::npos);

  // a fixed affinity bandwidth is accepted; a non-positive one is data error
  CHECK(run_cli("cluster --in '" + forest.string() + "' --sigma 0.5 --out '" + pred.string() +
                "'")
            .exit_code == 0);
  CHECK(run_cli("cluster --in '" + forest.string() + "' --sigma -1 --out '" + pred.string() +
                "'")
            .exit_code == 2);

  // --clusters is a usage-checked range; too many clusters for n is a data error
  CHECK(run_cli("cluster --in '" + forest.string() + "' --clusters 1 --out '" + pred.string() +
                "'")
            .exit_code == 1);
  CHECK(run_cli("cluster --in '" + forest.string() + "' --clusters 11 --out '" + pred.string() +
                "'")
            .exit_code == 2);
  CHECK(run_cli("cluster --in '" + forest.string() + "' --method voronoi --out '" +
                pred.string() + "'")
            .exit_code == 1);
}

TEST_CASE("evaluate scores label files and is invariant to label renaming") {
  const fs::path truth = work_dir() / "truth.csv";
  write_text(truth, "id,label\na1,A\na2,A\na3,A\nb1,B\nb2,B\nb3,B\n");

  const fs::path perfect = work_dir() / "pred_perfect.csv";
  write_text(perfect, "id,label\na1,c7\na2,c7\na3,c7\nb1,c9\nb2,c9\nb3,c9\n");
  RunResult r = run_cli("evaluate --pred '" + perfect.string() + "' --truth '" + truth.string() +
                        "'");
  CHECK(r.exit_code == 0);
  CHECK(output_value(r.output, "accuracy") == doctest::Approx(1.0));

  // balanced contingency: cluster 0 holds {a1,a2,b1,b2}, cluster 1 {a3,b3},
  // so the best matching scores 2+1 of 6 either way round
  const fs::path half = work_dir() / "pred_half.csv";
  write_text(half, "id,label\na1,0\na2,0\na3,1\nb1,0\nb2,0\nb3,1\n");
  r = run_cli("evaluate --pred '" + half.string() + "' --truth '" + truth.string() + "'");
  CHECK(r.exit_code == 0);
  CHECK(output_value(r.output, "accuracy") == doctest::Approx(0.5));

  // prediction order need not match truth order
  const fs::path shuffled = work_dir() / "pred_shuffled.csv";
  write_text(shuffled, "id,label\nb3,x\nb1,x\na2,y\na1,y\na3,y\nb2,x\n");
  r = run_cli("evaluate --pred '" + shuffled.string() + "' --truth '" + truth.string() + "'");
  CHECK(r.exit_code == 0);
  CHECK(output_value(r.output, "accuracy") == doctest::Approx(1.0));

  const fs::path stray = work_dir() / "pred_stray.csv";
  write_text(stray, "id,label\nzz,0\n");
  CHECK(run_cli("evaluate --pred '" + stray.string() + "' --truth '" + truth.string() + "'")
            .exit_code == 2);
}

TEST_CASE("cluster's reported accuracy matches evaluate on its own output") {
  const fs::path forest = work_dir() / "agree.forest";
  REQUIRE(run_cli("simulate --config '" + dataset_recipe().string() + "' --seed 21 --out '" +
                  forest.string() + "'")
              .exit_code == 0);
  const fs::path pred = work_dir() / "agree_pred.csv";
  const RunResult cl = run_cli("cluster --in '" + forest.string() + "' --seed 4 --out '" +
                               pred.string() + "'");
  REQUIRE(cl.exit_code == 0);

  const fs::path truth = work_dir() / "agree_truth.csv";
  const metatree::ForestFile file = metatree::read_forest(forest);
  std::string text = "id,label\n";
  for (const auto& t : file.trees) text += t.id + "," + t.label + "\n";
  write_text(truth, text);

  const RunResult ev = run_cli("evaluate --pred '" + pred.string() + "' --truth '" +
                               truth.string() + "'");
  REQUIRE(ev.exit_code == 0);
  CHECK(output_value(ev.output, "accuracy") ==
        doctest::Approx(output_value(cl.output, "accuracy")));
}

TEST_CASE("experiment writes reproducible result tables") {
  const fs::path cfg = work_dir() / "experiment.cfg";
  write_text(cfg,
             "datasets_per_case = 2\n"
             "rank = 4\n"
             "restarts = 2\n"
             "max_iters = 150\n"
             "\n"
             "[case quick]\n"
             "pattern = different\n"
             "order = 2\n"
             "depth = 3\n"
             "ranges = 2:5;1:9;2:5\n"
             "count = 4\n");

  const fs::path out1 = work_dir() / "exp1";
  const RunResult r1 = run_cli("experiment --config '" + cfg.string() + "' --seed 777 --jobs 2 "
                               "--outdir '" + out1.string() + "'");
  CHECK(r1.exit_code == 0);
  CHECK(r1.output.find("case quick") != std::string::npos);

  const std::string table = slurp(out1 / "accuracy.csv");
  CHECK(table.rfind("case,method,mean_accuracy,sd,datasets,status\n", 0) == 0);
  CHECK(table.find("quick,ncut,") != std::string::npos);
  CHECK(table.find("quick,kmeans,") != std::string::npos);
  CHECK(table.find(",ok\n") != std::string::npos);

  const fs::path out2 = work_dir() / "exp2";
  REQUIRE(run_cli("experiment --config '" + cfg.string() + "' --seed 777 --jobs 1 --outdir '" +
                  out2.string() + "'")
              .exit_code == 0);
  CHECK(slurp(out1 / "accuracy.csv") == slurp(out2 / "accuracy.csv"));
  CHECK(slurp(out1 / "details.csv") == slurp(out2 / "details.csv"));

  const fs::path empty = work_dir() / "empty.cfg";
  write_text(empty, "# nothing here\n");
  CHECK(run_cli("experiment --config '" + empty.string() + "' --outdir '" + out1.string() + "'")
            .exit_code == 2);
  CHECK(run_cli("experiment --config '" + cfg.string() + "' --outdir '" + out1.string() +
                "' --jobs 0")
            .exit_code == 1);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <metatree-binary> [doctest options]\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  doctest::Context context(argc - 1, argv + 1);
  return context.run();
}
