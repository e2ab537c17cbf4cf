#include "metatree/forest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace metatree {
namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(sep, start);
    out.push_back(s.substr(start, end == std::string::npos ? end : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

// Field values are embedded in whitespace/comma separated records, so
// they must not contain the separators themselves.
void check_token(const std::string& value, const char* what) {
  if (value.empty()) throw std::invalid_argument(std::string(what) + " must be nonempty");
  if (value.find_first_of(" \t\r\n,") != std::string::npos)
    throw std::invalid_argument(std::string(what) + " '" + value +
                                "' contains whitespace or a comma");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

ForestMatrix assemble_forest(const std::vector<Tree>& trees, const SupportTreeSpec& spec) {
  if (trees.empty()) throw std::invalid_argument("forest must contain at least one tree");
  const int q = trees.front().q();
  ForestMatrix forest;
  forest.spec = spec;
  forest.q = q;
  forest.data.resize(spec.p * q, static_cast<Eigen::Index>(trees.size()));
  forest.ids.reserve(trees.size());
  bool any_label = false;
  std::vector<std::string> labels;
  labels.reserve(trees.size());
  for (std::size_t l = 0; l < trees.size(); ++l) {
    const Tree& tree = trees[l];
    validate_tree(tree, spec);
    if (tree.q() != q)
      throw std::invalid_argument("tree '" + tree.id + "' has " + std::to_string(tree.q()) +
                                  " attributes, expected " + std::to_string(q));
    forest.data.col(static_cast<Eigen::Index>(l)) = vectorize(to_ta_matrix(tree, spec));
    forest.ids.push_back(tree.id);
    labels.push_back(tree.label);
    any_label = any_label || !tree.label.empty();
  }
  if (any_label) forest.labels = std::move(labels);
  return forest;
}

void normalize_attributes_max(ForestMatrix& forest) {
  for (int j = 0; j < forest.q; ++j) {
    auto block = forest.data.middleRows(static_cast<Eigen::Index>(j) * forest.spec.p, forest.spec.p);
    const double mx = block.maxCoeff();
    if (mx > 0.0) block /= mx;
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("failed to format a double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw std::invalid_argument("not a finite decimal number: '" + std::string(text) + "'");
  return value;
}

void write_forest(const ForestFile& forest, const std::filesystem::path& path) {
  if (forest.attr_names.empty())
    throw std::invalid_argument("forest needs at least one attribute name");
  if (forest.trees.empty()) throw std::invalid_argument("forest needs at least one tree");
  for (const auto& name : forest.attr_names) check_token(name, "attribute name");
  const int q = static_cast<int>(forest.attr_names.size());
  for (const Tree& tree : forest.trees) {
    validate_tree(tree, forest.spec);
    if (tree.q() != q)
      throw std::invalid_argument("tree '" + tree.id + "' has " + std::to_string(tree.q()) +
                                  " attributes but the header names " + std::to_string(q));
    check_token(tree.id, "tree id");
    if (!tree.label.empty()) check_token(tree.label, "tree label");
  }

  auto out = open_out(path);
  out << "FOREST v1\n";
  out << "order=" << forest.spec.order << " depth=" << forest.spec.depth
      << " trunk=" << (forest.spec.trunk ? 1 : 0) << " attrs=";
  for (std::size_t j = 0; j < forest.attr_names.size(); ++j)
    out << (j ? "," : "") << forest.attr_names[j];
  out << "\n";
  for (const Tree& tree : forest.trees) {
    out << "TREE id=" << tree.id << " label=" << (tree.label.empty() ? "-" : tree.label) << "\n";
    for (const auto& [idx, attrs] : tree.branches) {
      out << idx;
      for (double a : attrs) out << ' ' << format_double(a);
      out << "\n";
    }
    out << "END\n";
  }
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

ForestFile read_forest(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&](bool required) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    if (required) parse_fail(path, line_no + 1, "unexpected end of file");
    return false;
  };

  if (!next_line(true) || line != "FOREST v1")
    parse_fail(path, line_no, "expected 'FOREST v1' magic line");

  next_line(true);
  std::istringstream header(line);
  std::string tok;
  ForestFile forest;
  bool saw_order = false, saw_depth = false, saw_trunk = false, saw_attrs = false;
  int order = 0, depth = 0, trunk = -1;
  while (header >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) parse_fail(path, line_no, "malformed header field '" + tok + "'");
    const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
    try {
      if (key == "order") {
        order = static_cast<int>(parse_double(value));
        saw_order = true;
      } else if (key == "depth") {
        depth = static_cast<int>(parse_double(value));
        saw_depth = true;
      } else if (key == "trunk") {
        if (value != "0" && value != "1") throw std::invalid_argument("trunk must be 0 or 1");
        trunk = value == "1";
        saw_trunk = true;
      } else if (key == "attrs") {
        forest.attr_names = split(value, ',');
        for (const auto& name : forest.attr_names) check_token(name, "attribute name");
        saw_attrs = true;
      } else {
        parse_fail(path, line_no, "unknown header field '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      parse_fail(path, line_no, e.what());
    }
  }
  if (!saw_order || !saw_depth || !saw_trunk || !saw_attrs)
    parse_fail(path, line_no, "header must name order, depth, trunk and attrs");
  try {
    forest.spec = build_support_spec(order, depth, trunk == 1);
  } catch (const std::invalid_argument& e) {
    parse_fail(path, line_no, e.what());
  }
  const std::size_t q = forest.attr_names.size();

  while (next_line(false)) {
    if (line.rfind("TREE ", 0) != 0) parse_fail(path, line_no, "expected a TREE line");
    std::istringstream tree_header(line.substr(5));
    Tree tree;
    bool saw_id = false;
    while (tree_header >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) parse_fail(path, line_no, "malformed TREE field '" + tok + "'");
      const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
      if (key == "id") {
        tree.id = value;
        saw_id = true;
      } else if (key == "label") {
        tree.label = value == "-" ? "" : value;
      } else {
        parse_fail(path, line_no, "unknown TREE field '" + key + "'");
      }
    }
    if (!saw_id || tree.id.empty()) parse_fail(path, line_no, "TREE line missing id");
    const std::size_t tree_line = line_no;

    while (true) {
      if (!next_line(false)) parse_fail(path, line_no + 1, "tree '" + tree.id + "' missing END");
      if (line == "END") break;
      std::istringstream branch(line);
      std::int64_t idx = 0;
      if (!(branch >> idx)) parse_fail(path, line_no, "expected a branch index");
      if (idx < 1 || idx > forest.spec.p)
        parse_fail(path, line_no, "branch index " + std::to_string(idx) + " outside 1.." +
                                      std::to_string(forest.spec.p));
      if (tree.branches.count(idx))
        parse_fail(path, line_no, "duplicate branch " + std::to_string(idx));
      std::vector<double> attrs;
      attrs.reserve(q);
      while (branch >> tok) {
        try {
          attrs.push_back(parse_double(tok));
        } catch (const std::invalid_argument& e) {
          parse_fail(path, line_no, e.what());
        }
      }
      if (attrs.size() != q)
        parse_fail(path, line_no, "branch " + std::to_string(idx) + " has " +
                                      std::to_string(attrs.size()) + " attributes, header names " +
                                      std::to_string(q));
      for (double a : attrs)
        if (!(a > 0.0)) parse_fail(path, line_no, "attributes must be strictly positive");
      tree.branches.emplace(idx, std::move(attrs));
    }
    try {
      validate_tree(tree, forest.spec);
    } catch (const std::invalid_argument& e) {
      parse_fail(path, tree_line, e.what());
    }
    forest.trees.push_back(std::move(tree));
  }
  if (forest.trees.empty()) parse_fail(path, line_no + 1, "forest file contains no trees");
  return forest;
}

void write_matrix_csv(const Eigen::MatrixXd& matrix, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << (j ? "," : "") << 'c' << j + 1;
  out << "\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j)
      out << (j ? "," : "") << format_double(matrix(i, j));
    out << "\n";
  }
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing CSV header");
  ++line_no;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) {
      try {
        row.push_back(parse_double(cell));
      } catch (const std::invalid_argument& e) {
        parse_fail(path, line_no, e.what());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      parse_fail(path, line_no, "ragged CSV row");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows.size()),
                         rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return matrix;
}

void write_labels_csv(const std::vector<std::string>& ids, const std::vector<std::string>& labels,
                      const std::filesystem::path& path) {
  if (ids.size() != labels.size())
    throw std::invalid_argument("ids and labels must have equal length");
  auto out = open_out(path);
  out << "id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    check_token(ids[i], "tree id");
    if (!labels[i].empty()) check_token(labels[i], "label");
    out << ids[i] << ',' << labels[i] << "\n";
  }
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void write_labels_csv(const std::vector<std::string>& ids, const std::vector<int>& labels,
                      const std::filesystem::path& path) {
  std::vector<std::string> text;
  text.reserve(labels.size());
  for (int l : labels) text.push_back(std::to_string(l));
  write_labels_csv(ids, text, path);
}

std::pair<std::vector<std::string>, std::vector<std::string>> read_labels_csv(
    const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing CSV header");
  ++line_no;
  std::vector<std::string> ids, labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != 2) parse_fail(path, line_no, "expected exactly id,label");
    if (cells[0].empty()) parse_fail(path, line_no, "empty id");
    ids.push_back(cells[0]);
    labels.push_back(cells[1]);
  }
  return {std::move(ids), std::move(labels)};
}

}  // namespace metatree
