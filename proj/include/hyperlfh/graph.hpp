#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/matrix.hpp"

namespace hyperlfh {

struct Edge {
  int src;
  int dst;
  int etype;
};

/// Heterogeneous pairwise graph: typed nodes, typed directed edges, raw
/// feature matrix (D x N, one column per node), optional class labels.
struct HetPairGraph {
  int num_nodes = 0;
  int num_node_types = 0;
  int num_edge_types = 0;
  int num_classes = 0;                 // 0 when unlabeled
  std::vector<int> node_type;          // per node
  std::vector<Edge> edges;             // directed, duplicates preserved
  Mat<double> raw_features;            // D x N
  std::vector<int> labels;             // per node, -1 = unlabeled

  std::size_t feature_dim() const { return raw_features.rows(); }

  bool has_labels() const {
    for (int y : labels)
      if (y >= 0) return true;
    return false;
  }

  std::vector<int> labeled_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes; ++i)
      if (labels[i] >= 0) out.push_back(i);
    return out;
  }

  std::vector<int> nodes_of_type(int t) const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes; ++i)
      if (node_type[i] == t) out.push_back(i);
    return out;
  }

  /// Undirected incident-edge count per node.
  std::vector<int> undirected_degree() const {
    std::vector<int> deg(num_nodes, 0);
    for (const Edge& e : edges) {
      ++deg[e.src];
      ++deg[e.dst];
    }
    return deg;
  }
};

namespace csvdetail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline int parse_int(const std::string& s, const std::string& file, int line_no,
                     const char* what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw DataError(file + ":" + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

inline double parse_double(const std::string& s, const std::string& file, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw DataError(file + ":" + std::to_string(line_no) + ": bad feature value '" + s + "'");
  }
}

}  // namespace csvdetail

/// Load a graph from <dir>/nodes.csv, <dir>/edges.csv and, if present,
/// <dir>/labels.csv. Errors carry file name and line number.
inline HetPairGraph load_graph(const std::string& nodes_file, const std::string& edges_file,
                               const std::optional<std::string>& labels_file = {}) {
  using namespace csvdetail;
  HetPairGraph g;

  // nodes.csv: id,type,f0,...,f{D-1}; ids must be 0..N-1 in order.
  std::ifstream nf(nodes_file);
  if (!nf) throw DataError("cannot open " + nodes_file);
  std::string line;
  int line_no = 0;
  if (!std::getline(nf, line)) throw DataError(nodes_file + ": empty file");
  ++line_no;
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "type")
    throw DataError(nodes_file + ":1: header must be id,type,f0,...");
  const std::size_t dim = header.size() - 2;
  std::vector<std::vector<double>> feats;
  while (std::getline(nf, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != dim + 2)
      throw DataError(nodes_file + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dim + 2) + " fields, got " + std::to_string(f.size()));
    int id = parse_int(f[0], nodes_file, line_no, "node id");
    if (id != g.num_nodes)
      throw DataError(nodes_file + ":" + std::to_string(line_no) + ": node id " +
                      std::to_string(id) + " out of order (expected " +
                      std::to_string(g.num_nodes) + ")");
    int t = parse_int(f[1], nodes_file, line_no, "node type");
    if (t < 0) throw DataError(nodes_file + ":" + std::to_string(line_no) + ": negative type");
    g.node_type.push_back(t);
    g.num_node_types = std::max(g.num_node_types, t + 1);
    std::vector<double> row(dim);
    for (std::size_t k = 0; k < dim; ++k) row[k] = parse_double(f[2 + k], nodes_file, line_no);
    feats.push_back(std::move(row));
    ++g.num_nodes;
  }
  if (g.num_nodes == 0) throw DataError(nodes_file + ": no nodes");
  g.raw_features = Mat<double>(dim, g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i)
    for (std::size_t k = 0; k < dim; ++k) g.raw_features(k, i) = feats[i][k];

  // edges.csv: src,dst,etype
  std::ifstream ef(edges_file);
  if (!ef) throw DataError("cannot open " + edges_file);
  line_no = 0;
  if (!std::getline(ef, line)) throw DataError(edges_file + ": empty file");
  ++line_no;
  if (split_csv_line(line) != std::vector<std::string>{"src", "dst", "etype"})
    throw DataError(edges_file + ":1: header must be src,dst,etype");
  while (std::getline(ef, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3)
      throw DataError(edges_file + ":" + std::to_string(line_no) + ": expected 3 fields");
    Edge e{parse_int(f[0], edges_file, line_no, "src"),
           parse_int(f[1], edges_file, line_no, "dst"),
           parse_int(f[2], edges_file, line_no, "etype")};
    if (e.src < 0 || e.src >= g.num_nodes || e.dst < 0 || e.dst >= g.num_nodes)
      throw DataError(edges_file + ":" + std::to_string(line_no) + ": unknown node id " +
                      std::to_string(e.src < 0 || e.src >= g.num_nodes ? e.src : e.dst));
    if (e.src == e.dst)
      throw DataError(edges_file + ":" + std::to_string(line_no) + ": self-loop on node " +
                      std::to_string(e.src));
    if (e.etype < 0)
      throw DataError(edges_file + ":" + std::to_string(line_no) + ": negative edge type");
    g.num_edge_types = std::max(g.num_edge_types, e.etype + 1);
    g.edges.push_back(e);
  }

  // labels.csv: id,label (optional file, partial labeling allowed)
  g.labels.assign(g.num_nodes, -1);
  if (labels_file) {
    std::ifstream lf(*labels_file);
    if (!lf) throw DataError("cannot open " + *labels_file);
    line_no = 0;
    if (!std::getline(lf, line)) throw DataError(*labels_file + ": empty file");
    ++line_no;
    if (split_csv_line(line) != std::vector<std::string>{"id", "label"})
      throw DataError(*labels_file + ":1: header must be id,label");
    while (std::getline(lf, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto f = split_csv_line(line);
      if (f.size() != 2)
        throw DataError(*labels_file + ":" + std::to_string(line_no) + ": expected 2 fields");
      int id = parse_int(f[0], *labels_file, line_no, "node id");
      int y = parse_int(f[1], *labels_file, line_no, "label");
      if (id < 0 || id >= g.num_nodes)
        throw DataError(*labels_file + ":" + std::to_string(line_no) + ": unknown node id " +
                        std::to_string(id));
      if (y < 0)
        throw DataError(*labels_file + ":" + std::to_string(line_no) + ": negative label");
      g.labels[id] = y;
      g.num_classes = std::max(g.num_classes, y + 1);
    }
  }
  return g;
}

inline HetPairGraph load_graph_dir(const std::string& dir) {
  std::string labels = dir + "/labels.csv";
  std::ifstream probe(labels);
  std::optional<std::string> lf;
  if (probe) lf = labels;
  return load_graph(dir + "/nodes.csv", dir + "/edges.csv", lf);
}

/// Inverse of load_graph; feature values get 17 significant digits so the
/// round trip is exact on the in-memory representation.
inline void save_graph(const HetPairGraph& g, const std::string& dir) {
  {
    std::ofstream nf(dir + "/nodes.csv");
    if (!nf) throw DataError("cannot write " + dir + "/nodes.csv");
    nf << "id,type";
    for (std::size_t k = 0; k < g.feature_dim(); ++k) nf << ",f" << k;
    nf << "\n";
    char buf[40];
    for (int i = 0; i < g.num_nodes; ++i) {
      nf << i << "," << g.node_type[i];
      for (std::size_t k = 0; k < g.feature_dim(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.raw_features(k, i));
        nf << "," << buf;
      }
      nf << "\n";
    }
  }
  {
    std::ofstream ef(dir + "/edges.csv");
    if (!ef) throw DataError("cannot write " + dir + "/edges.csv");
    ef << "src,dst,etype\n";
    for (const Edge& e : g.edges) ef << e.src << "," << e.dst << "," << e.etype << "\n";
  }
  if (g.has_labels()) {
    std::ofstream lf(dir + "/labels.csv");
    if (!lf) throw DataError("cannot write " + dir + "/labels.csv");
    lf << "id,label\n";
    for (int i = 0; i < g.num_nodes; ++i)
      if (g.labels[i] >= 0) lf << i << "," << g.labels[i] << "\n";
  }
}

/// Structural validation beyond what load_graph enforces line by line.
inline void validate_graph(const HetPairGraph& g) {
  if (g.num_nodes <= 0) throw DataError("graph has no nodes");
  if (g.raw_features.cols() != static_cast<std::size_t>(g.num_nodes))
    throw DataError("feature matrix has " + std::to_string(g.raw_features.cols()) +
                    " columns for " + std::to_string(g.num_nodes) + " nodes");
  if (g.node_type.size() != static_cast<std::size_t>(g.num_nodes))
    throw DataError("node_type size mismatch");
  for (const Edge& e : g.edges) {
    if (e.src < 0 || e.src >= g.num_nodes || e.dst < 0 || e.dst >= g.num_nodes)
      throw DataError("edge endpoint out of range");
    if (e.src == e.dst) throw DataError("self-loop on node " + std::to_string(e.src));
  }
  for (int i = 0; i < g.num_nodes; ++i)
    if (g.labels[i] >= g.num_classes && g.labels[i] >= 0)
      throw DataError("label out of range on node " + std::to_string(i));
  if (!g.raw_features.all_finite()) throw DataError("non-finite feature value");
}

}  // namespace hyperlfh
