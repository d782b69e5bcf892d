#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "assortgen/error.hpp"
#include "assortgen/graph.hpp"

namespace assortgen {

namespace {

bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_content_line(in, line, lineno)) throw Error(ErrorKind::Parse, "missing \"N E\" header");
  long long n = -1;
  long long e = -1;
  {
    std::istringstream header(line);
    if (!(header >> n >> e) || n < 0 || e < 0) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad header");
    }
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(e));
  for (long long k = 0; k < e; ++k) {
    if (!next_content_line(in, line, lineno)) {
      throw Error(ErrorKind::Parse, "expected " + std::to_string(e) + " edges, got " + std::to_string(k));
    }
    std::istringstream row(line);
    long long u = -1;
    long long v = -1;
    if (!(row >> u >> v)) throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad edge");
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw Error(ErrorKind::NodeOutOfRange, "line " + std::to_string(lineno));
    }
    edges.push_back(Edge{static_cast<Node>(u), static_cast<Node>(v)});
  }
  return Graph::from_edge_list(static_cast<std::size_t>(n), std::span<const Edge>(edges));
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.num_nodes() << ' ' << g.num_edges() << '\n';
  for (const Edge& e : g.to_edge_list()) out << e.u << ' ' << e.v << '\n';
}

void write_edge_list_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_edge_list(out, g);
}

}  // namespace assortgen
