#include "ewgsl/io.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace ewgsl {
namespace {

std::string Location(const std::filesystem::path& file, std::size_t line) {
  std::string out = file.string();
  if (line > 0) out += ":" + std::to_string(line);
  return out;
}

struct TsvRows {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::optional<long long> nodes_hint;
  std::optional<long long> classes_hint;
};

std::optional<long long> HeaderValue(const std::string& line, const std::string& key) {
  const std::string prefix = key + "=";
  auto pos = line.find(prefix);
  if (pos == std::string::npos) return std::nullopt;
  return std::stoll(line.substr(pos + prefix.size()));
}

TsvRows ReadTsv(const std::filesystem::path& path, std::size_t num_fields) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  TsvRows out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto v = HeaderValue(line, "nodes")) out.nodes_hint = v;
      if (auto v = HeaderValue(line, "classes")) out.classes_hint = v;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fs(line);
    while (std::getline(fs, field, '\t')) fields.push_back(field);
    if (fields.size() != num_fields) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(num_fields) +
                           " tab-separated fields, got " + std::to_string(fields.size()));
    }
    out.rows.push_back(std::move(fields));
    out.line_numbers.push_back(line_no);
  }
  return out;
}

long long ParseInt(const std::string& s, const std::filesystem::path& path,
                   std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(path, line, "invalid integer '" + s + "'");
  }
  return v;
}

double ParseReal(const std::string& s, const std::filesystem::path& path,
                 std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(path, line, "invalid number '" + s + "'");
  }
  return v;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  return out;
}

LabelSet LabelsFromRows(const TsvRows& tsv, const std::filesystem::path& path,
                        bool with_mask) {
  if (tsv.rows.empty()) throw ParseError(path, 0, "empty label file");
  long long max_node = -1;
  int max_label = -1;
  for (std::size_t r = 0; r < tsv.rows.size(); ++r) {
    max_node = std::max(max_node, ParseInt(tsv.rows[r][0], path, tsv.line_numbers[r]));
  }
  LabelSet out;
  out.labels.assign(max_node + 1, -1);
  if (with_mask) out.labeled.assign(max_node + 1, false);
  for (std::size_t r = 0; r < tsv.rows.size(); ++r) {
    const std::size_t line = tsv.line_numbers[r];
    const long long node = ParseInt(tsv.rows[r][0], path, line);
    const long long label = ParseInt(tsv.rows[r][1], path, line);
    if (node < 0) throw ParseError(path, line, "negative node id");
    if (label < 0) throw ParseError(path, line, "negative label");
    if (out.labels[node] != -1) throw ParseError(path, line, "duplicate node id");
    out.labels[node] = static_cast<int>(label);
    max_label = std::max(max_label, static_cast<int>(label));
    if (with_mask) {
      const long long flag = ParseInt(tsv.rows[r][2], path, line);
      if (flag != 0 && flag != 1) throw ParseError(path, line, "labeled flag must be 0 or 1");
      out.labeled[node] = flag == 1;
    }
  }
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    if (out.labels[i] < 0) {
      throw ParseError(path, 0, "node " + std::to_string(i) + " has no label");
    }
  }
  out.num_classes = tsv.classes_hint ? static_cast<int>(*tsv.classes_hint) : max_label + 1;
  if (out.num_classes <= max_label) {
    throw ParseError(path, 0, "label exceeds the declared class count");
  }
  return out;
}

}  // namespace

ParseError::ParseError(const std::filesystem::path& file, std::size_t line,
                       const std::string& message)
    : std::runtime_error(Location(file, line) + ": " + message),
      file_(file),
      line_(line) {}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void WriteGraph(const std::filesystem::path& path, const WeightedGraph& graph) {
  auto out = OpenForWrite(path);
  out << "# nodes=" << graph.num_nodes() << "\n";
  for (const Edge& e : graph.edges()) {
    out << e.u << '\t' << e.v << '\t' << FormatDouble(e.weight) << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

WeightedGraph ReadGraph(const std::filesystem::path& path) {
  TsvRows tsv = ReadTsv(path, 3);
  if (tsv.rows.empty() && !tsv.nodes_hint) throw ParseError(path, 0, "empty graph");
  std::vector<Edge> edges;
  long long max_id = -1;
  for (std::size_t r = 0; r < tsv.rows.size(); ++r) {
    const std::size_t line = tsv.line_numbers[r];
    const long long u = ParseInt(tsv.rows[r][0], path, line);
    const long long v = ParseInt(tsv.rows[r][1], path, line);
    if (u < 0 || v < 0) throw ParseError(path, line, "negative node id");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v),
                     ParseReal(tsv.rows[r][2], path, line)});
    max_id = std::max({max_id, u, v});
  }
  const long long n = tsv.nodes_hint ? *tsv.nodes_hint : max_id + 1;
  if (n <= 0) throw ParseError(path, 0, "empty graph");
  try {
    return WeightedGraph::FromEdges(static_cast<NodeId>(n), edges);
  } catch (const GraphError& e) {
    throw ParseError(path, 0, e.what());
  }
}

void WriteLabels(const std::filesystem::path& path, const LabelSet& labels) {
  auto out = OpenForWrite(path);
  out << "# classes=" << labels.num_classes << "\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << '\t' << labels.labels[i] << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

LabelSet ReadLabels(const std::filesystem::path& path) {
  return LabelsFromRows(ReadTsv(path, 2), path, /*with_mask=*/false);
}

void WriteSplit(const std::filesystem::path& path, const LabelSet& labels) {
  auto out = OpenForWrite(path);
  out << "# classes=" << labels.num_classes << "\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << '\t' << labels.labels[i] << '\t'
        << (labels.IsLabeled(static_cast<NodeId>(i)) ? 1 : 0) << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

LabelSet ReadSplit(const std::filesystem::path& path) {
  return LabelsFromRows(ReadTsv(path, 3), path, /*with_mask=*/true);
}

}  // namespace ewgsl
