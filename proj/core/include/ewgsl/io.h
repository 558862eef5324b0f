#ifndef EWGSL_IO_H_
#define EWGSL_IO_H_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ewgsl/dataset.h"
#include "ewgsl/graph.h"

namespace ewgsl {

// Parse or I/O failure with its location; line 0 means the file as a whole.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::filesystem::path& file, std::size_t line,
             const std::string& message);
  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_;
};

// Edge-list TSV: `src<TAB>dst<TAB>weight`, one line per undirected edge.
// Lines starting with '#' are comments; a `# nodes=N` comment fixes the node
// count (otherwise the largest id plus one). The writer always emits it so
// trailing isolated nodes survive a round trip.
void WriteGraph(const std::filesystem::path& path, const WeightedGraph& graph);
WeightedGraph ReadGraph(const std::filesystem::path& path);

// Label TSV: `node<TAB>label`, with an optional `# classes=C` comment.
void WriteLabels(const std::filesystem::path& path, const LabelSet& labels);
LabelSet ReadLabels(const std::filesystem::path& path);

// Split TSV: `node<TAB>label<TAB>labeled` with labeled in {0, 1}.
void WriteSplit(const std::filesystem::path& path, const LabelSet& labels);
LabelSet ReadSplit(const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

}  // namespace ewgsl

#endif  // EWGSL_IO_H_
