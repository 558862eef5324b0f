#include "ewgsl/checkpoint.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ewgsl/config.h"
#include "ewgsl/io.h"

namespace ewgsl {
namespace {

constexpr const char* kMagic = "ewgsl-checkpoint 1";

double ParseValue(const std::filesystem::path& path, std::size_t line, const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(path, line, "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open for writing");
  out << kMagic << '\n';
  for (const auto& [k, v] : HyperparametersToMap(checkpoint.hyper)) {
    out << "hyper " << k << '=' << v << '\n';
  }
  const auto& layers = checkpoint.params.layers;
  out << "layers " << layers.size() << '\n';
  for (const auto& layer : layers) {
    out << "layer " << layer.in_dim() << ' ' << layer.out_dim() << ' ' << layer.num_heads()
        << ' ' << (layer.activation == Activation::kElu ? "elu" : "identity") << '\n';
  }
  ModelParams copy = checkpoint.params;
  for (auto block : ParameterBlocks(copy)) {
    out << "block " << block.size();
    for (double v : block) out << ' ' << FormatDouble(v);
    out << '\n';
  }
  out << "end\n";
  if (!out) throw ParseError(path, 0, "write failed");
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open checkpoint");
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw ParseError(path, line_no, "unexpected end of file");
    ++line_no;
    return line;
  };
  if (next() != kMagic) throw ParseError(path, 1, "not an ewgsl checkpoint (version 1)");

  Checkpoint cp;
  next();
  while (line.rfind("hyper ", 0) == 0) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, line_no, "expected hyper key=value");
    try {
      SetHyperparameter(cp.hyper, line.substr(6, eq - 6), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, line_no, e.what());
    }
    next();
  }

  std::istringstream header(line);
  std::string tag;
  std::size_t num_layers = 0;
  if (!(header >> tag >> num_layers) || tag != "layers" || num_layers == 0) {
    throw ParseError(path, line_no, "expected 'layers N'");
  }
  for (std::size_t l = 0; l < num_layers; ++l) {
    std::istringstream ls(next());
    int in_dim = 0, out_dim = 0, heads = 0;
    std::string act;
    if (!(ls >> tag >> in_dim >> out_dim >> heads >> act) || tag != "layer" || in_dim <= 0 ||
        out_dim <= 0 || heads <= 0 || (act != "elu" && act != "identity")) {
      throw ParseError(path, line_no, "expected 'layer IN OUT HEADS elu|identity'");
    }
    LayerParams layer;
    layer.activation = act == "elu" ? Activation::kElu : Activation::kIdentity;
    layer.beta = Vector::Zero(heads);
    layer.heads.resize(heads);
    for (auto& h : layer.heads) {
      h.weight = Matrix::Zero(out_dim, in_dim);
      h.att_src = Vector::Zero(out_dim);
      h.att_dst = Vector::Zero(out_dim);
    }
    cp.params.layers.push_back(std::move(layer));
  }

  for (auto block : ParameterBlocks(cp.params)) {
    std::istringstream bs(next());
    std::size_t count = 0;
    if (!(bs >> tag >> count) || tag != "block" || count != block.size()) {
      throw ParseError(path, line_no,
                       "expected 'block " + std::to_string(block.size()) + " ...'");
    }
    std::string token;
    for (double& v : block) {
      if (!(bs >> token)) throw ParseError(path, line_no, "block is short");
      v = ParseValue(path, line_no, token);
    }
    if (bs >> token) throw ParseError(path, line_no, "block has extra values");
  }
  if (next() != "end") throw ParseError(path, line_no, "expected 'end'");
  return cp;
}

}  // namespace ewgsl
