#include "ewgsl/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "ewgsl/io.h"

namespace ewgsl {

std::size_t LabelSet::NumLabeled() const {
  return static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), true));
}

std::vector<NodeId> LabelSet::LabeledNodes() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (labeled[i]) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::vector<NodeId> LabelSet::UnlabeledNodes() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labeled.empty() || !labeled[i]) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

const std::vector<std::string>& MovieLensGenreNames() {
  static const std::vector<std::string> kNames = {
      "unknown", "Action",    "Adventure", "Animation", "Children's",
      "Comedy",  "Crime",     "Documentary", "Drama",   "Fantasy",
      "Film-Noir", "Horror",  "Musical",   "Mystery",   "Romance",
      "Sci-Fi",  "Thriller",  "War",       "Western"};
  return kNames;
}

namespace {

struct Rating {
  std::int64_t timestamp;
  int item;
};

std::vector<std::string> SplitOn(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T ParseNumber(const std::string& text, const std::filesystem::path& file,
              std::size_t line_no) {
  T value{};
  std::istringstream in(text);
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ParseError(file, line_no, "expected a number, got '" + text + "'");
  }
  return value;
}

}  // namespace

LabeledGraph BuildMl100kGraph(const std::filesystem::path& ratings_file,
                              const std::filesystem::path& items_file,
                              const Ml100kOptions& options, Ml100kStats* stats) {
  std::ifstream ratings_in(ratings_file);
  if (!ratings_in) throw ParseError(ratings_file, 0, "cannot open file");
  std::map<int, std::vector<Rating>> by_user;
  std::set<int> rated_items;
  std::size_t num_ratings = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ratings_in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitOn(line, '\t');
    if (fields.size() != 4) {
      throw ParseError(ratings_file, line_no, "expected 4 tab-separated fields");
    }
    const int user = ParseNumber<int>(fields[0], ratings_file, line_no);
    const int item = ParseNumber<int>(fields[1], ratings_file, line_no);
    ParseNumber<int>(fields[2], ratings_file, line_no);
    const auto ts = ParseNumber<std::int64_t>(fields[3], ratings_file, line_no);
    by_user[user].push_back({ts, item});
    rated_items.insert(item);
    ++num_ratings;
  }

  std::ifstream items_in(items_file);
  if (!items_in) throw ParseError(items_file, 0, "cannot open file");
  std::map<int, std::vector<int>> item_genres;
  line_no = 0;
  while (std::getline(items_in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitOn(line, '|');
    if (fields.size() < kMovieLensGenres + 1) {
      throw ParseError(items_file, line_no, "expected an item id and 19 genre flags");
    }
    const int item = ParseNumber<int>(fields[0], items_file, line_no);
    std::vector<int> genres;
    const std::size_t first_flag = fields.size() - kMovieLensGenres;
    for (int g = 0; g < kMovieLensGenres; ++g) {
      const int flag = ParseNumber<int>(fields[first_flag + g], items_file, line_no);
      if (flag != 0 && flag != 1) {
        throw ParseError(items_file, line_no, "genre flag must be 0 or 1");
      }
      if (flag == 1) genres.push_back(g);
    }
    item_genres[item] = std::move(genres);
  }

  std::vector<std::size_t> genre_frequency(kMovieLensGenres, 0);
  for (const auto& [item, genres] : item_genres) {
    for (int g : genres) ++genre_frequency[g];
  }
  auto label_of = [&](int item) {
    auto it = item_genres.find(item);
    if (it == item_genres.end()) {
      throw std::runtime_error("rated item " + std::to_string(item) +
                               " is missing from " + items_file.string());
    }
    if (it->second.empty()) return 0;  // "unknown"
    int best = it->second.front();
    for (int g : it->second) {
      if (genre_frequency[g] > genre_frequency[best]) best = g;
    }
    return best;
  };

  std::map<std::pair<int, int>, double> pair_weight;
  for (auto& [user, ratings] : by_user) {
    std::sort(ratings.begin(), ratings.end(), [](const Rating& a, const Rating& b) {
      return std::tie(a.timestamp, a.item) < std::tie(b.timestamp, b.item);
    });
    for (std::size_t k = 1; k < ratings.size(); ++k) {
      const int a = ratings[k - 1].item;
      const int b = ratings[k].item;
      if (a == b) continue;
      pair_weight[std::minmax(a, b)] += 1.0;
    }
  }

  std::map<int, int> item_label;
  for (const auto& [key, w] : pair_weight) {
    item_label.emplace(key.first, label_of(key.first));
    item_label.emplace(key.second, label_of(key.second));
  }

  std::vector<std::size_t> class_size(kMovieLensGenres, 0);
  for (const auto& [item, g] : item_label) ++class_size[g];
  std::vector<int> order(kMovieLensGenres);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return class_size[a] > class_size[b]; });
  std::vector<bool> keep_genre(kMovieLensGenres, false);
  const int max_classes = options.max_classes > 0 ? options.max_classes : kMovieLensGenres;
  for (int r = 0; r < std::min(max_classes, kMovieLensGenres); ++r) {
    if (class_size[order[r]] > 0) keep_genre[order[r]] = true;
  }

  std::set<int> node_items;
  for (const auto& [key, w] : pair_weight) {
    if (keep_genre[item_label[key.first]] && keep_genre[item_label[key.second]]) {
      node_items.insert(key.first);
      node_items.insert(key.second);
    }
  }
  std::map<int, NodeId> node_of;
  for (int item : node_items) {
    node_of.emplace(item, static_cast<NodeId>(node_of.size()));
  }
  std::map<int, int> class_of;
  for (int g = 0; g < kMovieLensGenres; ++g) {
    bool used = false;
    for (int item : node_items) used = used || item_label[item] == g;
    if (used) class_of.emplace(g, static_cast<int>(class_of.size()));
  }

  std::vector<Edge> edges;
  for (const auto& [key, w] : pair_weight) {
    auto a = node_of.find(key.first);
    auto b = node_of.find(key.second);
    if (a == node_of.end() || b == node_of.end()) continue;
    edges.push_back({a->second, b->second, w});
  }

  LabeledGraph out;
  out.graph = WeightedGraph::FromEdges(static_cast<NodeId>(node_of.size()), edges);
  out.labels.num_classes = static_cast<int>(class_of.size());
  out.labels.labels.resize(node_of.size());
  for (const auto& [item, node] : node_of) {
    out.labels.labels[node] = class_of.at(item_label[item]);
  }

  if (stats != nullptr) {
    stats->num_ratings = num_ratings;
    stats->num_users = by_user.size();
    stats->num_movies_rated = rated_items.size();
    stats->num_nodes = out.graph.num_nodes();
    stats->num_edges = out.graph.num_edges();
    stats->num_classes = out.labels.num_classes;
    stats->class_genres.clear();
    for (const auto& [g, c] : class_of) stats->class_genres.push_back(g);
    stats->node_items.assign(node_items.begin(), node_items.end());
  }
  return out;
}

LabeledGraph GenerateSyntheticGraph(const SyntheticSpec& spec) {
  if (spec.num_nodes < 2 || spec.num_classes < 1 || spec.num_classes > spec.num_nodes) {
    throw std::invalid_argument("synthetic graph needs 2 <= n and 1 <= c <= n");
  }
  auto valid_p = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!valid_p(spec.intra_p) || !valid_p(spec.inter_p)) {
    throw std::invalid_argument("edge probabilities must lie in [0, 1]");
  }
  if (!(spec.intra_p > spec.inter_p)) {
    throw std::invalid_argument("intra_p must exceed inter_p");
  }
  if (spec.intra_weight_mean < 0.0 || spec.inter_weight_mean < 0.0) {
    throw std::invalid_argument("weight means must be non-negative");
  }

  LabeledGraph out;
  out.labels.num_classes = spec.num_classes;
  out.labels.labels.resize(spec.num_nodes);
  for (NodeId i = 0; i < spec.num_nodes; ++i) {
    out.labels.labels[i] = static_cast<int>(
        (static_cast<std::int64_t>(i) * spec.num_classes) / spec.num_nodes);
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::poisson_distribution<int> intra_weight(spec.intra_weight_mean);
  std::poisson_distribution<int> inter_weight(spec.inter_weight_mean);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < spec.num_nodes; ++u) {
    for (NodeId v = u + 1; v < spec.num_nodes; ++v) {
      const bool same = out.labels.labels[u] == out.labels.labels[v];
      if (coin(rng) >= (same ? spec.intra_p : spec.inter_p)) continue;
      const int extra = same ? (spec.intra_weight_mean > 0 ? intra_weight(rng) : 0)
                             : (spec.inter_weight_mean > 0 ? inter_weight(rng) : 0);
      edges.push_back({u, v, 1.0 + extra});
    }
  }
  if (edges.empty()) throw std::invalid_argument("synthetic spec produced an empty graph");
  out.graph = WeightedGraph::FromEdges(spec.num_nodes, edges);
  return out;
}

LabelSet SplitLabels(const LabelSet& labels, double labeled_fraction,
                     std::uint64_t seed) {
  if (!(labeled_fraction > 0.0 && labeled_fraction < 1.0)) {
    throw std::invalid_argument("labeled fraction must lie in (0, 1)");
  }
  const int c = labels.num_classes;
  std::vector<std::vector<NodeId>> members(c);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels.labels[i];
    if (y < 0 || y >= c) throw std::invalid_argument("label out of range");
    members[y].push_back(static_cast<NodeId>(i));
  }
  for (int k = 0; k < c; ++k) {
    if (members[k].empty()) {
      throw std::invalid_argument("class " + std::to_string(k) + " has no nodes");
    }
  }

  const double n = static_cast<double>(labels.size());
  const auto total = static_cast<std::size_t>(std::ceil(labeled_fraction * n - 1e-9));
  std::vector<std::size_t> quota(c);
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (int k = 0; k < c; ++k) {
    const double exact = labeled_fraction * static_cast<double>(members[k].size());
    quota[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(exact + 1e-9)));
    assigned += quota[k];
    remainders.emplace_back(exact - std::floor(exact + 1e-9), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [rem, k] : remainders) {
    if (assigned >= total) break;
    if (quota[k] < members[k].size()) {
      ++quota[k];
      ++assigned;
    }
  }

  LabelSet out = labels;
  out.labeled.assign(labels.size(), false);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < c; ++k) {
    std::vector<NodeId> pool = members[k];
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t r = 0; r < quota[k]; ++r) out.labeled[pool[r]] = true;
  }
  return out;
}

}  // namespace ewgsl
