#include "sasa/chac.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

#include "sasa/error.hpp"
#include "text.hpp"

namespace sasa {

double ward_cost(double n_a, double n_b, double within_a, double within_b, double cross) {
  // Lance-Williams Ward unrolled: with D the sum of initial dissimilarities,
  //   cost = n_a n_b / (n_a + n_b) * [2 D(A,B) / (n_a n_b) - 2 D(A) / n_a^2 - 2 D(B) / n_b^2]
  // rewritten over similarities s = 1 - d.
  return (n_a + n_b - 2.0 * cross + 2.0 * within_a * n_b / n_a + 2.0 * within_b * n_a / n_b) /
         (n_a + n_b);
}

namespace {

// Row prefix sums of similarity inside the band: prefix[j][t] is the sum of
// s(j, j + k) for k = 1..t.
class BandPrefix {
 public:
  explicit BandPrefix(const LdDissimilarity& d)
      : p_(d.p()), h_(std::min(d.bandwidth(), d.p() > 0 ? d.p() - 1 : 0)),
        prefix_(p_ * (h_ + 1), 0.0) {
    for (std::size_t j = 0; j < p_; ++j) {
      double acc = 0.0;
      double* row = prefix_.data() + j * (h_ + 1);
      for (std::size_t k = 1; k <= h_; ++k) {
        if (j + k < p_) acc += 1.0 - d(j, j + k);
        row[k] = acc;
      }
    }
  }

  /// Sum of similarity over unordered pairs inside [a, b].
  double within(std::size_t a, std::size_t b) const {
    double acc = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      acc += prefix_[i * (h_ + 1) + std::min(h_, b - i)];
    }
    return acc;
  }

 private:
  std::size_t p_;
  std::size_t h_;
  std::vector<double> prefix_;
};

struct Node {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t id = 0;
  double within = 0.0;
  std::size_t prev = kNone;
  std::size_t next = kNone;
  std::size_t version = 0;
  // Pair (this, next): cross similarity and whether merging is allowed.
  double cross = 0.0;
  bool mergeable = false;
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  double size() const { return static_cast<double>(last - first + 1); }
};

struct Candidate {
  double cost;
  std::size_t first;  // leftmost SNP of the left cluster; identifies the slot
  std::size_t version;

  bool operator>(const Candidate& o) const {
    if (cost != o.cost) return cost > o.cost;
    return first > o.first;
  }
};

}  // namespace

Dendrogram build(const LdDissimilarity& d, std::span<const std::size_t> barriers) {
  const std::size_t p = d.p();
  for (std::size_t k = 0; k < barriers.size(); ++k) {
    if (barriers[k] < 1 || barriers[k] >= p || (k > 0 && barriers[k] <= barriers[k - 1])) {
      throw Error("chromosome barriers must be strictly increasing within [1, P)");
    }
  }
  Dendrogram t;
  t.p = p;
  t.barriers.assign(barriers.begin(), barriers.end());
  if (p < 2) return t;

  const BandPrefix prefix(d);
  std::vector<char> barrier_before(p, 0);
  for (auto b : barriers) barrier_before[b] = 1;

  // Nodes are indexed by their leftmost SNP, which never changes for a
  // surviving left cluster.
  std::vector<Node> nodes(p);
  for (std::size_t j = 0; j < p; ++j) {
    nodes[j].first = nodes[j].last = j;
    nodes[j].id = j;
    nodes[j].prev = j == 0 ? Node::kNone : j - 1;
    nodes[j].next = j + 1 == p ? Node::kNone : j + 1;
  }

  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  auto refresh = [&](std::size_t a) {
    Node& left = nodes[a];
    ++left.version;
    if (left.next == Node::kNone) {
      left.mergeable = false;
      return;
    }
    const Node& right = nodes[left.next];
    left.mergeable = !barrier_before[right.first];
    if (!left.mergeable) return;
    left.cross = prefix.within(left.first, right.last) - left.within - right.within;
    heap.push({ward_cost(left.size(), right.size(), left.within, right.within, left.cross),
               left.first, left.version});
  };
  for (std::size_t j = 0; j + 1 < p; ++j) refresh(j);

  const std::size_t merges = p - t.trees();
  t.merges.reserve(merges);
  while (t.merges.size() < merges) {
    if (heap.empty()) throw Error("constrained clustering ran out of candidate pairs");
    const Candidate c = heap.top();
    heap.pop();
    Node& left = nodes[c.first];
    if (c.version != left.version || !left.mergeable) continue;
    const std::size_t r = left.next;
    Node& right = nodes[r];

    t.merges.push_back({left.id, right.id, c.cost, right.last - left.first + 1});
    left.id = p + t.merges.size() - 1;
    left.last = right.last;
    left.within = left.within + right.within + left.cross;
    left.next = right.next;
    if (right.next != Node::kNone) nodes[right.next].prev = c.first;
    right.version = static_cast<std::size_t>(-1);  // retired

    refresh(c.first);
    if (left.prev != Node::kNone) refresh(left.prev);
  }
  return t;
}

std::vector<std::pair<std::size_t, std::size_t>> ClusterAssignment::spans() const {
  std::vector<std::pair<std::size_t, std::size_t>> out(g);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto k = labels[j];
    if (j == 0 || labels[j - 1] != k) out[k].first = j;
    out[k].second = j;
  }
  return out;
}

ClusterAssignment cut(const Dendrogram& t, std::size_t g) {
  if (g < t.trees() || g > t.p) {
    throw Error("cannot cut into " + std::to_string(g) + " clusters; valid range is [" +
                std::to_string(t.trees()) + ", " + std::to_string(t.p) + "]");
  }
  // Union-find over cluster ids; apply the first p - g merges.
  std::vector<std::size_t> parent(t.p + t.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  const std::size_t applied = t.p - g;
  for (std::size_t k = 0; k < applied; ++k) {
    const auto& m = t.merges[k];
    parent[find(m.left)] = t.p + k;
    parent[find(m.right)] = t.p + k;
  }
  ClusterAssignment a;
  a.labels.resize(t.p);
  std::size_t label = 0;
  std::size_t prev_root = static_cast<std::size_t>(-1);
  for (std::size_t j = 0; j < t.p; ++j) {
    const auto root = find(j);
    if (j > 0 && root != prev_root) ++label;
    a.labels[j] = label;
    prev_root = root;
  }
  a.g = t.p == 0 ? 0 : label + 1;
  if (a.g != g) {
    throw Error("dendrogram is inconsistent: cut produced " + std::to_string(a.g) +
                " contiguous clusters, expected " + std::to_string(g));
  }
  return a;
}

void write_dendrogram(std::ostream& out, const Dendrogram& t) {
  out << "step\tleft\tright\theight\tsize\n";
  for (std::size_t k = 0; k < t.merges.size(); ++k) {
    const auto& m = t.merges[k];
    out << k + 1 << '\t' << m.left << '\t' << m.right << '\t' << detail::format_double(m.height)
        << '\t' << m.size << '\n';
  }
}

Dendrogram read_dendrogram(std::istream& in, std::size_t p, std::vector<std::size_t> barriers) {
  Dendrogram t;
  t.p = p;
  t.barriers = std::move(barriers);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "step\tleft\tright\theight\tsize") {
    throw ParseError("dendrogram file lacks the `step left right height size` header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_ws(line);
    if (f.size() != 5) throw ParseError("dendrogram line " + std::to_string(lineno) + ": 5 fields expected");
    const std::string where = "dendrogram line " + std::to_string(lineno);
    Merge m;
    m.left = static_cast<std::size_t>(detail::parse_double(f[1], where));
    m.right = static_cast<std::size_t>(detail::parse_double(f[2], where));
    m.height = detail::parse_double(f[3], where);
    m.size = static_cast<std::size_t>(detail::parse_double(f[4], where));
    t.merges.push_back(m);
  }
  if (t.merges.size() != p - std::min(p, t.trees())) {
    throw ParseError("dendrogram holds " + std::to_string(t.merges.size()) + " merges, expected " +
                     std::to_string(p - t.trees()));
  }
  return t;
}

}  // namespace sasa
