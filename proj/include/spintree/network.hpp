#pragma once

// Spin-network graph model and builders for binary trees, auxiliary spins,
// the modified order-2 tree and singlet-link concatenations.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spintree/errors.hpp"

namespace spintree {

/// Label of a spin. Canonical forms: "(a,b)", "(a,b)/aux", "link:<k>",
/// each optionally prefixed with "T<i>:" inside concatenated networks.
/// Any non-empty string is accepted so hand-written networks can use
/// their own names.
class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string label) : label_(std::move(label)) {}
  NodeId(const char* label) : label_(label) {}  // NOLINT(google-explicit-constructor)

  const std::string& str() const noexcept { return label_; }
  bool empty() const noexcept { return label_.empty(); }

  auto operator<=>(const NodeId&) const = default;

 private:
  std::string label_;
};

/// Structured view of a canonical label.
struct LabelParts {
  enum class Kind { Site, Aux, Link };

  std::optional<int> tree;
  Kind kind = Kind::Site;
  int a = 0;
  int b = 0;
  int link = 0;

  bool operator==(const LabelParts&) const = default;
};

inline std::string format_label(const LabelParts& p) {
  std::string out;
  if (p.tree) out += "T" + std::to_string(*p.tree) + ":";
  switch (p.kind) {
    case LabelParts::Kind::Site:
      out += "(" + std::to_string(p.a) + "," + std::to_string(p.b) + ")";
      break;
    case LabelParts::Kind::Aux:
      out += "(" + std::to_string(p.a) + "," + std::to_string(p.b) + ")/aux";
      break;
    case LabelParts::Kind::Link:
      out += "link:" + std::to_string(p.link);
      break;
  }
  return out;
}

/// Returns nullopt for labels outside the canonical grammar (including
/// non-canonical spellings such as leading zeros).
inline std::optional<LabelParts> parse_label(std::string_view label) {
  static const std::regex grammar(
      R"(^(?:T(0|[1-9][0-9]{0,8}):)?(?:\((0|[1-9][0-9]{0,8}),(0|[1-9][0-9]{0,8})\)(/aux)?|link:(0|[1-9][0-9]{0,8}))$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(label.begin(), label.end(), m, grammar)) return std::nullopt;
  LabelParts p;
  if (m[1].matched) p.tree = std::stoi(m[1].str());
  if (m[5].matched) {
    p.kind = LabelParts::Kind::Link;
    p.link = std::stoi(m[5].str());
  } else {
    p.kind = m[4].matched ? LabelParts::Kind::Aux : LabelParts::Kind::Site;
    p.a = std::stoi(m[2].str());
    p.b = std::stoi(m[3].str());
  }
  return p;
}

inline NodeId site_id(int a, int b) {
  return NodeId(format_label({std::nullopt, LabelParts::Kind::Site, a, b, 0}));
}

inline NodeId link_id(int k) {
  return NodeId(format_label({std::nullopt, LabelParts::Kind::Link, 0, 0, k}));
}

/// Auxiliary partner of a port node: "<label>/aux".
inline NodeId aux_of(const NodeId& site) { return NodeId(site.str() + "/aux"); }

/// Prefixes a label with the tree-instance tag "T<i>:".
inline NodeId in_tree(int tree, const NodeId& id) {
  return NodeId("T" + std::to_string(tree) + ":" + id.str());
}

struct Edge {
  std::size_t a;
  std::size_t b;
  double j;
};

/// Labeled spin graph: nodes in insertion order (which fixes matrix
/// indices), signed XY couplings and per-node local fields.
class NetworkSpec {
 public:
  std::size_t add_node(const NodeId& id, double omega) {
    if (id.empty()) throw InvalidArgument("node label must be non-empty");
    if (!std::isfinite(omega)) throw InvalidArgument("field of " + id.str() + " is not finite");
    if (index_.contains(id.str())) throw InvalidArgument("duplicate node label " + id.str());
    index_.emplace(id.str(), nodes_.size());
    nodes_.push_back(id);
    omega_.push_back(omega);
    return nodes_.size() - 1;
  }

  void add_edge(const NodeId& a, const NodeId& b, double j) {
    const std::size_t ia = at(a);
    const std::size_t ib = at(b);
    if (ia == ib) throw InvalidArgument("self-edge on " + a.str());
    if (j == 0.0 || !std::isfinite(j)) {
      throw InvalidArgument("coupling " + a.str() + "-" + b.str() + " must be finite and nonzero");
    }
    const auto key = std::minmax(ia, ib);
    if (!pairs_.insert(key).second) {
      throw InvalidArgument("duplicate edge " + a.str() + "-" + b.str());
    }
    edges_.push_back({ia, ib, j});
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& fields() const noexcept { return omega_; }
  double omega(std::size_t i) const { return omega_.at(i); }
  const NodeId& node(std::size_t i) const { return nodes_.at(i); }

  std::optional<std::size_t> find(const NodeId& id) const {
    auto it = index_.find(id.str());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const NodeId& id) const { return index_.contains(id.str()); }

  std::size_t at(const NodeId& id) const {
    if (auto i = find(id)) return *i;
    throw InvalidArgument("unknown node " + id.str());
  }

  std::optional<double> coupling(const NodeId& a, const NodeId& b) const {
    const auto ia = find(a);
    const auto ib = find(b);
    if (!ia || !ib) return std::nullopt;
    for (const Edge& e : edges_) {
      if ((e.a == *ia && e.b == *ib) || (e.a == *ib && e.b == *ia)) return e.j;
    }
    return std::nullopt;
  }

  std::size_t degree(const NodeId& id) const {
    const std::size_t i = at(id);
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [i](const Edge& e) { return e.a == i || e.b == i; }));
  }

  /// Neighbours of a node with the coupling to each, in edge order.
  std::vector<std::pair<std::size_t, double>> neighbours(std::size_t i) const {
    std::vector<std::pair<std::size_t, double>> out;
    for (const Edge& e : edges_) {
      if (e.a == i) out.emplace_back(e.b, e.j);
      if (e.b == i) out.emplace_back(e.a, e.j);
    }
    return out;
  }

  bool is_connected() const {
    if (nodes_.empty()) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (const auto& [k, j] : neighbours(i)) {
        if (!seen[k]) {
          seen[k] = 1;
          stack.push_back(k);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<double> omega_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::set<std::pair<std::size_t, std::size_t>> pairs_;
};

/// Binary tree of the given order: entry pair (0,0)-(0,1) then bifurcations
/// down to 2^order leaves in column `order`.
inline NetworkSpec build_binary_tree(int order, double j0, double omega) {
  if (order < 1) throw InvalidArgument("tree order must be >= 1, got " + std::to_string(order));
  if (order > 24) throw InvalidArgument("tree order too large");
  if (j0 == 0.0) throw InvalidArgument("j0 must be nonzero");
  NetworkSpec net;
  net.add_node(site_id(0, 0), omega);
  net.add_node(site_id(0, 1), omega);
  for (int a = 1; a <= order; ++a) {
    for (int b = 1; b <= (1 << a); ++b) net.add_node(site_id(a, b), omega);
  }
  net.add_edge(site_id(0, 0), site_id(0, 1), j0);
  net.add_edge(site_id(0, 1), site_id(1, 1), j0);
  net.add_edge(site_id(0, 1), site_id(1, 2), j0);
  for (int a = 1; a < order; ++a) {
    for (int b = 1; b <= (1 << a); ++b) {
      net.add_edge(site_id(a, b), site_id(a + 1, 2 * b - 1), j0);
      net.add_edge(site_id(a, b), site_id(a + 1, 2 * b), j0);
    }
  }
  return net;
}

/// Adds "(0,0)/aux" coupled only to (0,1).
inline NetworkSpec attach_sender_aux(const NetworkSpec& net, double j0, double omega) {
  if (!net.contains(site_id(0, 0))) throw InvalidArgument("network has no (0,0) node");
  if (!net.contains(site_id(0, 1))) throw InvalidArgument("network has no (0,1) node");
  NetworkSpec out = net;
  const NodeId aux = aux_of(site_id(0, 0));
  out.add_node(aux, omega);
  out.add_edge(aux, site_id(0, 1), j0);
  return out;
}

/// Order-2 tree with sender aux plus an aux beside every leaf; all
/// column-1 -> column-2 couplings (bare and aux) scaled by 1/sqrt(2) so the
/// triplet-reduced chain keeps uniform coupling sqrt(2)*j0.
inline NetworkSpec build_modified_bt2(double j0, double omega) {
  if (j0 == 0.0) throw InvalidArgument("j0 must be nonzero");
  const double scaled = j0 / std::sqrt(2.0);
  NetworkSpec net;
  net.add_node(site_id(0, 0), omega);
  net.add_node(site_id(0, 1), omega);
  for (int b = 1; b <= 2; ++b) net.add_node(site_id(1, b), omega);
  for (int b = 1; b <= 4; ++b) net.add_node(site_id(2, b), omega);
  net.add_edge(site_id(0, 0), site_id(0, 1), j0);
  net.add_edge(site_id(0, 1), site_id(1, 1), j0);
  net.add_edge(site_id(0, 1), site_id(1, 2), j0);
  for (int b = 1; b <= 4; ++b) net.add_edge(site_id(1, (b + 1) / 2), site_id(2, b), scaled);
  net = attach_sender_aux(net, j0, omega);
  for (int b = 1; b <= 4; ++b) {
    const NodeId aux = aux_of(site_id(2, b));
    net.add_node(aux, omega);
    net.add_edge(site_id(1, (b + 1) / 2), aux, scaled);
  }
  return net;
}

/// One link spin coupled +j/-j/+j/-j to (out_site, out_aux, in_site, in_aux).
inline NetworkSpec attach_singlet_link(const NetworkSpec& net, const NodeId& out_site, const NodeId& out_aux,
                                       const NodeId& in_site, const NodeId& in_aux, double j, double omega,
                                       const NodeId& link_label) {
  if (j == 0.0) throw InvalidArgument("singlet link coupling must be nonzero");
  for (const NodeId* id : {&out_site, &out_aux, &in_site, &in_aux}) {
    if (!net.contains(*id)) throw InvalidArgument("singlet link endpoint " + id->str() + " not in network");
  }
  NetworkSpec out = net;
  out.add_node(link_label, omega);
  out.add_edge(link_label, out_site, j);
  out.add_edge(link_label, out_aux, -j);
  out.add_edge(link_label, in_site, j);
  out.add_edge(link_label, in_aux, -j);
  return out;
}

/// Output port `leaf` of tree `from_tree` feeds the input of tree `to_tree`.
struct TreeWiring {
  int from_tree = 0;
  int leaf = 1;
  int to_tree = 1;
};

struct ConcatLayout {
  std::vector<TreeWiring> wirings;

  /// Trees are numbered 0..tree_count()-1; every index must appear in a wiring.
  int tree_count() const {
    int hi = -1;
    for (const auto& w : wirings) hi = std::max({hi, w.from_tree, w.to_tree});
    return hi + 1;
  }
};

inline ConcatLayout two_tree_layout(int leaf = 1) { return {{{0, leaf, 1}}}; }

/// Root tree with a second-order tree on each of its four outputs.
inline ConcatLayout sixteen_output_layout() { return {{{0, 1, 1}, {0, 2, 2}, {0, 3, 3}, {0, 4, 4}}}; }

namespace detail {

inline void validate_layout(const ConcatLayout& layout) {
  if (layout.wirings.empty()) throw InvalidArgument("concatenation needs at least one wiring");
  const int trees = layout.tree_count();
  std::set<std::pair<int, int>> ports;
  std::vector<int> parent(static_cast<std::size_t>(trees), -1);
  std::vector<char> used(static_cast<std::size_t>(trees), 0);
  for (const auto& w : layout.wirings) {
    if (w.from_tree < 0 || w.to_tree < 0) throw InvalidArgument("negative tree index in wiring");
    if (w.leaf < 1 || w.leaf > 4) throw InvalidArgument("output port must be in 1..4");
    if (w.from_tree == w.to_tree) throw InvalidArgument("tree wired to itself");
    if (!ports.insert({w.from_tree, w.leaf}).second) {
      throw InvalidArgument("output port " + std::to_string(w.leaf) + " of tree " + std::to_string(w.from_tree) +
                            " used twice");
    }
    auto& p = parent[static_cast<std::size_t>(w.to_tree)];
    if (p != -1) throw InvalidArgument("tree " + std::to_string(w.to_tree) + " has more than one input link");
    p = w.from_tree;
    used[static_cast<std::size_t>(w.from_tree)] = 1;
    used[static_cast<std::size_t>(w.to_tree)] = 1;
  }
  for (int t = 0; t < trees; ++t) {
    if (!used[static_cast<std::size_t>(t)]) throw InvalidArgument("tree " + std::to_string(t) + " is not wired");
    // Each tree has at most one parent, so walking up either reaches a root or loops.
    int steps = 0;
    for (int cur = t; cur != -1; cur = parent[static_cast<std::size_t>(cur)]) {
      if (++steps > trees) throw InvalidArgument("cyclic tree wiring");
    }
  }
}

}  // namespace detail

/// Modified order-2 trees (labels prefixed "T<i>:") joined by singlet links
/// "link:<k>", where k is the wiring index. Link couplings equal j0.
inline NetworkSpec concatenate_trees(const ConcatLayout& layout, double j0, double omega) {
  detail::validate_layout(layout);
  if (j0 == 0.0) throw InvalidArgument("j0 must be nonzero");
  const NetworkSpec tree = build_modified_bt2(j0, omega);
  NetworkSpec net;
  for (int t = 0; t < layout.tree_count(); ++t) {
    for (std::size_t i = 0; i < tree.size(); ++i) net.add_node(in_tree(t, tree.node(i)), tree.omega(i));
    for (const Edge& e : tree.edges()) net.add_edge(in_tree(t, tree.node(e.a)), in_tree(t, tree.node(e.b)), e.j);
  }
  for (std::size_t k = 0; k < layout.wirings.size(); ++k) {
    const auto& w = layout.wirings[k];
    const NodeId out_site = in_tree(w.from_tree, site_id(2, w.leaf));
    const NodeId in_site = in_tree(w.to_tree, site_id(0, 0));
    net = attach_singlet_link(net, out_site, aux_of(out_site), in_site, aux_of(in_site), j0, omega,
                              link_id(static_cast<int>(k)));
  }
  return net;
}

}  // namespace spintree
