#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "retina/trustnet.h"

namespace fixtures {

using retina::NeighborhoodId;
using retina::NodeId;

inline constexpr NodeId A{1}, B{2}, C{3}, D{4}, E{5}, F{6}, G{7};
inline constexpr NodeId kFigAuthority{64};

/// The seven-node graph: A-B, A-C, A-F, B-D, B-E, C-E, C-F, C-G. The nodes sit
/// at ring positions 0..6 of a 64-slot ring whose only other occupant is the
/// introducing authority at position 63, so no ring edges form on join.
inline retina::trust::TrustNetwork fig8(
    retina::identity::SchemeId scheme = retina::identity::SchemeId::ed25519) {
  retina::trust::TrustConfig cfg;
  cfg.scheme = scheme;
  retina::trust::TrustNetwork net(64, cfg);
  const NeighborhoodId hood{1};
  net.bootstrap_authority(net.prepare_candidate(kFigAuthority, hood, 6400));
  for (NodeId id : {A, B, C, D, E, F, G})
    net.join_node(net.prepare_candidate(id, hood, 6400 + id.value), kFigAuthority);
  for (auto [a, b] : std::vector<std::pair<NodeId, NodeId>>{
           {A, B}, {A, C}, {A, F}, {B, D}, {B, E}, {C, E}, {C, F}, {C, G}})
    net.endorse_mutually(a, b);
  return net;
}

/// Two neighborhoods of `per_hood` nodes each; the first node of each is its
/// authority and introduces the rest.
inline retina::trust::TrustNetwork two_hoods(std::uint32_t per_hood = 8) {
  retina::trust::TrustConfig cfg;
  cfg.scheme = retina::identity::SchemeId::keyed_digest;
  retina::trust::TrustNetwork net(2 * per_hood, cfg);
  for (std::uint32_t h = 0; h < 2; ++h)
    net.bootstrap_authority(
        net.prepare_candidate(NodeId{1 + per_hood * h}, NeighborhoodId{h + 1}, 1 + per_hood * h));
  for (std::uint32_t v = 1; v <= 2 * per_hood; ++v) {
    if ((v - 1) % per_hood == 0) continue;
    const NeighborhoodId hood{(v - 1) / per_hood + 1};
    net.join_node(net.prepare_candidate(NodeId{v}, hood, v), net.find_introducer(hood));
  }
  return net;
}

/// Independent shortest-path oracle: every path of minimum length from `a`
/// to `b` over `adj`, skipping excluded intermediates. Paths are returned as
/// intermediate sequences in lexicographic order.
inline std::vector<std::vector<NodeId>> all_shortest_paths(
    const std::map<NodeId, std::set<NodeId>>& adj, NodeId a, NodeId b, std::size_t max_edges,
    const std::set<NodeId>& excluded = {}) {
  std::vector<std::vector<NodeId>> found;
  // Iterative deepening over simple paths; fine for test-sized graphs.
  for (std::size_t len = 1; len <= max_edges && found.empty(); ++len) {
    std::vector<NodeId> path{a};
    std::function<void()> dfs = [&] {
      const NodeId u = path.back();
      if (path.size() - 1 == len) {
        if (u == b) found.emplace_back(path.begin() + 1, path.end() - 1);
        return;
      }
      auto it = adj.find(u);
      if (it == adj.end()) return;
      for (NodeId v : it->second) {
        if (std::find(path.begin(), path.end(), v) != path.end()) continue;
        const bool last = path.size() == len;
        if (!last && (v == b || excluded.count(v))) continue;
        if (last && v != b) continue;
        path.push_back(v);
        dfs();
        path.pop_back();
      }
    };
    dfs();
  }
  std::sort(found.begin(), found.end());
  return found;
}

inline std::map<NodeId, std::set<NodeId>> adjacency_of(const retina::trust::TrustNetwork& net) {
  std::map<NodeId, std::set<NodeId>> adj;
  for (NodeId id : net.node_ids()) adj[id];
  for (auto [a, b] : net.edges()) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  return adj;
}

/// Hop distance by plain BFS, or SIZE_MAX when unreachable.
inline std::size_t hop_distance(const std::map<NodeId, std::set<NodeId>>& adj, NodeId a, NodeId b) {
  std::map<NodeId, std::size_t> dist{{a, 0}};
  std::queue<NodeId> q;
  q.push(a);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    if (u == b) return dist[u];
    for (NodeId v : adj.at(u))
      if (!dist.count(v)) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace fixtures
