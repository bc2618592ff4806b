#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "routeflow/errors.hpp"

namespace routeflow {

/// Directed link between two nodes. Endpoints refer to relabeled node ids
/// once the link is stored inside a validated Network.
struct Link {
    int tail = 0;
    int head = 0;
    friend bool operator==(const Link&, const Link&) = default;
};

/// Validated acyclic transportation network with a unique origin and a
/// unique destination.
///
/// Construction relabels node ids along a topological order so that every
/// link (u, v) satisfies u < v, the origin is node 0 and the destination is
/// node n-1. Link order is preserved from the input, so per-link data
/// (capacities, densities) keeps its original indexing.
class Network {
public:
    /// Validates a raw node/link description.
    ///
    /// Throws CycleDetected, MultipleOrigins, MultipleDestinations or
    /// UnreachableNode; the message names the offending nodes or links.
    static Network validate(int node_count, std::vector<Link> links);

    int node_count() const { return node_count_; }
    int link_count() const { return static_cast<int>(links_.size()); }
    int origin() const { return 0; }
    int destination() const { return node_count_ - 1; }

    const std::vector<Link>& links() const { return links_; }
    const Link& link(int e) const { return links_[static_cast<std::size_t>(e)]; }

    /// Link ids leaving node v.
    std::span<const int> out_links(int v) const {
        return {out_.data() + out_offset_[static_cast<std::size_t>(v)],
                out_offset_[static_cast<std::size_t>(v) + 1] - out_offset_[static_cast<std::size_t>(v)]};
    }
    /// Link ids entering node v.
    std::span<const int> in_links(int v) const {
        return {in_.data() + in_offset_[static_cast<std::size_t>(v)],
                in_offset_[static_cast<std::size_t>(v) + 1] - in_offset_[static_cast<std::size_t>(v)]};
    }

    /// original_ids()[k] is the input label of relabeled node k.
    const std::vector<int>& original_ids() const { return original_ids_; }

private:
    Network() = default;
    void build_adjacency();

    int node_count_ = 0;
    std::vector<Link> links_;
    std::vector<int> original_ids_;
    // CSR-style adjacency over link ids.
    std::vector<std::size_t> out_offset_, in_offset_;
    std::vector<int> out_, in_;
};

/// All origin-destination paths of a network plus the link-path incidence
/// matrix.
struct PathSet {
    /// Each path is a sequence of consecutive link ids from origin to
    /// destination, sorted lexicographically by link-id sequence.
    std::vector<std::vector<int>> paths;
    /// incidence[e][p] == 1 iff link e lies on path p.
    std::vector<std::vector<std::uint8_t>> incidence;

    int count() const { return static_cast<int>(paths.size()); }

    /// f = A * pi, the link flows induced by a path preference.
    std::vector<double> link_flows(std::span<const double> pi) const;
    /// c = A' * x, per-path sums of a per-link quantity.
    std::vector<double> path_sums(std::span<const double> per_link) const;
};

/// Enumerates every origin-destination path in deterministic (lexicographic)
/// order. Throws PathExplosion if the path count exceeds `cap`.
PathSet enumerate_paths(const Network& net, std::size_t cap = 1'000'000);

/// Number of origin-destination paths without enumerating them.
double count_paths(const Network& net);

/// Min-cut capacity C* of the network: the minimum over origin-destination
/// cuts of the total capacity crossing the cut. Computed by breadth-first
/// augmenting-path max-flow; the returned value is the exact capacity sum of
/// the min cut read off the final residual graph. Capacities may be +inf.
double min_cut_capacity(const Network& net, std::span<const double> capacities);

}  // namespace routeflow
