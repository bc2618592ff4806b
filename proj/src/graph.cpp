#include "routeflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace routeflow {

namespace {

std::string join_ids(const std::vector<int>& ids) {
    std::ostringstream os;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) os << ", ";
        os << ids[i];
    }
    return os.str();
}

}  // namespace

void Network::build_adjacency() {
    const auto n = static_cast<std::size_t>(node_count_);
    out_offset_.assign(n + 1, 0);
    in_offset_.assign(n + 1, 0);
    for (const Link& l : links_) {
        ++out_offset_[static_cast<std::size_t>(l.tail) + 1];
        ++in_offset_[static_cast<std::size_t>(l.head) + 1];
    }
    std::partial_sum(out_offset_.begin(), out_offset_.end(), out_offset_.begin());
    std::partial_sum(in_offset_.begin(), in_offset_.end(), in_offset_.begin());
    out_.resize(links_.size());
    in_.resize(links_.size());
    std::vector<std::size_t> opos(out_offset_.begin(), out_offset_.end() - 1);
    std::vector<std::size_t> ipos(in_offset_.begin(), in_offset_.end() - 1);
    for (int e = 0; e < link_count(); ++e) {
        const Link& l = links_[static_cast<std::size_t>(e)];
        out_[opos[static_cast<std::size_t>(l.tail)]++] = e;
        in_[ipos[static_cast<std::size_t>(l.head)]++] = e;
    }
}

Network Network::validate(int node_count, std::vector<Link> links) {
    if (node_count < 2) throw ValidationError("network needs at least 2 nodes");
    if (links.empty()) throw ValidationError("network needs at least one link");
    const auto n = static_cast<std::size_t>(node_count);
    for (std::size_t e = 0; e < links.size(); ++e) {
        const Link& l = links[e];
        if (l.tail < 0 || l.tail >= node_count || l.head < 0 || l.head >= node_count)
            throw ValidationError("link " + std::to_string(e) + " references node outside 0.." +
                                  std::to_string(node_count - 1));
        if (l.tail == l.head)
            throw CycleDetected("self-loop on node " + std::to_string(l.tail) + " (link " +
                                std::to_string(e) + ")");
    }

    // Kahn's algorithm; ties broken by smallest original id so the relabeling
    // is deterministic.
    std::vector<int> indeg(n, 0), outdeg(n, 0);
    for (const Link& l : links) {
        ++indeg[static_cast<std::size_t>(l.head)];
        ++outdeg[static_cast<std::size_t>(l.tail)];
    }

    std::vector<int> sources, sinks;
    for (int v = 0; v < node_count; ++v) {
        if (indeg[static_cast<std::size_t>(v)] == 0) sources.push_back(v);
        if (outdeg[static_cast<std::size_t>(v)] == 0) sinks.push_back(v);
    }
    if (sources.size() != 1)
        throw MultipleOrigins(sources.empty()
                                  ? std::string("no origin: every node has an incoming link")
                                  : "expected a unique origin, found nodes {" + join_ids(sources) + "}");
    if (sinks.size() != 1)
        throw MultipleDestinations(sinks.empty()
                                       ? std::string("no destination: every node has an outgoing link")
                                       : "expected a unique destination, found nodes {" +
                                             join_ids(sinks) + "}");

    std::vector<int> order;
    order.reserve(n);
    std::vector<int> remaining = indeg;
    std::vector<int> ready = sources;  // min-heap by id
    std::make_heap(ready.begin(), ready.end(), std::greater<>{});
    std::vector<std::vector<int>> adj(n);
    for (const Link& l : links) adj[static_cast<std::size_t>(l.tail)].push_back(l.head);
    while (!ready.empty()) {
        std::pop_heap(ready.begin(), ready.end(), std::greater<>{});
        const int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (--remaining[static_cast<std::size_t>(w)] == 0) {
                ready.push_back(w);
                std::push_heap(ready.begin(), ready.end(), std::greater<>{});
            }
        }
    }
    if (order.size() != n) {
        std::vector<int> stuck;
        for (int v = 0; v < node_count; ++v)
            if (remaining[static_cast<std::size_t>(v)] > 0) stuck.push_back(v);
        throw CycleDetected("cycle through nodes {" + join_ids(stuck) + "}");
    }

    // Relabel node ids along the topological order: new id = rank.
    std::vector<int> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[static_cast<std::size_t>(order[k])] = static_cast<int>(k);

    Network net;
    net.node_count_ = node_count;
    net.original_ids_ = order;
    net.links_ = std::move(links);
    for (Link& l : net.links_) {
        l.tail = rank[static_cast<std::size_t>(l.tail)];
        l.head = rank[static_cast<std::size_t>(l.head)];
    }
    net.build_adjacency();

    // Reachability both ways; reports offenders by their original ids.
    std::vector<char> fwd(n, 0), bwd(n, 0);
    fwd[0] = 1;
    for (int v = 0; v < node_count; ++v)
        if (fwd[static_cast<std::size_t>(v)])
            for (int e : net.out_links(v)) fwd[static_cast<std::size_t>(net.link(e).head)] = 1;
    bwd[n - 1] = 1;
    for (int v = node_count - 1; v >= 0; --v)
        if (bwd[static_cast<std::size_t>(v)])
            for (int e : net.in_links(v)) bwd[static_cast<std::size_t>(net.link(e).tail)] = 1;
    std::vector<int> cut_off;
    for (int v = 0; v < node_count; ++v)
        if (!fwd[static_cast<std::size_t>(v)] || !bwd[static_cast<std::size_t>(v)])
            cut_off.push_back(net.original_ids_[static_cast<std::size_t>(v)]);
    if (!cut_off.empty())
        throw UnreachableNode("nodes {" + join_ids(cut_off) +
                              "} lie on no origin-destination path");
    return net;
}

std::vector<double> PathSet::link_flows(std::span<const double> pi) const {
    const std::size_t link_count = incidence.size();
    std::vector<double> f(link_count, 0.0);
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (int e : paths[p]) f[static_cast<std::size_t>(e)] += pi[p];
    return f;
}

std::vector<double> PathSet::path_sums(std::span<const double> per_link) const {
    std::vector<double> s(paths.size(), 0.0);
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (int e : paths[p]) s[p] += per_link[static_cast<std::size_t>(e)];
    return s;
}

double count_paths(const Network& net) {
    // Dynamic program over the reverse topological order.
    std::vector<double> c(static_cast<std::size_t>(net.node_count()), 0.0);
    c[static_cast<std::size_t>(net.destination())] = 1.0;
    for (int v = net.node_count() - 2; v >= 0; --v) {
        double total = 0.0;
        for (int e : net.out_links(v)) total += c[static_cast<std::size_t>(net.link(e).head)];
        c[static_cast<std::size_t>(v)] = total;
    }
    return c[0];
}

PathSet enumerate_paths(const Network& net, std::size_t cap) {
    const double total = count_paths(net);
    if (total > static_cast<double>(cap))
        throw PathExplosion("network has " + std::to_string(total) + " origin-destination paths, cap is " +
                            std::to_string(cap));

    PathSet ps;
    ps.paths.reserve(static_cast<std::size_t>(total));

    // Depth-first traversal taking out-links in increasing link-id order
    // yields the paths in lexicographic order directly. out_links() is built
    // by a stable counting pass over the link list, so it is already sorted
    // only if link ids appear in tail order; sort defensively per node once.
    std::vector<std::vector<int>> sorted_out(static_cast<std::size_t>(net.node_count()));
    for (int v = 0; v < net.node_count(); ++v) {
        auto span = net.out_links(v);
        sorted_out[static_cast<std::size_t>(v)].assign(span.begin(), span.end());
        std::sort(sorted_out[static_cast<std::size_t>(v)].begin(),
                  sorted_out[static_cast<std::size_t>(v)].end());
    }

    std::vector<int> current;
    std::vector<std::pair<int, std::size_t>> stack;  // (node, next out index)
    stack.emplace_back(net.origin(), 0);
    while (!stack.empty()) {
        auto& [v, idx] = stack.back();
        if (v == net.destination()) {
            ps.paths.push_back(current);
            stack.pop_back();
            if (!current.empty()) current.pop_back();
            continue;
        }
        const auto& outs = sorted_out[static_cast<std::size_t>(v)];
        if (idx == outs.size()) {
            stack.pop_back();
            if (!current.empty()) current.pop_back();
            continue;
        }
        const int e = outs[idx++];
        current.push_back(e);
        stack.emplace_back(net.link(e).head, 0);
    }

    ps.incidence.assign(static_cast<std::size_t>(net.link_count()),
                        std::vector<std::uint8_t>(ps.paths.size(), 0));
    for (std::size_t p = 0; p < ps.paths.size(); ++p)
        for (int e : ps.paths[p]) ps.incidence[static_cast<std::size_t>(e)][p] = 1;
    return ps;
}

double min_cut_capacity(const Network& net, std::span<const double> capacities) {
    if (static_cast<int>(capacities.size()) != net.link_count())
        throw LengthMismatch("capacity vector has " + std::to_string(capacities.size()) +
                             " entries for " + std::to_string(net.link_count()) + " links");
    for (std::size_t e = 0; e < capacities.size(); ++e)
        if (!(capacities[e] >= 0.0))
            throw ValidationError("capacity of link " + std::to_string(e) + " is negative");

    const double inf = std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::size_t>(net.node_count());

    // If the destination is reachable through infinite-capacity links alone,
    // every cut crosses one of them.
    {
        std::vector<char> seen(n, 0);
        seen[0] = 1;
        std::deque<int> queue{net.origin()};
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int e : net.out_links(v)) {
                const int w = net.link(e).head;
                if (capacities[static_cast<std::size_t>(e)] == inf && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    queue.push_back(w);
                }
            }
        }
        if (seen[n - 1]) return inf;
    }

    // Otherwise the min cut crosses only finite links; replace inf by a
    // value larger than any finite cut so augmentation terminates.
    double finite_sum = 0.0;
    for (double c : capacities)
        if (c != inf) finite_sum += c;
    const double big = finite_sum + 1.0;

    const int m = net.link_count();
    std::vector<double> residual(static_cast<std::size_t>(m), 0.0);   // forward
    std::vector<double> backflow(static_cast<std::size_t>(m), 0.0);   // reverse
    for (int e = 0; e < m; ++e)
        residual[static_cast<std::size_t>(e)] =
            capacities[static_cast<std::size_t>(e)] == inf ? big : capacities[static_cast<std::size_t>(e)];

    const double eps = 1e-12 * std::max(1.0, big);
    std::vector<int> parent_link(n);
    std::vector<char> parent_dir(n);  // 1 forward, 0 backward
    auto bfs = [&]() -> bool {
        std::vector<char> seen(n, 0);
        seen[0] = 1;
        std::deque<int> queue{net.origin()};
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int e : net.out_links(v)) {
                const int w = net.link(e).head;
                if (!seen[static_cast<std::size_t>(w)] && residual[static_cast<std::size_t>(e)] > eps) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    parent_link[static_cast<std::size_t>(w)] = e;
                    parent_dir[static_cast<std::size_t>(w)] = 1;
                    queue.push_back(w);
                }
            }
            for (int e : net.in_links(v)) {
                const int w = net.link(e).tail;
                if (!seen[static_cast<std::size_t>(w)] && backflow[static_cast<std::size_t>(e)] > eps) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    parent_link[static_cast<std::size_t>(w)] = e;
                    parent_dir[static_cast<std::size_t>(w)] = 0;
                    queue.push_back(w);
                }
            }
        }
        return seen[n - 1] != 0;
    };

    while (bfs()) {
        // Bottleneck along the augmenting path, then push.
        double bottleneck = inf;
        for (int v = net.destination(); v != net.origin();) {
            const int e = parent_link[static_cast<std::size_t>(v)];
            if (parent_dir[static_cast<std::size_t>(v)]) {
                bottleneck = std::min(bottleneck, residual[static_cast<std::size_t>(e)]);
                v = net.link(e).tail;
            } else {
                bottleneck = std::min(bottleneck, backflow[static_cast<std::size_t>(e)]);
                v = net.link(e).head;
            }
        }
        for (int v = net.destination(); v != net.origin();) {
            const int e = parent_link[static_cast<std::size_t>(v)];
            if (parent_dir[static_cast<std::size_t>(v)]) {
                residual[static_cast<std::size_t>(e)] -= bottleneck;
                backflow[static_cast<std::size_t>(e)] += bottleneck;
                v = net.link(e).tail;
            } else {
                backflow[static_cast<std::size_t>(e)] -= bottleneck;
                residual[static_cast<std::size_t>(e)] += bottleneck;
                v = net.link(e).head;
            }
        }
    }

    // Read the cut off the final residual reachability and return the exact
    // capacity sum, avoiding accumulation error from the augmentations.
    std::vector<char> side(n, 0);
    side[0] = 1;
    std::deque<int> queue{net.origin()};
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int e : net.out_links(v)) {
            const int w = net.link(e).head;
            if (!side[static_cast<std::size_t>(w)] && residual[static_cast<std::size_t>(e)] > eps) {
                side[static_cast<std::size_t>(w)] = 1;
                queue.push_back(w);
            }
        }
        for (int e : net.in_links(v)) {
            const int w = net.link(e).tail;
            if (!side[static_cast<std::size_t>(w)] && backflow[static_cast<std::size_t>(e)] > eps) {
                side[static_cast<std::size_t>(w)] = 1;
                queue.push_back(w);
            }
        }
    }
    double cut = 0.0;
    for (int e = 0; e < m; ++e) {
        const Link& l = net.link(e);
        if (side[static_cast<std::size_t>(l.tail)] && !side[static_cast<std::size_t>(l.head)])
            cut += capacities[static_cast<std::size_t>(e)];
    }
    return cut;
}

}  // namespace routeflow
