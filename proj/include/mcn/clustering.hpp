#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "mcn/errors.hpp"
#include "mcn/state_machine.hpp"

namespace mcn {

// Traffic-similarity features for one UE-hour: per dominant event type the
// event count and the population SD of the matching top-level sojourns.
struct FeatureVector {
    static constexpr std::size_t kDims = 4;
    double n_srv_req = 0;
    double n_s1_rel = 0;
    double sd_connected_s = 0;
    double sd_idle_s = 0;

    double operator[](std::size_t d) const {
        switch (d) {
            case 0: return n_srv_req;
            case 1: return n_s1_rel;
            case 2: return sd_connected_s;
            default: return sd_idle_s;
        }
    }
    double& operator[](std::size_t d) {
        switch (d) {
            case 0: return n_srv_req;
            case 1: return n_s1_rel;
            case 2: return sd_connected_s;
            default: return sd_idle_s;
        }
    }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline double population_sd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

// Features for one UE over one hour of replayed traffic: event counts in
// the hour, SDs over the completed CONNECTED/IDLE top-level sojourns that
// ended inside the hour.
inline FeatureVector extract_features(std::span<const ControlEvent> hour_events,
                                      std::span<const SojournSample> hour_sojourns) {
    FeatureVector f;
    for (const auto& ev : hour_events) {
        if (ev.event_type == EventType::SRV_REQ) f.n_srv_req += 1;
        else if (ev.event_type == EventType::S1_CONN_REL) f.n_s1_rel += 1;
    }
    std::vector<double> connected, idle;
    for (const auto& s : hour_sojourns) {
        if (s.level != Level::TOP || s.censored) continue;
        if (s.top_from == TopState::CONNECTED)
            connected.push_back(static_cast<double>(s.duration_ms) / 1000.0);
        else if (s.top_from == TopState::IDLE)
            idle.push_back(static_cast<double>(s.duration_ms) / 1000.0);
    }
    f.sd_connected_s = population_sd(connected);
    f.sd_idle_s = population_sd(idle);
    return f;
}

struct ClusterParams {
    std::array<double, FeatureVector::kDims> theta_f = {5.0, 5.0, 5.0, 5.0};
    std::size_t theta_n = 1000;
};

// Quadtree over the feature space. Internal nodes bisect the two features
// with the largest range-to-threshold ratio at the midpoints of the node
// box; the four children tile the parent box exactly. Leaves are clusters.
class ClusterTree {
public:
    struct Box {
        std::array<double, FeatureVector::kDims> lo{};
        std::array<double, FeatureVector::kDims> hi{};
    };

    struct Node {
        Box box;
        // Leaf payload
        std::int32_t cluster_id = -1;
        std::vector<std::uint32_t> members;  // indices into the input feature list
        // Internal payload: split dims (d0, d1) and their midpoints
        std::array<std::size_t, 2> split_dim{};
        std::array<double, 2> split_mid{};
        std::array<std::unique_ptr<Node>, 4> children;  // index = lower/upper bit per dim

        bool is_leaf() const { return !children[0]; }
    };

    const Node& root() const { return *root_; }
    std::int32_t leaf_count() const { return leaf_count_; }

    // Descends by box membership; boundary points go to the lower box only
    // below the split (half-open boxes, closed on the max edge of the root).
    // Points outside the root box are clamped to its nearest edge first.
    std::int32_t assign(const FeatureVector& f) const {
        FeatureVector q = f;
        for (std::size_t d = 0; d < FeatureVector::kDims; ++d)
            q[d] = std::clamp(q[d], root_->box.lo[d], root_->box.hi[d]);
        const Node* node = root_.get();
        while (!node->is_leaf()) {
            unsigned idx = 0;
            for (std::size_t b = 0; b < 2; ++b)
                if (q[node->split_dim[b]] >= node->split_mid[b]) idx |= 1u << b;
            node = node->children[idx].get();
        }
        return node->cluster_id;
    }

    void collect_leaves(std::vector<const Node*>& out) const { collect(root_.get(), out); }

private:
    friend std::pair<ClusterTree, struct ClusterAssignment> adaptive_cluster(
        std::span<const FeatureVector>, const ClusterParams&);

    static void collect(const Node* n, std::vector<const Node*>& out) {
        if (n->is_leaf()) {
            out.push_back(n);
            return;
        }
        for (const auto& c : n->children) collect(c.get(), out);
    }

    std::unique_ptr<Node> root_;
    std::int32_t leaf_count_ = 0;
};

struct ClusterAssignment {
    std::vector<std::int32_t> cluster_of;  // parallel to the input feature list
    std::vector<double> weights;           // per cluster id, sums to 1
};

inline void fix_empty_leaves(ClusterTree::Node& node);

// Recursive adaptive clustering: stop when every feature's member range is
// below theta_f or the member count is below theta_n, else split into four
// equal sub-boxes and route members by box membership.
inline std::pair<ClusterTree, ClusterAssignment> adaptive_cluster(
    std::span<const FeatureVector> features, const ClusterParams& params = {}) {
    if (features.empty()) throw InsufficientData("adaptive_cluster: no features");

    using Node = ClusterTree::Node;
    ClusterTree tree;
    tree.root_ = std::make_unique<Node>();

    // Root box = member bounding box (the complete feature space observed).
    auto& rb = tree.root_->box;
    for (std::size_t d = 0; d < FeatureVector::kDims; ++d) {
        rb.lo[d] = features[0][d];
        rb.hi[d] = features[0][d];
    }
    for (const auto& f : features)
        for (std::size_t d = 0; d < FeatureVector::kDims; ++d) {
            rb.lo[d] = std::min(rb.lo[d], f[d]);
            rb.hi[d] = std::max(rb.hi[d], f[d]);
        }
    tree.root_->members.resize(features.size());
    std::iota(tree.root_->members.begin(), tree.root_->members.end(), 0u);

    ClusterAssignment assign;
    assign.cluster_of.assign(features.size(), -1);

    std::int32_t next_id = 0;
    // Depth-first split so leaf ids are deterministic in box order.
    std::vector<Node*> stack = {tree.root_.get()};
    while (!stack.empty()) {
        Node* node = stack.back();
        stack.pop_back();

        // Member feature ranges decide both stopping and split dims.
        std::array<double, FeatureVector::kDims> mn{}, mx{};
        for (std::size_t d = 0; d < FeatureVector::kDims; ++d) {
            mn[d] = features[node->members.front()][d];
            mx[d] = mn[d];
        }
        for (std::uint32_t m : node->members)
            for (std::size_t d = 0; d < FeatureVector::kDims; ++d) {
                mn[d] = std::min(mn[d], features[m][d]);
                mx[d] = std::max(mx[d], features[m][d]);
            }
        bool similar = true;
        for (std::size_t d = 0; d < FeatureVector::kDims; ++d)
            if (mx[d] - mn[d] >= params.theta_f[d]) similar = false;

        if (similar || node->members.size() < params.theta_n) {
            node->cluster_id = next_id++;
            for (std::uint32_t m : node->members) assign.cluster_of[m] = node->cluster_id;
            continue;
        }

        // Two features with the largest normalized member range.
        std::array<std::size_t, FeatureVector::kDims> order{0, 1, 2, 3};
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return (mx[a] - mn[a]) / params.theta_f[a] > (mx[b] - mn[b]) / params.theta_f[b];
        });
        node->split_dim = {order[0], order[1]};
        for (std::size_t b = 0; b < 2; ++b) {
            std::size_t d = node->split_dim[b];
            node->split_mid[b] = node->box.lo[d] + (node->box.hi[d] - node->box.lo[d]) / 2.0;
        }

        for (unsigned idx = 0; idx < 4; ++idx) {
            auto child = std::make_unique<Node>();
            child->box = node->box;
            for (std::size_t b = 0; b < 2; ++b) {
                std::size_t d = node->split_dim[b];
                if (idx & (1u << b)) child->box.lo[d] = node->split_mid[b];
                else child->box.hi[d] = node->split_mid[b];
            }
            node->children[idx] = std::move(child);
        }
        for (std::uint32_t m : node->members) {
            unsigned idx = 0;
            for (std::size_t b = 0; b < 2; ++b)
                if (features[m][node->split_dim[b]] >= node->split_mid[b]) idx |= 1u << b;
            node->children[idx]->members.push_back(m);
        }
        node->members.clear();
        node->members.shrink_to_fit();
        // Push in reverse so child 0 is processed first (stable ids).
        for (int idx = 3; idx >= 0; --idx) {
            Node* c = node->children[idx].get();
            if (c->members.empty()) {
                // Empty quadrants become id-less leaves; assign() can still
                // land here, so give them the nearest sibling's id later via
                // a pass below. Mark now, fix after ids are final.
                c->cluster_id = -1;
                continue;
            }
            stack.push_back(c);
        }
    }

    // Empty leaves inherit the id of the first non-empty leaf in box order
    // so assign() always returns a valid cluster.
    fix_empty_leaves(*tree.root_);

    tree.leaf_count_ = next_id;
    assign.weights.assign(static_cast<std::size_t>(next_id), 0.0);
    for (std::int32_t c : assign.cluster_of) assign.weights[static_cast<std::size_t>(c)] += 1.0;
    for (double& w : assign.weights) w /= static_cast<double>(features.size());
    return {std::move(tree), std::move(assign)};
}

namespace detail {
inline std::int32_t first_leaf_id(const ClusterTree::Node& n) {
    if (n.is_leaf()) return n.cluster_id;
    for (const auto& c : n.children) {
        std::int32_t id = first_leaf_id(*c);
        if (id >= 0) return id;
    }
    return -1;
}
} // namespace detail

inline void fix_empty_leaves(ClusterTree::Node& node) {
    if (node.is_leaf()) return;
    std::int32_t fallback = detail::first_leaf_id(node);
    for (auto& c : node.children) {
        if (c->is_leaf() && c->cluster_id < 0) c->cluster_id = fallback;
        else fix_empty_leaves(*c);
    }
}

} // namespace mcn
