#include "duet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "duet/errors.hpp"
#include "duet/hash.hpp"
#include "duet/skeleton.hpp"

namespace duet {

Eigen::MatrixXd SkeletonGraph::adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
    for (auto [i, j] : edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

std::vector<int> SkeletonGraph::hop_distance() const {
    std::vector<std::vector<int>> nbr(num_nodes);
    for (auto [i, j] : edges) {
        nbr[i].push_back(j);
        nbr[j].push_back(i);
    }
    std::vector<int> dist(num_nodes, -1);
    std::deque<int> queue{center};
    dist[center] = 0;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int w : nbr[u]) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    if (std::find(dist.begin(), dist.end(), -1) != dist.end()) {
        throw ContractError("skeleton graph is not connected");
    }
    return dist;
}

std::uint64_t SkeletonGraph::hash() const {
    std::string text = "V" + std::to_string(num_nodes) + ";c" + std::to_string(center) + ";s" +
                       std::to_string(static_cast<int>(strategy)) + ";";
    for (auto [i, j] : edges) text += std::to_string(i) + "-" + std::to_string(j) + ",";
    return fnv1a64(text);
}

SkeletonGraph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges,
                         PartitionStrategy strategy, int center) {
    if (num_nodes < 1) throw ContractError("graph needs at least one node");
    if (center < 0 || center >= num_nodes) throw ContractError("graph center out of range");
    std::set<std::pair<int, int>> seen;
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= num_nodes || j >= num_nodes) throw ContractError("edge endpoint out of range");
        if (i == j) throw ContractError("self loops are implicit; do not list them");
        if (!seen.insert(std::minmax(i, j)).second) throw ContractError("duplicate edge");
    }
    SkeletonGraph g{num_nodes, std::move(edges), strategy, center};
    (void)g.hop_distance();
    return g;
}

SkeletonGraph build_graph(PartitionStrategy strategy) {
    constexpr int kSpineChest = 2;  // reduced index of the spine chest
    const auto& parents = reduced_joint_parents();
    std::vector<std::pair<int, int>> edges;
    for (int v = 0; v < kReducedJoints; ++v) {
        if (parents[v] >= 0) edges.emplace_back(parents[v], v);
    }
    return make_graph(kReducedJoints, std::move(edges), strategy, kSpineChest);
}

std::vector<Eigen::MatrixXd> normalize_adjacency(const SkeletonGraph& g) {
    const int n = g.num_nodes;
    const Eigen::MatrixXd a_hat = g.adjacency() + Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd d_inv_sqrt = a_hat.rowwise().sum().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd full = d_inv_sqrt.asDiagonal() * a_hat * d_inv_sqrt.asDiagonal();
    if (g.strategy == PartitionStrategy::Uniform) return {full};

    const auto hop = g.hop_distance();
    std::vector<Eigen::MatrixXd> slices(3, Eigen::MatrixXd::Zero(n, n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (full(i, j) == 0.0) continue;
            // Column j aggregates from row i: slice by where i sits relative to j.
            const int k = hop[i] == hop[j] ? 0 : (hop[i] < hop[j] ? 1 : 2);
            slices[k](i, j) = full(i, j);
        }
    }
    return slices;
}

double spectral_radius(const Eigen::MatrixXd& m, int iterations) {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(m.rows(), 1.0, 2.0).normalized();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd y = m * x;
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        lambda = norm;
        x = y / norm;
    }
    return lambda;
}

}  // namespace duet
