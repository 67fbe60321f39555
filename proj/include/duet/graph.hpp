#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace duet {

/// How neighbours are split into separately weighted adjacency slices.
enum class PartitionStrategy {
    Uniform,  // one slice: A + I
    Spatial,  // self, centripetal (toward the center joint), centrifugal
};

/// Undirected joint graph. `edges` holds each bone once as (parent, child).
struct SkeletonGraph {
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;
    PartitionStrategy strategy = PartitionStrategy::Uniform;
    int center = 0;  // reference joint for the spatial strategy

    /// Symmetric 0/1 adjacency without self loops.
    [[nodiscard]] Eigen::MatrixXd adjacency() const;
    /// Hop distance from `center`; throws ContractError if the graph is disconnected.
    [[nodiscard]] std::vector<int> hop_distance() const;
    /// Stable digest of node count, edges and strategy.
    [[nodiscard]] std::uint64_t hash() const;
};

/// Validates node range, duplicate edges and connectivity; throws ContractError.
SkeletonGraph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges,
                         PartitionStrategy strategy = PartitionStrategy::Uniform, int center = 0);

/// The 25-joint body graph: 24 bones from the reduced parent table, centred on the spine chest.
SkeletonGraph build_graph(PartitionStrategy strategy = PartitionStrategy::Uniform);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I, split into one slice per partition.
/// The slices sum to the full normalized matrix.
std::vector<Eigen::MatrixXd> normalize_adjacency(const SkeletonGraph& g);

/// Largest absolute eigenvalue of a symmetric matrix by power iteration.
double spectral_radius(const Eigen::MatrixXd& m, int iterations = 1000);

}  // namespace duet
