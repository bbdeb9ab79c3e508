#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "valsteer/ci_test.hpp"
#include "valsteer/graph.hpp"
#include "valsteer/matrix.hpp"

namespace valsteer {

struct PcConfig {
    double alpha = 0.05;
    int max_cond_size = 3;
    bool stable_variant = true; // freeze adjacency per level
    enum class CiTest { fisher_z, permutation } ci_test = CiTest::fisher_z;
    int n_perm = 1000;               // permutation test only
    std::uint64_t perm_seed = 12345; // permutation test only

    void validate() const;
};

/// Separating sets found during skeleton search, keyed by unordered pair.
using SepSets = std::map<std::array<std::string, 2>, std::vector<std::string>>;

struct SkeletonResult {
    CausalGraph graph; // kind = skeleton
    SepSets sepsets;
};

/// PC skeleton phase: starts complete, removes edges whose endpoints test
/// independent given some neighbor subset of size 0..max_cond_size.
/// Deterministic under lexicographic node and subset order.
SkeletonResult pc_skeleton(const OrientationMatrix& matrix, const PcConfig& config);

/// Orients unshielded triples i-k-j with k not in sepset(i, j) as colliders,
/// then closes under Meek rules. Conflicting collider demands leave the edge
/// undirected and add a warning note.
CausalGraph orient_cpdag(const CausalGraph& skeleton, const SepSets& sepsets);

/// Skeleton + orientation.
CausalGraph pc_discover(const OrientationMatrix& matrix, const PcConfig& config);

} // namespace valsteer
