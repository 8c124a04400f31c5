#pragma once

#include <string>
#include <vector>

#include "hnorm/manifold.hpp"

namespace hnorm {

// Covers built from copies of the base tetrahedra: cover tetrahedron k lies over base tetrahedron
// k mod n, with sheet k / n.

// Face-pair labels in Z/2 satisfying the cocycle condition around every edge class (each edge
// lifts to closed edges). Returns every nonzero solution of the linear system over GF(2).
std::vector<std::vector<int>> double_cover_labellings(const TriangulatedManifold& M);

// Two-sheeted cover in which crossing face pair p changes the sheet when labels[p] = 1. Cusp
// data is inherited from the covered cusp; throws DomainError when a cusp is covered twice by a
// single cusp (its lattice would need an index-two sublattice) and when the cover is disconnected.
TriangulatedManifold double_cover(const TriangulatedManifold& M, const std::vector<int>& labels,
                                  const std::string& name);

// First connected double cover whose number of cusps equals `cusps`. Throws DomainError if none.
TriangulatedManifold find_double_cover(const TriangulatedManifold& M, int cusps, const std::string& name);

// Row i: coordinates in the cover's image basis of the pullback of base image basis class i.
// Throws DomainError when a pullback is not integral in the cover basis.
std::vector<std::vector<long long>> pullback_correspondence(const TriangulatedManifold& base,
                                                            const TriangulatedManifold& cover);

}  // namespace hnorm
