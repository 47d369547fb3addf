#pragma once

#include <vector>

#include "mwlab/linalg.hpp"

namespace mwlab {

struct EllipsoidFit {
    Mat shape;  // H with every point satisfying z* H z <= 1
    int iterations = 0;
    double gap = 0.0;  // max_k z_k* X^{-1} z_k / m - 1 for the dual design X
};

// Minimum-volume origin-centred ellipsoid {z : z* H z <= 1} enclosing the points (and their negatives).
// Log-barrier Newton method on the Hermitian entries of H; the barrier weight shrinks until the gap is below tol.
EllipsoidFit mvee_centered(const std::vector<Vec>& points, double tol = 1e-8, int max_iter = 2000);

}  // namespace mwlab
