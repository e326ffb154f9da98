#pragma once

#include "nmrqec/linalg.hpp"

// Traceless deviation density matrix in the product-operator convention:
// the information-bearing part of an ensemble state, with the identity
// component dropped (it is invariant under all the unital dynamics here).

namespace nmrqec {

struct DeviationState {
    OperatorMatrix matrix;
    double scale = 1.0;  // the epsilon bookkeeping factor, carried symbolically

    DeviationState() = default;
    explicit DeviationState(Matrix m, double s = 1.0)
        : matrix(OperatorMatrix(std::move(m), false, false)), scale(s) {}

    bool check_traceless(double tol = 1e-10) const {
        return std::abs(matrix.m.trace()) <= tol;
    }
};

}  // namespace nmrqec
