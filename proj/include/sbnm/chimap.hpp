// chimap.hpp — Operator-sum form of the dynamical map and CPT certification

#pragma once

#include <array>
#include <complex>

#include "sbnm/dynamics.hpp"

namespace sbnm::chimap {

// 2×2 complex matrix, row-major.
using Mat2 = std::array<std::complex<double>, 4>;

Mat2 mat_mul(const Mat2& a, const Mat2& b);
Mat2 mat_adjoint(const Mat2& a);
double mat_max_abs(const Mat2& a);
Mat2 density_of(const dynamics::QubitState& s);

// ρ(t) = Σ_i Λ_i A_i† ρ(0) A_i with A_1,2 in the {I, σz} family and A_3,4 in
// the {σx, σy} family; odd index = '−' branch, even = '+'.
struct KrausDecomposition {
    double t{0};
    std::array<double, 4> lambda{0, 0, 0, 0};
    std::array<std::complex<double>, 4> w{};   // auxiliary scalars (|w| may be inf)
    std::complex<double> p1{0}, p2{0};
    std::array<Mat2, 4> ops{};
};

KrausDecomposition kraus_from_mapstate(const dynamics::MapState& ms);

struct CptReport {
    double min_lambda{0};
    double completeness_residual{0};  // max-abs entry of ΣΛ_i A_i A_i† − I
    bool pass{false};
};

CptReport check_cpt(const KrausDecomposition& kd, double tol = 1e-9);

dynamics::QubitState apply_map(const KrausDecomposition& kd, const dynamics::QubitState& rho0);
Mat2 apply_map_density(const KrausDecomposition& kd, const Mat2& rho0);

} // namespace sbnm::chimap
