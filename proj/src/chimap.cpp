#include "sbnm/chimap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbnm::chimap {

using dynamics::MapState;
using dynamics::QubitState;
using cplx = std::complex<double>;

namespace {

const Mat2 kI{cplx{1}, cplx{0}, cplx{0}, cplx{1}};
const Mat2 kSx{cplx{0}, cplx{1}, cplx{1}, cplx{0}};
const Mat2 kSy{cplx{0}, cplx{0, -1}, cplx{0, 1}, cplx{0}};
const Mat2 kSz{cplx{1}, cplx{0}, cplx{0}, cplx{-1}};

Mat2 lin(const cplx& a, const Mat2& A, const cplx& b, const Mat2& B) {
    Mat2 out;
    for (int i = 0; i < 4; ++i) out[i] = a * A[i] + b * B[i];
    return out;
}

} // namespace

Mat2 mat_mul(const Mat2& a, const Mat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Mat2 mat_adjoint(const Mat2& a) {
    return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
}

double mat_max_abs(const Mat2& a) {
    double m = 0;
    for (const auto& x : a) m = std::max(m, std::abs(x));
    return m;
}

Mat2 density_of(const QubitState& s) {
    return {cplx{s.rho11()}, s.rho10(), s.rho01(), cplx{s.rho00()}};
}

KrausDecomposition kraus_from_mapstate(const MapState& ms) {
    KrausDecomposition kd;
    kd.t = ms.t;
    const double egr = std::exp(-ms.Gamma.real());
    const double u = ms.u;
    const double S1 = 0.5 * std::sqrt(4.0 * std::norm(ms.v1) * egr + u * u);
    const double S2 = 0.5 * std::sqrt(4.0 * std::norm(ms.v2) * egr + u * u);
    kd.lambda = {0.25 * (1 + egr) - 0.5 * S1, 0.25 * (1 + egr) + 0.5 * S1,
                 0.25 * (1 - egr) - 0.5 * S2, 0.25 * (1 - egr) + 0.5 * S2};

    // p_k = e^{-Γ/2} v_k*; the Λ above are consistent with this normalization
    // (operator completeness fails for any other exponent).
    const cplx half_decay = std::exp(-0.5 * ms.Gamma);
    kd.p1 = half_decay * std::conj(ms.v1);
    kd.p2 = half_decay * std::conj(ms.v2);

    // The pair directions (x, y, z) = (u/4, -Im p/2, Re p)/R with 4(x²+y²)+z² = 1
    // are antipodal for the odd/even members; building the operators from them is
    // the exact limiting form of the w_j quotients.
    for (int fam = 0; fam < 2; ++fam) {
        const cplx p = fam == 0 ? kd.p1 : kd.p2;
        const double q2 = u * u / 4.0 + p.imag() * p.imag();  // transverse part of R²
        const double R = std::sqrt(q2 + p.real() * p.real());
        for (int sgn = 0; sgn < 2; ++sgn) {
            const int j = 2 * fam + sgn;           // 0..3 ↔ conventional index j = 1..4
            const double sg = sgn == 0 ? -1 : +1;  // odd subscript ↔ '−'
            double xs, ys, one_minus_z;
            if (R > 0) {
                xs = sg * (u / 4.0) / R;
                ys = sg * (-0.5 * p.imag()) / R;
                const double zn = sg * p.real();  // zs = zn/R
                // 1 − zs without cancellation when zs → 1
                one_minus_z = zn >= 0 ? q2 / (R * (R + zn)) : (R - zn) / R;
            } else {
                // fully degenerate family: canonical axis (the weights are equal)
                xs = ys = 0;
                one_minus_z = sgn == 0 ? 2.0 : 0.0;
            }
            const double b = std::sqrt(std::max(0.0, 0.5 * one_minus_z));
            cplx a;
            if (b > 1e-150) {
                a = cplx{xs, ys} / b;
                kd.w[j] = cplx{xs, ys} / (0.5 * one_minus_z);
            } else {
                a = 1.0;  // z = 1 limit: the operator is I (resp. iσx) up to phase
                kd.w[j] = cplx{std::numeric_limits<double>::infinity(), 0};
            }
            kd.ops[j] = (fam == 0) ? lin(a, kI, b, kSz) : lin(cplx{0, 1} * a, kSx, b, kSy);
        }
    }
    return kd;
}

CptReport check_cpt(const KrausDecomposition& kd, double tol) {
    CptReport rep;
    rep.min_lambda = *std::min_element(kd.lambda.begin(), kd.lambda.end());
    Mat2 acc{cplx{0}, cplx{0}, cplx{0}, cplx{0}};
    for (int i = 0; i < 4; ++i) {
        const Mat2 aa = mat_mul(kd.ops[i], mat_adjoint(kd.ops[i]));
        for (int k = 0; k < 4; ++k) acc[k] += kd.lambda[i] * aa[k];
    }
    acc[0] -= 1.0;
    acc[3] -= 1.0;
    rep.completeness_residual = mat_max_abs(acc);
    rep.pass = rep.min_lambda >= -tol && rep.completeness_residual <= tol;
    return rep;
}

Mat2 apply_map_density(const KrausDecomposition& kd, const Mat2& rho0) {
    Mat2 out{cplx{0}, cplx{0}, cplx{0}, cplx{0}};
    for (int i = 0; i < 4; ++i) {
        const Mat2 t = mat_mul(mat_adjoint(kd.ops[i]), mat_mul(rho0, kd.ops[i]));
        for (int k = 0; k < 4; ++k) out[k] += kd.lambda[i] * t[k];
    }
    return out;
}

QubitState apply_map(const KrausDecomposition& kd, const QubitState& rho0) {
    const Mat2 r = apply_map_density(kd, density_of(rho0));
    return {2 * r[1].real(), -2 * r[1].imag(), r[0].real() - r[3].real()};
}

} // namespace sbnm::chimap
