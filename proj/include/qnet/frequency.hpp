#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "qnet/cmatrix.hpp"
#include "qnet/network_model.hpp"

namespace qnet {

/// A point of the unit circle (chains) or of the torus (2-D lattices).
class FreqPoint {
public:
    static FreqPoint on_circle(cplx z);
    static FreqPoint on_torus(cplx z1, cplx z2);
    static FreqPoint from_angle(double phi);
    static FreqPoint from_angles(double phi1, double phi2);

    int dims() const { return dims_; }
    cplx operator[](int axis) const { return z_[static_cast<std::size_t>(axis)]; }
    FreqPoint inverse() const;

private:
    FreqPoint(std::array<cplx, 2> z, int dims) : z_(z), dims_(dims) {}
    std::array<cplx, 2> z_;
    int dims_;
};

/// z_l = e^{2 pi i l / N}.
cplx root_of_unity(int l, int n_sites);
std::vector<cplx> roots_of_unity(int n_sites);

/// Index l of z in U_N, or -1 when z is not an N-th root of unity.
int root_index(cplx z, int n_sites, double tol = 1e-10);

/// Phase-shift matrix relating the transformed neighbour inputs to the outputs:
/// diag(z^{-1} I_{m+}, z I_{m-}) per axis, stacked block-diagonally.
CMatrix coupling_matrix(const FreqPoint& z, const BlockParams& params);

struct ModeMatrices {
    CMatrix a;  // n x n
    CMatrix b;  // n x m0
    FreqPoint at;
};

/// A + sum over axes of (z^{-1} E+ C+ + z E- C-), and the same with B, D.
ModeMatrices mode_matrices(const BlockParams& params, const FreqPoint& z);

/// Laurent coefficients M_s = (1/N) sum_l z_l^{-s} samples[l], |s| <= q, from
/// samples taken on U_N in the order z_0, z_1, ..., z_{N-1}. Throws
/// AliasingError when N <= 2q.
std::map<int, CMatrix> laurent_coeffs(const std::vector<CMatrix>& samples, int q);

/// Convenience overload sampling f on U_N first.
std::map<int, CMatrix> laurent_coeffs(int n_sites, int q, const std::function<CMatrix(cplx)>& f);

/// Laurent coefficients A_{p,s} of the p-th power of the chain mode matrix.
class LaurentTable {
public:
    LaurentTable(int order, std::vector<RMatrix> blocks);

    int order() const { return order_; }
    Eigen::Index n() const { return blocks_.front().rows(); }

    /// A_{p,s}; zero for |s| > p.
    RMatrix at(int s) const;

    /// sum_s z^s A_{p,s}
    CMatrix evaluate(cplx z) const;

private:
    int order_;
    std::vector<RMatrix> blocks_;  // index s + order
};

/// A_{p,s} = A A_{p-1,s} + E+C+ A_{p-1,s+1} + E-C- A_{p-1,s-1}, A_{0,0} = I.
LaurentTable aps_table(const BlockParams& params, int p);

}  // namespace qnet
