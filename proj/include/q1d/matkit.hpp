#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace q1d {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

struct GroupTag {
    enum class Kind { SymplecticReal, LorentzUDD, Unitary, SpecialLinearReal, None };
    Kind kind = Kind::None;
    int n = 0;  // D for SymplecticReal/LorentzUDD, matrix size otherwise

    static GroupTag symplectic(int D) { return {Kind::SymplecticReal, D}; }
    static GroupTag lorentz(int D) { return {Kind::LorentzUDD, D}; }
    static GroupTag unitary(int n) { return {Kind::Unitary, n}; }
    static GroupTag special_linear(int n) { return {Kind::SpecialLinearReal, n}; }
    static GroupTag none(int n) { return {Kind::None, n}; }

    int matrix_size() const;
    bool operator==(const GroupTag&) const = default;
};

struct QR {
    Mat q;
    Mat r;
};

/// QR with r's diagonal strictly positive; throws RankDeficient.
QR qr_pos(const Mat& m);

/// In-place variant for the Lyapunov hot loop: q is overwritten by its
/// orthonormal factor and log(r_ii) is added to log_diag.
template <typename Scalar>
void qr_pos_accumulate(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q, RVec& log_diag);

Mat expm(const Mat& a);
Mat sqrtm_principal(const Mat& m);
Mat logm_principal(const Mat& m);

/// p-th exterior power on the lexicographic basis of p-subsets.
Mat wedge_power(const Mat& m, int p);
std::vector<std::vector<int>> exterior_basis(int n, int p);
long binomial(int n, int k);

double op_norm(const Mat& m);
double group_residual(const Mat& m, const GroupTag& tag);

Mat symplectic_form(int D);  // J = [[0,-I],[I,0]]
Mat lorentz_form(int D);     // diag(I,-I)
Mat cayley_matrix(int D);    // (1/sqrt2)[[I,-iI],[I,iI]]
/// pi(A + iB) = [[A,-B],[B,A]]
RMat realify(const Mat& m);
/// Real 4D x 4D symplectic image of a U(D,D) element.
Mat cayley_realify(const Mat& g);

enum class AlgebraKind { Sp, UDD, XYZGenerators };
std::vector<Mat> canonical_basis(AlgebraKind kind, int D);

/// ||tX J + J X|| for sp, ||X* L + L X|| for u(D,D).
double algebra_residual(const Mat& x, AlgebraKind kind);

/// Elementary matrix E_ij of size n.
RMat elementary(int n, int i, int j);
Mat block2(const Mat& a, const Mat& b, const Mat& c, const Mat& d);

}  // namespace q1d
