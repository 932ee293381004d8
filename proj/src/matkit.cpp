#include "q1d/matkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "q1d/errors.hpp"

namespace q1d {

int GroupTag::matrix_size() const {
    switch (kind) {
    case Kind::SymplecticReal:
    case Kind::LorentzUDD:
        return 2 * n;
    default:
        return n;
    }
}

namespace {

bool all_finite(const Mat& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        if (!std::isfinite(m.data()[k].real()) || !std::isfinite(m.data()[k].imag())) return false;
    }
    return true;
}

double norm1(const Mat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

QR qr_pos(const Mat& m) {
    if (m.rows() < m.cols()) fail(ErrorKind::RankDeficient, "qr_pos needs rows >= cols");
    const Eigen::Index n = m.cols();
    QR out{m, Mat::Zero(n, n)};
    double largest = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) largest = std::max(largest, m.col(j).norm());
    const double tol = 1e-12 * largest;
    for (Eigen::Index j = 0; j < n; ++j) {
        // classical Gram-Schmidt applied twice
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < j; ++i) {
                const cplx c = out.q.col(i).dot(out.q.col(j));
                out.q.col(j) -= c * out.q.col(i);
                out.r(i, j) += c;
            }
        }
        const double rjj = out.q.col(j).norm();
        if (!(rjj > tol)) fail(ErrorKind::RankDeficient, "diagonal of R below 1e-12 relative tolerance");
        out.q.col(j) /= rjj;
        out.r(j, j) = rjj;
    }
    return out;
}

template <typename Scalar>
void qr_pos_accumulate(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q, RVec& log_diag) {
    const Eigen::Index n = q.cols();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < j; ++i) {
                const Scalar c = q.col(i).dot(q.col(j));
                q.col(j) -= c * q.col(i);
            }
        }
        const double rjj = q.col(j).norm();
        if (!(rjj > 0.0) || !std::isfinite(rjj)) fail(ErrorKind::RankDeficient, "cocycle product lost rank");
        q.col(j) /= rjj;
        log_diag[j] += std::log(rjj);
    }
}

template void qr_pos_accumulate<double>(RMat&, RVec&);
template void qr_pos_accumulate<cplx>(Mat&, RVec&);

namespace {

// Higham (2005) Pade coefficients
constexpr std::array<double, 4> kB3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kB5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kB7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                       25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kB9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                        30270240.0,    2162160.0,    110880.0,     3960.0,
                                        90.0,          1.0};
constexpr std::array<double, 14> kB13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

template <std::size_t N>
Mat pade_low(const Mat& a, const std::array<double, N>& b) {
    const Eigen::Index n = a.rows();
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;
    Mat pw = id;
    Mat u = b[1] * id;
    Mat v = b[0] * id;
    for (std::size_t k = 2; k + 1 < N + 1; k += 2) {
        pw = pw * a2;
        v += b[k] * pw;
        if (k + 1 < N) u += b[k + 1] * pw;
    }
    u = a * u;
    return (v - u).partialPivLu().solve(v + u);
}

Mat pade13(const Mat& a) {
    const auto& b = kB13;
    const Eigen::Index n = a.rows();
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    Mat u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    u = a * u;
    const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Mat expm(const Mat& a) {
    if (a.rows() != a.cols()) fail(ErrorKind::DimensionMismatch, "expm needs a square matrix");
    if (!all_finite(a)) fail(ErrorKind::Overflow, "expm input has non-finite entries");
    const double nrm = norm1(a);
    Mat out;
    if (nrm <= 1.495585217958292e-2) {
        out = pade_low(a, kB3);
    } else if (nrm <= 2.539398330063230e-1) {
        out = pade_low(a, kB5);
    } else if (nrm <= 9.504178996162932e-1) {
        out = pade_low(a, kB7);
    } else if (nrm <= 2.097847961257068) {
        out = pade_low(a, kB9);
    } else {
        constexpr double theta13 = 5.371920351148152;
        int s = 0;
        if (nrm > theta13) s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        out = pade13(a / std::ldexp(1.0, s));
        for (int k = 0; k < s; ++k) {
            out = out * out;
            if (!all_finite(out)) fail(ErrorKind::Overflow, "expm squaring overflowed");
        }
    }
    if (!all_finite(out)) fail(ErrorKind::Overflow, "expm produced non-finite entries");
    return out;
}

Mat sqrtm_principal(const Mat& m) {
    // Denman-Beavers iteration
    const Eigen::Index n = m.rows();
    Mat y = m;
    Mat z = Mat::Identity(n, n);
    for (int it = 0; it < 100; ++it) {
        const Mat yi = y.inverse();
        const Mat zi = z.inverse();
        Mat y1 = 0.5 * (y + zi);
        z = 0.5 * (z + yi);
        const double delta = (y1 - y).norm();
        y = std::move(y1);
        if (delta <= 1e-15 * y.norm()) break;
    }
    return y;
}

Mat logm_principal(const Mat& m) {
    if (m.rows() != m.cols()) fail(ErrorKind::DimensionMismatch, "logm needs a square matrix");
    const Eigen::Index n = m.rows();
    Eigen::ComplexEigenSolver<Mat> es(m, false);
    for (Eigen::Index k = 0; k < n; ++k) {
        const cplx lam = es.eigenvalues()[k];
        if (std::abs(lam.imag()) <= 1e-12 * std::max(1.0, std::abs(lam)) && lam.real() <= 1e-12)
            fail(ErrorKind::LogUndefined, "eigenvalue on the closed negative real axis");
    }
    const Mat id = Mat::Identity(n, n);
    Mat a = m;
    int k = 0;
    while (norm1(a - id) >= 0.25) {
        if (++k > 64) fail(ErrorKind::LogUndefined, "square-root iteration did not approach identity");
        a = sqrtm_principal(a);
    }
    // log(A) = 2 atanh(Z), Z = (A - I)(A + I)^-1
    const Mat x = a - id;
    const Mat z = (a + id).transpose().partialPivLu().solve(x.transpose()).transpose();
    const Mat z2 = z * z;
    Mat term = z;
    Mat sum = z;
    for (int j = 1; j < 60; ++j) {
        term = term * z2;
        const Mat add = term / static_cast<double>(2 * j + 1);
        sum += add;
        if (add.norm() <= 1e-18 * std::max(1.0, sum.norm())) break;
    }
    return std::ldexp(2.0, k) * sum;
}

long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<std::vector<int>> exterior_basis(int n, int p) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(p);
    for (int i = 0; i < p; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        int i = p - 1;
        while (i >= 0 && idx[i] == n - p + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

Mat wedge_power(const Mat& m, int p) {
    const int n = static_cast<int>(m.rows());
    if (m.rows() != m.cols()) fail(ErrorKind::DimensionMismatch, "wedge_power needs a square matrix");
    if (p < 1 || p > n) fail(ErrorKind::BadOrder, "p outside [1, n]");
    const auto basis = exterior_basis(n, p);
    const auto nb = static_cast<Eigen::Index>(basis.size());
    Mat out(nb, nb);
    Mat sub(p, p);
    for (Eigen::Index I = 0; I < nb; ++I) {
        for (Eigen::Index J = 0; J < nb; ++J) {
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) sub(a, b) = m(basis[I][a], basis[J][b]);
            out(I, J) = p == 1 ? sub(0, 0) : sub.determinant();
        }
    }
    return out;
}

double op_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()[0];
}

Mat symplectic_form(int D) {
    Mat j = Mat::Zero(2 * D, 2 * D);
    j.topRightCorner(D, D) = -Mat::Identity(D, D);
    j.bottomLeftCorner(D, D) = Mat::Identity(D, D);
    return j;
}

Mat lorentz_form(int D) {
    Mat l = Mat::Identity(2 * D, 2 * D);
    l.bottomRightCorner(D, D) *= -1.0;
    return l;
}

double group_residual(const Mat& m, const GroupTag& tag) {
    switch (tag.kind) {
    case GroupTag::Kind::SymplecticReal: {
        const Mat j = symplectic_form(tag.n);
        return op_norm(m.transpose() * j * m - j);
    }
    case GroupTag::Kind::LorentzUDD: {
        const Mat l = lorentz_form(tag.n);
        return op_norm(m.adjoint() * l * m - l);
    }
    case GroupTag::Kind::Unitary:
        return op_norm(m.adjoint() * m - Mat::Identity(m.rows(), m.cols()));
    case GroupTag::Kind::SpecialLinearReal:
        return std::abs(m.determinant() - 1.0);
    case GroupTag::Kind::None:
        return 0.0;
    }
    return 0.0;
}

Mat cayley_matrix(int D) {
    const Mat id = Mat::Identity(D, D);
    const cplx i1(0.0, 1.0);
    return block2(id, -i1 * id, id, i1 * id) / std::sqrt(2.0);
}

RMat realify(const Mat& m) {
    const Eigen::Index r = m.rows(), c = m.cols();
    RMat out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = m.real();
    out.topRightCorner(r, c) = -m.imag();
    out.bottomLeftCorner(r, c) = m.imag();
    out.bottomRightCorner(r, c) = m.real();
    return out;
}

Mat cayley_realify(const Mat& g) {
    if (g.rows() != g.cols() || g.rows() % 2 != 0)
        fail(ErrorKind::DimensionMismatch, "cayley_realify needs a 2D x 2D matrix");
    const int D = static_cast<int>(g.rows() / 2);
    const double res = group_residual(g, GroupTag::lorentz(D));
    if (res > 1e-8) fail(ErrorKind::NotLorentz, "Lorentz residual " + std::to_string(res) + " exceeds 1e-8");
    const Mat c = cayley_matrix(D);
    const RMat r = realify(c.adjoint() * g * c);
    // pi(.) preserves J (+) J on (Re u1, Re u2, Im u1, Im u2); reorder to the standard J_{2D'}
    std::vector<int> perm(4 * D);
    for (int k = 0; k < D; ++k) {
        perm[k] = k;
        perm[D + k] = 2 * D + k;
        perm[2 * D + k] = D + k;
        perm[3 * D + k] = 3 * D + k;
    }
    Mat out(4 * D, 4 * D);
    for (int a = 0; a < 4 * D; ++a)
        for (int b = 0; b < 4 * D; ++b) out(a, b) = r(perm[a], perm[b]);
    return out;
}

RMat elementary(int n, int i, int j) {
    RMat e = RMat::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

Mat block2(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
    Mat out(a.rows() + c.rows(), a.cols() + b.cols());
    out << a, b, c, d;
    return out;
}

std::vector<Mat> canonical_basis(AlgebraKind kind, int D) {
    std::vector<Mat> out;
    const Mat zero = Mat::Zero(D, D);
    const cplx i1(0.0, 1.0);
    switch (kind) {
    case AlgebraKind::Sp: {
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) {
                const Mat e = elementary(D, i, j).cast<cplx>();
                out.push_back(block2(e, zero, zero, -e.transpose()));
            }
        for (int i = 0; i < D; ++i)
            for (int j = i; j < D; ++j) {
                const Mat s = (elementary(D, i, j) + elementary(D, j, i)).cast<cplx>() * (i == j ? 0.5 : 1.0);
                out.push_back(block2(zero, s, zero, zero));
                out.push_back(block2(zero, zero, s, zero));
            }
        break;
    }
    case AlgebraKind::UDD: {
        for (int blk = 0; blk < 2; ++blk) {
            for (int j = 0; j < D; ++j)
                for (int k = j; k < D; ++k) {
                    std::vector<Mat> parts;
                    if (j == k) {
                        parts.push_back(i1 * elementary(D, j, j).cast<cplx>());
                    } else {
                        parts.push_back((elementary(D, j, k) - elementary(D, k, j)).cast<cplx>());
                        parts.push_back(i1 * (elementary(D, j, k) + elementary(D, k, j)).cast<cplx>());
                    }
                    for (const auto& a : parts)
                        out.push_back(blk == 0 ? block2(a, zero, zero, zero) : block2(zero, zero, zero, a));
                }
        }
        for (int j = 0; j < D; ++j)
            for (int k = 0; k < D; ++k) {
                const Mat e = elementary(D, j, k).cast<cplx>();
                out.push_back(block2(zero, e, e.adjoint(), zero));
                out.push_back(block2(zero, i1 * e, (i1 * e).adjoint(), zero));
            }
        break;
    }
    case AlgebraKind::XYZGenerators: {
        std::vector<Mat> xs;
        for (int i = 0; i < D; ++i)
            for (int j = i; j < std::min(D, i + 2); ++j) {
                const Mat s = 0.5 * (elementary(D, i, j) + elementary(D, j, i)).cast<cplx>();
                xs.push_back(block2(zero, s, zero, zero));
            }
        for (const auto& x : xs) out.push_back(x);
        for (const auto& x : xs) out.push_back(x.transpose());
        break;
    }
    }
    return out;
}

double algebra_residual(const Mat& x, AlgebraKind kind) {
    const int D = static_cast<int>(x.rows() / 2);
    if (kind == AlgebraKind::UDD) {
        const Mat l = lorentz_form(D);
        return op_norm(x.adjoint() * l + l * x);
    }
    const Mat j = symplectic_form(D);
    return op_norm(x.transpose() * j + j * x);
}

}  // namespace q1d
