#include "q1d/liecheck.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "q1d/errors.hpp"

namespace q1d {

std::string to_string(LieClosureReport::Verdict v) {
    switch (v) {
    case LieClosureReport::Verdict::Full: return "Full";
    case LieClosureReport::Verdict::Proper: return "Proper";
    case LieClosureReport::Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

namespace {

RVec flatten(const Mat& m) {
    const Eigen::Index n = m.size();
    RVec v(2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        v[k] = m.data()[k].real();
        v[n + k] = m.data()[k].imag();
    }
    return v;
}

Mat unflatten(const RVec& v, Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    const Eigen::Index n = rows * cols;
    for (Eigen::Index k = 0; k < n; ++k) m.data()[k] = cplx(v[k], v[n + k]);
    return m;
}

// Orthonormal basis (columns) for the span. Rescaling a nearly cancelled
// bracket to unit length would lift its rounding error above tol, so only
// callers with arbitrary input scales ask for normalisation.
RMat span_basis(const std::vector<RVec>& vecs, double tol, bool normalise) {
    if (vecs.empty()) return RMat(0, 0);
    RMat a(vecs[0].size(), static_cast<Eigen::Index>(vecs.size()));
    for (std::size_t k = 0; k < vecs.size(); ++k) {
        const double n = vecs[k].norm();
        a.col(static_cast<Eigen::Index>(k)) = normalise && n > 0.0 ? RVec(vecs[k] / n) : vecs[k];
    }
    Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s[0] > 0.0)) return RMat(a.rows(), 0);
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > tol * s[0]) ++rank;
    return svd.matrixU().leftCols(rank);
}

}  // namespace

LieClosureReport lie_closure(const std::vector<Mat>& generators, int target_dim, double svd_tol, int max_rounds) {
    if (generators.empty()) fail(ErrorKind::EmptyGenerators, "no generators");
    const Eigen::Index rows = generators[0].rows(), cols = generators[0].cols();
    if (rows != cols) fail(ErrorKind::DimensionMismatch, "generators must be square");
    std::vector<RVec> vecs;
    for (const auto& g : generators) {
        if (g.rows() != rows || g.cols() != cols) fail(ErrorKind::DimensionMismatch, "generators differ in size");
        vecs.push_back(flatten(g));
    }
    LieClosureReport rep;
    rep.target_dim = target_dim;
    rep.svd_tol = svd_tol;
    RMat basis = span_basis(vecs, svd_tol, true);
    int rank = static_cast<int>(basis.cols());
    rep.generations.emplace_back(0, rank);
    bool fixpoint = false;
    for (int round = 1; round <= max_rounds && rank < target_dim; ++round) {
        std::vector<Mat> mats;
        for (Eigen::Index k = 0; k < basis.cols(); ++k) mats.push_back(unflatten(basis.col(k), rows, cols));
        std::vector<RVec> next;
        for (Eigen::Index k = 0; k < basis.cols(); ++k) next.push_back(basis.col(k));
        for (std::size_t i = 0; i < mats.size(); ++i)
            for (std::size_t j = i + 1; j < mats.size(); ++j) {
                next.push_back(flatten(mats[i] * mats[j] - mats[j] * mats[i]));
            }
        basis = span_basis(next, svd_tol, false);
        const int new_rank = static_cast<int>(basis.cols());
        rep.generations.emplace_back(round, new_rank);
        if (new_rank == rank) {
            fixpoint = true;
            break;
        }
        rank = new_rank;
    }
    rep.closure_dim = rank;
    if (rank == target_dim)
        rep.verdict = LieClosureReport::Verdict::Full;
    else if (fixpoint && rank < target_dim)
        rep.verdict = LieClosureReport::Verdict::Proper;
    else
        rep.verdict = LieClosureReport::Verdict::Inconclusive;
    return rep;
}

std::vector<Mat> lemma_spN_generators(int D, double E, const std::vector<double>& c) {
    if (D < 1 || D > 8) fail(ErrorKind::PreconditionViolated, "1 <= D <= 8");
    if (static_cast<int>(c.size()) != D) fail(ErrorKind::DimensionMismatch, "c must have D entries");
    for (double ci : c)
        if (ci == 0.0) fail(ErrorKind::PreconditionViolated, "c_i != 0");
    const RMat v0 = default_interaction(D);
    std::vector<Mat> gens;
    for (unsigned mask = 0; mask < (1u << D); ++mask) {
        RVec om(D);
        for (int i = 0; i < D; ++i) om[i] = (mask >> i) & 1u;
        gens.push_back(continuous_generator(v0, c, E, om));
    }
    return gens;
}

LieClosureReport check_lemma_spN(int D, double E, const std::vector<double>& c, double svd_tol) {
    return lie_closure(lemma_spN_generators(D, E, c), D * (2 * D + 1), svd_tol);
}

std::vector<Mat> zipper_a1_basis(int D) {
    std::vector<Mat> out;
    for (const auto& b : canonical_basis(AlgebraKind::UDD, D)) {
        if (b.topRightCorner(D, D).norm() == 0.0 && b.bottomLeftCorner(D, D).norm() == 0.0) out.push_back(b);
    }
    return out;
}

LieClosureReport zipper_lie_closure(int D, cplx z, const Mat& alpha, int sample_count, double svd_tol) {
    (void)sample_count;  // generators are z-independent and deterministic
    if (std::abs(std::abs(z) - 1.0) > 1e-12) fail(ErrorKind::PreconditionViolated, "|z| = 1");
    if (alpha.rows() != D || alpha.cols() != D) fail(ErrorKind::DimensionMismatch, "alpha must be D x D");
    const Mat t1 = zipper_hat_t1(alpha);
    Eigen::JacobiSVD<Mat> svd(t1);
    const auto& s = svd.singularValues();
    if (s[0] / s[s.size() - 1] >= 1e12) fail(ErrorKind::SingularBeta, "T1 is ill-conditioned");
    const Mat t1i = t1.inverse();
    std::vector<Mat> gens = zipper_a1_basis(D);
    const cplx i1(0.0, 1.0);
    for (int j = 0; j < D; ++j) {
        Mat e = Mat::Zero(2 * D, 2 * D);
        e(j, j) = 1.0;
        gens.push_back(i1 * t1i * e * t1);
    }
    return lie_closure(gens, 4 * D * D, svd_tol);
}

DisorderInterval disorder_interval(int D, const RMat& V0, const std::vector<double>& c, double d_O, double ell) {
    if (!(d_O > 0.0)) fail(ErrorKind::PreconditionViolated, "d_O > 0");
    if (!(ell > 0.0)) fail(ErrorKind::PreconditionViolated, "ell > 0");
    if (D < 1 || D > 20) fail(ErrorKind::PreconditionViolated, "1 <= D <= 20");
    if (static_cast<int>(c.size()) != D) fail(ErrorKind::DimensionMismatch, "c must have D entries");
    for (double ci : c)
        if (ci == 0.0) fail(ErrorKind::PreconditionViolated, "c_i != 0");
    const RMat v0 = interaction_of(D, V0);
    DisorderInterval out;
    out.lambda_min = 1e300;
    out.lambda_max = -1e300;
    for (unsigned mask = 0; mask < (1u << D); ++mask) {
        RMat m = v0;
        for (int i = 0; i < D; ++i) m(i, i) += c[i] * ((mask >> i) & 1u);
        Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
        out.lambda_min = std::min(out.lambda_min, es.eigenvalues().minCoeff());
        out.lambda_max = std::max(out.lambda_max, es.eigenvalues().maxCoeff());
    }
    out.lambda0 = 0.5 * (out.lambda_max - out.lambda_min);
    out.ell_c = out.lambda0 > 0.0 ? std::min(1.0, d_O / out.lambda0) : 1.0;
    out.d_O = d_O;
    out.ell = ell;
    const double lo = out.lambda_max - d_O / ell;
    const double hi = out.lambda_min + d_O / ell;
    // defined only for ell < ell_C; ell_C also caps ell at 1
    if (ell < out.ell_c && lo <= hi) out.interval = std::make_pair(lo, hi);
    return out;
}

double norm_X(const RVec& omega, double E, const RMat& V0, const std::vector<double>& c) {
    const auto D = V0.rows();
    if (omega.size() != D || static_cast<Eigen::Index>(c.size()) != D)
        fail(ErrorKind::DimensionMismatch, "omega, c and V0 sizes differ");
    RMat m = V0;
    for (Eigen::Index i = 0; i < D; ++i) m(i, i) += c[i] * omega[i];
    Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
    double out = 1.0;
    for (Eigen::Index i = 0; i < D; ++i) out = std::max(out, std::abs(es.eigenvalues()[i] - E));
    return out;
}

double log_transfer_identity(const ContinuousQuasi1D& spec, double E, const RVec& omega) {
    const RMat v0 = interaction_of(spec.D, spec.V0);
    const double lx = spec.ell * norm_X(omega, E, v0, spec.c);
    if (!(lx < 0.5)) fail(ErrorKind::PreconditionViolated, "ell ||X|| = " + std::to_string(lx) + " is not < 0.5");
    const Mat x = continuous_generator(v0, spec.c, E, omega);
    const Mat t = continuous_transfer(spec, E, omega).matrix;
    return op_norm(logm_principal(t) - spec.ell * x);
}

}  // namespace q1d
