#include "q1d/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "q1d/errors.hpp"

namespace q1d {

RMat default_interaction(int D) {
    RMat v = RMat::Zero(D, D);
    for (int i = 0; i + 1 < D; ++i) v(i, i + 1) = v(i + 1, i) = 1.0;
    return v;
}

RMat interaction_of(int D, const RMat& V0) { return V0.size() == 0 ? default_interaction(D) : V0; }

namespace {

bool same_matrix(const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

void check_laws(const std::vector<DisorderLaw>& laws, int D) {
    if (laws.empty()) fail(ErrorKind::InvalidModel, "laws: at least one disorder law required");
    if (laws.size() != 1 && static_cast<int>(laws.size()) != D)
        fail(ErrorKind::InvalidModel, "laws: need 1 or D laws");
    for (const auto& l : laws) validate_law(l);
}

void check_interaction(int D, const RMat& V0) {
    if (D < 1) fail(ErrorKind::InvalidModel, "D >= 1");
    if (V0.size() == 0) return;
    if (V0.rows() != D || V0.cols() != D) fail(ErrorKind::InvalidModel, "V0 must be D x D");
    if ((V0 - V0.transpose()).cwiseAbs().maxCoeff() > 0.0) fail(ErrorKind::InvalidModel, "V0 must be symmetric");
}

void check_couplings(int D, const std::vector<double>& c) {
    if (static_cast<int>(c.size()) != D) fail(ErrorKind::InvalidModel, "c must have D entries");
    for (double ci : c)
        if (ci == 0.0 || !std::isfinite(ci)) fail(ErrorKind::InvalidModel, "c_i != 0");
}

RVec scaled_omega(const std::vector<double>& c, const RVec& omega) {
    RVec out(omega.size());
    for (Eigen::Index i = 0; i < omega.size(); ++i) out[i] = c[i] * omega[i];
    return out;
}

void check_omega(int D, const RVec& omega) {
    if (omega.size() != D) fail(ErrorKind::DimensionMismatch, "site vector length differs from D");
}

Mat hermitian_sqrt(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Mat diag_blocks(const Mat& a, const Mat& b) {
    Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

double alpha_norm_sq(const Mat& alpha) { return op_norm(alpha.adjoint() * alpha); }

}  // namespace

bool operator==(const DiscreteQuasi1D& a, const DiscreteQuasi1D& b) {
    return a.D == b.D && same_matrix(a.V0, b.V0) && a.lambda == b.lambda && a.laws == b.laws;
}
bool operator==(const ContinuousQuasi1D& a, const ContinuousQuasi1D& b) {
    return a.D == b.D && same_matrix(a.V0, b.V0) && a.ell == b.ell && a.c == b.c && a.laws == b.laws;
}
bool operator==(const PointInteractions& a, const PointInteractions& b) {
    return a.D == b.D && same_matrix(a.V0, b.V0) && a.c == b.c && a.laws == b.laws;
}
bool operator==(const UnitaryAnderson& a, const UnitaryAnderson& b) {
    return a.r == b.r && a.t == b.t && a.phase_law == b.phase_law;
}
bool operator==(const ScatteringZipper& a, const ScatteringZipper& b) {
    return a.D == b.D && same_matrix(a.alpha, b.alpha);
}
bool operator==(const ExtendedCMV& a, const ExtendedCMV& b) {
    return a.law.values == b.law.values && a.law.weights == b.law.weights;
}

void validate(const ModelSpec& spec) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DiscreteQuasi1D>) {
                check_interaction(m.D, m.V0);
                if (!(m.lambda >= 0.0) || !std::isfinite(m.lambda)) fail(ErrorKind::InvalidModel, "lambda >= 0");
                check_laws(m.laws, m.D);
            } else if constexpr (std::is_same_v<T, ContinuousQuasi1D>) {
                check_interaction(m.D, m.V0);
                if (!(m.ell > 0.0) || !std::isfinite(m.ell)) fail(ErrorKind::InvalidModel, "ell > 0");
                check_couplings(m.D, m.c);
                check_laws(m.laws, m.D);
            } else if constexpr (std::is_same_v<T, PointInteractions>) {
                check_interaction(m.D, m.V0);
                check_couplings(m.D, m.c);
                check_laws(m.laws, m.D);
            } else if constexpr (std::is_same_v<T, UnitaryAnderson>) {
                if (std::abs(m.r * m.r + m.t * m.t - 1.0) > 1e-12) fail(ErrorKind::InvalidModel, "r^2+t^2=1");
                if (m.t == 0.0) fail(ErrorKind::DegenerateTransmission, "t != 0");
                validate_law(m.phase_law);
            } else if constexpr (std::is_same_v<T, ScatteringZipper>) {
                if (m.D < 1) fail(ErrorKind::InvalidModel, "D >= 1");
                if (m.alpha.rows() != m.D || m.alpha.cols() != m.D) fail(ErrorKind::InvalidModel, "alpha must be D x D");
                if (alpha_norm_sq(m.alpha) >= 1.0 - 1e-12) fail(ErrorKind::VerblunskyTooLarge, "||alpha* alpha|| < 1");
            } else {
                const auto& law = m.law;
                if (law.values.size() != law.weights.size() || law.values.empty())
                    fail(ErrorKind::InvalidModel, "verblunsky values and weights must match");
                std::set<std::pair<double, double>> pts;
                for (std::size_t k = 0; k < law.values.size(); ++k) {
                    if (!(std::abs(law.values[k]) < 1.0)) fail(ErrorKind::InvalidModel, "|alpha| < 1");
                    if (!(law.weights[k] >= 0.0)) fail(ErrorKind::InvalidModel, "weights >= 0");
                    if (law.weights[k] > 0.0) pts.insert({law.values[k].real(), law.values[k].imag()});
                }
                if (pts.size() < 2) fail(ErrorKind::InvalidModel, "verblunsky law needs two support points");
            }
        },
        spec);
}

std::string family_name(const ModelSpec& spec) {
    static const char* names[] = {"discrete", "continuous", "point", "unitary-anderson", "zipper", "cmv"};
    return names[spec.index()];
}

int model_dimension(const ModelSpec& spec) {
    return std::visit(
        [](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, UnitaryAnderson> || std::is_same_v<T, ExtendedCMV>)
                return 1;
            else
                return m.D;
        },
        spec);
}

bool is_unitary_family(const ModelSpec& spec) {
    return std::holds_alternative<UnitaryAnderson>(spec) || std::holds_alternative<ScatteringZipper>(spec) ||
           std::holds_alternative<ExtendedCMV>(spec);
}

SpectralPoint SpectralPoint::at_z(cplx z) { return {Kind::Unimodular, 0.0, z}; }
SpectralPoint SpectralPoint::at_angle(double a) { return {Kind::Unimodular, 0.0, std::polar(1.0, a)}; }
double SpectralPoint::coordinate() const { return kind == Kind::Energy ? energy : std::arg(z); }

void validate_point(const ModelSpec& spec, const SpectralPoint& point) {
    if (is_unitary_family(spec)) {
        if (point.kind != SpectralPoint::Kind::Unimodular)
            fail(ErrorKind::PreconditionViolated, "unitary families need a unimodular spectral point");
        if (std::abs(std::abs(point.z) - 1.0) > 1e-12) fail(ErrorKind::PreconditionViolated, "|z| = 1");
    } else if (point.kind != SpectralPoint::Kind::Energy) {
        fail(ErrorKind::PreconditionViolated, "self-adjoint families need a real energy");
    }
}

// --- self-adjoint families ---

TransferSample discrete_transfer(const DiscreteQuasi1D& spec, double E, const RVec& omega, std::int64_t site) {
    const int D = spec.D;
    check_omega(D, omega);
    RMat v = spec.lambda * (interaction_of(D, spec.V0) + RMat(omega.asDiagonal()));
    v.diagonal().array() -= E;
    Mat t = Mat::Zero(2 * D, 2 * D);
    t.topLeftCorner(D, D) = v.cast<cplx>();
    t.topRightCorner(D, D) = -Mat::Identity(D, D);
    t.bottomLeftCorner(D, D) = Mat::Identity(D, D);
    return {t, GroupTag::symplectic(D), site};
}

Mat discrete_transfer_inverse(const DiscreteQuasi1D& spec, double E, const RVec& omega) {
    const int D = spec.D;
    check_omega(D, omega);
    RMat v = spec.lambda * (interaction_of(D, spec.V0) + RMat(omega.asDiagonal()));
    v.diagonal().array() -= E;
    Mat t = Mat::Zero(2 * D, 2 * D);
    t.topRightCorner(D, D) = Mat::Identity(D, D);
    t.bottomLeftCorner(D, D) = -Mat::Identity(D, D);
    t.bottomRightCorner(D, D) = v.cast<cplx>();
    return t;
}

Mat continuous_generator(const RMat& V0, const std::vector<double>& c, double E, const RVec& omega) {
    const int D = static_cast<int>(V0.rows());
    check_omega(D, omega);
    RMat m = V0 + RMat(scaled_omega(c, omega).asDiagonal());
    m.diagonal().array() -= E;
    Mat x = Mat::Zero(2 * D, 2 * D);
    x.topRightCorner(D, D) = Mat::Identity(D, D);
    x.bottomLeftCorner(D, D) = m.cast<cplx>();
    return x;
}

TransferSample continuous_transfer(const ContinuousQuasi1D& spec, double E, const RVec& omega, std::int64_t site) {
    const Mat x = continuous_generator(interaction_of(spec.D, spec.V0), spec.c, E, omega);
    Mat t = expm(spec.ell * x);
    t = t.real().cast<cplx>();
    return {t, GroupTag::symplectic(spec.D), site};
}

Mat unipotent_m(const RMat& Q) {
    const auto D = Q.rows();
    Mat m = Mat::Identity(2 * D, 2 * D);
    m.bottomLeftCorner(D, D) = Q.cast<cplx>();
    return m;
}

Mat free_cell_transfer(const RMat& V0, double E) {
    const int D = static_cast<int>(V0.rows());
    Mat x = Mat::Zero(2 * D, 2 * D);
    x.topRightCorner(D, D) = Mat::Identity(D, D);
    RMat m = V0;
    m.diagonal().array() -= E;
    x.bottomLeftCorner(D, D) = m.cast<cplx>();
    Mat t = expm(x);
    return t.real().cast<cplx>();
}

TransferSample point_interaction_transfer(const PointInteractions& spec, double E, const RVec& omega,
                                          std::int64_t site) {
    check_omega(spec.D, omega);
    const RMat q = scaled_omega(spec.c, omega).asDiagonal();
    return {unipotent_m(q) * free_cell_transfer(interaction_of(spec.D, spec.V0), E), GroupTag::symplectic(spec.D),
            site};
}

// --- unitary Anderson ---

Mat unitary_anderson_matrix(double r, double t, cplx z, double theta, double eta) {
    if (t == 0.0) fail(ErrorKind::DegenerateTransmission, "t = 0");
    const cplx i1(0.0, 1.0);
    const cplx a = std::exp(-i1 * eta) / z;  // e^{-i eta}/z
    const cplx b = std::exp(i1 * (theta - eta));
    const double s = r / t;
    Mat m(2, 2);
    m(0, 0) = -a;
    m(0, 1) = s * (b - a);
    m(1, 0) = s * (1.0 - a);
    m(1, 1) = -(z / (t * t)) * std::exp(i1 * theta) + s * s * (1.0 + b - a);
    return m;
}

Mat unitary_anderson_form(double r, double t) {
    Mat f(2, 2);
    f << 1.0, r / t, r / t, -1.0;
    return f;
}

namespace {

Mat anderson_frame(double r, double t) {
    // rotation by phi with cos 2phi = |t|, sin 2phi = r sgn(t)
    const double two_phi = std::atan2(t < 0 ? -r : r, std::abs(t));
    const double c = std::cos(0.5 * two_phi), s = std::sin(0.5 * two_phi);
    Mat rot(2, 2);
    rot << c, -s, s, c;
    return rot;
}

}  // namespace

TransferSample unitary_anderson_transfer(const UnitaryAnderson& spec, cplx z, double theta, double eta,
                                         std::int64_t site) {
    const Mat rot = anderson_frame(spec.r, spec.t);
    return {rot.transpose() * unitary_anderson_matrix(spec.r, spec.t, z, theta, eta) * rot, GroupTag::lorentz(1),
            site};
}

double unitary_anderson_lambda0(const UnitaryAnderson& spec) {
    return std::acos(std::clamp(spec.r * spec.r - spec.t * spec.t, -1.0, 1.0));
}

// --- scattering zipper ---

Mat rho(const Mat& alpha) {
    if (alpha_norm_sq(alpha) >= 1.0 - 1e-12) fail(ErrorKind::VerblunskyTooLarge, "||alpha* alpha|| >= 1");
    return hermitian_sqrt(Mat::Identity(alpha.rows(), alpha.rows()) - alpha * alpha.adjoint());
}

Mat rho_tilde(const Mat& alpha) {
    if (alpha_norm_sq(alpha) >= 1.0 - 1e-12) fail(ErrorKind::VerblunskyTooLarge, "||alpha* alpha|| >= 1");
    return hermitian_sqrt(Mat::Identity(alpha.cols(), alpha.cols()) - alpha.adjoint() * alpha);
}

Mat scattering_matrix(const Mat& alpha, const Mat& U, const Mat& V) {
    return block2(alpha, rho(alpha) * U, V * rho_tilde(alpha), -V * alpha.adjoint() * U);
}

Mat phi_map(const Mat& S) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0) fail(ErrorKind::DimensionMismatch, "phi needs a 2D x 2D matrix");
    const auto D = S.rows() / 2;
    const Mat a = S.topLeftCorner(D, D), b = S.topRightCorner(D, D);
    const Mat c = S.bottomLeftCorner(D, D), d = S.bottomRightCorner(D, D);
    Eigen::JacobiSVD<Mat> svd(b);
    const auto& sv = svd.singularValues();
    if (!(sv[D - 1] > 0.0) || sv[0] / sv[D - 1] >= 1e12) fail(ErrorKind::SingularBeta, "beta block is singular");
    const Mat binv = b.inverse();
    return block2(c - d * binv * a, d * binv, -binv * a, binv);
}

ZipperPhases draw_zipper_phases(const SeedSpec& seed, std::int64_t site, int D) {
    Stream rng(SeedSpec{seed.master_seed, seed.realization, site});
    ZipperPhases p;
    p.U0 = haar_unitary(rng, D);
    p.V0 = haar_unitary(rng, D);
    p.U1 = haar_unitary(rng, D);
    p.V1 = haar_unitary(rng, D);
    return p;
}

Mat zipper_hat_t0(const Mat& alpha, cplx z) {
    const Mat rti = rho_tilde(alpha).inverse();
    const Mat ri = rho(alpha).inverse();
    return block2(rti / z, -rti * alpha.adjoint(), -alpha * rti, z * ri);
}

Mat zipper_hat_t1(const Mat& alpha) { return zipper_hat_t0(alpha, cplx(1.0, 0.0)); }

TransferSample zipper_transfer(const ScatteringZipper& spec, cplx z, const ZipperPhases& ph, std::int64_t site) {
    const Mat t = diag_blocks(ph.V0, ph.U0.adjoint()) * zipper_hat_t0(spec.alpha, z) *
                  diag_blocks(ph.V1, ph.U1.adjoint()) * zipper_hat_t1(spec.alpha);
    return {t, GroupTag::lorentz(spec.D), site};
}

double zipper_factorization_residual(const ScatteringZipper& spec, cplx z, const ZipperPhases& ph) {
    const Mat s0 = scattering_matrix(spec.alpha, ph.U0, ph.V0);
    const Mat s1 = scattering_matrix(spec.alpha, ph.U1, ph.V1);
    const Mat rhs = phi_map(s0 / z) * phi_map(s1);
    return op_norm(zipper_transfer(spec, z, ph).matrix - rhs);
}

// --- finite-volume builders ---

RMat SymBand::to_dense() const {
    RMat a = RMat::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int d = 0; d <= kd && j + d < n; ++d) a(j + d, j) = a(j, j + d) = ab(d, j);
    return a;
}

RVec discrete_site_potential(const DiscreteQuasi1D& spec, const SeedSpec& seed, std::int64_t site) {
    return draw_site_vector(seed, spec.laws, site, spec.D);
}

SymBand build_finite_discrete_band(const DiscreteQuasi1D& spec, int L, const SeedSpec& seed) {
    if (L < 1) fail(ErrorKind::PreconditionViolated, "L >= 1");
    for (const auto& l : spec.laws) validate_law(l);
    const int D = spec.D;
    const RMat v0 = interaction_of(D, spec.V0);
    const int cells = 2 * L + 1;
    SymBand band;
    band.n = D * cells;
    band.kd = D;
    band.ab = RMat::Zero(D + 1, band.n);
    for (int cell = 0; cell < cells; ++cell) {
        const RVec om = discrete_site_potential(spec, seed, cell - L);
        const RMat blk = spec.lambda * (v0 + RMat(om.asDiagonal()));
        for (int j = 0; j < D; ++j) {
            const int col = cell * D + j;
            for (int i = j; i < D; ++i) band.ab(i - j, col) = blk(i, j);
            if (cell + 1 < cells) band.ab(D, col) = -1.0;
        }
    }
    return band;
}

Mat build_finite_discrete(const DiscreteQuasi1D& spec, int L, const SeedSpec& seed) {
    return build_finite_discrete_band(spec, L, seed).to_dense().cast<cplx>();
}

cplx draw_verblunsky(const VerblunskyLaw& law, const SeedSpec& seed, std::int64_t n) {
    Stream rng(SeedSpec{seed.master_seed, seed.realization, n});
    const double u = rng.uniform();
    double total = 0.0;
    for (double w : law.weights) total += w;
    double acc = 0.0;
    for (std::size_t k = 0; k < law.values.size(); ++k) {
        acc += law.weights[k] / total;
        if (u < acc) return law.values[k];
    }
    return law.values.back();
}

namespace {

struct Theta {
    cplx a00, a01, a10, a11;
};

Theta theta_block(cplx alpha) {
    const double r = std::sqrt(std::max(0.0, 1.0 - std::norm(alpha)));
    return {std::conj(alpha), r, r, -alpha};
}

// Block-diagonal factor on global indices [lo, hi] with 2x2 blocks starting at
// indices of the given parity; orphan ends get the |alpha| = 1 closure when corrected.
Mat cmv_factor(const std::vector<cplx>& alpha, std::int64_t lo, std::int64_t hi, int parity, bool corrected) {
    const auto n = static_cast<Eigen::Index>(hi - lo + 1);
    Mat f = Mat::Zero(n, n);
    auto a_at = [&](std::int64_t g) { return alpha[static_cast<std::size_t>(g - lo + 2)]; };
    for (std::int64_t g = lo - 1; g <= hi; ++g) {
        if (((g % 2) + 2) % 2 != parity) continue;
        const bool in0 = g >= lo, in1 = g + 1 <= hi;
        if (!in0 && !in1) continue;
        const Theta th = theta_block(a_at(g));
        const Eigen::Index i0 = g - lo;
        if (in0 && in1) {
            f(i0, i0) = th.a00;
            f(i0, i0 + 1) = th.a01;
            f(i0 + 1, i0) = th.a10;
            f(i0 + 1, i0 + 1) = th.a11;
        } else if (in0) {
            f(i0, i0) = corrected ? cplx(1.0, 0.0) : th.a00;
        } else {
            f(i0 + 1, i0 + 1) = corrected ? cplx(-1.0, 0.0) : th.a11;
        }
    }
    return f;
}

}  // namespace

Mat build_extended_cmv(const ExtendedCMV& spec, int L, const SeedSpec& seed, CmvBoundary boundary) {
    if (L < 2) fail(ErrorKind::PreconditionViolated, "L >= 2");
    validate(ModelSpec{spec});
    const std::int64_t lo = -L, hi = L;
    std::vector<cplx> alpha;
    for (std::int64_t g = lo - 2; g <= hi + 2; ++g) alpha.push_back(draw_verblunsky(spec.law, seed, g));
    if (boundary == CmvBoundary::Corrected)
        return cmv_factor(alpha, lo, hi, 0, true) * cmv_factor(alpha, lo, hi, 1, true);
    // raw truncation of the doubly-infinite product L M
    std::vector<cplx> wide;
    for (std::int64_t g = lo - 4; g <= hi + 4; ++g) wide.push_back(draw_verblunsky(spec.law, seed, g));
    const Mat full = cmv_factor(wide, lo - 2, hi + 2, 0, false) * cmv_factor(wide, lo - 2, hi + 2, 1, false);
    return full.block(2, 2, hi - lo + 1, hi - lo + 1);
}

int unitary_anderson_ring_offset(int L) { return (L + 1) + ((L + 1) & 1); }

double unitary_anderson_phase(const UnitaryAnderson& spec, const SeedSpec& seed, std::int64_t site) {
    Stream rng(SeedSpec{seed.master_seed, seed.realization, site});
    return sample(spec.phase_law, rng);
}

Mat build_unitary_anderson_ring(const UnitaryAnderson& spec, int L, const SeedSpec& seed) {
    if (L < 1) fail(ErrorKind::PreconditionViolated, "L >= 1");
    validate(ModelSpec{spec});
    const int n = 2 * L + 2;
    const double r = spec.r, t = spec.t;
    Mat ue = Mat::Zero(n, n), uo = Mat::Zero(n, n);
    for (int k = 0; k < n; k += 2) {
        ue(k, k) = r;
        ue(k, k + 1) = t;
        ue(k + 1, k) = -t;
        ue(k + 1, k + 1) = r;
        const int a = k + 1, b = (k + 2) % n;
        uo(a, a) = r;
        uo(a, b) = -t;
        uo(b, a) = t;
        uo(b, b) = r;
    }
    // ring index j carries site j - o with o even, so B1 blocks sit on even sites
    const int o = unitary_anderson_ring_offset(L);
    CVec ph(n);
    // D_omega e_k = exp(-i theta_k) e_k
    for (int j = 0; j < n; ++j) ph[j] = std::polar(1.0, -unitary_anderson_phase(spec, seed, j - o));
    return ph.asDiagonal() * (ue * uo);
}

// --- cocycle ---

CocycleStream::CocycleStream(const ModelSpec& spec, const SpectralPoint& point, const SeedSpec& seed)
    : spec_(spec), point_(point), seed_(seed) {
    validate(spec_);
    validate_point(spec_, point_);
    const int D = model_dimension(spec_);
    size_ = 2 * D;
    if (const auto* m = std::get_if<DiscreteQuasi1D>(&spec_)) {
        real_ = true;
        group_ = GroupTag::symplectic(D);
        v_ = m->lambda * interaction_of(D, m->V0);
        v_.diagonal().array() -= point.energy;
    } else if (std::holds_alternative<ContinuousQuasi1D>(spec_)) {
        real_ = true;
        group_ = GroupTag::symplectic(D);
    } else if (const auto* m = std::get_if<PointInteractions>(&spec_)) {
        real_ = true;
        group_ = GroupTag::symplectic(D);
        free_cell_ = free_cell_transfer(interaction_of(D, m->V0), point.energy);
        current_real_ = free_cell_->real();
    } else if (const auto* m = std::get_if<UnitaryAnderson>(&spec_)) {
        group_ = GroupTag::lorentz(1);
        rot_ = anderson_frame(m->r, m->t);
    } else if (const auto* m = std::get_if<ScatteringZipper>(&spec_)) {
        group_ = GroupTag::lorentz(D);
        hat0_ = zipper_hat_t0(m->alpha, point.z);
        hat1_ = zipper_hat_t1(m->alpha);
    } else {
        fail(ErrorKind::UnsupportedModel, "no transfer-matrix cocycle for the extended CMV family");
    }
}

const Mat& CocycleStream::draw() {
    const std::int64_t n = cursor_++;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DiscreteQuasi1D>) {
                current_ = discrete_transfer(m, point_.energy, draw_site_vector(seed_, m.laws, n, m.D), n).matrix;
            } else if constexpr (std::is_same_v<T, ContinuousQuasi1D>) {
                const RVec om = draw_site_vector(seed_, m.laws, n, m.D);
                const bool cacheable = std::all_of(m.laws.begin(), m.laws.end(), is_discrete);
                if (cacheable) {
                    std::vector<double> key(om.data(), om.data() + om.size());
                    for (const auto& [k, v] : cache_)
                        if (k == key) {
                            current_ = v;
                            return;
                        }
                    current_ = continuous_transfer(m, point_.energy, om, n).matrix;
                    if (cache_.size() < 4096) cache_.emplace_back(std::move(key), current_);
                } else {
                    current_ = continuous_transfer(m, point_.energy, om, n).matrix;
                }
            } else if constexpr (std::is_same_v<T, PointInteractions>) {
                const RVec om = draw_site_vector(seed_, m.laws, n, m.D);
                current_ = unipotent_m(scaled_omega(m.c, om).asDiagonal()) * *free_cell_;
            } else if constexpr (std::is_same_v<T, UnitaryAnderson>) {
                // cell n carries (theta_{2n}, theta_{2n+1}), the same phases the ring uses
                const double theta = unitary_anderson_phase(m, seed_, 2 * n);
                const double eta = unitary_anderson_phase(m, seed_, 2 * n + 1);
                current_ = rot_.transpose() * unitary_anderson_matrix(m.r, m.t, point_.z, theta, eta) * rot_;
            } else if constexpr (std::is_same_v<T, ScatteringZipper>) {
                const ZipperPhases ph = draw_zipper_phases(seed_, n, m.D);
                current_ = diag_blocks(ph.V0, ph.U0.adjoint()) * hat0_ * diag_blocks(ph.V1, ph.U1.adjoint()) * hat1_;
            }
        },
        spec_);
    return current_;
}

TransferSample CocycleStream::next() {
    const std::int64_t n = cursor_;
    return {draw(), group_, n};
}

void CocycleStream::apply(RMat& q) {
    if (!real_) fail(ErrorKind::UnsupportedModel, "real apply on a complex cocycle");
    if (const auto* m = std::get_if<DiscreteQuasi1D>(&spec_)) {
        const std::int64_t n = cursor_++;
        const RVec om = draw_site_vector(seed_, m->laws, n, m->D);
        const int D = m->D;
        // [top; bot] <- [(v + lambda diag om) top - bot; top]
        RMat top = q.topRows(D);
        q.topRows(D) = v_ * top - q.bottomRows(D);
        for (int i = 0; i < D; ++i) q.row(i) += (m->lambda * om[i]) * top.row(i);
        q.bottomRows(D) = top;
        return;
    }
    if (const auto* m = std::get_if<PointInteractions>(&spec_)) {
        const std::int64_t n = cursor_++;
        const RVec om = draw_site_vector(seed_, m->laws, n, m->D);
        const int D = m->D;
        q = current_real_ * q;
        for (int i = 0; i < D; ++i) q.row(D + i) += (m->c[i] * om[i]) * q.row(i);
        return;
    }
    q = draw().real() * q;
}

void CocycleStream::apply(Mat& q) { q = draw() * q; }

}  // namespace q1d
