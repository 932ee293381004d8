#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "q1d/matkit.hpp"
#include "q1d/randsrc.hpp"

namespace q1d {

/// Tridiagonal with zero diagonal and unit off-diagonal.
RMat default_interaction(int D);

struct DiscreteQuasi1D {
    int D = 1;
    RMat V0;  // empty means default_interaction(D)
    double lambda = 1.0;
    std::vector<DisorderLaw> laws{bernoulli01()};
};

struct ContinuousQuasi1D {
    int D = 1;
    RMat V0;
    double ell = 1.0;
    std::vector<double> c{1.0};
    std::vector<DisorderLaw> laws{bernoulli01()};
};

struct PointInteractions {
    int D = 1;
    RMat V0;
    std::vector<double> c{1.0};
    std::vector<DisorderLaw> laws{bernoulli01()};
};

/// Phase law is read as angles on the circle.
struct UnitaryAnderson {
    double r = 0.0;
    double t = 1.0;
    DisorderLaw phase_law = UniformInterval{0.0, 6.283185307179586};
};

/// Constant Verblunsky matrix alpha; phases are Haar on U(D)^4 per cell.
struct ScatteringZipper {
    int D = 1;
    Mat alpha;
};

struct VerblunskyLaw {
    std::vector<cplx> values;
    std::vector<double> weights;
};

struct ExtendedCMV {
    VerblunskyLaw law;
};

using ModelSpec =
    std::variant<DiscreteQuasi1D, ContinuousQuasi1D, PointInteractions, UnitaryAnderson, ScatteringZipper, ExtendedCMV>;

bool operator==(const DiscreteQuasi1D& a, const DiscreteQuasi1D& b);
bool operator==(const ContinuousQuasi1D& a, const ContinuousQuasi1D& b);
bool operator==(const PointInteractions& a, const PointInteractions& b);
bool operator==(const UnitaryAnderson& a, const UnitaryAnderson& b);
bool operator==(const ScatteringZipper& a, const ScatteringZipper& b);
bool operator==(const ExtendedCMV& a, const ExtendedCMV& b);

/// Throws InvalidModel naming the violated constraint.
void validate(const ModelSpec& spec);
std::string family_name(const ModelSpec& spec);
/// D for the quasi-1D families, 1 for the scalar unitary ones.
int model_dimension(const ModelSpec& spec);
bool is_unitary_family(const ModelSpec& spec);
RMat interaction_of(int D, const RMat& V0);

struct SpectralPoint {
    enum class Kind { Energy, Unimodular };
    Kind kind = Kind::Energy;
    double energy = 0.0;
    cplx z{1.0, 0.0};

    static SpectralPoint at_energy(double E) { return {Kind::Energy, E, {1.0, 0.0}}; }
    static SpectralPoint at_z(cplx z);
    static SpectralPoint at_angle(double a);
    double coordinate() const;  // E or arg z
};

struct TransferSample {
    Mat matrix;
    GroupTag group;
    std::int64_t site = 0;
};

// --- self-adjoint families ---

TransferSample discrete_transfer(const DiscreteQuasi1D& spec, double E, const RVec& omega, std::int64_t site = 0);
/// [[0, I],[-I, lambda V - E]]
Mat discrete_transfer_inverse(const DiscreteQuasi1D& spec, double E, const RVec& omega);

/// X = [[0, I],[V0 + diag(c omega) - E, 0]]
Mat continuous_generator(const RMat& V0, const std::vector<double>& c, double E, const RVec& omega);
TransferSample continuous_transfer(const ContinuousQuasi1D& spec, double E, const RVec& omega, std::int64_t site = 0);

Mat unipotent_m(const RMat& Q);  // [[I,0],[Q,I]]
Mat free_cell_transfer(const RMat& V0, double E);
TransferSample point_interaction_transfer(const PointInteractions& spec, double E, const RVec& omega,
                                          std::int64_t site = 0);

// --- unitary Anderson ---

/// The 2x2 matrix exactly as printed, mapping (psi_{2k-1}, psi_{2k}) to (psi_{2k+1}, psi_{2k+2}).
Mat unitary_anderson_matrix(double r, double t, cplx z, double theta, double eta);
/// The Hermitian form [[1, r/t],[r/t, -1]] preserved by the printed matrix.
Mat unitary_anderson_form(double r, double t);
/// Printed matrix conjugated by the fixed rotation that takes its form to diag(1,-1).
TransferSample unitary_anderson_transfer(const UnitaryAnderson& spec, cplx z, double theta, double eta,
                                         std::int64_t site = 0);
/// Spectral gap half-width arccos(r^2 - t^2).
double unitary_anderson_lambda0(const UnitaryAnderson& spec);

// --- scattering zipper ---

Mat rho(const Mat& alpha);        // (I - alpha alpha*)^{1/2}
Mat rho_tilde(const Mat& alpha);  // (I - alpha* alpha)^{1/2}
Mat scattering_matrix(const Mat& alpha, const Mat& U, const Mat& V);
Mat phi_map(const Mat& S);

struct ZipperPhases {
    Mat U0, V0, U1, V1;
};
ZipperPhases draw_zipper_phases(const SeedSpec& seed, std::int64_t site, int D);
Mat zipper_hat_t0(const Mat& alpha, cplx z);
Mat zipper_hat_t1(const Mat& alpha);
TransferSample zipper_transfer(const ScatteringZipper& spec, cplx z, const ZipperPhases& phases,
                               std::int64_t site = 0);
/// ||T(z, phases) - phi(z^-1 S0) phi(S_-1)||
double zipper_factorization_residual(const ScatteringZipper& spec, cplx z, const ZipperPhases& phases);

// --- finite-volume builders ---

/// Real symmetric band matrix in LAPACK lower storage: ab(i - j, j) = a(i, j).
struct SymBand {
    int n = 0;
    int kd = 0;
    RMat ab;
    RMat to_dense() const;
};

RVec discrete_site_potential(const DiscreteQuasi1D& spec, const SeedSpec& seed, std::int64_t site);
SymBand build_finite_discrete_band(const DiscreteQuasi1D& spec, int L, const SeedSpec& seed);
Mat build_finite_discrete(const DiscreteQuasi1D& spec, int L, const SeedSpec& seed);

enum class CmvBoundary { Corrected, Raw };
cplx draw_verblunsky(const VerblunskyLaw& law, const SeedSpec& seed, std::int64_t n);
/// Sites -L..L; boundary-corrected sections are exactly unitary.
Mat build_extended_cmv(const ExtendedCMV& spec, int L, const SeedSpec& seed,
                       CmvBoundary boundary = CmvBoundary::Corrected);

/// Periodic ring of 2L + 2 sites carrying U = D_omega U_e U_o.
Mat build_unitary_anderson_ring(const UnitaryAnderson& spec, int L, const SeedSpec& seed);
double unitary_anderson_phase(const UnitaryAnderson& spec, const SeedSpec& seed, std::int64_t site);
/// Ring index j carries lattice site j - offset.
int unitary_anderson_ring_offset(int L);

// --- cocycle ---

/// Deterministic producer of T_{omega^(n)} for n = 0, 1, 2, ...
class CocycleStream {
public:
    CocycleStream(const ModelSpec& spec, const SpectralPoint& point, const SeedSpec& seed);

    TransferSample next();
    /// q <- T_n q for the next site (real families only).
    void apply(RMat& q);
    /// q <- T_n q for the next site.
    void apply(Mat& q);
    bool is_real() const { return real_; }
    int size() const { return size_; }
    GroupTag group() const { return group_; }
    std::int64_t cursor() const { return cursor_; }

private:
    const Mat& draw();

    ModelSpec spec_;
    SpectralPoint point_;
    SeedSpec seed_;
    std::int64_t cursor_ = 0;
    int size_ = 0;
    bool real_ = false;
    GroupTag group_;
    RMat v_;       // discrete: lambda V0 - E
    Mat current_;  // last generic matrix
    RMat current_real_;
    Mat hat0_, hat1_;  // zipper constants
    Mat rot_;          // unitary Anderson frame
    std::vector<std::pair<std::vector<double>, Mat>> cache_;
    std::optional<Mat> free_cell_;
};

void validate_point(const ModelSpec& spec, const SpectralPoint& point);

}  // namespace q1d
