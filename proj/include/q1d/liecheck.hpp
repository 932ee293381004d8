#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "q1d/models.hpp"

namespace q1d {

struct LieClosureReport {
    enum class Verdict { Full, Proper, Inconclusive };
    int closure_dim = 0;
    int target_dim = 0;
    std::vector<std::pair<int, int>> generations;  // (bracket round, rank)
    double svd_tol = 1e-9;
    Verdict verdict = Verdict::Inconclusive;
};

std::string to_string(LieClosureReport::Verdict v);

/// Real span of the generators closed under commutators.
LieClosureReport lie_closure(const std::vector<Mat>& generators, int target_dim, double svd_tol = 1e-9,
                             int max_rounds = 12);

/// Generators X_omega(E) for omega in {0,1}^D (c_i scaling, default V0).
std::vector<Mat> lemma_spN_generators(int D, double E, const std::vector<double>& c);
LieClosureReport check_lemma_spN(int D, double E, const std::vector<double>& c, double svd_tol = 1e-9);

/// Real basis of a_1 = {iA (+) iC : A, C Hermitian}.
std::vector<Mat> zipper_a1_basis(int D);
LieClosureReport zipper_lie_closure(int D, cplx z, const Mat& alpha, int sample_count = 0, double svd_tol = 1e-9);

struct DisorderInterval {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double lambda0 = 0.0;
    double ell_c = 0.0;
    double d_O = 0.0;
    double ell = 0.0;
    std::optional<std::pair<double, double>> interval;  // empty when the endpoints cross
};

DisorderInterval disorder_interval(int D, const RMat& V0, const std::vector<double>& c, double d_O, double ell);

/// max(1, max_i |lambda_i(M_omega) - E|) with M_omega = V0 + diag(c omega).
double norm_X(const RVec& omega, double E, const RMat& V0, const std::vector<double>& c);

/// ||logm(T) - ell X_omega(E)||; requires ell ||X|| < 0.5.
double log_transfer_identity(const ContinuousQuasi1D& spec, double E, const RVec& omega);

}  // namespace q1d
