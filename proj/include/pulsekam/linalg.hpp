#pragma once

#include <complex>

#include <Eigen/Dense>

#include "pulsekam/errors.hpp"

namespace pulsekam {

// Dense complex operator; small dimensions only (default 2).
using Operator = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr double kHermTol = 1e-14;     // Hermitian refinement tolerance
inline constexpr double kUnitaryTol = 1e-12;  // unitary refinement tolerance

// c0*I + c1*sigma1 + c2*sigma2 + c3*sigma3 with real coefficients
struct PauliVector {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
};

Operator identity(int dim = 2);
const Operator& sigma1();
const Operator& sigma2();
const Operator& sigma3();

// ||M - M^dag||_max, entrywise
double hermiticity_defect(const Operator& M);
// ||U^dag U - I|| in spectral norm
double unitarity_defect(const Operator& U);
// (M + M^dag)/2, killing roundoff drift on nominally Hermitian results
Operator hermitize(const Operator& M);

// throws HermiticityError / DimensionError when the refinement fails
void require_hermitian(const Operator& M, double tol = kHermTol);
void require_dim(const Operator& M, int dim);

// tr(M)/2 and tr(sigma_k M)/2 for a Hermitian 2x2 operator
PauliVector pauli_decompose(const Operator& M);
Operator pauli_compose(const PauliVector& v);

// exp(-i H) for Hermitian H: closed form via the Pauli decomposition when
// dim = 2, Hermitian eigendecomposition otherwise
Operator unitary_exp(const Operator& H);

// largest singular value
double spectral_norm(const Operator& M);

Operator commutator(const Operator& A, const Operator& B);

// ad^0(A,B) = B, ad^k(A,B) = [A, ad^{k-1}(A,B)]
Operator ad_pow(const Operator& A, const Operator& B, int k);

// sqrt(-det W) for a traceless Hermitian 2x2 W = c.sigma; equals |c|
double lambda_of(const Operator& W);

}  // namespace pulsekam
