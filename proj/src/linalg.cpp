#include "pulsekam/linalg.hpp"

#include <cmath>

namespace pulsekam {

namespace {
const Complex kI{0.0, 1.0};

Operator make_sigma(int k) {
    Operator s(2, 2);
    switch (k) {
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, -kI, kI, 0; break;
        default: s << 1, 0, 0, -1; break;
    }
    return s;
}
}  // namespace

Operator identity(int dim) { return Operator::Identity(dim, dim); }

const Operator& sigma1() {
    static const Operator s = make_sigma(1);
    return s;
}

const Operator& sigma2() {
    static const Operator s = make_sigma(2);
    return s;
}

const Operator& sigma3() {
    static const Operator s = make_sigma(3);
    return s;
}

double hermiticity_defect(const Operator& M) {
    return (M - M.adjoint().eval()).cwiseAbs().maxCoeff();
}

double unitarity_defect(const Operator& U) {
    return spectral_norm(U.adjoint() * U - identity(static_cast<int>(U.rows())));
}

Operator hermitize(const Operator& M) { return 0.5 * (M + M.adjoint().eval()); }

void require_hermitian(const Operator& M, double tol) {
    if (M.rows() != M.cols())
        throw DimensionError("operator is not square");
    if (hermiticity_defect(M) > tol)
        throw HermiticityError("operator is not Hermitian within tolerance");
}

void require_dim(const Operator& M, int dim) {
    if (M.rows() != dim || M.cols() != dim)
        throw DimensionError("operator does not have the required dimension");
}

PauliVector pauli_decompose(const Operator& M) {
    require_dim(M, 2);
    require_hermitian(M);
    PauliVector v;
    v.c0 = 0.5 * std::real(M(0, 0) + M(1, 1));
    v.c1 = 0.5 * std::real((sigma1() * M).trace());
    v.c2 = 0.5 * std::real((sigma2() * M).trace());
    v.c3 = 0.5 * std::real((sigma3() * M).trace());
    return v;
}

Operator pauli_compose(const PauliVector& v) {
    return v.c0 * identity(2) + v.c1 * sigma1() + v.c2 * sigma2() + v.c3 * sigma3();
}

Operator unitary_exp(const Operator& H) {
    if (H.rows() != H.cols())
        throw DimensionError("operator is not square");
    if (H.rows() == 2) {
        // exp(-i(c0 I + c.sigma)) = e^{-i c0} (cos|c| I - i sin|c| chat.sigma)
        require_hermitian(H, 1e-12);
        const PauliVector v = pauli_decompose(hermitize(H));
        const double norm = std::sqrt(v.c1 * v.c1 + v.c2 * v.c2 + v.c3 * v.c3);
        const Complex phase = std::exp(-kI * v.c0);
        Operator dir = Operator::Zero(2, 2);
        if (norm > 0)
            dir = (v.c1 * sigma1() + v.c2 * sigma2() + v.c3 * sigma3()) / norm;
        return phase * (std::cos(norm) * identity(2) - kI * std::sin(norm) * dir);
    }
    require_hermitian(H, 1e-12);
    Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(H));
    Eigen::VectorXcd phases = (-kI * es.eigenvalues().cast<Complex>().array()).exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double spectral_norm(const Operator& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Operator> svd(M);
    return svd.singularValues()(0);
}

Operator commutator(const Operator& A, const Operator& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw DimensionError("commutator of mismatched dimensions");
    return A * B - B * A;
}

Operator ad_pow(const Operator& A, const Operator& B, int k) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw DimensionError("ad_pow of mismatched dimensions");
    Operator r = B;
    for (int i = 0; i < k; ++i) r = commutator(A, r);
    return r;
}

double lambda_of(const Operator& W) {
    require_dim(W, 2);
    if (std::abs(W(0, 0) + W(1, 1)) > 1e-10)
        throw HermiticityError("lambda_of requires a traceless operator");
    if (hermiticity_defect(W) > 1e-10)
        throw HermiticityError("lambda_of requires a Hermitian operator");
    const Operator traceless = hermitize(W) - (std::real(W.trace()) / 2.0) * identity(2);
    const PauliVector v = pauli_decompose(traceless);
    return std::sqrt(v.c1 * v.c1 + v.c2 * v.c2 + v.c3 * v.c3);
}

}  // namespace pulsekam
