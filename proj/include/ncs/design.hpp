#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

#include "ncs/errors.hpp"
#include "ncs/state_space.hpp"

namespace ncs {

using PoleSet = std::vector<std::complex<double>>;

struct RankInfo {
    bool full;
    Eigen::Index rank;
};

namespace detail {

inline Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A,
                                              const Eigen::VectorXd& B) {
    const auto n = A.rows();
    Eigen::MatrixXd ctrb(n, n);
    Eigen::VectorXd col = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        ctrb.col(i) = col;
        col = A * col;
    }
    return ctrb;
}

inline RankInfo rank_of(const Eigen::MatrixXd& M) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    const double tol = static_cast<double>(M.rows()) *
                       std::numeric_limits<double>::epsilon() * M.norm();
    const Eigen::MatrixXd R = qr.matrixR();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < std::min(R.rows(), R.cols()); ++i)
        if (std::abs(R(i, i)) > tol) ++r;
    return {r == M.rows(), r};
}

//! Monic polynomial coefficients (descending powers) from roots, accumulated
//! in long double: the observer-pole products reach ~6.6e10 and double
//! accumulation costs placement accuracy.
inline std::vector<long double> poly_from_roots(const PoleSet& roots) {
    std::vector<std::complex<long double>> c{1.0L};
    for (const auto& r : roots) {
        std::vector<std::complex<long double>> next(c.size() + 1, 0.0L);
        const std::complex<long double> rl(static_cast<long double>(r.real()),
                                           static_cast<long double>(r.imag()));
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * rl;
        }
        c = std::move(next);
    }
    std::vector<long double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

//! chi(A) by Horner's scheme on matrices.
inline Eigen::MatrixXd poly_eval_matrix(const std::vector<long double>& coeffs,
                                        const Eigen::MatrixXd& A) {
    const auto n = A.rows();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
    for (const long double c : coeffs)
        X = X * A + static_cast<double>(c) * Eigen::MatrixXd::Identity(n, n);
    return X;
}

}  // namespace detail

inline void validate_pole_set(const PoleSet& poles, Eigen::Index order) {
    if (static_cast<Eigen::Index>(poles.size()) != order)
        throw Error("pole set size must equal the system order");
    for (const auto& p : poles) {
        if (!(p.real() < 0)) throw Error("desired poles must have negative real parts");
        if (p.imag() != 0) {
            const auto conj_count = std::count_if(poles.begin(), poles.end(), [&](auto q) {
                return std::abs(q.real() - p.real()) <= 1e-12 * std::abs(p.real()) &&
                       std::abs(q.imag() + p.imag()) <= 1e-12 * std::abs(p.imag());
            });
            if (conj_count == 0) throw Error("complex poles must come in conjugate pairs");
        }
    }
}

inline RankInfo controllability(const StateSpace& sys) {
    return detail::rank_of(detail::controllability_matrix(sys.A, sys.B));
}

inline RankInfo observability(const StateSpace& sys) {
    return detail::rank_of(
        detail::controllability_matrix(sys.A.transpose(), sys.C.transpose()));
}

//! SISO Ackermann: K = e_n^T Ctrb^{-1} chi_d(A).
inline Eigen::RowVectorXd place_state_feedback(const StateSpace& sys, const PoleSet& desired) {
    const auto n = sys.order();
    validate_pole_set(desired, n);

    const Eigen::MatrixXd ctrb = detail::controllability_matrix(sys.A, sys.B);
    const auto rk = detail::rank_of(ctrb);
    if (!rk.full) throw NotControllable(rk.rank);

    const Eigen::MatrixXd chi = detail::poly_eval_matrix(detail::poly_from_roots(desired), sys.A);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ctrb.transpose());
    const Eigen::VectorXd x = lu.solve(Eigen::VectorXd::Unit(n, n - 1));

    // residual guard: the inversion must actually reproduce e_n
    const double resid = (ctrb.transpose() * x - Eigen::VectorXd::Unit(n, n - 1)).norm();
    const double tol = 1e3 * std::numeric_limits<double>::epsilon() * ctrb.norm() * x.norm() + 1e-12;
    if (resid > tol)
        throw IllConditioned("controllability matrix inversion residual " + std::to_string(resid));
    return x.transpose() * chi;
}

//! Observer gain by duality on (A^T, C^T).
inline Eigen::VectorXd place_observer(const StateSpace& sys, const PoleSet& desired) {
    const auto rk = observability(sys);
    if (!rk.full) throw NotObservable(rk.rank);

    StateSpace dual;
    dual.A = sys.A.transpose();
    dual.B = sys.C.transpose();
    dual.C = sys.B.transpose();
    dual.Doff = Eigen::VectorXd::Zero(sys.order());
    try {
        return place_state_feedback(dual, desired).transpose();
    } catch (const NotControllable&) {
        throw NotObservable(rk.rank);
    }
}

}  // namespace ncs
