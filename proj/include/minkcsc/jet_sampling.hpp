#pragma once

#include <random>

#include "minkcsc/curvature.hpp"

namespace minkcsc {

/// Random jet whose shape operator has prescribed eigenvalues.
///
/// With W = sqrt(1-|p|^2) and B = I + p p^T / (W(1+W)) the shape operator
/// is conjugate to B q B / W, so q = W B^{-1} S B^{-1} for any symmetric S
/// with the wanted spectrum.
inline JetPoint jet_with_curvatures(const Vec& p, const Vec& lambda, std::mt19937_64& rng) {
    const auto n = p.size();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = gauss(rng);
    const Eigen::HouseholderQR<Mat> qr(A);
    const Mat Q = qr.householderQ();
    const Mat S = Q * lambda.asDiagonal() * Q.transpose();

    const double p2 = p.squaredNorm();
    const double w = std::sqrt(1.0 - p2);
    const double c = 1.0 / (w * (1.0 + w));
    const Mat Binv = Mat::Identity(n, n) - (c / (1.0 + c * p2)) * p * p.transpose();
    Mat q = w * Binv * S * Binv;
    q = (0.5 * (q + q.transpose())).eval();
    return JetPoint{p, q};
}

/// Random jet in the cone Gamma_m(p) with |p| <= p_max.
inline JetPoint sample_admissible_jet(int n, int m, std::mt19937_64& rng, double p_max = 0.95) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec p(n);
    for (int i = 0; i < n; ++i) p(i) = gauss(rng);
    p *= p_max * unif(rng) / p.norm();

    for (;;) {
        const double mean = 0.2 + 1.8 * unif(rng);
        const double spread = 0.2 + 1.3 * unif(rng);
        Vec lam(n);
        for (int i = 0; i < n; ++i) lam(i) = mean + spread * gauss(rng);
        bool ok = true;
        for (int k = 1; k <= m && ok; ++k) {
            ok = normalized_sigma(std::span<const double>(lam.data(), lam.size()), k) > 1e-6;
        }
        if (!ok) continue;
        JetPoint j = jet_with_curvatures(p, lam, rng);
        if (is_admissible(j, m, 1e-9)) return j;
    }
}

}  // namespace minkcsc
