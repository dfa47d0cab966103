#include "afieti/minres.hpp"

#include "afieti/error.hpp"

#include <chrono>
#include <cmath>

namespace afieti {

Vector minres(const LinearMap& apply_A, const LinearMap& apply_Binv, const Vector& b, double tol, int max_iter,
              SolveReport& report, const IterateObserver& observer) {
    const auto start = std::chrono::steady_clock::now();
    report = SolveReport{};
    const Index n = b.size();
    if (max_iter <= 0) max_iter = static_cast<int>(2 * n + 100);
    Vector x = Vector::Zero(n);
    const double bnorm = b.norm();
    auto finish = [&](bool conv) {
        report.converged = conv;
        report.true_residual = bnorm > 0.0 ? (apply_A(x) - b).norm() / bnorm : 0.0;
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return x;
    };
    if (bnorm == 0.0) {
        report.history.push_back(0.0);
        return finish(true);
    }

    // Lanczos on the preconditioned operator with Givens-based QR
    Vector v_old = Vector::Zero(n);
    Vector v = b;
    Vector z = apply_Binv(v);
    double gamma = v.dot(z);
    if (!(gamma > 0.0)) throw NumericalFailure("preconditioner is not positive on the right-hand side");
    gamma = std::sqrt(gamma);
    const double gamma1 = gamma;
    double eta = gamma;
    double s_old = 0.0, s = 0.0, c_old = 1.0, c = 1.0;
    double gamma_prev = 1.0;
    Vector w_old = Vector::Zero(n), w = Vector::Zero(n);
    report.history.push_back(1.0);

    for (int k = 1; k <= max_iter; ++k) {
        z /= gamma;
        const Vector Az = apply_A(z);
        const double delta = z.dot(Az);
        Vector v_new = Az - (delta / gamma) * v - (gamma / gamma_prev) * v_old;
        Vector z_new = apply_Binv(v_new);
        double gamma_new = v_new.dot(z_new);
        if (gamma_new < 0.0) {
            if (gamma_new < -1e-12 * std::abs(delta) * gamma) throw NumericalFailure("preconditioner is indefinite");
            gamma_new = 0.0;
        }
        gamma_new = std::sqrt(gamma_new);

        const double alpha0 = c * delta - c_old * s * gamma;
        const double alpha1 = std::sqrt(alpha0 * alpha0 + gamma_new * gamma_new);
        const double alpha2 = s * delta + c_old * c * gamma;
        const double alpha3 = s_old * gamma;
        if (alpha1 == 0.0) {
            report.breakdown = true;
            break;
        }
        c_old = c;
        s_old = s;
        c = alpha0 / alpha1;
        s = gamma_new / alpha1;

        Vector w_new = (z - alpha3 * w_old - alpha2 * w) / alpha1;
        x += c * eta * w_new;
        eta = -s * eta;
        w_old.swap(w);
        w.swap(w_new);

        report.iterations = k;
        const double rel = std::abs(eta) / gamma1;
        report.history.push_back(rel);
        if (observer) observer(k, x);
        if (rel <= tol) return finish(true);
        if (gamma_new == 0.0) {
            // invariant Krylov space: the iterate is exact up to rounding
            report.breakdown = true;
            break;
        }
        v_old.swap(v);
        v.swap(v_new);
        z.swap(z_new);
        gamma_prev = gamma;
        gamma = gamma_new;
    }
    finish(false);
    if (report.breakdown && report.true_residual <= tol) report.converged = true;
    return x;
}

}  // namespace afieti
