#include "nmrqec/grape.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nmrqec {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};
}  // namespace

ControlPulse ControlPulse::zeros(std::size_t n_slices, double dt_ms) {
    if (dt_ms <= 0) throw std::invalid_argument("ControlPulse: dt must be positive");
    ControlPulse p;
    p.dt_ms = dt_ms;
    p.amplitudes_khz.assign(n_slices, {0.0, 0.0});
    return p;
}

RobustnessEnsemble RobustnessEnsemble::single() {
    return RobustnessEnsemble{{EnsembleMember{0.0, 1.0, 1.0}}};
}

RobustnessEnsemble RobustnessEnsemble::grid(const DispersionModel& offsets,
                                            const std::vector<double>& rf_scales) {
    if (rf_scales.empty()) throw std::invalid_argument("RobustnessEnsemble: no rf scales");
    RobustnessEnsemble e;
    double wsum = 0.0;
    for (int k = 0; k < offsets.n_samples(); ++k)
        for (double rf : rf_scales) {
            const double w = offsets.weights[k] / rf_scales.size();
            e.members.push_back({offsets.offsets_khz[k], rf, w});
            wsum += w;
        }
    for (EnsembleMember& m : e.members) m.weight /= wsum;
    e.validate();
    return e;
}

void RobustnessEnsemble::validate() const {
    if (members.empty()) throw std::invalid_argument("RobustnessEnsemble: empty");
    double wsum = 0.0;
    for (const EnsembleMember& m : members) {
        if (m.rf_scale <= 0.0)
            throw std::invalid_argument("RobustnessEnsemble: rf scale must be positive");
        wsum += m.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("RobustnessEnsemble: weights must sum to 1");
}

ControlSystem ControlSystem::from_spin_system(const SpinSystem& sys) {
    SpinSystem bare = sys;
    bare.bath.clear();
    ControlSystem cs;
    cs.drift = build_hamiltonian(bare, 0.0).m;
    cs.offset_gen = Matrix::Zero(8, 8);
    cs.cx = Matrix::Zero(8, 8);
    cs.cy = Matrix::Zero(8, 8);
    for (std::size_t q = 0; q < kNumCarbons; ++q) {
        cs.offset_gen += kPi * embedded_pauli('Z', q, kNumCarbons);
        cs.cx += kPi * embedded_pauli('X', q, kNumCarbons);
        cs.cy += kPi * embedded_pauli('Y', q, kNumCarbons);
    }
    return cs;
}

ControlSystem ControlSystem::single_spin(double shift_khz) {
    ControlSystem cs;
    cs.drift = kPi * shift_khz * pauli_z();
    cs.offset_gen = kPi * pauli_z();
    cs.cx = kPi * pauli_x();
    cs.cy = kPi * pauli_y();
    return cs;
}

namespace {

struct SliceEig {
    Matrix vectors;
    Eigen::VectorXd values;
    Matrix u;  // exp(-i dt H)
};

SliceEig slice_propagator(const ControlSystem& csys, const EnsembleMember& m,
                          const std::array<double, 2>& amp, double dt) {
    Matrix h = csys.drift + m.shift_offset_khz * csys.offset_gen +
               m.rf_scale * (amp[0] * csys.cx + amp[1] * csys.cy);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    SliceEig out;
    out.vectors = es.eigenvectors();
    out.values = es.eigenvalues();
    Eigen::VectorXcd phases(out.values.size());
    for (Eigen::Index k = 0; k < out.values.size(); ++k)
        phases(k) = std::exp(-kI * out.values(k) * dt);
    out.u = out.vectors * phases.asDiagonal() * out.vectors.adjoint();
    return out;
}

Matrix member_propagator(const ControlPulse& pulse, const ControlSystem& csys,
                         const EnsembleMember& m) {
    Matrix u = Matrix::Identity(csys.dim(), csys.dim());
    for (const auto& amp : pulse.amplitudes_khz)
        u = slice_propagator(csys, m, amp, pulse.dt_ms).u * u;
    return u;
}

// d/du of exp(-i dt H(u)) contracted against a trace kernel T:
// Tr(T dU) = sum_ab (V^dag T V)_ab (V^dag C V)_ba Gamma_ba.
Complex contract_derivative(const Matrix& t_in_eig, const Matrix& c_in_eig,
                            const Eigen::VectorXd& lam, double dt) {
    const Eigen::Index d = lam.size();
    Complex acc = 0.0;
    for (Eigen::Index a = 0; a < d; ++a) {
        const Complex ea = std::exp(-kI * lam(a) * dt);
        for (Eigen::Index b = 0; b < d; ++b) {
            Complex gamma;
            const double dl = lam(b) - lam(a);
            if (std::abs(dl) < 1e-12) {
                gamma = -kI * dt * ea;
            } else {
                const Complex eb = std::exp(-kI * lam(b) * dt);
                gamma = (eb - ea) / dl;
            }
            acc += t_in_eig(a, b) * c_in_eig(b, a) * gamma;
        }
    }
    return acc;
}

}  // namespace

Matrix propagate(const ControlPulse& pulse, const ControlSystem& csys,
                 const EnsembleMember& member) {
    return member_propagator(pulse, csys, member);
}

Matrix propagate(const ControlPulse& pulse, const SpinSystem& sys,
                 const EnsembleMember& member) {
    return member_propagator(pulse, ControlSystem::from_spin_system(sys), member);
}

double gate_fidelity(const Matrix& u, const Matrix& target) {
    if (u.rows() != target.rows() || u.cols() != target.cols())
        throw std::invalid_argument("gate_fidelity: dimension mismatch");
    const double d = static_cast<double>(u.rows());
    const Complex tr = (target.adjoint() * u).trace();
    return std::norm(tr) / (d * d);
}

double ensemble_fidelity(const ControlPulse& pulse, const ControlSystem& csys,
                         const Matrix& target, const RobustnessEnsemble& ensemble) {
    double phi = 0.0;
    for (const EnsembleMember& m : ensemble.members)
        phi += m.weight * gate_fidelity(member_propagator(pulse, csys, m), target);
    return phi;
}

std::vector<std::array<double, 2>> gradient(const ControlPulse& pulse,
                                            const ControlSystem& csys,
                                            const Matrix& target,
                                            const RobustnessEnsemble& ensemble) {
    const std::size_t n = pulse.n_slices();
    const Eigen::Index d = csys.dim();
    const double d2 = static_cast<double>(d * d);
    const double dt = pulse.dt_ms;

    std::vector<std::array<double, 2>> grad(n, {0.0, 0.0});

    std::vector<SliceEig> eigs(n);
    std::vector<Matrix> forward(n + 1);

    for (const EnsembleMember& m : ensemble.members) {
        forward[0] = Matrix::Identity(d, d);
        for (std::size_t k = 0; k < n; ++k) {
            eigs[k] = slice_propagator(csys, m, pulse.amplitudes_khz[k], dt);
            forward[k + 1] = eigs[k].u * forward[k];
        }
        const Complex tr = (target.adjoint() * forward[n]).trace();

        const Matrix cx_m = m.rf_scale * csys.cx;
        const Matrix cy_m = m.rf_scale * csys.cy;

        Matrix back = Matrix::Identity(d, d);  // U_n ... U_{k+2} U_{k+1}
        for (std::size_t kk = n; kk-- > 0;) {
            // Tr(W^dag B dU F) = Tr((F W^dag B) dU)
            const Matrix t_kernel = forward[kk] * target.adjoint() * back;
            const Matrix& v = eigs[kk].vectors;
            const Matrix t_eig = v.adjoint() * t_kernel * v;
            const Matrix cx_eig = v.adjoint() * cx_m * v;
            const Matrix cy_eig = v.adjoint() * cy_m * v;
            const Complex dx = contract_derivative(t_eig, cx_eig, eigs[kk].values, dt);
            const Complex dy = contract_derivative(t_eig, cy_eig, eigs[kk].values, dt);
            grad[kk][0] += m.weight * 2.0 / d2 * std::real(std::conj(tr) * dx);
            grad[kk][1] += m.weight * 2.0 / d2 * std::real(std::conj(tr) * dy);
            back = back * eigs[kk].u;
        }
    }
    return grad;
}

OptimizeResult optimize(const ControlPulse& initial, const ControlSystem& csys,
                        const Matrix& target, const RobustnessEnsemble& ensemble,
                        const OptimizeSettings& settings) {
    ensemble.validate();
    const auto t_start = std::chrono::steady_clock::now();
    const auto elapsed_s = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    };

    OptimizeResult res;
    res.pulse = initial;
    res.best_fidelity = ensemble_fidelity(initial, csys, target, ensemble);
    res.fidelity_trace.push_back(res.best_fidelity);
    res.status = OptimizeStatus::converged;

    if (res.best_fidelity >= settings.target_fidelity) {
        res.status = OptimizeStatus::target_reached;
        return res;
    }

    const std::size_t n = initial.n_slices();
    using Vec = Eigen::VectorXd;

    // Optional truncated Fourier parametrization: u = u_initial + basis * c
    // per channel. Raw slices otherwise.
    const bool smooth = settings.smooth_modes > 0 &&
                        2 * static_cast<std::size_t>(settings.smooth_modes) + 1 < n;
    Eigen::MatrixXd basis;
    std::size_t per_channel = n;
    if (smooth) {
        const int harmonics = settings.smooth_modes;
        per_channel = 2 * static_cast<std::size_t>(harmonics) + 1;
        basis.resize(n, per_channel);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = (k + 0.5) / static_cast<double>(n);
            basis(k, 0) = 1.0;
            for (int h = 1; h <= harmonics; ++h) {
                basis(k, 2 * h - 1) = std::cos(2.0 * std::numbers::pi * h * t);
                basis(k, 2 * h) = std::sin(2.0 * std::numbers::pi * h * t);
            }
        }
    }
    const Eigen::Index dim_p = static_cast<Eigen::Index>(2 * per_channel);

    const auto to_pulse = [&](const Vec& p) {
        ControlPulse out = initial;
        if (smooth) {
            const Eigen::VectorXd ux = basis * p.head(per_channel);
            const Eigen::VectorXd uy = basis * p.tail(per_channel);
            for (std::size_t k = 0; k < n; ++k) {
                out.amplitudes_khz[k][0] += ux(k);
                out.amplitudes_khz[k][1] += uy(k);
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                out.amplitudes_khz[k][0] = p(2 * k);
                out.amplitudes_khz[k][1] = p(2 * k + 1);
            }
        }
        return out;
    };
    const auto param_gradient = [&](const ControlPulse& pulse) {
        const auto g = gradient(pulse, csys, target, ensemble);
        Vec v(dim_p);
        if (smooth) {
            Eigen::VectorXd gx(n), gy(n);
            for (std::size_t k = 0; k < n; ++k) {
                gx(k) = g[k][0];
                gy(k) = g[k][1];
            }
            v.head(per_channel) = basis.transpose() * gx;
            v.tail(per_channel) = basis.transpose() * gy;
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                v(2 * k) = g[k][0];
                v(2 * k + 1) = g[k][1];
            }
        }
        return v;
    };

    Vec point = Vec::Zero(dim_p);
    if (!smooth)
        for (std::size_t k = 0; k < n; ++k) {
            point(2 * k) = initial.amplitudes_khz[k][0];
            point(2 * k + 1) = initial.amplitudes_khz[k][1];
        }

    // L-BFGS on -Phi: history pairs (s, yhat) with s the accepted step and
    // yhat = -(g_new - g_old), so the usual curvature condition s.yhat > 0
    // applies. Plain gradient ascent crawls in the flat tail of this
    // objective; the quasi-Newton direction fixes that while the Armijo
    // backtracking below keeps the reported fidelity monotone.
    constexpr std::size_t kHistory = 10;
    std::vector<Vec> hist_s, hist_y;
    Vec g_prev;
    Vec pending_s;
    bool have_pending = false;

    double alpha_reset = 0.0;
    int plateau = 0;
    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        res.iterations = iter + 1;
        const Vec g = param_gradient(res.pulse);
        if (g.lpNorm<Eigen::Infinity>() < 1e-15) {
            res.status = OptimizeStatus::converged;
            break;
        }
        if (have_pending) {
            const Vec yhat = -(g - g_prev);
            if (pending_s.dot(yhat) > 1e-14) {
                hist_s.push_back(pending_s);
                hist_y.push_back(yhat);
                if (hist_s.size() > kHistory) {
                    hist_s.erase(hist_s.begin());
                    hist_y.erase(hist_y.begin());
                }
            }
            have_pending = false;
        }
        g_prev = g;

        // Two-loop recursion for d = H g (H approximates the inverse Hessian
        // of -Phi, so d is the quasi-Newton ascent direction).
        Vec d = g;
        const int m = static_cast<int>(hist_s.size());
        if (m > 0) {
            std::vector<double> rho_h(m), a_h(m);
            for (int i = 0; i < m; ++i) rho_h[i] = 1.0 / hist_s[i].dot(hist_y[i]);
            for (int i = m - 1; i >= 0; --i) {
                a_h[i] = rho_h[i] * hist_s[i].dot(d);
                d -= a_h[i] * hist_y[i];
            }
            d *= hist_s.back().dot(hist_y.back()) / hist_y.back().squaredNorm();
            for (int i = 0; i < m; ++i) {
                const double b = rho_h[i] * hist_y[i].dot(d);
                d += (a_h[i] - b) * hist_s[i];
            }
        }
        double gd = g.dot(d);
        if (!(gd > 0.0) || !d.allFinite()) {
            d = g;
            gd = g.squaredNorm();
            hist_s.clear();
            hist_y.clear();
        }

        // Armijo backtracking. Quasi-Newton steps try alpha = 1 first; a
        // steepest-ascent (re)start is scaled so the largest parameter change
        // is initial_step_khz, growing while resets keep succeeding.
        double alpha;
        if (hist_s.empty()) {
            alpha_reset = alpha_reset > 0
                              ? 2.0 * alpha_reset
                              : settings.initial_step_khz / d.lpNorm<Eigen::Infinity>();
            alpha = alpha_reset;
        } else {
            alpha = 1.0;
            alpha_reset = 0.0;
        }
        bool accepted = false;
        double improvement = 0.0;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            const Vec trial_point = point + alpha * d;
            const ControlPulse trial = to_pulse(trial_point);
            const double phi = ensemble_fidelity(trial, csys, target, ensemble);
            if (phi >= res.best_fidelity + 1e-4 * alpha * gd) {
                improvement = phi - res.best_fidelity;
                pending_s = alpha * d;
                have_pending = true;
                point = trial_point;
                res.pulse = trial;
                res.best_fidelity = phi;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (hist_s.empty() && accepted) alpha_reset = alpha;
        res.fidelity_trace.push_back(res.best_fidelity);

        if (!accepted) {
            res.status = OptimizeStatus::converged;
            break;
        }
        plateau = improvement < settings.tolerance ? plateau + 1 : 0;
        if (plateau >= 3) {
            res.status = OptimizeStatus::converged;
            break;
        }
        if (res.best_fidelity >= settings.target_fidelity) {
            res.status = OptimizeStatus::target_reached;
            break;
        }
        if (settings.time_limit_s > 0 && elapsed_s() > settings.time_limit_s) {
            res.status = OptimizeStatus::time_limit;
            break;
        }
        if (iter + 1 == settings.max_iterations) res.status = OptimizeStatus::max_iterations;
    }
    return res;
}

ControlPulse upsample(const ControlPulse& pulse, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("upsample: factor must be positive");
    ControlPulse out;
    out.dt_ms = pulse.dt_ms / static_cast<double>(factor);
    out.amplitudes_khz.reserve(pulse.n_slices() * factor);
    for (const auto& a : pulse.amplitudes_khz)
        for (std::size_t r = 0; r < factor; ++r) out.amplitudes_khz.push_back(a);
    return out;
}

void save_pulse(const ControlPulse& pulse, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_pulse: cannot open " + path);
    out << "# n_slices=" << pulse.n_slices() << "\n";
    out << "# dt_ms=" << pulse.dt_ms << "\n";
    out.precision(17);
    for (const auto& a : pulse.amplitudes_khz) out << a[0] << " " << a[1] << "\n";
    if (!out) throw std::runtime_error("save_pulse: write failed for " + path);
}

ControlPulse load_pulse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pulse: cannot open " + path);
    ControlPulse pulse;
    pulse.dt_ms = 0.0;
    std::size_t declared = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t pos;
            if ((pos = line.find("n_slices=")) != std::string::npos)
                declared = std::stoul(line.substr(pos + 9));
            else if ((pos = line.find("dt_ms=")) != std::string::npos)
                pulse.dt_ms = std::stod(line.substr(pos + 6));
            continue;
        }
        std::istringstream ss(line);
        double ux, uy;
        if (!(ss >> ux >> uy))
            throw std::runtime_error("load_pulse: malformed slice line: " + line);
        pulse.amplitudes_khz.push_back({ux, uy});
    }
    if (pulse.dt_ms <= 0) throw std::runtime_error("load_pulse: missing or bad dt_ms header");
    if (declared != 0 && declared != pulse.n_slices())
        throw std::runtime_error("load_pulse: n_slices header does not match line count");
    return pulse;
}

}  // namespace nmrqec
