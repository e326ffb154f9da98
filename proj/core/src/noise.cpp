#include "nmrqec/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nmrqec {

namespace {
constexpr double kPi = std::numbers::pi;
}

DispersionModel DispersionModel::gaussian(double width_khz, int n_samples) {
    if (n_samples < 1) throw std::invalid_argument("DispersionModel: n_samples < 1");
    if (width_khz < 0) throw std::invalid_argument("DispersionModel: negative width");

    // Golub-Welsch on the Hermite Jacobi matrix; nodes of weight exp(-x^2).
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_samples, n_samples);
    for (int k = 1; k < n_samples; ++k) {
        const double beta = std::sqrt(k / 2.0);
        jac(k - 1, k) = beta;
        jac(k, k - 1) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);

    DispersionModel m;
    m.shape = Shape::gaussian;
    m.width_khz = width_khz;
    m.offsets_khz.resize(n_samples);
    m.weights.resize(n_samples);
    double wsum = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        // x ~ exp(-x^2) nodes; offset = sqrt(2) sigma x gives N(0, sigma^2).
        m.offsets_khz[k] = std::sqrt(2.0) * width_khz * es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        m.weights[k] = v0 * v0;
        wsum += m.weights[k];
    }
    for (double& w : m.weights) w /= wsum;
    return m;
}

DispersionModel DispersionModel::lorentzian(double width_khz, int n_samples) {
    if (n_samples < 1) throw std::invalid_argument("DispersionModel: n_samples < 1");
    if (width_khz < 0) throw std::invalid_argument("DispersionModel: negative width");

    DispersionModel m;
    m.shape = Shape::lorentzian;
    m.width_khz = width_khz;
    m.offsets_khz.resize(n_samples);
    m.weights.resize(n_samples);

    if (n_samples == 1) {
        m.offsets_khz[0] = 0.0;
        m.weights[0] = 1.0;
        return m;
    }

    // Gauss-Legendre nodes on the probability variable u = CDF(delta),
    // restricted to the central quantile band [1/2n, 1 - 1/2n] so the tail
    // nodes stay finite; offsets follow from the inverse CDF.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_samples, n_samples);
    for (int k = 1; k < n_samples; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jac(k - 1, k) = beta;
        jac(k, k - 1) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);

    const double eps = 0.5 / n_samples;
    double wsum = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double x = es.eigenvalues()(k);  // node in (-1, 1)
        const double u = eps + (1.0 - 2.0 * eps) * 0.5 * (x + 1.0);
        m.offsets_khz[k] = width_khz * std::tan(kPi * (u - 0.5));
        const double v0 = es.eigenvectors()(0, k);
        m.weights[k] = v0 * v0;
        wsum += m.weights[k];
    }
    for (double& w : m.weights) w /= wsum;
    return m;
}

double lorentzian_width_for_t2star(double t2star_ms) {
    if (t2star_ms <= 0) throw std::invalid_argument("t2star must be positive");
    return 1.0 / (2.0 * kPi * t2star_ms);
}

double gaussian_width_for_t2star(double t2star_ms) {
    if (t2star_ms <= 0) throw std::invalid_argument("t2star must be positive");
    return 1.0 / (std::sqrt(2.0) * kPi * t2star_ms);
}

Matrix NoiseChannel::apply(const Matrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_)
        throw std::invalid_argument("NoiseChannel::apply: dimension mismatch");

    Matrix state = rho;
    for (const Stage& stage : stages_) {
        Matrix next = Matrix::Zero(dim_, dim_);
        for (const UnitaryTerm& term : stage.terms) {
            if (term.bath_dim == 1) {
                next += term.weight * (term.u * state * term.u.adjoint());
            } else {
                const Matrix bath = Matrix::Identity(term.bath_dim, term.bath_dim) /
                                    static_cast<double>(term.bath_dim);
                const Matrix big = term.u * kronecker(state, bath) * term.u.adjoint();
                next += term.weight *
                        partial_trace(big, {0}, {dim_, term.bath_dim});
            }
        }
        state = std::move(next);
    }
    return state;
}

DeviationState NoiseChannel::apply(const DeviationState& rho) const {
    DeviationState out;
    out.matrix = OperatorMatrix(apply(rho.matrix.m));
    out.scale = rho.scale;
    return out;
}

NoiseChannel NoiseChannel::identity(std::size_t n_qubits) {
    NoiseChannel c;
    c.kind = ChannelKind::identity;
    c.dim_ = Eigen::Index(1) << n_qubits;
    return c;
}

NoiseChannel coherent_z(double theta, std::size_t qubit, std::size_t n_qubits) {
    if (qubit >= n_qubits) throw std::invalid_argument("coherent_z: qubit out of range");
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    const Matrix z = embedded_pauli('Z', qubit, n_qubits);
    const Matrix u = std::cos(theta / 2) * Matrix::Identity(dim, dim) -
                     Complex(0, 1) * std::sin(theta / 2) * z;

    NoiseChannel c;
    c.kind = ChannelKind::coherent_z;
    c.dim_ = dim;
    c.stages_.push_back({{{1.0, u, 1}}});
    return c;
}

NoiseChannel dephasing(double theta, std::size_t qubit, std::size_t n_qubits) {
    const double s = std::sin(theta);
    return dephasing_probability(s * s, qubit, n_qubits);
}

NoiseChannel dephasing_probability(double q, std::size_t qubit, std::size_t n_qubits) {
    if (qubit >= n_qubits) throw std::invalid_argument("dephasing: qubit out of range");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("dephasing: flip weight outside [0, 1]");
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;

    NoiseChannel c;
    c.kind = ChannelKind::dephasing;
    c.dim_ = dim;
    NoiseChannel::Stage stage;
    stage.terms.push_back({1.0 - q, Matrix::Identity(dim, dim), 1});
    stage.terms.push_back({q, embedded_pauli('Z', qubit, n_qubits), 1});
    c.stages_.push_back(std::move(stage));
    return c;
}

namespace {
NoiseChannel::UnitaryTerm natural_term(const SpinSystem& sys, double tau_ms,
                                       double decoupling_scale, double offset_khz,
                                       double weight) {
    if (sys.bath.empty() || decoupling_scale == 0.0) {
        SpinSystem bare = sys;
        bare.bath.clear();
        const OperatorMatrix h = build_hamiltonian(bare, offset_khz);
        return {weight, expm_hermitian(h.m, tau_ms), 1};
    }
    const OperatorMatrix h = build_hamiltonian(sys, offset_khz, decoupling_scale);
    return {weight, expm_hermitian(h.m, tau_ms),
            Eigen::Index(1) << sys.bath.size()};
}
}  // namespace

NoiseChannel natural_evolution(const SpinSystem& sys, double tau_ms,
                               double decoupling_scale) {
    if (tau_ms < 0) throw std::invalid_argument("natural_evolution: negative delay");
    if (decoupling_scale < 0.0 || decoupling_scale > 1.0)
        throw std::invalid_argument("natural_evolution: decoupling scale outside [0, 1]");

    NoiseChannel c;
    c.kind = ChannelKind::natural_evolution;
    c.dim_ = 8;
    c.stages_.push_back({{natural_term(sys, tau_ms, decoupling_scale, 0.0, 1.0)}});
    c.recipe_ = NoiseChannel::NaturalRecipe{sys, tau_ms, decoupling_scale};
    return c;
}

NoiseChannel dispersion_average(const NoiseChannel& base, const DispersionModel& model) {
    if (base.kind != ChannelKind::natural_evolution || !base.recipe_)
        throw std::invalid_argument("dispersion_average: base must be a natural_evolution channel");
    if (model.n_samples() < 1)
        throw std::invalid_argument("dispersion_average: model has no samples");

    const auto& r = *base.recipe_;
    NoiseChannel c;
    c.kind = ChannelKind::natural_evolution;
    c.dim_ = base.dim_;
    NoiseChannel::Stage stage;
    for (int k = 0; k < model.n_samples(); ++k)
        stage.terms.push_back(natural_term(r.sys, r.tau_ms, r.decoupling_scale,
                                           model.offsets_khz[k], model.weights[k]));
    c.stages_.push_back(std::move(stage));
    return c;
}

NoiseChannel compose(const std::vector<NoiseChannel>& channels) {
    if (channels.empty()) return NoiseChannel::identity();
    NoiseChannel c;
    c.kind = ChannelKind::composed;
    c.dim_ = channels.front().dim();
    for (const NoiseChannel& ch : channels) {
        if (ch.dim() != c.dim_)
            throw std::invalid_argument("compose: channel dimension mismatch");
        for (const NoiseChannel::Stage& s : ch.stages_) c.stages_.push_back(s);
    }
    return c;
}

}  // namespace nmrqec
