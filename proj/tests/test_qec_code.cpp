#include "nmrqec/qec_code.hpp"

#include "nmrqec/spin_system.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace nmrqec;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd ket(int index) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
    v(index) = 1.0;
    return v;
}

Eigen::VectorXcd plus_minus(int s0, int s1, int s2) {
    Eigen::VectorXcd q0(2), q1(2), q2(2);
    q0 << 1, s0;
    q1 << 1, s1;
    q2 << 1, s2;
    Eigen::VectorXcd out(8);
    for (int i = 0; i < 8; ++i)
        out(i) = q0((i >> 2) & 1) * q1((i >> 1) & 1) * q2(i & 1);
    return out / std::sqrt(8.0);
}

Eigen::VectorXcd random_qubit_state(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd psi(2);
    psi << Complex(u(rng), u(rng)), Complex(u(rng), u(rng));
    return psi.normalized();
}

DeviationState data_deviation(const Matrix& op2x2) {
    Matrix m = Matrix::Zero(8, 8);
    m.block(0, 0, 2, 2) = op2x2;
    return DeviationState(std::move(m));
}

// Fidelity of the data qubit with |psi> after running the full density matrix
// rho = |00 psi><00 psi| through error -> decode(+correct).
double corrected_state_fidelity(const CodeCircuit& code, const Eigen::VectorXcd& psi,
                                const Matrix& error, bool correct) {
    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(8);
    in.segment(0, 2) = psi;  // ancillae |00>
    Matrix rho = in * in.adjoint();
    rho = code.u_encode.m * rho * code.u_encode.m.adjoint();
    rho = error * rho * error.adjoint();
    rho = code.u_decode.m * rho * code.u_decode.m.adjoint();
    if (correct) rho = code.u_correct.m * rho * code.u_correct.m.adjoint();
    const Matrix data = partial_trace(rho, {2}, {2, 2, 2});
    return std::real((psi.adjoint() * data * psi)(0, 0));
}

}  // namespace

TEST_SUITE("qec_code") {

TEST_CASE("encoding maps the logical basis per the code definition") {
    const CodeCircuit code = CodeCircuit::standard();
    CHECK(code.u_encode.check_unitary(1e-12));

    const Eigen::VectorXcd ppp = plus_minus(1, 1, 1);
    const Eigen::VectorXcd mmm = plus_minus(-1, -1, -1);
    // |000> -> |+++>, |001> -> |---> up to global phase
    const Eigen::VectorXcd e0 = code.u_encode.m * ket(0);
    const Eigen::VectorXcd e1 = code.u_encode.m * ket(1);
    CHECK(std::abs(std::abs((ppp.adjoint() * e0)(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs((mmm.adjoint() * e1)(0, 0)) - 1.0) < 1e-12);
}

TEST_CASE("encoded states are +1 eigenstates of the stabilizers") {
    const CodeCircuit code = CodeCircuit::standard();
    const Matrix xxi = pauli_operator(PauliString("XXI")).m;
    const Matrix ixx = pauli_operator(PauliString("IXX")).m;
    std::mt19937 rng(7);
    for (int t = 0; t < 5; ++t) {
        Eigen::VectorXcd in = Eigen::VectorXcd::Zero(8);
        in.segment(0, 2) = random_qubit_state(rng);
        const Eigen::VectorXcd enc = code.u_encode.m * in;
        CHECK(std::abs((enc.adjoint() * xxi * enc)(0, 0) - Complex(1, 0)) < 1e-10);
        CHECK(std::abs((enc.adjoint() * ixx * enc)(0, 0) - Complex(1, 0)) < 1e-10);
    }
}

TEST_CASE("decode inverts encode on the full space") {
    const CodeCircuit code = CodeCircuit::standard();
    const Matrix round_trip = code.u_decode.m * code.u_encode.m;
    CHECK(max_abs_diff(round_trip, Matrix::Identity(8, 8)) < 1e-10);
}

TEST_CASE("encode of a data Z deviation is the logical Z projector difference") {
    const CodeCircuit code = CodeCircuit::standard();
    const DeviationState enc = encode(code, data_deviation(pauli_z()));
    const Eigen::VectorXcd zero_l = code.u_encode.m * ket(0);
    const Eigen::VectorXcd one_l = code.u_encode.m * ket(1);
    const Matrix expect = zero_l * zero_l.adjoint() - one_l * one_l.adjoint();
    CHECK(max_abs_diff(enc.matrix.m, expect) < 1e-12);
}

TEST_CASE("encode of a data X deviation is the logical X operator") {
    const CodeCircuit code = CodeCircuit::standard();
    const DeviationState enc = encode(code, data_deviation(pauli_x()));
    const Eigen::VectorXcd ppp = plus_minus(1, 1, 1);
    const Eigen::VectorXcd mmm = plus_minus(-1, -1, -1);
    const Matrix expect = ppp * mmm.adjoint() + mmm * ppp.adjoint();
    CHECK(max_abs_diff(enc.matrix.m, expect) < 1e-12);
}

TEST_CASE("encode rejects input outside the ancilla block") {
    const CodeCircuit code = CodeCircuit::standard();
    Matrix bad = Matrix::Zero(8, 8);
    bad(0, 1) = 1.0;
    bad(1, 0) = 1.0;
    bad(4, 4) = 1e-6;  // leakage into ancilla |10>
    bad(5, 5) = -1e-6;
    CHECK_THROWS_AS((void)encode(code, DeviationState(std::move(bad))),
                    std::invalid_argument);
}

TEST_CASE("syndrome truth table") {
    const CodeCircuit code = CodeCircuit::standard();
    std::mt19937 rng(11);
    const Eigen::VectorXcd psi = random_qubit_state(rng);
    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(8);
    in.segment(0, 2) = psi;

    const char* errors[4] = {"III", "ZII", "IZI", "IIZ"};
    const int anc_index[4] = {0, 4, 2, 6};  // |00>, |10>, |01>, |11> blocks
    for (int k = 0; k < 4; ++k) {
        const Matrix err = pauli_operator(PauliString(errors[k])).m;
        Eigen::VectorXcd v = code.u_decode.m * err * code.u_encode.m * in;
        // All amplitude sits in the expected ancilla block.
        double inside = v.segment(anc_index[k], 2).squaredNorm();
        CHECK(inside == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("decoded IIZ carries a Z flip on the data wire; correction removes it") {
    const CodeCircuit code = CodeCircuit::standard();
    std::mt19937 rng(13);
    const Eigen::VectorXcd psi = random_qubit_state(rng);
    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(8);
    in.segment(0, 2) = psi;

    const Matrix iiz = pauli_operator(PauliString("IIZ")).m;
    const Eigen::VectorXcd decoded = code.u_decode.m * iiz * code.u_encode.m * in;
    // ancillae |11>, data = Z psi up to phase
    const Eigen::VectorXcd data = decoded.segment(6, 2);
    const Eigen::VectorXcd zpsi = pauli_z() * psi;
    CHECK(std::abs(std::abs((zpsi.adjoint() * data)(0, 0)) - 1.0) < 1e-10);

    const Eigen::VectorXcd corrected = code.u_correct.m * decoded;
    CHECK(std::abs(std::abs((psi.adjoint() * corrected.segment(6, 2))(0, 0)) - 1.0) < 1e-10);
}

TEST_CASE("single errors from the correctable set are removed exactly") {
    const CodeCircuit code = CodeCircuit::standard();
    std::mt19937 rng(17);
    const char* errors[4] = {"III", "ZII", "IZI", "IIZ"};
    for (int t = 0; t < 50; ++t) {
        const Eigen::VectorXcd psi = random_qubit_state(rng);
        for (const char* e : errors) {
            const double f =
                corrected_state_fidelity(code, psi, pauli_operator(PauliString(e)).m, true);
            CHECK(f == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("coherent single-qubit phase errors are removed for any angle") {
    const CodeCircuit code = CodeCircuit::standard();
    std::mt19937 rng(19);
    for (double theta : {0.1, 0.9, 2.2, kPi}) {
        for (std::size_t qubit : {0u, 1u, 2u}) {
            const Matrix err =
                expm_hermitian(Matrix(0.5 * theta * embedded_pauli('Z', qubit, 3)), 1.0);
            const Eigen::VectorXcd psi = random_qubit_state(rng);
            CHECK(corrected_state_fidelity(code, psi, err, true) ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("decode_and_correct is linear") {
    const CodeCircuit code = CodeCircuit::standard();
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a = Matrix::Zero(8, 8), b = Matrix::Zero(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            a(i, j) = Complex(u(rng), u(rng));
            b(i, j) = Complex(u(rng), u(rng));
        }
    a = 0.5 * (a + a.adjoint());
    b = 0.5 * (b + b.adjoint());
    const double alpha = 0.7, beta = -1.3;

    const Matrix lhs =
        decode_and_correct(code, DeviationState(Matrix(alpha * a + beta * b)), true).matrix.m;
    const Matrix rhs = alpha * decode_and_correct(code, DeviationState(Matrix(a)), true).matrix.m +
                       beta * decode_and_correct(code, DeviationState(Matrix(b)), true).matrix.m;
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("double flips leave a logical bit flip after correction") {
    // ZZI lands in the IIZ syndrome; correcting as if IIZ leaves the net
    // operator (IIZ)(ZZI) = ZZZ, the logical X, i.e. an X on the decoded data
    // wire: f_X = +1 and f_Y = f_Z = -1.
    const CodeCircuit code = CodeCircuit::standard();
    const Matrix zzi = pauli_operator(PauliString("ZZI")).m;

    const auto survival = [&](const Matrix& p) {
        DeviationState dev = data_deviation(p);
        DeviationState enc = encode(code, dev);
        enc.matrix.m = zzi * enc.matrix.m * zzi.adjoint();
        const DeviationState out = decode_and_correct(code, enc, true);
        const Matrix data = partial_trace(out.matrix.m, {2}, {2, 2, 2});
        return std::real((p.adjoint() * data).trace()) / 2.0;
    };

    CHECK(survival(pauli_x()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(survival(pauli_y()) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(survival(pauli_z()) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("syndrome intensities: clean round") {
    const CodeCircuit code = CodeCircuit::standard();
    const DeviationState enc = encode(code, data_deviation(pauli_x()));
    const DeviationState dec = decode_and_correct(code, enc, false);
    const auto s = syndrome_intensities(code, dec.matrix.m, pauli_x());
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s[3] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("syndrome intensities: coherent error splits between III and ZII") {
    const CodeCircuit code = CodeCircuit::standard();
    const double theta = kPi / 3;
    const Matrix err = expm_hermitian(Matrix(0.5 * theta * embedded_pauli('Z', 0, 3)), 1.0);

    DeviationState enc = encode(code, data_deviation(pauli_x()));
    enc.matrix.m = err * enc.matrix.m * err.adjoint();
    const DeviationState dec = decode_and_correct(code, enc, false);
    const auto s = syndrome_intensities(code, dec.matrix.m, pauli_x());
    CHECK(s[0] == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(s[1] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(s[2] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(s[3] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("syndrome intensities: dephasing weight moves to the flagged block") {
    // Kraus bookkeeping: weight 1-q stays at III, weight q lands at IZI.
    const CodeCircuit code = CodeCircuit::standard();
    const double q = 0.2;
    const Matrix z2 = embedded_pauli('Z', 1, 3);

    DeviationState enc = encode(code, data_deviation(pauli_x()));
    enc.matrix.m = (1 - q) * enc.matrix.m + q * z2 * enc.matrix.m * z2;
    const DeviationState dec = decode_and_correct(code, enc, false);
    const auto s = syndrome_intensities(code, dec.matrix.m, pauli_x());
    CHECK(s[0] == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(s[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(s[2] == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(s[3] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("syndrome intensities sum to the surviving signal for unital noise") {
    const CodeCircuit code = CodeCircuit::standard();
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        // random mixture of Z-string conjugations (unital, trace preserving)
        DeviationState enc = encode(code, data_deviation(pauli_x()));
        Matrix mixed = Matrix::Zero(8, 8);
        double wsum = 0;
        for (const char* e : {"III", "ZII", "IZI", "IIZ", "ZZI", "ZIZ", "IZZ", "ZZZ"}) {
            const double w = u(rng);
            const Matrix p = pauli_operator(PauliString(e)).m;
            mixed += w * p * enc.matrix.m * p;
            wsum += w;
        }
        mixed /= wsum;
        const DeviationState dec =
            decode_and_correct(code, DeviationState(std::move(mixed)), false);
        const auto s = syndrome_intensities(code, dec.matrix.m, pauli_x());

        // total signal = Tr[(I (x) X) rho]/2 summed over blocks
        const Matrix obs = kronecker(Matrix::Identity(4, 4), pauli_x());
        const double total = std::real((obs * dec.matrix.m).trace()) / 2.0;
        CHECK(s[0] + s[1] + s[2] + s[3] == doctest::Approx(total).epsilon(1e-10));
    }
}

TEST_CASE("ancilla relabeling with a permuted syndrome table is equivalent") {
    const CodeCircuit a = CodeCircuit::standard(false);
    const CodeCircuit b = CodeCircuit::standard(true);
    std::mt19937 rng(31);
    const Eigen::VectorXcd psi = random_qubit_state(rng);

    for (const char* e : {"ZII", "IZI", "IIZ"}) {
        const Matrix err = pauli_operator(PauliString(e)).m;
        CHECK(corrected_state_fidelity(a, psi, err, true) ==
              doctest::Approx(corrected_state_fidelity(b, psi, err, true)).epsilon(1e-12));

        DeviationState enc_a = encode(a, data_deviation(pauli_x()));
        enc_a.matrix.m = err * enc_a.matrix.m * err.adjoint();
        const auto sa =
            syndrome_intensities(a, decode_and_correct(a, enc_a, false).matrix.m, pauli_x());

        DeviationState enc_b = encode(b, data_deviation(pauli_x()));
        enc_b.matrix.m = err * enc_b.matrix.m * err.adjoint();
        const auto sb =
            syndrome_intensities(b, decode_and_correct(b, enc_b, false).matrix.m, pauli_x());

        for (int s = 0; s < 4; ++s) CHECK(sa[s] == doctest::Approx(sb[s]).epsilon(1e-12));
    }
}

}  // TEST_SUITE
