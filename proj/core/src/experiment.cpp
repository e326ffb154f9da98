#include "nmrqec/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace nmrqec {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& v, int line, const std::string& key) {
    std::size_t pos = 0;
    double d = 0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, key, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(line, key, "trailing junk after number in '" + v + "'");
    return d;
}

long to_long(const std::string& v, int line, const std::string& key) {
    std::size_t pos = 0;
    long n = 0;
    try {
        n = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, key, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(line, key, "trailing junk after integer in '" + v + "'");
    return n;
}

bool to_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError(line, key, "expected true/false, got '" + v + "'");
}

std::size_t carbon_index(const std::string& label, int line, const std::string& key) {
    if (label == "C1") return 0;
    if (label == "C2") return 1;
    if (label == "Cm") return 2;
    throw ConfigError(line, key, "unknown spin label '" + label + "' (use C1, C2, Cm)");
}

Mode mode_from_name(const std::string& name, int line, const std::string& key) {
    if (name == "unencoded") return Mode::unencoded;
    if (name == "decoded") return Mode::decoded;
    if (name == "corrected") return Mode::corrected;
    if (name == "two_rounds") return Mode::two_rounds;
    throw ConfigError(line, key, "unknown mode '" + name + "'");
}

std::vector<double> parse_delays(const std::string& value, int line) {
    const std::string key = "delays_ms";
    std::vector<double> out;
    if (value.find(':') != std::string::npos) {
        // start:step:stop, inclusive of the endpoint modulo rounding
        std::vector<std::string> parts;
        std::stringstream ss(value);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(trim(p));
        if (parts.size() != 3) throw ConfigError(line, key, "range needs start:step:stop");
        const double start = to_double(parts[0], line, key);
        const double step = to_double(parts[1], line, key);
        const double stop = to_double(parts[2], line, key);
        if (step <= 0) throw ConfigError(line, key, "range step must be positive");
        for (double t = start; t <= stop + 1e-12; t += step) out.push_back(t);
    } else {
        for (const std::string& tok : split_ws(value)) out.push_back(to_double(tok, line, key));
    }
    if (out.empty()) throw ConfigError(line, key, "no delays given");
    for (double d : out)
        if (d < 0) throw ConfigError(line, key, "delays must be non-negative");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1])
            throw ConfigError(line, key, "delays must be strictly increasing");
    return out;
}

ChannelSpec::Dispersion dispersion_from_name(const std::string& v, int line,
                                             const std::string& key) {
    if (v == "none") return ChannelSpec::Dispersion::none;
    if (v == "lorentzian") return ChannelSpec::Dispersion::lorentzian;
    if (v == "gaussian") return ChannelSpec::Dispersion::gaussian;
    throw ConfigError(line, key, "unknown dispersion '" + v + "'");
}

}  // namespace

ConfigError::ConfigError(int line_, std::string key_, const std::string& what_)
    : std::runtime_error("line " + std::to_string(line_) + ": key '" + key_ + "': " + what_),
      line(line_),
      key(std::move(key_)) {}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    enum class Section { none, system, channel, sweep, two_rounds, grape };
    Section section = Section::none;

    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(line_no, line, "malformed section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name == "system") section = Section::system;
            else if (name == "channel") section = Section::channel;
            else if (name == "sweep") section = Section::sweep;
            else if (name == "two_rounds") section = Section::two_rounds;
            else if (name == "grape") section = Section::grape;
            else throw ConfigError(line_no, name, "unknown section");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, line, "expected 'key = value'");
        const std::vector<std::string> key_tokens = split_ws(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key_tokens.empty()) throw ConfigError(line_no, line, "missing key");
        const std::string& key = key_tokens[0];

        switch (section) {
            case Section::none:
                throw ConfigError(line_no, key, "key outside of any [section]");

            case Section::system: {
                if (key == "builtin") {
                    if (value != "malonic")
                        throw ConfigError(line_no, key, "unknown builtin '" + value + "'");
                    const std::vector<BathCoupling> bath = cfg.system.bath;
                    cfg.system = malonic();
                    cfg.system.bath = bath;
                } else if (key == "shift") {
                    if (key_tokens.size() != 2)
                        throw ConfigError(line_no, key, "usage: shift <spin> = <khz>");
                    cfg.system.shifts_khz[carbon_index(key_tokens[1], line_no, key)] =
                        to_double(value, line_no, key);
                } else if (key == "dipolar" || key == "j") {
                    if (key_tokens.size() != 3)
                        throw ConfigError(line_no, key, "usage: " + key + " <spinA> <spinB> = <khz>");
                    const std::size_t i = carbon_index(key_tokens[1], line_no, key);
                    const std::size_t j = carbon_index(key_tokens[2], line_no, key);
                    if (i >= j)
                        throw ConfigError(line_no, key,
                                          "coupling table is upper-triangular; order spins C1 < C2 < Cm");
                    const std::size_t p = SpinSystem::pair_index(i, j);
                    (key == "dipolar" ? cfg.system.dipolar_khz[p] : cfg.system.j_khz[p]) =
                        to_double(value, line_no, key);
                } else if (key == "bath") {
                    if (key_tokens.size() != 2)
                        throw ConfigError(line_no, key, "usage: bath <spin> = <khz>");
                    if (cfg.system.bath.size() >= 2)
                        throw ConfigError(line_no, key, "at most two bath spins supported");
                    cfg.system.bath.push_back(
                        {carbon_index(key_tokens[1], line_no, key), to_double(value, line_no, key)});
                } else {
                    throw ConfigError(line_no, key, "unknown key in [system]");
                }
                break;
            }

            case Section::channel: {
                if (key == "kind") {
                    if (value == "identity") cfg.channel.kind = ChannelKind::identity;
                    else if (value == "coherent_z") cfg.channel.kind = ChannelKind::coherent_z;
                    else if (value == "dephasing") cfg.channel.kind = ChannelKind::dephasing;
                    else if (value == "natural_evolution")
                        cfg.channel.kind = ChannelKind::natural_evolution;
                    else throw ConfigError(line_no, key, "unknown channel kind '" + value + "'");
                } else if (key == "theta_rad") {
                    cfg.channel.theta_rad = to_double(value, line_no, key);
                } else if (key == "flip_probability") {
                    const double q = to_double(value, line_no, key);
                    if (q < 0 || q > 1)
                        throw ConfigError(line_no, key, "flip probability must be in [0, 1]");
                    cfg.channel.flip_probability = q;
                } else if (key == "qubit") {
                    cfg.channel.qubit = carbon_index(value, line_no, key);
                } else if (key == "decoupling_scale") {
                    const double l = to_double(value, line_no, key);
                    if (l < 0 || l > 1)
                        throw ConfigError(line_no, key, "decoupling scale must be in [0, 1]");
                    cfg.channel.decoupling_scale = l;
                } else if (key == "dispersion") {
                    cfg.channel.dispersion = dispersion_from_name(value, line_no, key);
                } else if (key == "width_khz") {
                    const double w = to_double(value, line_no, key);
                    if (w <= 0) throw ConfigError(line_no, key, "width must be positive");
                    cfg.channel.width_khz = w;
                } else if (key == "t2star_ms") {
                    const double t = to_double(value, line_no, key);
                    if (t <= 0) throw ConfigError(line_no, key, "t2star must be positive");
                    cfg.channel.t2star_ms = t;
                } else if (key == "n_samples") {
                    const long n = to_long(value, line_no, key);
                    if (n < 1) throw ConfigError(line_no, key, "n_samples must be >= 1");
                    cfg.channel.n_samples = static_cast<int>(n);
                } else {
                    throw ConfigError(line_no, key, "unknown key in [channel]");
                }
                break;
            }

            case Section::sweep: {
                if (key == "modes") {
                    cfg.modes.clear();
                    std::stringstream ss(value);
                    std::string tok;
                    while (std::getline(ss, tok, ',')) {
                        tok = trim(tok);
                        if (!tok.empty()) cfg.modes.push_back(mode_from_name(tok, line_no, key));
                    }
                    if (cfg.modes.empty()) throw ConfigError(line_no, key, "mode list is empty");
                } else if (key == "delays_ms") {
                    cfg.delays_ms = parse_delays(value, line_no);
                } else if (key == "out") {
                    cfg.out_path = value;
                } else {
                    throw ConfigError(line_no, key, "unknown key in [sweep]");
                }
                break;
            }

            case Section::two_rounds: {
                if (key == "ideal_ancillae") {
                    cfg.ideal_ancillae = to_bool(value, line_no, key);
                } else if (key == "gate_error") {
                    const double e = to_double(value, line_no, key);
                    if (e < 0 || e >= 1)
                        throw ConfigError(line_no, key, "gate error must be in [0, 1)");
                    cfg.gate_error = e;
                } else {
                    throw ConfigError(line_no, key, "unknown key in [two_rounds]");
                }
                break;
            }

            case Section::grape: {
                GrapeSpec& g = cfg.grape;
                if (key == "target") {
                    if (value != "encode" && value != "identity")
                        throw ConfigError(line_no, key, "target must be encode or identity");
                    g.target = value;
                } else if (key == "n_slices") {
                    const long n = to_long(value, line_no, key);
                    if (n < 1) throw ConfigError(line_no, key, "n_slices must be >= 1");
                    g.n_slices = static_cast<std::size_t>(n);
                } else if (key == "dt_ms") {
                    const double d = to_double(value, line_no, key);
                    if (d <= 0) throw ConfigError(line_no, key, "dt must be positive");
                    g.dt_ms = d;
                } else if (key == "max_iterations") {
                    g.max_iterations = static_cast<int>(to_long(value, line_no, key));
                } else if (key == "tolerance") {
                    g.tolerance = to_double(value, line_no, key);
                } else if (key == "initial_step_khz") {
                    g.initial_step_khz = to_double(value, line_no, key);
                } else if (key == "target_fidelity") {
                    g.target_fidelity = to_double(value, line_no, key);
                } else if (key == "time_limit_s") {
                    g.time_limit_s = to_double(value, line_no, key);
                } else if (key == "initial_amplitude_khz") {
                    g.initial_amplitude_khz = to_double(value, line_no, key);
                } else if (key == "smooth_modes") {
                    const long sm = to_long(value, line_no, key);
                    if (sm < 0) throw ConfigError(line_no, key, "smooth_modes must be >= 0");
                    g.smooth_modes = static_cast<int>(sm);
                } else if (key == "rf_scales") {
                    g.rf_scales.clear();
                    for (const std::string& tok : split_ws(value)) {
                        const double rf = to_double(tok, line_no, key);
                        if (rf <= 0) throw ConfigError(line_no, key, "rf scales must be positive");
                        g.rf_scales.push_back(rf);
                    }
                    if (g.rf_scales.empty()) throw ConfigError(line_no, key, "no rf scales given");
                } else if (key == "n_offsets") {
                    const long n = to_long(value, line_no, key);
                    if (n < 1) throw ConfigError(line_no, key, "n_offsets must be >= 1");
                    g.n_offsets = static_cast<int>(n);
                } else if (key == "offset_dispersion") {
                    const auto d = dispersion_from_name(value, line_no, key);
                    if (d == ChannelSpec::Dispersion::none)
                        throw ConfigError(line_no, key, "offset dispersion must be lorentzian or gaussian");
                    g.offset_dispersion = d;
                } else if (key == "offset_width_khz") {
                    g.offset_width_khz = to_double(value, line_no, key);
                } else if (key == "offset_t2star_ms") {
                    g.offset_t2star_ms = to_double(value, line_no, key);
                } else if (key == "out") {
                    g.out_path = value;
                } else {
                    throw ConfigError(line_no, key, "unknown key in [grape]");
                }
                break;
            }
        }
    }

    if (cfg.channel.dispersion != ChannelSpec::Dispersion::none &&
        cfg.channel.kind != ChannelKind::natural_evolution)
        throw ConfigError(0, "dispersion", "dispersion averaging requires kind = natural_evolution");

    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::unencoded: return "unencoded";
        case Mode::decoded: return "decoded";
        case Mode::corrected: return "corrected";
        case Mode::two_rounds: return "two_rounds";
    }
    return "?";
}

NoiseChannel make_channel(const ExperimentConfig& cfg, double delay_ms) {
    const ChannelSpec& ch = cfg.channel;
    switch (ch.kind) {
        case ChannelKind::identity:
            return NoiseChannel::identity();
        case ChannelKind::coherent_z:
            return coherent_z(ch.theta_rad, ch.qubit);
        case ChannelKind::dephasing:
            return ch.flip_probability >= 0
                       ? dephasing_probability(ch.flip_probability, ch.qubit)
                       : dephasing(ch.theta_rad, ch.qubit);
        case ChannelKind::natural_evolution: {
            NoiseChannel base = natural_evolution(cfg.system, delay_ms, ch.decoupling_scale);
            if (ch.dispersion == ChannelSpec::Dispersion::none) return base;
            double width = ch.width_khz;
            if (width <= 0) {
                if (ch.t2star_ms <= 0)
                    throw std::invalid_argument(
                        "dispersion needs width_khz or t2star_ms in [channel]");
                width = ch.dispersion == ChannelSpec::Dispersion::lorentzian
                            ? lorentzian_width_for_t2star(ch.t2star_ms)
                            : gaussian_width_for_t2star(ch.t2star_ms);
            }
            const DispersionModel model =
                ch.dispersion == ChannelSpec::Dispersion::lorentzian
                    ? DispersionModel::lorentzian(width, ch.n_samples)
                    : DispersionModel::gaussian(width, ch.n_samples);
            return dispersion_average(base, model);
        }
        case ChannelKind::composed:
            break;
    }
    throw std::invalid_argument("make_channel: unsupported channel kind");
}

namespace {

SweepRow evaluate_point(const ExperimentConfig& cfg, double delay, Mode mode) {
    SweepRow row;
    row.delay_ms = delay;
    row.mode = mode;

    RoundResult res;
    if (mode == Mode::two_rounds) {
        const NoiseChannel half = make_channel(cfg, delay / 2);
        TwoRoundConfig trc;
        trc.half_channel = &half;
        trc.ideal_ancillae = cfg.ideal_ancillae;
        trc.gate_error = cfg.gate_error;
        res = run_two_rounds(trc);
    } else {
        const NoiseChannel channel = make_channel(cfg, delay);
        RoundConfig rc;
        rc.mode = mode;
        rc.channel = &channel;
        rc.gate_error = cfg.gate_error;
        res = run_one_round(rc);
    }

    row.f_x = res.f_x;
    row.f_y = res.f_y;
    row.f_z = res.f_z;
    row.F_e = res.entanglement_fidelity;
    row.has_syndromes = res.has_syndromes;
    if (res.has_syndromes)
        for (int s = 0; s < 4; ++s)
            row.syndromes[s] =
                (res.syndromes[0][s] + res.syndromes[1][s] + res.syndromes[2][s]) / 3.0;
    return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int threads) {
    if (cfg.modes.empty()) throw std::invalid_argument("run_sweep: mode list is empty");
    if (cfg.delays_ms.empty()) throw std::invalid_argument("run_sweep: no delays configured");

    const std::size_t n_jobs = cfg.delays_ms.size() * cfg.modes.size();
    std::vector<SweepRow> rows(n_jobs);

    const auto job = [&](std::size_t idx) {
        const std::size_t di = idx / cfg.modes.size();
        const std::size_t mi = idx % cfg.modes.size();
        rows[idx] = evaluate_point(cfg, cfg.delays_ms[di], cfg.modes[mi]);
    };

    if (threads <= 1 || n_jobs <= 1) {
        for (std::size_t i = 0; i < n_jobs; ++i) job(i);
    } else {
        const std::size_t n_threads = std::min<std::size_t>(threads, n_jobs);
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < n_jobs; i += n_threads) job(i);
            });
        for (std::thread& th : pool) th.join();
    }
    return rows;
}

namespace {
std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}
}  // namespace

std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "delay_ms,mode,f_x,f_y,f_z,F_e,s00,s10,s01,s11\n";
    for (const SweepRow& r : rows) {
        out += fmt6(r.delay_ms);
        out += ',';
        out += mode_name(r.mode);
        for (double v : {r.f_x, r.f_y, r.f_z, r.F_e}) {
            out += ',';
            out += fmt6(v);
        }
        for (int s = 0; s < 4; ++s) {
            out += ',';
            if (r.has_syndromes) out += fmt6(r.syndromes[s]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << to_csv(rows);
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SweepRow> parse_csv(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw std::runtime_error("parse_csv: empty input");
    std::vector<SweepRow> rows;
    while (std::getline(ss, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        while (fields.size() < 10) fields.push_back("");
        SweepRow r;
        r.delay_ms = std::stod(fields[0]);
        bool found = false;
        for (Mode m : {Mode::unencoded, Mode::decoded, Mode::corrected, Mode::two_rounds})
            if (mode_name(m) == fields[1]) {
                r.mode = m;
                found = true;
            }
        if (!found) throw std::runtime_error("parse_csv: unknown mode " + fields[1]);
        r.f_x = std::stod(fields[2]);
        r.f_y = std::stod(fields[3]);
        r.f_z = std::stod(fields[4]);
        r.F_e = std::stod(fields[5]);
        r.has_syndromes = !trim(fields[6]).empty();
        if (r.has_syndromes)
            for (int s = 0; s < 4; ++s) r.syndromes[s] = std::stod(fields[6 + s]);
        rows.push_back(r);
    }
    return rows;
}

QuadraticFit fit_quadratic(const std::vector<SweepRow>& rows, Mode mode) {
    std::vector<double> tau, fe;
    for (const SweepRow& r : rows)
        if (r.mode == mode) {
            tau.push_back(r.delay_ms);
            fe.push_back(r.F_e);
        }
    if (tau.size() < 3)
        throw std::invalid_argument("fit_quadratic: need at least 3 rows for mode " +
                                    mode_name(mode));

    Eigen::MatrixXd a(tau.size(), 3);
    Eigen::VectorXd b(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = tau[i];
        a(i, 2) = tau[i] * tau[i];
        b(i) = fe[i];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd resid = a * c - b;

    QuadraticFit fit;
    fit.c0 = c(0);
    fit.c1 = c(1);
    fit.c2 = c(2);
    fit.rms_residual = std::sqrt(resid.squaredNorm() / resid.size());
    return fit;
}

Matrix grape_target(const ExperimentConfig& cfg) {
    if (cfg.grape.target == "identity") return Matrix::Identity(8, 8);
    return CodeCircuit::standard().u_encode.m;
}

RobustnessEnsemble grape_ensemble(const ExperimentConfig& cfg) {
    const GrapeSpec& g = cfg.grape;
    double width = g.offset_width_khz;
    if (width <= 0)
        width = g.offset_dispersion == ChannelSpec::Dispersion::lorentzian
                    ? lorentzian_width_for_t2star(g.offset_t2star_ms)
                    : gaussian_width_for_t2star(g.offset_t2star_ms);
    const DispersionModel model = g.offset_dispersion == ChannelSpec::Dispersion::lorentzian
                                      ? DispersionModel::lorentzian(width, g.n_offsets)
                                      : DispersionModel::gaussian(width, g.n_offsets);
    return RobustnessEnsemble::grid(model, g.rf_scales);
}

PulseDesignResult design_pulse(const ExperimentConfig& cfg) {
    const GrapeSpec& g = cfg.grape;
    const Matrix target = grape_target(cfg);
    const RobustnessEnsemble ensemble = grape_ensemble(cfg);
    const ControlSystem csys = ControlSystem::from_spin_system(cfg.system);

    OptimizeSettings settings;
    settings.max_iterations = g.max_iterations;
    settings.tolerance = g.tolerance;
    settings.initial_step_khz = g.initial_step_khz;
    settings.target_fidelity = g.target_fidelity;
    settings.time_limit_s = g.time_limit_s;
    settings.smooth_modes = g.smooth_modes;

    const auto clock_start = std::chrono::steady_clock::now();
    const auto spent = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start)
            .count();
    };
    const auto remaining = [&] {
        return g.time_limit_s > 0 ? std::max(g.time_limit_s - spent(), 1.0) : 0.0;
    };

    // Multiresolution ladder: the same piecewise-constant waveform costs
    // proportionally less per iteration at coarser slicing, and splitting
    // slices preserves the propagator exactly, so early rungs do the bulk of
    // the climb cheaply and the final rung only polishes.
    std::vector<std::size_t> ladder{g.n_slices};
    while (ladder.back() % 2 == 0 && ladder.back() >= 250) ladder.push_back(ladder.back() / 2);
    std::reverse(ladder.begin(), ladder.end());

    GrapeSpec coarse = g;
    coarse.n_slices = ladder.front();
    coarse.dt_ms = g.dt_ms * static_cast<double>(g.n_slices) / ladder.front();
    ControlPulse pulse = grape_initial_pulse(coarse);

    PulseDesignResult out;
    std::vector<double> trace;
    for (std::size_t level = 0; level < ladder.size(); ++level) {
        const bool last = level + 1 == ladder.size();
        OptimizeSettings stage = settings;
        if (g.time_limit_s > 0)
            stage.time_limit_s = last ? remaining() : 0.5 * remaining();
        out.result = optimize(pulse, csys, target, ensemble, stage);
        trace.insert(trace.end(), out.result.fidelity_trace.begin(),
                     out.result.fidelity_trace.end());
        pulse = out.result.pulse;
        if (level == 0) out.coarse_fidelity = out.result.best_fidelity;
        if (!last)
            pulse = upsample(pulse, ladder[level + 1] / ladder[level]);
        else if (out.result.best_fidelity < g.target_fidelity && g.smooth_modes > 0 &&
                 out.result.status != OptimizeStatus::time_limit) {
            // raw-slice polish with whatever budget remains
            OptimizeSettings polish = stage;
            polish.smooth_modes = 0;
            if (g.time_limit_s > 0) polish.time_limit_s = remaining();
            const OptimizeResult refined = optimize(pulse, csys, target, ensemble, polish);
            if (refined.best_fidelity > out.result.best_fidelity) out.result = refined;
            trace.insert(trace.end(), out.result.fidelity_trace.begin(),
                         out.result.fidelity_trace.end());
        }
    }
    out.result.pulse = upsample(out.result.pulse,
                                g.n_slices / out.result.pulse.n_slices());
    out.result.fidelity_trace = std::move(trace);
    return out;
}

ControlPulse grape_initial_pulse(const GrapeSpec& spec) {
    // Fixed band-limited seed: smooth, deterministic, no symmetry with the
    // drift that would strand the ascent at a stationary point.
    ControlPulse pulse = ControlPulse::zeros(spec.n_slices, spec.dt_ms);
    const double a = spec.initial_amplitude_khz;
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k = 0; k < spec.n_slices; ++k) {
        const double t = (k + 0.5) / static_cast<double>(spec.n_slices);
        pulse.amplitudes_khz[k][0] =
            a * (0.8 * std::sin(two_pi * 2 * t + 0.9) + 0.5 * std::sin(two_pi * 5 * t + 2.1) +
                 0.3 * std::sin(two_pi * 11 * t + 4.2));
        pulse.amplitudes_khz[k][1] =
            a * (0.8 * std::cos(two_pi * 3 * t + 1.7) + 0.5 * std::sin(two_pi * 7 * t + 0.3) +
                 0.3 * std::cos(two_pi * 13 * t + 3.8));
    }
    return pulse;
}

}  // namespace nmrqec
